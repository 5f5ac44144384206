"""CSV emission and the flat key-value config file."""

from __future__ import annotations

import configparser
import contextlib
import csv
import os
import sys
from dataclasses import astuple
from typing import Iterable, Sequence

from .campaign import RoundRecord

RECORD_COLUMNS = ("run", "round", "policy", "influencers", "spread_size",
                  "new_activations", "cumulative")


def _open(path):
    if str(path) == "-":
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", newline="")


def emit_csv(records: Iterable[RoundRecord], path: str | os.PathLike) -> None:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow([r.run, r.round, r.policy, "+".join(map(str, r.influencers)),
                        r.spread_size, r.new_activations, r.cumulative])


def read_records(path: str | os.PathLike) -> list[RoundRecord]:
    with open(path, newline="") as fh:
        rows = csv.DictReader(fh)
        if tuple(rows.fieldnames or ()) != RECORD_COLUMNS:
            raise ValueError(f"{path}: unexpected header {rows.fieldnames}")
        return [RoundRecord(int(r["run"]), int(r["round"]), r["policy"],
                            tuple(int(x) for x in r["influencers"].split("+") if x),
                            int(r["spread_size"]), int(r["new_activations"]), int(r["cumulative"]))
                for r in rows]


def write_table(rows: Iterable[Sequence], columns: Sequence[str], path: str | os.PathLike) -> None:
    """Generic CSV; floats are written with ``repr`` so files are reproducible bit-for-bit."""
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_dataclasses(items, columns: Sequence[str], path: str | os.PathLike) -> None:
    write_table((astuple(x) for x in items), columns, path)


def load_config(path: str | os.PathLike) -> dict[str, str]:
    """Read ``key = value`` lines (``#`` comments) into a dict of strings.

    Keys may use dashes or underscores; they are normalised to underscores.
    """
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    with open(path) as fh:
        parser.read_string("[config]\n" + fh.read(), source=str(path))
    return {k.replace("-", "_"): v for k, v in parser["config"].items()}
