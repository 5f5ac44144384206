"""Campaign runner, experiments, synthetic generators, CSV output and CLI."""
