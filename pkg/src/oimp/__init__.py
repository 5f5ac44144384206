"""Online influencer marketing with persistence.

Good-Turing UCB policies (GT-UCB, Fat-GT-UCB), diffusion environments,
influencer extraction and a reproducible experiment harness.
"""

__version__ = "0.1.0"
