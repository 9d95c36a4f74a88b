"""Classical laboratory for insertion-code TSP waves.

Insertion-code permutation encoding, the uniform and alpha-tilted wave over
all codes, the Gaussian-tilt sampling solver, the probabilistic range oracle
and the oracle-driven range search, with exact baselines to check them.
"""

from .errors import QTSPError
from .geometry import EuclideanInstance, NormalizedInstance, generate, normalize, tour_length
from .kernels import BACKEND
from .permcode import decode, encode, rank, unrank

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EuclideanInstance",
    "NormalizedInstance",
    "QTSPError",
    "decode",
    "encode",
    "generate",
    "normalize",
    "rank",
    "tour_length",
    "unrank",
]
