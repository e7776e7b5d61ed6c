"""Hot kernels: compiled (Cython) when available, pure Python otherwise.

``BACKEND`` names the implementation selected at import.
"""

try:
    from ._ckernels import (  # noqa: F401
        hash_ints,
        mix64,
        nw_score,
        splitmix64_next,
        xoshiro_fill_uniform,
        xoshiro_next,
    )

    BACKEND = "cython"
except ImportError:
    from ._pykernels import (  # noqa: F401
        hash_ints,
        mix64,
        nw_score,
        splitmix64_next,
        xoshiro_fill_uniform,
        xoshiro_next,
    )

    BACKEND = "python"

__all__ = [
    "BACKEND",
    "hash_ints",
    "mix64",
    "nw_score",
    "splitmix64_next",
    "xoshiro_fill_uniform",
    "xoshiro_next",
]
