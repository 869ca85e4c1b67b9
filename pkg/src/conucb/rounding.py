"""Dependent rounding of a fractional selection vector to an L-subset."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .core import as_policy_vector


def dependent_rounding(x, rng: np.random.Generator, L: int | None = None) -> tuple[int, ...]:
    """Round a probabilistic selection vector to exactly ``L`` arm indices.

    Each arm ``i`` ends up in the result with probability ``x[i]``. The
    vector is repaired pairwise: the two lowest-indexed fractional
    coordinates move mass between them until one hits 0 or 1, so at most
    ``K`` random draws are consumed.

    Raises ``ValueError`` when ``x`` is not a valid policy vector.
    """
    x = as_policy_vector(x, L)
    L = int(round(x.sum()))
    work = x.copy()
    out = np.empty(L, dtype=np.int64)
    m = _kernels.dependent_round(work, rng, out)
    if m != L:
        raise RuntimeError(f"rounding produced {m} arms instead of {L}")
    return tuple(int(i) for i in out)
