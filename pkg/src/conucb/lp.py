"""The per-round selection LP: maximise x.g subject to x.a >= h over the simplex-box."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible"
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _vectors(g_hat, a_hat):
    g = np.ascontiguousarray(g_hat, dtype=float)
    a = np.ascontiguousarray(a_hat, dtype=float)
    if g.shape != a.shape or g.ndim != 1:
        raise ValueError(f"g_hat and a_hat must be 1-d of equal length, got {g.shape} and {a.shape}")
    return g, a


def _check_L(L, K):
    if not (1 <= L <= K):
        raise ValueError(f"need 1 <= L <= K, got L={L}, K={K}")


def feasible(a_hat, L: int, h: float) -> bool:
    """True iff the L largest entries of ``a_hat`` sum to at least ``h``."""
    a = np.asarray(a_hat, dtype=float)
    _check_L(L, a.size)
    return bool(_kernels.top_l_sum(a, int(L)) >= h)


def solve_constrained_selection(g_hat, a_hat, L: int, h: float) -> LpResult:
    """Exact solution of ``max x.g_hat`` s.t. ``x.a_hat >= h``, ``0 <= x <= 1``, ``sum(x) = L``.

    The returned vertex has at most two fractional coordinates. When the
    top-L arms by ``g_hat`` (ties to the lower index) already meet the
    threshold, that integral vector is returned as is.
    """
    g, a = _vectors(g_hat, a_hat)
    _check_L(L, g.size)
    x = np.empty_like(g)
    status, obj = _kernels.solve_lp(g, a, int(L), float(h), x)
    if status == _kernels.INFEASIBLE:
        return LpResult("infeasible")
    return LpResult("optimal", x, float(obj))


def fallback_vector(a_hat, L: int) -> np.ndarray:
    """Indicator of the top-L arms by ``a_hat``; used when the LP is infeasible."""
    a = np.ascontiguousarray(a_hat, dtype=float)
    _check_L(L, a.size)
    x = np.empty_like(a)
    _kernels.fallback(a, int(L), x)
    return x
