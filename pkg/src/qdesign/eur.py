"""Index of coincidence, Rényi entropies and entropic lower bounds.

Boundary distributions
----------------------
For a fixed a-th order index of coincidence ``c`` two one-parameter families
bound the Rényi entropy of every distribution with that IC:

* ``P_x``: ``(p, p_s, ..., p_s)`` of length L, one large entry;
* ``P_y``: ``(p, ..., p, p_s, 0, ..., 0)`` with ``L'`` nonzero entries.

Which family gives the upper and which the lower bound flips at ``alpha = a``.
All logarithms are natural.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .designs import DsmSet, design_constant
from .qcore import as_distribution, born_probabilities, f_t, make_rng

BISECT_TOL = 1e-13
C_CLAMP_TOL = 1e-12
SNAP_TOL = 1e-9


class StrengthWarning(UserWarning):
    """IC order exceeds the design strength, so the design identity may fail."""


def _is_inf(alpha) -> bool:
    return alpha == math.inf


def renyi_entropy(P, alpha: float) -> float:
    """Rényi entropy; Shannon at ``alpha == 1``, min-entropy at ``inf``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    p = np.asarray(P, dtype=float)
    p = p[p > 0]
    if _is_inf(alpha):
        return float(-np.log(p.max()))
    if alpha == 1:
        return float(-np.sum(p * np.log(p)))
    pmax = p.max()
    # factor out the largest entry so huge alpha does not underflow
    log_sum = alpha * np.log(pmax) + np.log(np.sum((p / pmax) ** alpha))
    return float(log_sum / (1 - alpha))


def index_coincidence(P, a: int) -> float:
    if a < 2:
        raise ValueError("IC order must be at least 2")
    return float(np.sum(np.asarray(P, dtype=float) ** a))


def _bisect_increasing(func, lo, hi, target, tol=BISECT_TOL):
    """Elementwise root of ``func(x) = target`` for increasing ``func`` on [lo, hi]."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    target = np.broadcast_to(np.asarray(target, dtype=float), lo.shape)
    while np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        below = func(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _checked_c(L, a, c):
    c = np.asarray(c, dtype=float)
    lo = float(L) ** (1 - a)
    if np.any(c < lo - C_CLAMP_TOL) or np.any(c > 1 + C_CLAMP_TOL):
        raise ValueError(f"c_a must lie in [{lo:.6g}, 1] for L={L}, a={a}")
    return np.clip(c, lo, 1.0)


def _maybe_scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def solve_px(L: int, a: int, c_a):
    """``(p, p_s)`` with ``p^a + (L-1) p_s^a = c_a`` and ``p_s = (1-p)/(L-1)``."""
    if L < 2 or a < 2:
        raise ValueError("need L >= 2 and a >= 2")
    c = _checked_c(L, a, c_a)
    lo = np.full(c.shape, 1.0 / L)
    hi = np.ones(c.shape)

    def ic(p):
        return p**a + (L - 1) * ((1 - p) / (L - 1)) ** a

    p = _bisect_increasing(ic, lo, hi, c)
    p = np.where(c <= float(L) ** (1 - a), 1.0 / L, p)
    p = np.where(c >= 1.0, 1.0, p)
    ps = (1 - p) / (L - 1)
    return _maybe_scalar(p), _maybe_scalar(ps)


def dist_px(L: int, a: int, c_a: float) -> np.ndarray:
    p, ps = solve_px(L, a, c_a)
    return np.array([p] + [ps] * (L - 1))


def _support_size(a, c):
    x = c ** (1.0 / (1 - a))
    nearest = np.rint(x)
    return np.where(np.abs(x - nearest) <= SNAP_TOL, nearest, np.ceil(x)).astype(int)


def solve_py(a: int, c_a):
    """``(L', p, p_s)`` for the several-equal-plus-remainder family."""
    if a < 2:
        raise ValueError("need a >= 2")
    c = np.asarray(c_a, dtype=float)
    if np.any(c <= 0) or np.any(c > 1 + C_CLAMP_TOL):
        raise ValueError("c_a must lie in (0, 1]")
    c = np.minimum(c, 1.0)
    Lp = np.maximum(_support_size(a, c), 1)
    m = np.maximum(Lp - 1, 1)
    lo = 1.0 / Lp
    hi = 1.0 / m

    def ic(p):
        return (Lp - 1) * p**a + np.clip(1 - (Lp - 1) * p, 0, None) ** a

    p = _bisect_increasing(ic, lo, hi, c)
    uniform = np.isclose(c, Lp.astype(float) ** (1 - a), rtol=0, atol=1e-15) | (Lp == 1)
    p = np.where(uniform, 1.0 / Lp, p)
    ps = np.clip(1 - (Lp - 1) * p, 0.0, None)
    if np.ndim(c_a) == 0:
        return int(Lp), float(p), float(ps)
    return Lp, p, ps


def dist_py(a: int, c_a: float) -> np.ndarray:
    Lp, p, ps = solve_py(a, c_a)
    probs = np.array([p] * (Lp - 1) + [ps])
    return probs[probs > 0]


def _entropy_two_level(n_big, p, n_small, ps, alpha):
    """Rényi entropy of ``n_big`` copies of ``p`` and ``n_small`` of ``p_s``."""
    p = np.asarray(p, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if alpha == 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            h = -n_big * np.where(p > 0, p * np.log(p), 0.0) - n_small * np.where(ps > 0, ps * np.log(ps), 0.0)
        return h
    if _is_inf(alpha):
        return -np.log(np.maximum(p, ps))
    top = np.maximum(p, ps)
    with np.errstate(divide="ignore", invalid="ignore"):
        rest = n_big * (p / top) ** alpha + n_small * np.where(ps > 0, (ps / top) ** alpha, 0.0)
    return (alpha * np.log(top) + np.log(rest)) / (1 - alpha)


def entropy_px(L, a, c_a, alpha):
    p, ps = solve_px(L, a, c_a)
    return _maybe_scalar(_entropy_two_level(1, p, L - 1, ps, alpha))


def entropy_py(a, c_a, alpha):
    Lp, p, ps = solve_py(a, c_a)
    return _maybe_scalar(_entropy_two_level(np.asarray(Lp) - 1, p, 1, ps, alpha))


@dataclass(frozen=True)
class EntropyRange:
    lower: float
    upper: float


def theorem1_bounds(L: int, a: int, c_a, alpha: float) -> EntropyRange:
    """Range of ``H_alpha`` over length-L distributions with ``I_a = c_a``.

    For ``alpha <= a`` the ``P_x`` family is the upper edge and ``P_y`` the
    lower; for ``alpha >= a`` they swap.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    _checked_c(L, a, c_a)
    hx = entropy_px(L, a, c_a, alpha)
    hy = entropy_py(a, c_a, alpha)
    if alpha <= a:
        return EntropyRange(lower=hy, upper=hx)
    return EntropyRange(lower=hx, upper=hy)


def _require_alpha_ge_a(a, alpha):
    if alpha == 1:
        raise ValueError("bound is unsupported at alpha = 1")
    if alpha < a:
        raise ValueError(f"bound needs alpha >= a, got alpha={alpha}, a={a}")


def q_alpha(L: int, a: int, c_a, alpha: float):
    """Convex lower estimate of ``H_alpha(P_x)`` valid for ``alpha >= a``."""
    _require_alpha_ge_a(a, alpha)
    p, ps = solve_px(L, a, c_a)
    p = np.asarray(p)
    ps = np.asarray(ps)
    if _is_inf(alpha):
        return _maybe_scalar(-np.log(p))
    s = (L - 1) ** (a / alpha)
    val = (alpha * np.log(p) + math.log(L) / math.log1p(s) * np.log1p(s * (ps / p) ** a)) / (1 - alpha)
    return _maybe_scalar(val)


def bound_ket(L: int, a: int, c_a, alpha: float):
    _require_alpha_ge_a(a, alpha)
    c = _checked_c(L, a, c_a)
    if _is_inf(alpha):
        return _maybe_scalar(-np.log(c) / a)
    return _maybe_scalar(alpha / (a * (1 - alpha)) * np.log(c))


def bound_ras(L: int, a: int, c_a, alpha: float):
    _require_alpha_ge_a(a, alpha)
    c = _checked_c(L, a, c_a)
    p, _ = solve_px(L, a, c)
    if _is_inf(alpha):
        return _maybe_scalar(-np.log(p))
    return _maybe_scalar(((alpha - a) * np.log(p) + np.log(c)) / (1 - alpha))


def design_ic_bound(L: int, d: int, a: int) -> float:
    """Pure-state value of the average a-th order IC of a design POVM set."""
    if a < 2 or d < 2 or L < 2:
        raise ValueError("need a >= 2, d >= 2, L >= 2")
    return float(L) ** (1 - a) * d**a * design_constant(d, a)


def average_ic_from_state(dsm: DsmSet, rho, a: int) -> float:
    """Average over the POVMs of ``I_a`` of the measured statistics."""
    if a > dsm.strength:
        warnings.warn(
            f"IC order {a} exceeds design strength {dsm.strength}; the design identity is not guaranteed",
            StrengthWarning,
            stacklevel=2,
        )
    return float(np.mean([index_coincidence(born_probabilities(p, rho), a) for p in dsm.povms]))


def predicted_average_ic(dsm: DsmSet, rho, a: int) -> float:
    """``L^{1-a} d^a D_d^(a) F_a(rho)``."""
    return design_ic_bound(dsm.outcomes_per_povm, dsm.dim, a) * f_t(rho, a)


@dataclass(frozen=True)
class BoundParams:
    L: int
    a: int
    alpha: float
    c_a: float

    def __post_init__(self):
        if self.L < 2 or self.a < 2:
            raise ValueError("need L >= 2 and a >= 2")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        lo = float(self.L) ** (1 - self.a)
        if not lo - C_CLAMP_TOL <= self.c_a <= 1 + C_CLAMP_TOL:
            raise ValueError(f"c_a={self.c_a} outside [{lo:.6g}, 1]")


@dataclass(frozen=True)
class BoundReport:
    params: BoundParams
    q1: float
    q2: float | None
    q_ras: float | None
    q_ket: float | None
    p: float
    p_s: float
    L_prime: int
    ordered: bool | None = field(default=None)


ORDER_TOL = 1e-10


def compare_bounds(params: BoundParams) -> BoundReport:
    """All four lower bounds at one parameter point.

    The previous-work bounds and ``q2`` exist only for ``alpha >= a``; below
    that they are reported as ``None``.
    """
    L, a, alpha, c = params.L, params.a, params.alpha, params.c_a
    q1 = theorem1_bounds(L, a, c, alpha).lower
    p, ps = solve_px(L, a, c)
    Lp, _, _ = solve_py(a, c)
    if alpha < a or alpha == 1:
        return BoundReport(params, q1, None, None, None, p, ps, Lp)
    q2 = q_alpha(L, a, c, alpha)
    qr = bound_ras(L, a, c, alpha)
    qk = bound_ket(L, a, c, alpha)
    ordered = q1 >= q2 - ORDER_TOL and q2 >= qr - ORDER_TOL and qr >= qk - ORDER_TOL
    return BoundReport(params, q1, q2, qr, qk, p, ps, Lp, ordered)


@dataclass(frozen=True)
class IcoBest:
    alpha: float
    a_star: int
    value: float
    candidates: dict


def ico_best_bound(alpha: float) -> IcoBest:
    """Best ``q2`` for the six two-outcome icosahedron POVMs over admissible a."""
    if alpha < 2:
        raise ValueError("alpha must be at least 2")
    candidates = {a: q_alpha(2, a, 2 / (a + 1), alpha) for a in range(2, 6) if a <= alpha}
    best = max(candidates, key=lambda a: (candidates[a], -a))
    return IcoBest(alpha, best, candidates[best], candidates)


@dataclass
class DiagramData:
    L: int
    a: int
    alphas: tuple
    sample_ic: np.ndarray
    sample_entropy: dict
    curve_c: np.ndarray
    upper: dict
    lower: dict


def info_diagram_samples(L: int, a: int, alphas, n_samples: int, seed: int, resolution: int = 512) -> DiagramData:
    """Dirichlet samples in the (I_a, H_alpha) plane with both boundary curves."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = make_rng(seed)
    probs = rng.dirichlet(np.ones(L), size=n_samples)
    ic = np.sum(probs**a, axis=1)
    entropies = {alpha: np.array([renyi_entropy(p, alpha) for p in probs]) for alpha in alphas}
    grid = np.linspace(float(L) ** (1 - a), 1.0, resolution)
    upper, lower = {}, {}
    for alpha in alphas:
        edges = theorem1_bounds(L, a, grid, alpha)
        upper[alpha], lower[alpha] = np.asarray(edges.upper), np.asarray(edges.lower)
    return DiagramData(L, a, tuple(alphas), ic, entropies, grid, upper, lower)


def diagram_point(P, a: int, alpha: float) -> tuple[float, float]:
    P = as_distribution(P)
    return index_coincidence(P, a), renyi_entropy(P, alpha)
