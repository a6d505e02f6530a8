"""Numerical t-design construction by frame-potential descent."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .designs import QuantumDesign, frame_potential, welch_bound
from .qcore import haar_ket, make_rng

# The gap is quadratic in the moment residual, so a run that just meets a
# loose tol can still fail certification; descent continues toward this.
POLISH_GAP = 1e-20


@dataclass(frozen=True)
class SearchConfig:
    d: int
    K: int
    t: int
    seed: int = 0
    max_iters: int = 100_000
    tol: float = 1e-9
    restarts: int = 8

    def __post_init__(self):
        if min(self.d, self.K, self.t, self.max_iters, self.restarts) < 1:
            raise ValueError("d, K, t, max_iters and restarts must be positive")
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class SearchResult:
    design: QuantumDesign
    residual: float
    iterations: int
    converged: bool
    restart: int


def potential_and_gradient(vectors: np.ndarray, t: int) -> tuple[float, np.ndarray]:
    """Frame potential and its gradient with respect to the conjugate vectors."""
    gram = vectors.conj() @ vectors.T
    overlap = np.abs(gram) ** 2
    phi = float(np.sum(overlap**t))
    weights = overlap ** (t - 1) * gram.conj()
    return phi, 2 * t * weights @ vectors


class _SymmetricCoords:
    """Coordinates of ``psi^{otimes t}`` in an orthonormal basis of the
    symmetric subspace (normalized monomials)."""

    def __init__(self, d: int, t: int):
        exps = [c for c in itertools.product(range(t + 1), repeat=d) if sum(c) == t]
        self.exponents = np.array(exps)
        self.coef = np.array([
            math.sqrt(math.factorial(t) / math.prod(math.factorial(x) for x in c)) for c in exps
        ])

    def __call__(self, vectors: np.ndarray) -> np.ndarray:
        mono = np.prod(vectors[:, None, :] ** self.exponents[None, :, :], axis=2)
        return mono * self.coef


def potential_gap(vectors: np.ndarray, t: int, coords: _SymmetricCoords | None = None) -> float:
    """``Phi_t - K^2 D_d^(t)`` evaluated without cancellation.

    Equals the squared Frobenius distance of the symmetric moment matrix from
    ``K D_d^(t)`` times the identity, so it is nonnegative by construction.
    """
    K, d = vectors.shape
    if coords is None:
        coords = _SymmetricCoords(d, t)
    c = coords(vectors)
    moment = c.T @ c.conj()
    n = moment.shape[0]
    return float(np.linalg.norm(moment - (K / n) * np.eye(n)) ** 2)


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _descend(vectors, t, max_iters, tol, coords):
    step = 1e-3
    gap = potential_gap(vectors, t, coords)
    _, grad = potential_and_gradient(vectors, t)
    it = 0
    while it < max_iters and gap > tol and step > 1e-20:
        it += 1
        # drop the radial component: tangent direction on each unit sphere
        radial = np.sum(vectors.conj() * grad, axis=1).real
        tangent = grad - radial[:, None] * vectors
        trial = _normalize(vectors - step * tangent)
        trial_gap = potential_gap(trial, t, coords)
        if trial_gap < gap:
            vectors, gap = trial, trial_gap
            _, grad = potential_and_gradient(vectors, t)
            step *= 1.1
        else:
            step *= 0.5
    return vectors, gap, it


def search_design(config: SearchConfig) -> SearchResult:
    """Minimize the t-th frame potential over K unit vectors in C^d.

    Each restart starts from fresh Haar-random vectors drawn from its own
    sub-stream of ``config.seed``. Restarts stop at the first converged run;
    otherwise the lowest-gap run is returned with ``converged=False``.
    """
    coords = _SymmetricCoords(config.d, config.t)
    best = None
    for r in range(config.restarts):
        rng = make_rng(config.seed, r)
        start = np.array([haar_ket(config.d, rng) for _ in range(config.K)])
        vectors, gap, its = _descend(start, config.t, config.max_iters, min(config.tol, POLISH_GAP), coords)
        if best is None or gap < best[1]:
            best = (vectors, gap, its, r)
        if gap <= config.tol:
            break
    vectors, gap, its, r = best
    design = QuantumDesign(config.d, _normalize(vectors), config.t, f"search_d{config.d}_K{config.K}_t{config.t}")
    return SearchResult(design, gap, its, gap <= config.tol, r)


def welch_gap(design: QuantumDesign, t: int) -> float:
    """Frame-potential gap computed the direct way (for cross-checks)."""
    return frame_potential(design.vectors, t) - welch_bound(design.size, design.dim, t)
