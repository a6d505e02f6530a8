"""Unbiasedness of basis collections, the random-bases detection experiment,
and higher-order IC bounds through the view operator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .designs import DsmSet
from .entdetect import LocalMeasurements, LocalScheme, correlation_J, state_isotropic
from .errors import ConvergenceError, SizeCapError
from .eur import index_coincidence
from .qcore import SIZE_CAP, Povm, born_probabilities, f_t, make_rng, purity_moments, sym_dimension

ORTHO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Orthonormal bases stored as unitary matrices (basis vectors are columns)."""

    bases: tuple

    def __post_init__(self):
        bases = tuple(np.array(b, dtype=complex) for b in self.bases)
        if not bases:
            raise ValueError("need at least one basis")
        d = bases[0].shape[0]
        for k, b in enumerate(bases):
            if b.shape != (d, d):
                raise ValueError(f"basis {k} has shape {b.shape}, expected {(d, d)}")
            if np.abs(b.conj().T @ b - np.eye(d)).max() > ORTHO_TOL:
                raise ValueError(f"basis {k} is not orthonormal")
        object.__setattr__(self, "bases", bases)

    @property
    def dim(self) -> int:
        return self.bases[0].shape[0]

    def __len__(self):
        return len(self.bases)

    def povms(self) -> tuple:
        return tuple(Povm.from_basis(b) for b in self.bases)

    def conjugated(self) -> "BasisSet":
        return BasisSet(tuple(b.conj() for b in self.bases))


def unbiasedness(bs: BasisSet) -> float:
    n, d = len(bs), bs.dim
    if n < 2:
        raise ValueError("unbiasedness needs at least two bases")
    penalty = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            overlaps = np.abs(bs.bases[i].conj().T @ bs.bases[j]) ** 2
            penalty += np.sum((overlaps - 1 / d) ** 2)
    return float((n - 1) * (d - 1) - 2 / n * penalty)


def choi_vector(A: np.ndarray) -> np.ndarray:
    """``(A (x) I) sum_i |i>|i>*``; in the computational basis this is the
    row-major flattening of A."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("choi_vector needs a square matrix")
    return A.astype(complex).ravel()


@dataclass(frozen=True, eq=False)
class ViewOperator:
    order: int
    matrix: np.ndarray
    source: DsmSet | None = None


def view_operator(dsm: DsmSet, a: int, cap: int = SIZE_CAP) -> ViewOperator:
    """Gram sum of Choi vectors of ``M^{(x)a} - I/L^a`` over all effects."""
    if a < 2:
        raise ValueError("order must be at least 2")
    d, L = dsm.dim, dsm.outcomes_per_povm
    n = d ** (2 * a)
    if n > cap:
        raise SizeCapError(f"view operator dimension {n} exceeds size cap {cap}")
    eye = np.eye(d**a) / L**a
    vecs = []
    for povm in dsm.povms:
        for effect in povm.effects:
            power = effect
            for _ in range(a - 1):
                power = np.kron(power, effect)
            vecs.append(choi_vector(power - eye))
    V = np.array(vecs)
    G = V.T @ V.conj()
    return ViewOperator(a, (G + G.conj().T) / 2, dsm)


def operator_norm(H: np.ndarray, rtol: float = 1e-11, max_iter: int = 100_000, seed: int = 0) -> float:
    """Largest eigenvalue of a Hermitian matrix by shifted power iteration.

    A Gershgorin shift makes the spectrum nonnegative, so the wanted
    eigenvalue is also the dominant one. Small matrices are cross-checked
    against a dense eigendecomposition.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("operator_norm needs a square matrix")
    if np.abs(H - H.conj().T).max() > 1e-10:
        raise ValueError("operator_norm needs a Hermitian matrix")
    n = H.shape[0]
    # Gershgorin lower edge; lifting by it makes the spectrum nonnegative
    radii = np.abs(H).sum(axis=1) - np.abs(np.diag(H))
    shift = max(0.0, -float(np.min(np.diag(H).real - radii)))
    scale = float(np.linalg.norm(H))
    if scale == 0:
        return 0.0
    A = H + shift * np.eye(n)
    rng = make_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = A @ v
        lam = float(np.vdot(v, w).real)
        if np.linalg.norm(w - lam * v) <= rtol * scale:
            break
        v = w / np.linalg.norm(w)
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")
    value = lam - shift
    if n <= 64:
        dense = dense_operator_norm(H)
        if abs(dense - value) > 1e-8 * max(1.0, abs(dense)):
            raise ConvergenceError(f"power iteration gave {value!r}, dense solver {dense!r}")
    return value


def dense_operator_norm(H: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(np.asarray(H)).max())


@dataclass(frozen=True)
class HighOrderCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-10

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def high_order_rhs_factor(rho, a: int) -> float:
    """``(tr rho^2)^a + (2 F_a - 1) / (d^a (1 - h))``."""
    m = rho.matrix if hasattr(rho, "matrix") else np.asarray(rho)
    d = m.shape[0]
    h = sym_dimension(d, a) / d**a
    purity = purity_moments(m, 2)[1]
    return purity**a + (2 * f_t(m, a) - 1) / (d**a * (1 - h))


def high_order_ic_check(dsm: DsmSet, rho, a: int, view: ViewOperator | None = None) -> HighOrderCheck:
    """Compare ``sum_theta I_{2a}`` against the view-operator bound."""
    if not 2 <= a <= dsm.strength:
        raise ValueError(f"order {a} outside [2, {dsm.strength}]")
    if view is None:
        view = view_operator(dsm, a)
    lhs = sum(index_coincidence(born_probabilities(p, rho), 2 * a) for p in dsm.povms)
    rhs = operator_norm(view.matrix) * high_order_rhs_factor(rho, a)
    return HighOrderCheck(float(lhs), float(rhs))


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors on the sphere (golden-angle spiral)."""
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    ang = math.pi * (3 - math.sqrt(5)) * k
    return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=1)


def _kets_from_bloch(points: np.ndarray) -> np.ndarray:
    x, y, z = points.T
    theta = np.arccos(np.clip(z, -1, 1))
    phi = np.arctan2(y, x)
    return np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=1)


def _total_ic(bases: Sequence[np.ndarray], points: np.ndarray, a: int) -> np.ndarray:
    kets = _kets_from_bloch(np.atleast_2d(points))
    total = np.zeros(kets.shape[0])
    for b in bases:
        total += np.sum(np.abs(kets @ b.conj()) ** (2 * a), axis=1)
    return total


def generic_ic_bound(bases, a: int, n_grid: int = 10_000, n_starts: int = 5, tol: float = 1e-10) -> float:
    """Maximum over pure qubit states of ``sum_theta I_a``.

    The IC is convex in the state, so the maximum over all states sits on
    the Bloch sphere. A Fibonacci lattice locates the basin and a pattern
    search in the local tangent plane refines it.
    """
    if isinstance(bases, BasisSet):
        bases = bases.bases
    bases = [np.asarray(b, dtype=complex) for b in bases]
    if any(b.shape != (2, 2) for b in bases):
        raise ValueError("generic_ic_bound maximizes over qubit states only")
    if a < 2:
        raise ValueError("IC order must be at least 2")
    grid = fibonacci_sphere(n_grid)
    values = _total_ic(bases, grid, a)
    best = -math.inf
    for idx in np.argsort(values)[::-1][:n_starts]:
        r = grid[idx]
        f = values[idx]
        step = 0.05
        while step > tol:
            e1 = np.cross(r, [1.0, 0, 0] if abs(r[0]) < 0.9 else [0, 1.0, 0])
            e1 /= np.linalg.norm(e1)
            e2 = np.cross(r, e1)
            trials = np.array([r + s * step * e for e in (e1, e2) for s in (1, -1)])
            trials /= np.linalg.norm(trials, axis=1, keepdims=True)
            tv = _total_ic(bases, trials, a)
            k = int(np.argmax(tv))
            if tv[k] > f:
                r, f = trials[k], tv[k]
            else:
                step /= 2
        best = max(best, f)
    return float(best)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@dataclass(frozen=True)
class BasisTrial:
    U: float
    x_critical: float
    rhs: float


def isotropic_scheme(bs: BasisSet) -> LocalScheme:
    """Bases on the first qubit, their complex conjugates on the second."""
    n = len(bs)

    def local(b: BasisSet):
        return LocalMeasurements(b.povms(), (1.0,) * n, (1,) * n, (b.dim,) * n)

    return LocalScheme((local(bs), local(bs.conjugated())))


def critical_isotropic_x(bs: BasisSet, x_grid: np.ndarray | None = None, tol: float = 1e-6) -> tuple[float, float]:
    """Smallest x at which the isotropic state violates the separable bound.

    Returns ``(x_critical, rhs)``; ``x_critical`` is NaN when no grid point
    violates.
    """
    if x_grid is None:
        x_grid = np.linspace(0.0, 1.0, 101)
    rhs = math.sqrt(generic_ic_bound(bs, 2)) * math.sqrt(generic_ic_bound(bs.conjugated(), 2))
    scheme = isotropic_scheme(bs)

    def excess(x):
        return correlation_J(scheme, state_isotropic(x)) - rhs

    prev = None
    for x in x_grid:
        if excess(x) > 1e-12:
            if prev is None:
                return float(x), rhs
            lo, hi = prev, float(x)
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if excess(mid) > 1e-12:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi), rhs
        prev = float(x)
    return float("nan"), rhs


def random_bases_experiment(n_sets: int, seed: int, x_grid: np.ndarray | None = None, n_bases: int = 3) -> list[BasisTrial]:
    """Unbiasedness versus isotropic-state detection threshold for random
    qubit basis triples."""
    out = []
    for k in range(n_sets):
        rng = make_rng(seed, k)
        bs = BasisSet(tuple(haar_unitary(2, rng) for _ in range(n_bases)))
        x_crit, rhs = critical_isotropic_x(bs, x_grid)
        out.append(BasisTrial(unbiasedness(bs), x_crit, rhs))
    return out


def mub_basis_set() -> BasisSet:
    s = 1 / math.sqrt(2)
    return BasisSet((
        np.eye(2),
        np.array([[s, s], [s, -s]]),
        np.array([[s, s], [1j * s, -1j * s]]),
    ))
