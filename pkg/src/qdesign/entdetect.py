"""Multipartite entanglement criteria from local design-structured
measurements.

A separable state cannot push the correlation measures ``J`` (raw product
effects) or ``J~`` (traceless-shifted product effects, absolute values) above
a Hölder-type product of local IC bounds. Exceeding the bound certifies
entanglement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .designs import DsmSet, bloch_to_ket
from .eur import design_ic_bound
from .qcore import DensityOperator, Povm, haar_ket, make_rng, tensor_product

VIOLATION_TOL = 1e-12


@dataclass(frozen=True)
class LocalMeasurements:
    """The measurement menu on one subsystem.

    ``shift_counts[k]`` is the K in the traceless shift ``M - I/K``; for
    effects ``(d/L)|psi><psi|`` this equals L.
    """

    povms: tuple
    weights: tuple
    strengths: tuple
    shift_counts: tuple

    def __post_init__(self):
        n = len(self.povms)
        if not (len(self.weights) == len(self.strengths) == len(self.shift_counts) == n) or n == 0:
            raise ValueError("povms, weights, strengths and shift_counts must have equal nonzero length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be strictly positive")
        if len({len(p) for p in self.povms}) != 1 or len({p.dim for p in self.povms}) != 1:
            raise ValueError("local POVMs must share outcome count and dimension")

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def outcomes(self) -> int:
        return len(self.povms[0])

    @classmethod
    def from_dsm(cls, dsm: DsmSet, weights: Sequence[float] | None = None, normalize: bool = False):
        n = dsm.n_povms
        w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
        if normalize:
            w = w / w.sum()
        L = dsm.outcomes_per_povm
        return cls(dsm.povms, tuple(float(x) for x in w), (dsm.strength,) * n, (L,) * n)

    def conjugated(self) -> "LocalMeasurements":
        """Same menu with entrywise complex-conjugated effects."""
        povms = tuple(Povm(tuple(e.conj() for e in p.effects)) for p in self.povms)
        return LocalMeasurements(povms, self.weights, self.strengths, self.shift_counts)


@dataclass(frozen=True)
class LocalScheme:
    parties: tuple

    def __post_init__(self):
        parties = tuple(self.parties)
        if not parties:
            raise ValueError("a scheme needs at least one party")
        if len({len(p.povms) for p in parties}) != 1 or len({p.outcomes for p in parties}) != 1:
            raise ValueError("all parties must share the number of POVMs and outcomes")
        object.__setattr__(self, "parties", parties)

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def dims(self) -> tuple:
        return tuple(p.dim for p in self.parties)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @classmethod
    def uniform(cls, local: LocalMeasurements, n_parties: int) -> "LocalScheme":
        return cls((local,) * n_parties)


@dataclass(frozen=True)
class ExponentVector:
    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(a) for a in self.exponents)
        if any(a < 2 for a in exps):
            raise ValueError("every exponent must be at least 2")
        if sum(Fraction(1, a) for a in exps) != 1:
            raise ValueError(f"reciprocals of {exps} do not sum to 1")
        object.__setattr__(self, "exponents", exps)

    @property
    def all_even(self) -> bool:
        return all(a % 2 == 0 for a in self.exponents)

    def __len__(self):
        return len(self.exponents)


def _local_terms(scheme: LocalScheme, shifted: bool):
    """Per party, an array (Theta, L, d, d) of weighted (optionally shifted) effects."""
    out = []
    for party in scheme.parties:
        eye = np.eye(party.dim)
        block = []
        for povm, w, K in zip(party.povms, party.weights, party.shift_counts):
            effects = povm.stacked()
            if shifted:
                effects = effects - eye / K
            block.append(w * effects)
        out.append(np.array(block))
    return out


def correlation_operators(scheme: LocalScheme, shifted: bool = False) -> np.ndarray:
    """Array of shape (Theta*L, D, D) holding every product operator."""
    local = _local_terms(scheme, shifted)
    n_theta, n_out = local[0].shape[:2]
    ops = [
        tensor_product([blk[th, i] for blk in local])
        for th in range(n_theta)
        for i in range(n_out)
    ]
    return np.array(ops)


def _expectations(ops: np.ndarray, rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    if m.shape[-1] != ops.shape[-1]:
        raise ValueError(f"state dimension {m.shape[-1]} does not match scheme dimension {ops.shape[-1]}")
    # tr(O rho) for each operator, optionally over a batch of states
    return np.einsum("kij,...ji->...k", ops, m).real


def correlation_J(scheme: LocalScheme, rho) -> float:
    return float(np.sum(_expectations(correlation_operators(scheme), rho)))


def correlation_Jtilde(scheme: LocalScheme, rho) -> float:
    return float(np.sum(np.abs(_expectations(correlation_operators(scheme, shifted=True), rho))))


def product_correlations(scheme: LocalScheme, local_states: Sequence, shifted: bool = False) -> float:
    """``J`` or ``J~`` of a product state, evaluated from local statistics."""
    if len(local_states) != scheme.n_parties:
        raise ValueError("need one local state per party")
    local = _local_terms(scheme, shifted)
    prod = None
    for blk, rho in zip(local, local_states):
        m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
        vals = np.einsum("tkij,ji->tk", blk, m).real
        prod = vals if prod is None else prod * vals
    return float(np.sum(np.abs(prod)) if shifted else np.sum(prod))


def _check_exponents(scheme: LocalScheme, exps: ExponentVector):
    if len(exps) != scheme.n_parties:
        raise ValueError(f"need {scheme.n_parties} exponents, got {len(exps)}")
    for n, (party, a) in enumerate(zip(scheme.parties, exps.exponents)):
        if any(a > t for t in party.strengths):
            raise ValueError(f"exponent {a} for party {n} exceeds a local design strength {party.strengths}")


def theorem3_rhs(scheme: LocalScheme, exps: ExponentVector) -> float:
    """Separable bound on ``J``."""
    _check_exponents(scheme, exps)
    total = 1.0
    for party, a in zip(scheme.parties, exps.exponents):
        s = sum(w**a * design_ic_bound(len(p), party.dim, a) for p, w in zip(party.povms, party.weights))
        total *= s ** (1 / a)
    return total


def modified_ic_bound(L: int, d: int, a: int, K: int) -> float:
    """Pure-state value of ``sum_i (p_i - 1/K)^a`` for a design POVM."""
    if a < 2 or a % 2:
        raise ValueError("modified bound needs an even order a >= 2")

    def B(r):
        if r == 0:
            return float(L)
        if r == 1:
            return 1.0
        return design_ic_bound(L, d, r)

    return sum(math.comb(a, r) * (-1.0 / K) ** (a - r) * B(r) for r in range(a + 1))


def theorem4_rhs(scheme: LocalScheme, exps: ExponentVector) -> float:
    """Separable bound on ``J~`` (even exponents only)."""
    if not exps.all_even:
        raise ValueError("the shifted criterion needs even exponents")
    _check_exponents(scheme, exps)
    total = 1.0
    for party, a in zip(scheme.parties, exps.exponents):
        s = sum(
            w**a * modified_ic_bound(len(p), party.dim, a, K)
            for p, w, K in zip(party.povms, party.weights, party.shift_counts)
        )
        total *= max(s, 0.0) ** (1 / a)
    return total


def criterion(scheme: LocalScheme, exps: ExponentVector, theorem: int):
    """``(lhs function, rhs value)`` for the chosen criterion."""
    if theorem == 3:
        return (lambda rho: correlation_J(scheme, rho)), theorem3_rhs(scheme, exps)
    if theorem == 4:
        return (lambda rho: correlation_Jtilde(scheme, rho)), theorem4_rhs(scheme, exps)
    raise ValueError("theorem must be 3 or 4")


def _ket(amplitudes: dict, n_qubits: int) -> np.ndarray:
    v = np.zeros(2**n_qubits, dtype=complex)
    for bits, amp in amplitudes.items():
        v[int(bits, 2)] = amp
    return v


def ket_psi_beta_phi(beta: float, phi: float) -> np.ndarray:
    return _ket({
        "0000": math.sin(beta) * math.sin(phi),
        "1100": math.cos(beta),
        "1010": math.sin(beta) * math.cos(phi),
    }, 4)


def state_psi_beta_phi(beta: float, phi: float) -> DensityOperator:
    v = ket_psi_beta_phi(beta, phi)
    return DensityOperator(np.outer(v, v.conj()))


def ket_ghz_phi(phi: float) -> np.ndarray:
    return _ket({"0000": math.sin(phi), "1111": math.cos(phi)}, 4)


def state_rho_x_phi(x: float, phi: float) -> DensityOperator:
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    v = ket_ghz_phi(phi)
    return DensityOperator(x * np.outer(v, v.conj()) + (1 - x) * np.eye(16) / 16)


def state_isotropic(x: float) -> DensityOperator:
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    v = np.array([1, 0, 0, 1]) / math.sqrt(2)
    return DensityOperator(x * np.outer(v, v.conj()) + (1 - x) * np.eye(4) / 4)


@dataclass(frozen=True)
class DetectionPoint:
    param1: float
    param2: float
    lhs: float
    rhs: float

    @property
    def violated(self) -> bool:
        return self.lhs > self.rhs + VIOLATION_TOL


def open_grid(n: int, hi: float) -> np.ndarray:
    """``n`` points strictly inside ``(0, hi)``."""
    return np.linspace(0.0, hi, n + 2)[1:-1]


def detect_scan(family: str, scheme: LocalScheme, exps: ExponentVector, grid: int = 200, theorem: int | None = None):
    """Evaluate a criterion over a parameter grid of one state family.

    ``psi_beta_phi`` scans beta, phi over the open square ``(0, pi/2)^2``;
    ``rho_x_phi`` scans x over ``[0, 1]`` and phi over ``[0, pi/2]``;
    ``isotropic`` scans x over ``[0, 1]`` (``param2`` is 0).
    """
    if theorem is None:
        theorem = 4 if exps.all_even else 3
    ops = correlation_operators(scheme, shifted=(theorem == 4))
    rhs = theorem4_rhs(scheme, exps) if theorem == 4 else theorem3_rhs(scheme, exps)
    D = scheme.total_dim

    def measure(states):
        vals = _expectations(ops, states)
        return np.sum(np.abs(vals), axis=-1) if theorem == 4 else np.sum(vals, axis=-1)

    points = []
    if family == "psi_beta_phi":
        _require_dim(D, 16, family)
        axis = open_grid(grid, math.pi / 2)
        for beta in axis:
            kets = np.array([ket_psi_beta_phi(beta, phi) for phi in axis])
            states = np.einsum("ni,nj->nij", kets, kets.conj())
            for phi, lhs in zip(axis, measure(states)):
                points.append(DetectionPoint(float(beta), float(phi), float(lhs), rhs))
    elif family == "rho_x_phi":
        _require_dim(D, 16, family)
        xs = np.linspace(0.0, 1.0, grid)
        phis = np.linspace(0.0, math.pi / 2, grid)
        kets = np.array([ket_ghz_phi(phi) for phi in phis])
        pure = np.einsum("ni,nj->nij", kets, kets.conj())
        mixed = np.eye(16) / 16
        for x in xs:
            for phi, lhs in zip(phis, measure(x * pure + (1 - x) * mixed)):
                points.append(DetectionPoint(float(x), float(phi), float(lhs), rhs))
    elif family == "isotropic":
        _require_dim(D, 4, family)
        xs = np.linspace(0.0, 1.0, grid)
        states = np.array([state_isotropic(x).matrix for x in xs])
        for x, lhs in zip(xs, measure(states)):
            points.append(DetectionPoint(float(x), 0.0, float(lhs), rhs))
    else:
        raise ValueError(f"unknown family {family!r}")
    return points


def _require_dim(D, expected, family):
    if D != expected:
        raise ValueError(f"family {family} needs a scheme on dimension {expected}, got {D}")


def _bloch_state(theta: float, phi: float) -> np.ndarray:
    v = bloch_to_ket((math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)))
    return np.outer(v, v.conj())


def separable_oracle(scheme: LocalScheme, exps: ExponentVector, n_samples: int = 2000, seed: int = 0,
                     theorem: int = 3, refine_steps: int = 200, decay: float = 0.95) -> float:
    """Empirical maximum of the criterion's LHS over pure product qubit states.

    Random product states are scored, and the best one is refined by
    coordinate-wise hill climbing on each party's Bloch angles.
    """
    if any(d != 2 for d in scheme.dims):
        raise ValueError("the product-state oracle samples qubit parties only")
    if theorem not in (3, 4):
        raise ValueError("theorem must be 3 or 4")
    shifted = theorem == 4
    N = scheme.n_parties
    rng = make_rng(seed)

    def score(angles):
        return product_correlations(scheme, [_bloch_state(*angles[n]) for n in range(N)], shifted)

    best_val, best = -math.inf, None
    for _ in range(n_samples):
        states = [haar_ket(2, rng) for _ in range(N)]
        val = product_correlations(scheme, [np.outer(v, v.conj()) for v in states], shifted)
        if val > best_val:
            best_val, best = val, states
    angles = []
    for v in best:
        v = v * np.exp(-1j * np.angle(v[0]))
        angles.append([2 * math.acos(min(1.0, abs(v[0]))), float(np.angle(v[1]))])
    angles = np.array(angles)
    current = score(angles)
    step = 0.5
    for _ in range(refine_steps):
        for n in range(N):
            for k in range(2):
                for sign in (1.0, -1.0):
                    trial = angles.copy()
                    trial[n, k] += sign * step
                    val = score(trial)
                    if val > current:
                        angles, current = trial, val
        step *= decay
    return max(best_val, current)
