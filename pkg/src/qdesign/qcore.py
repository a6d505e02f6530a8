"""Dense linear-algebra substrate: states, POVMs, tensor powers, symmetric
projectors and seeded sampling.

All dimensions here are small (at most a few thousand), so everything is
kept as dense numpy arrays.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import SizeCapError

SIZE_CAP = 4096

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
POVM_SUM_TOL = 1e-10
CLAMP_TOL = 1e-12


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for ``seed`` and an optional path of sub-keys.

    The same ``(seed, *keys)`` always yields the same stream, and distinct key
    paths yield independent streams, so work can be split without sharing
    generator state.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density operator must be square, got shape {m.shape}")
        if self.check:
            if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
                raise ValueError("density operator is not Hermitian")
            tr = np.trace(m)
            if abs(tr - 1) > TRACE_TOL:
                raise ValueError(f"density operator trace is {tr.real:.3e}, expected 1")
            if np.linalg.eigvalsh(m).min() < -PSD_TOL:
                raise ValueError("density operator has negative eigenvalues")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    @classmethod
    def from_ket(cls, ket) -> "DensityOperator":
        v = np.asarray(ket, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityOperator":
        return cls(np.eye(d, dtype=complex) / d)


@dataclass(frozen=True, eq=False)
class Povm:
    effects: tuple
    labels: tuple | None = None

    def __post_init__(self):
        effects = tuple(np.array(e, dtype=complex) for e in self.effects)
        if not effects:
            raise ValueError("a POVM needs at least one effect")
        d = effects[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for k, e in enumerate(effects):
            if e.shape != (d, d):
                raise ValueError(f"effect {k} has shape {e.shape}, expected {(d, d)}")
            if np.abs(e - e.conj().T).max() > POVM_SUM_TOL:
                raise ValueError(f"effect {k} is not Hermitian")
            if np.linalg.eigvalsh(e).min() < -PSD_TOL:
                raise ValueError(f"effect {k} is not positive semidefinite")
            e.setflags(write=False)
            total += e
        if np.abs(total - np.eye(d)).max() > POVM_SUM_TOL:
            raise ValueError("effects do not sum to the identity")
        if self.labels is not None and len(self.labels) != len(effects):
            raise ValueError("number of labels does not match number of effects")
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self):
        return len(self.effects)

    def stacked(self) -> np.ndarray:
        return np.stack(self.effects)

    @classmethod
    def from_basis(cls, basis) -> "Povm":
        """Projective measurement onto the columns of a unitary matrix."""
        u = np.asarray(basis, dtype=complex)
        return cls(tuple(np.outer(u[:, i], u[:, i].conj()) for i in range(u.shape[1])))


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def as_distribution(probs) -> np.ndarray:
    """Validate a probability vector, clamping round-off negatives to zero."""
    p = np.array(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probability distribution must be a nonempty vector")
    if p.min() < -CLAMP_TOL:
        raise ValueError(f"negative probability {p.min():.3e}")
    p[p < 0] = 0.0
    if abs(p.sum() - 1) > TRACE_TOL:
        raise ValueError(f"probabilities sum to {p.sum():.15g}, expected 1")
    return p


def tensor_product(operators: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of ``operators`` in list order."""
    if len(operators) == 0:
        raise ValueError("tensor_product needs at least one operator")
    mats = [np.asarray(op) for op in operators]
    for k, m in enumerate(mats):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator {k} is not square: shape {m.shape}")
    return reduce(np.kron, mats)


def born_probabilities(povm: Povm, rho) -> np.ndarray:
    """Outcome probabilities ``tr(M_i rho)``."""
    m = _matrix(rho)
    if m.shape != (povm.dim, povm.dim):
        raise ValueError(f"state of dimension {m.shape[0]} does not match POVM dimension {povm.dim}")
    # tr(E rho) = sum_jk E_jk rho_kj
    p = np.einsum("ijk,kj->i", povm.stacked(), m).real
    return as_distribution(p)


def _check_cap(n: int, cap: int):
    if n > cap:
        raise SizeCapError(f"dimension {n} exceeds size cap {cap}")


def permutation_indices(d: int, perm: Sequence[int]) -> np.ndarray:
    """Basis-index map of the operator permuting ``len(perm)`` tensor factors."""
    t = len(perm)
    return np.arange(d**t).reshape((d,) * t).transpose(perm).ravel()


def sym_projector(d: int, t: int, cap: int = SIZE_CAP) -> np.ndarray:
    """Projector onto the symmetric subspace of ``(C^d)^{otimes t}``.

    Built as the average of all ``t!`` factor-permutation matrices. The result
    is real, so it is returned as a float array.
    """
    if d < 1 or t < 1:
        raise ValueError("d and t must be positive")
    n = d**t
    _check_cap(n, cap)
    proj = np.zeros((n, n))
    cols = np.arange(n)
    count = 0
    for perm in itertools.permutations(range(t)):
        proj[permutation_indices(d, perm), cols] += 1.0
        count += 1
    return proj / count


def sym_dimension(d: int, t: int) -> int:
    return math.comb(t + d - 1, t)


def purity_moments(rho, max_a: int) -> np.ndarray:
    """``[tr(rho), tr(rho^2), ..., tr(rho^max_a)]`` from the spectrum."""
    if max_a < 1:
        raise ValueError("max_a must be at least 1")
    evals = np.clip(np.linalg.eigvalsh(_matrix(rho)), 0.0, None)
    return np.array([np.sum(evals**a) for a in range(1, max_a + 1)])


def cycle_type(perm: Sequence[int]) -> list[int]:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        n, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            n += 1
        lengths.append(n)
    return lengths


def f_t(rho, t: int, method: str = "cycle_index", cap: int = SIZE_CAP) -> float:
    """``tr(Pi_sym rho^{otimes t})``.

    ``cycle_index`` averages the product of ``tr(rho^|c|)`` over the cycles of
    every permutation; ``projector`` forms both operators explicitly.
    """
    if t < 1:
        raise ValueError("t must be positive")
    m = _matrix(rho)
    if method == "cycle_index":
        moments = purity_moments(m, t)
        total = 0.0
        for perm in itertools.permutations(range(t)):
            total += math.prod(moments[c - 1] for c in cycle_type(perm))
        return float(total / math.factorial(t))
    if method == "projector":
        d = m.shape[0]
        proj = sym_projector(d, t, cap)
        power = tensor_product([m] * t)
        return float(np.real(np.sum(proj.T * power)))
    raise ValueError(f"unknown method {method!r}")


def f_t_lower_bound(d: int, t: int) -> float:
    """Value of ``F_t`` at the maximally mixed state."""
    return sym_dimension(d, t) / d**t


def haar_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def haar_random_state(d: int, seed: int) -> DensityOperator:
    if d < 2:
        raise ValueError("d must be at least 2")
    return DensityOperator.from_ket(haar_ket(d, make_rng(seed)))


def random_density(d: int, rank: int, seed: int) -> DensityOperator:
    """Dirichlet-weighted mixture of ``rank`` Haar-random pure states."""
    if not 1 <= rank <= d:
        raise ValueError(f"rank must be in [1, {d}], got {rank}")
    rng = make_rng(seed)
    weights = rng.dirichlet(np.ones(rank)) if rank > 1 else np.ones(1)
    rho = np.zeros((d, d), dtype=complex)
    for w in weights:
        v = haar_ket(d, rng)
        rho += w * np.outer(v, v.conj())
    rho = (rho + rho.conj().T) / 2
    return DensityOperator(rho / np.trace(rho).real)
