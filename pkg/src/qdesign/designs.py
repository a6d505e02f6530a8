"""Quantum t-designs: builtin vertex sets, certification, POVM construction
and the JSON design file format."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConstructionError, DesignFormatError
from .qcore import SIZE_CAP, Povm, sym_projector

UNIT_TOL = 1e-12
GROUP_TOL = 1e-9
BUILTIN_NAMES = ("icosahedron", "snub_cube_7", "mub_qubit")


@dataclass(frozen=True, eq=False)
class QuantumDesign:
    dim: int
    vectors: np.ndarray
    strength: int
    name: str | None = None

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[1] != self.dim:
            raise ValueError(f"vectors must have shape (K, {self.dim}), got {v.shape}")
        norms = np.linalg.norm(v, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1) > UNIT_TOL)
        if bad.size:
            raise ValueError(f"vector {bad[0]} has norm {norms[bad[0]]:.15g}, expected 1")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class DsmSet:
    """Design-structured POVMs sharing a common outcome count."""

    povms: tuple
    outcomes_per_povm: int
    strength: int
    source: QuantumDesign | None = None

    def __post_init__(self):
        povms = tuple(self.povms)
        if not povms:
            raise ValueError("a DSM set needs at least one POVM")
        dims = {p.dim for p in povms}
        if len(dims) != 1:
            raise ValueError(f"POVMs act on different dimensions {sorted(dims)}")
        for k, p in enumerate(povms):
            if len(p) != self.outcomes_per_povm:
                raise ValueError(f"POVM {k} has {len(p)} outcomes, expected {self.outcomes_per_povm}")
        object.__setattr__(self, "povms", povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def n_povms(self) -> int:
        return len(self.povms)


@dataclass(frozen=True)
class VerificationReport:
    t: int
    residual: float
    frame_potential: float
    welch_bound: float
    passed: bool
    capped: bool = False

    @property
    def potential_gap(self) -> float:
        return self.frame_potential - self.welch_bound


def design_constant(d: int, t: int) -> float:
    """``t!(d-1)!/(t+d-1)!``, the inverse symmetric-subspace dimension."""
    if d < 1 or t < 1:
        raise ValueError("d and t must be positive")
    return float(Fraction(math.factorial(t) * math.factorial(d - 1), math.factorial(t + d - 1)))


def frame_potential(vectors: np.ndarray, t: int) -> float:
    gram = np.asarray(vectors).conj() @ np.asarray(vectors).T
    return float(np.sum(np.abs(gram) ** (2 * t)))


def welch_bound(K: int, d: int, t: int) -> float:
    return K * K * design_constant(d, t)


def tensor_powers(vectors: np.ndarray, t: int) -> np.ndarray:
    """Rows are ``psi_k^{otimes t}``."""
    out = np.asarray(vectors)
    for _ in range(t - 1):
        out = np.einsum("ki,kj->kij", out, vectors).reshape(out.shape[0], -1)
    return out


def verify_design(design: QuantumDesign, t: int, tol: float = 1e-9, cap: int = SIZE_CAP) -> VerificationReport:
    """Certify the t-design property by both the moment identity and the
    frame potential.

    When ``d**t`` exceeds ``cap`` only the frame-potential test is run and the
    report is flagged as capped.
    """
    K, d = design.size, design.dim
    fp = frame_potential(design.vectors, t)
    wb = welch_bound(K, d, t)
    frame_ok = abs(fp - wb) <= tol * K * K
    if d**t > cap:
        return VerificationReport(t, float("nan"), fp, wb, bool(frame_ok), capped=True)
    powers = tensor_powers(design.vectors, t)
    moment = powers.T @ powers.conj()
    residual = float(np.abs(moment - K * design_constant(d, t) * sym_projector(d, t, cap)).max())
    return VerificationReport(t, residual, fp, wb, bool(frame_ok and residual <= tol))


def bloch_to_ket(n: Sequence[float]) -> np.ndarray:
    x, y, z = n
    theta = math.acos(max(-1.0, min(1.0, z)))
    phi = math.atan2(y, x)
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def ket_to_bloch(v: np.ndarray) -> np.ndarray:
    a, b = v
    ab = np.conj(a) * b
    return np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])


def icosahedron() -> QuantumDesign:
    """Vertices ``(+-g, +-1, 0)`` and cyclic shifts, ``g`` the golden ratio.

    Each coordinate axis passes through an edge midpoint. The orientation
    matters only for the entanglement scans, where it fixes how the
    measurement couples to computational-basis states.
    """
    g = (1 + math.sqrt(5)) / 2
    norm = math.sqrt(1 + g * g)
    verts = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            base = np.array([s1 * g, s2, 0.0]) / norm
            for shift in range(3):
                verts.append(np.roll(base, shift))
    return QuantumDesign(2, np.array([bloch_to_ket(v) for v in verts]), 5, "icosahedron")


def mub_qubit() -> QuantumDesign:
    s = 1 / math.sqrt(2)
    vectors = [
        [1, 0], [0, 1],
        [s, s], [s, -s],
        [s, 1j * s], [s, -1j * s],
    ]
    return QuantumDesign(2, np.array(vectors, dtype=complex), 2, "mub_qubit")


def snub_cube_7() -> QuantumDesign:
    ref = resources.files("qdesign").joinpath("data/snub_cube_7.json")
    with resources.as_file(ref) as path:
        design = load_design(path)
    report = verify_design(design, 7, tol=1e-8)
    if not report.passed:
        raise DesignFormatError(f"bundled snub-cube design failed certification: residual {report.residual:.3e}")
    return design


def builtin_design(name: str) -> QuantumDesign:
    key = name.replace("-", "_")
    if key == "snub_cube":
        key = "snub_cube_7"
    if key == "icosahedron":
        return icosahedron()
    if key == "mub_qubit":
        return mub_qubit()
    if key == "snub_cube_7":
        return snub_cube_7()
    raise ValueError(f"unknown design {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def group_to_povms(design: QuantumDesign, grouping: Sequence[Sequence[int]]) -> DsmSet:
    """Effects ``(d/L)|psi><psi|`` for each group of design vectors."""
    K, d = design.size, design.dim
    groups = [list(g) for g in grouping]
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(K)):
        raise ConstructionError(f"grouping is not a partition of 0..{K - 1}")
    L = len(groups[0])
    for k, g in enumerate(groups):
        if len(g) != L:
            raise ConstructionError(f"group {k} has {len(g)} elements, expected {L}")
    povms = []
    for k, g in enumerate(groups):
        vecs = design.vectors[g]
        total = vecs.T @ vecs.conj()
        if np.abs(total - np.trace(total) / d * np.eye(d)).max() > GROUP_TOL:
            raise ConstructionError(f"group {k} does not sum to a multiple of the identity")
        povms.append(Povm(tuple((d / L) * np.outer(v, v.conj()) for v in vecs)))
    return DsmSet(tuple(povms), L, design.strength, design)


def antipodal_pairs(design: QuantumDesign, tol: float = GROUP_TOL) -> list[list[int]]:
    """Pair each qubit design vector with the one at the opposite Bloch point."""
    if design.dim != 2:
        raise ConstructionError("antipodal pairing needs qubit vectors")
    bloch = np.array([ket_to_bloch(v) for v in design.vectors])
    unused = set(range(design.size))
    pairs = []
    for i in range(design.size):
        if i not in unused:
            continue
        unused.discard(i)
        cands = sorted(unused)
        if not cands:
            raise ConstructionError(f"vector {i} has no antipodal partner")
        dist = np.linalg.norm(bloch[cands] + bloch[i], axis=1)
        j = cands[int(np.argmin(dist))]
        if dist.min() > tol:
            raise ConstructionError(f"vector {i} has no antipodal partner within {tol}")
        unused.discard(j)
        pairs.append([i, j])
    return pairs


def single_povm(design: QuantumDesign) -> DsmSet:
    return group_to_povms(design, [list(range(design.size))])


def icosahedron_pairs() -> DsmSet:
    """The six two-outcome POVMs from antipodal icosahedron vertices."""
    ico = icosahedron()
    return group_to_povms(ico, antipodal_pairs(ico))


def mub_dsm() -> DsmSet:
    """The three qubit Pauli bases as projective measurements."""
    return group_to_povms(mub_qubit(), [[0, 1], [2, 3], [4, 5]])


def design_to_dict(design: QuantumDesign) -> dict:
    return {
        "dim": design.dim,
        "strength": design.strength,
        "name": design.name,
        "vectors": [[[float(z.real), float(z.imag)] for z in v] for v in design.vectors],
    }


def save_design(design: QuantumDesign, path) -> None:
    Path(path).write_text(json.dumps(design_to_dict(design), indent=1) + "\n")


def design_from_dict(doc) -> QuantumDesign:
    if not isinstance(doc, dict):
        raise DesignFormatError("design document must be a JSON object")
    for key in ("dim", "strength", "vectors"):
        if key not in doc:
            raise DesignFormatError(f"missing field {key!r}")
    dim, strength = doc["dim"], doc["strength"]
    if not isinstance(dim, int) or dim < 1:
        raise DesignFormatError(f"field 'dim' must be a positive integer, got {dim!r}")
    if not isinstance(strength, int) or strength < 1:
        raise DesignFormatError(f"field 'strength' must be a positive integer, got {strength!r}")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise DesignFormatError("field 'name' must be a string or null")
    raw = doc["vectors"]
    if not isinstance(raw, list) or not raw:
        raise DesignFormatError("field 'vectors' must be a nonempty list")
    vectors = np.empty((len(raw), dim), dtype=complex)
    for k, vec in enumerate(raw):
        if not isinstance(vec, list) or len(vec) != dim:
            raise DesignFormatError(f"vectors[{k}] must list {dim} amplitudes")
        for j, amp in enumerate(vec):
            if not (isinstance(amp, list) and len(amp) == 2 and all(isinstance(x, (int, float)) for x in amp)):
                raise DesignFormatError(f"vectors[{k}][{j}] must be a [re, im] pair")
            vectors[k, j] = complex(amp[0], amp[1])
    norms = np.linalg.norm(vectors, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1) > UNIT_TOL)
    if bad.size:
        raise DesignFormatError(f"vectors[{bad[0]}] has norm {norms[bad[0]]:.15g}, expected 1")
    return QuantumDesign(dim, vectors, strength, name)


def load_design(path) -> QuantumDesign:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DesignFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return design_from_dict(doc)
    except DesignFormatError as exc:
        raise DesignFormatError(f"{path}: {exc}") from exc


def design_io(path, direction: str, design: QuantumDesign | None = None) -> QuantumDesign:
    if direction == "load":
        return load_design(path)
    if direction == "save":
        if design is None:
            raise ValueError("save needs a design")
        save_design(design, path)
        return design
    raise ValueError(f"direction must be 'load' or 'save', got {direction!r}")
