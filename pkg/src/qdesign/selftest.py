"""Fixed-seed property checks grouped into suites, run by ``qdesign selftest``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import auxiliary, designs, design_search, entdetect, eur, qcore
from .qcore import make_rng

SEED = 20240917


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _close(x, y, tol):
    return abs(x - y) <= tol


def _random_states(d, n, seed):
    return [qcore.random_density(d, 1 + k % d, seed + k) for k in range(n)]


def _qcore_checks():
    rng = make_rng(SEED, 1)
    yield "projector idempotent", lambda: np.abs(np.linalg.matrix_power(qcore.sym_projector(2, 3), 2) - qcore.sym_projector(2, 3)).max() < 1e-12
    yield "projector trace", lambda: _close(np.trace(qcore.sym_projector(3, 2)), qcore.sym_dimension(3, 2), 1e-12)
    yield "F_t methods agree", lambda: all(
        _close(qcore.f_t(r, 3), qcore.f_t(r, 3, method="projector"), 1e-12) for r in _random_states(2, 20, SEED)
    )
    yield "F_t pure state", lambda: _close(qcore.f_t(qcore.DensityOperator.from_ket(qcore.haar_ket(3, rng)), 4), 1.0, 1e-12)
    yield "born sums to one", lambda: all(
        _close(qcore.born_probabilities(p, r).sum(), 1.0, 1e-12)
        for p in designs.icosahedron_pairs().povms for r in _random_states(2, 5, SEED)
    )


def _design_checks(extra_file=None):
    ico = designs.icosahedron()
    yield "icosahedron is a 5-design", lambda: designs.verify_design(ico, 5).passed
    yield "icosahedron is not a 7-design", lambda: not designs.verify_design(ico, 7).passed
    yield "mub is a 2-design", lambda: designs.verify_design(designs.mub_qubit(), 2).passed
    yield "snub cube is a 7-design", lambda: designs.verify_design(designs.snub_cube_7(), 7, tol=1e-8).passed
    yield "icosahedron antipodal grouping", lambda: designs.icosahedron_pairs().n_povms == 6
    if extra_file is not None:
        def check_file():
            d = designs.load_design(extra_file)
            return designs.verify_design(d, d.strength).passed
        yield f"design file {extra_file}", check_file


def _search_checks():
    def small_search():
        res = design_search.search_design(design_search.SearchConfig(2, 6, 3, seed=SEED))
        return res.converged and designs.verify_design(res.design, 3).passed

    def gradient():
        rng = make_rng(SEED, 2)
        v = np.array([qcore.haar_ket(2, rng) for _ in range(5)])
        _, g = design_search.potential_and_gradient(v, 3)
        dv = rng.standard_normal(v.shape) + 1j * rng.standard_normal(v.shape)
        h = 1e-6
        fd = (design_search.potential_and_gradient(v + h * dv, 3)[0] - design_search.potential_and_gradient(v - h * dv, 3)[0]) / (2 * h)
        an = 2 * float(np.sum(g.conj() * dv).real)
        return abs(fd - an) <= 1e-5 * abs(an)

    yield "search finds a 3-design", small_search
    yield "gradient matches finite difference", gradient


def _eur_checks():
    yield "tight icosahedron distribution", lambda: _close(eur.solve_px(2, 2, 2 / 3)[0], (math.sqrt(3) + 1) / (2 * math.sqrt(3)), 1e-12)
    yield "snub cube q1", lambda: _close(eur.theorem1_bounds(24, 2, 1 / 18, 2.0).lower, math.log(18), 1e-9)

    def sandwich():
        rng = make_rng(SEED, 3)
        for L, a, alpha in [(3, 2, 1.0), (3, 3, 5.0), (5, 2, 0.5), (4, 3, 3.0)]:
            P = rng.dirichlet(np.ones(L), size=500)
            c = np.sum(P**a, axis=1)
            H = np.array([eur.renyi_entropy(p, alpha) for p in P])
            edges = eur.theorem1_bounds(L, a, c, alpha)
            if np.any(H < np.asarray(edges.lower) - 1e-9) or np.any(H > np.asarray(edges.upper) + 1e-9):
                return False
        return True

    def ordering():
        for L in (2, 12):
            for a in (2, 3):
                for c in np.linspace(float(L) ** (1 - a), 1, 12)[1:-1]:
                    for alpha in (a, a + 1.5, math.inf):
                        if not eur.compare_bounds(eur.BoundParams(L, a, alpha, c)).ordered:
                            return False
        return True

    yield "Dirichlet samples inside bounds", sandwich
    yield "bound ordering", ordering


def _entdetect_checks():
    ico = entdetect.LocalMeasurements.from_dsm(designs.single_povm(designs.icosahedron()))
    scheme = entdetect.LocalScheme.uniform(ico, 4)
    exps = entdetect.ExponentVector((4, 4, 4, 4))
    yield "icosahedron shifted separable bound", lambda: _close(entdetect.theorem4_rhs(scheme, exps), 1 / 8640, 1e-15)

    def products():
        rng = make_rng(SEED, 4)
        rhs3, rhs4 = entdetect.theorem3_rhs(scheme, exps), entdetect.theorem4_rhs(scheme, exps)
        for _ in range(200):
            states = [qcore.DensityOperator.from_ket(qcore.haar_ket(2, rng)).matrix for _ in range(4)]
            if entdetect.product_correlations(scheme, states) > rhs3 + 1e-10:
                return False
            if entdetect.product_correlations(scheme, states, shifted=True) > rhs4 + 1e-10:
                return False
        return True

    def ghz_detected():
        rho = entdetect.state_rho_x_phi(1.0, math.pi / 4)
        return entdetect.correlation_Jtilde(scheme, rho) > entdetect.theorem4_rhs(scheme, exps)

    yield "product states respect bounds", products
    yield "GHZ-type state detected", ghz_detected


def _aux_checks():
    yield "MUB unbiasedness", lambda: _close(auxiliary.unbiasedness(auxiliary.mub_basis_set()), 2.0, 1e-10)
    yield "MUB critical x", lambda: _close(auxiliary.critical_isotropic_x(auxiliary.mub_basis_set())[0], 1 / 3, 1e-3)

    def choi():
        rng = make_rng(SEED, 5)
        for _ in range(50):
            A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            if abs(np.vdot(auxiliary.choi_vector(A), auxiliary.choi_vector(B)) - np.trace(A.conj().T @ B)) > 1e-12:
                return False
        return True

    def high_order():
        dsm = designs.icosahedron_pairs()
        views = {a: auxiliary.view_operator(dsm, a) for a in (2, 3)}
        return all(
            auxiliary.high_order_ic_check(dsm, r, a, views[a]).holds for r in _random_states(2, 30, SEED) for a in (2, 3)
        )

    yield "Choi inner product", choi
    yield "higher-order IC bound", high_order


SUITES: dict[str, Callable] = {
    "qcore": _qcore_checks,
    "designs": _design_checks,
    "design_search": _search_checks,
    "eur": _eur_checks,
    "entdetect": _entdetect_checks,
    "aux": _aux_checks,
}


def run_suite(name: str, design_file=None) -> list[CheckResult]:
    checks = _design_checks(design_file) if name == "designs" else SUITES[name]()
    results = []
    for label, check in checks:
        try:
            ok = bool(check())
            results.append(CheckResult(name, label, ok))
        except Exception as exc:  # a crashing check counts as a failure
            results.append(CheckResult(name, label, False, f"{type(exc).__name__}: {exc}"))
    return results
