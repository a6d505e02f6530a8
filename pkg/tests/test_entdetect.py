import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdesign import designs, entdetect as ed, qcore


@pytest.fixture(scope="module")
def ico4():
    local = ed.LocalMeasurements.from_dsm(designs.single_povm(designs.icosahedron()))
    return ed.LocalScheme.uniform(local, 4), ed.ExponentVector((4, 4, 4, 4))


@pytest.fixture(scope="module")
def mub2():
    local = ed.LocalMeasurements.from_dsm(designs.mub_dsm())
    return ed.LocalScheme((local, local.conjugated())), ed.ExponentVector((2, 2))


def brute_J(scheme, rho, shifted=False):
    """Sum over (theta, i) of explicit Kronecker products."""
    total = 0.0
    n_theta = len(scheme.parties[0].povms)
    for th in range(n_theta):
        for i in range(scheme.parties[0].outcomes):
            ops = []
            for party in scheme.parties:
                e = party.weights[th] * party.povms[th].effects[i]
                if shifted:
                    e = e - party.weights[th] * np.eye(party.dim) / party.shift_counts[th]
                ops.append(e)
            val = np.trace(qcore.tensor_product(ops) @ rho).real
            total += abs(val) if shifted else val
    return total


def test_exponent_vector():
    assert ed.ExponentVector((3, 6, 2)).exponents == (3, 6, 2)
    assert not ed.ExponentVector((3, 3, 3)).all_even
    with pytest.raises(ValueError):
        ed.ExponentVector((2, 3))
    with pytest.raises(ValueError):
        ed.ExponentVector((1, 1000))


def test_J_matches_brute_force(ico4, mub2):
    for scheme, D in ((ico4[0], 16), (mub2[0], 4)):
        rho = qcore.random_density(D, 3, 7).matrix
        assert ed.correlation_J(scheme, rho) == pytest.approx(brute_J(scheme, rho), abs=1e-14)
        assert ed.correlation_Jtilde(scheme, rho) == pytest.approx(brute_J(scheme, rho, True), abs=1e-14)


def test_J_values(ico4):
    scheme, _ = ico4
    mixed = np.eye(16) / 16
    assert ed.correlation_J(scheme, mixed) == pytest.approx(1 / 1728, abs=1e-16)
    assert ed.correlation_Jtilde(scheme, mixed) <= 1e-18
    rho, sigma = qcore.random_density(16, 4, 1).matrix, qcore.random_density(16, 2, 2).matrix
    lam = 0.3
    mix = lam * rho + (1 - lam) * sigma
    assert ed.correlation_J(scheme, mix) == pytest.approx(lam * ed.correlation_J(scheme, rho) + (1 - lam) * ed.correlation_J(scheme, sigma))
    assert ed.correlation_Jtilde(scheme, mix) <= lam * ed.correlation_Jtilde(scheme, rho) + (1 - lam) * ed.correlation_Jtilde(scheme, sigma) + 1e-15
    zero = np.zeros(16)
    zero[0] = 1
    assert ed.correlation_Jtilde(scheme, np.outer(zero, zero)) >= 0


def test_product_correlations_factorize(ico4):
    scheme, _ = ico4
    locs = [qcore.random_density(2, 2, s).matrix for s in range(4)]
    full = qcore.tensor_product(locs)
    for shifted in (False, True):
        J = ed.correlation_Jtilde(scheme, full) if shifted else ed.correlation_J(scheme, full)
        assert ed.product_correlations(scheme, locs, shifted) == pytest.approx(J, abs=1e-15)


def test_rhs_values(ico4, mub2):
    scheme, exps = ico4
    assert ed.theorem3_rhs(scheme, exps) == pytest.approx(1 / 540, rel=1e-12)
    assert ed.theorem4_rhs(scheme, exps) == pytest.approx(1 / 8640, rel=1e-12)
    assert ed.theorem3_rhs(*mub2) == pytest.approx(2, rel=1e-12)
    with pytest.raises(ValueError):
        ed.theorem3_rhs(scheme, ed.ExponentVector((6, 6, 6, 2)))
    with pytest.raises(ValueError):
        ed.theorem4_rhs(*mub2[:1], ed.ExponentVector((3, 6, 2)))


def test_rhs_weight_homogeneity():
    dsm = designs.mub_dsm()
    base = ed.LocalMeasurements.from_dsm(dsm)
    scaled = ed.LocalMeasurements.from_dsm(dsm, weights=[2.5] * 3)
    exps = ed.ExponentVector((2, 2))
    r0 = ed.theorem3_rhs(ed.LocalScheme((base, base)), exps)
    assert ed.theorem3_rhs(ed.LocalScheme((scaled, scaled)), exps) == pytest.approx(2.5**2 * r0)
    norm = ed.LocalMeasurements.from_dsm(dsm, normalize=True)
    assert sum(norm.weights) == pytest.approx(1)


def test_modified_ic_bound():
    assert ed.modified_ic_bound(12, 2, 2, 12) == pytest.approx(1 / 36, abs=1e-15)
    assert ed.modified_ic_bound(12, 2, 4, 12) == pytest.approx(1 / 8640, rel=1e-12)
    assert ed.modified_ic_bound(12, 2, 4, 1e12) == pytest.approx(designs.design_constant(2, 4) * 16 / 12**3, rel=1e-9)
    with pytest.raises(ValueError):
        ed.modified_ic_bound(12, 2, 3, 12)
    povm = designs.single_povm(designs.icosahedron()).povms[0]
    gen = qcore.make_rng(8)
    for _ in range(200):
        p = qcore.born_probabilities(povm, qcore.DensityOperator.from_ket(qcore.haar_ket(2, gen)))
        for a in (2, 4):
            assert np.sum((p - 1 / 12) ** a) == pytest.approx(ed.modified_ic_bound(12, 2, a, 12), abs=1e-15)


def test_states():
    assert np.allclose(ed.state_psi_beta_phi(math.pi / 2, math.pi / 2).matrix[0, 0], 1)
    assert ed.state_psi_beta_phi(math.pi / 4, math.pi / 4).purity() == pytest.approx(1)
    assert np.allclose(ed.state_rho_x_phi(0, 0.4).matrix, np.eye(16) / 16)
    assert ed.state_rho_x_phi(1, math.pi / 4).purity() == pytest.approx(1)
    x = 0.6
    assert ed.state_rho_x_phi(x, 0.3).purity() == pytest.approx(x**2 + 2 * x * (1 - x) / 16 + (1 - x) ** 2 / 16)
    assert np.allclose(ed.state_isotropic(0).matrix, np.eye(4) / 4)
    assert ed.state_isotropic(1).purity() == pytest.approx(1)


@settings(max_examples=40, deadline=None)
@given(beta=st.floats(0.001, 1.57), phi=st.floats(0.001, 1.57))
def test_psi_normalized(beta, phi):
    assert np.linalg.norm(ed.ket_psi_beta_phi(beta, phi)) == pytest.approx(1, abs=1e-14)


def test_rho_x_phi_scan_claims(ico4):
    scheme, exps = ico4
    points = ed.detect_scan("rho_x_phi", scheme, exps, grid=60)
    for p in points:
        if p.param1 == 1.0 and 0.01 < p.param2 < math.pi / 2 - 0.01:
            assert p.violated
        if p.param1 <= 0.33:
            assert not p.violated


def test_psi_scan_fails_near_corner(ico4):
    scheme, exps = ico4
    _, rhs = ed.criterion(scheme, exps, 4)
    corner = ed.correlation_Jtilde(scheme, ed.state_psi_beta_phi(0.05, 0.05))
    assert corner <= rhs
    points = ed.detect_scan("psi_beta_phi", scheme, exps, grid=30)
    assert 0.3 < np.mean([p.violated for p in points]) < 1


def test_isotropic_scan_threshold(mub2):
    scheme, exps = mub2
    for p in ed.detect_scan("isotropic", scheme, exps, grid=101, theorem=3):
        assert p.violated == (p.param1 > 1 / 3 + 1e-9)


def test_scan_validation(ico4, mub2):
    with pytest.raises(ValueError):
        ed.detect_scan("isotropic", *ico4, grid=4)
    with pytest.raises(ValueError):
        ed.detect_scan("werner", *mub2, grid=4)


def test_product_and_separable_soundness(ico4, mub2):
    gen = qcore.make_rng(21)
    for scheme, exps in (ico4, mub2):
        rhs3 = ed.theorem3_rhs(scheme, exps)
        rhs4 = ed.theorem4_rhs(scheme, exps)
        for _ in range(300):
            locs = [qcore.DensityOperator.from_ket(qcore.haar_ket(2, gen)).matrix for _ in scheme.parties]
            assert ed.product_correlations(scheme, locs) <= rhs3 + 1e-10
            assert ed.product_correlations(scheme, locs, True) <= rhs4 + 1e-10


def test_oracle_below_rhs(mub2):
    ico2 = ed.LocalScheme.uniform(ed.LocalMeasurements.from_dsm(designs.single_povm(designs.icosahedron())), 2)
    exps = ed.ExponentVector((2, 2))
    assert ed.separable_oracle(ico2, exps, 300, seed=1) <= ed.theorem3_rhs(ico2, exps) + 1e-9
    best = ed.separable_oracle(*mub2, n_samples=300, seed=1)
    assert best <= 2 + 1e-9 and best > 1.9
    with pytest.raises(ValueError):
        ed.separable_oracle(*mub2, theorem=5)
