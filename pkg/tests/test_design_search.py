import numpy as np
import pytest

from qdesign import design_search as ds
from qdesign import designs, qcore


def test_gradient_matches_central_differences():
    rng = qcore.make_rng(3)
    for t in (2, 5, 7):
        v = np.array([qcore.haar_ket(2, rng) for _ in range(6)])
        _, grad = ds.potential_and_gradient(v, t)
        for _ in range(5):
            dv = rng.standard_normal(v.shape) + 1j * rng.standard_normal(v.shape)
            h = 1e-6
            fd = (ds.potential_and_gradient(v + h * dv, t)[0] - ds.potential_and_gradient(v - h * dv, t)[0]) / (2 * h)
            # Wirtinger gradient: dPhi = 2 Re <grad, dv>
            analytic = 2 * np.sum(grad.conj() * dv).real
            assert fd == pytest.approx(analytic, rel=1e-5)


def test_gap_equals_welch_gap():
    rng = qcore.make_rng(4)
    for t in (1, 3, 6):
        v = np.array([qcore.haar_ket(2, rng) for _ in range(9)])
        d = designs.QuantumDesign(2, v, t)
        assert ds.potential_gap(v, t) == pytest.approx(ds.welch_gap(d, t), rel=1e-9, abs=1e-12)
    assert ds.potential_gap(designs.icosahedron().vectors, 5) < 1e-25


def test_finds_icosahedral_5_design():
    res = ds.search_design(ds.SearchConfig(2, 12, 5, seed=11))
    assert res.converged and res.residual <= 1e-8
    assert designs.verify_design(res.design, 5, tol=1e-7).passed


def test_two_vectors_cannot_form_5_design():
    res = ds.search_design(ds.SearchConfig(2, 2, 5, seed=0, restarts=2))
    assert not res.converged
    # best possible is an antipodal pair with Phi_5 = 2 against 4/6
    assert res.residual == pytest.approx(2 - 4 / 6, abs=1e-8)
    assert designs.frame_potential(res.design.vectors, 5) >= designs.welch_bound(2, 2, 5) - 1e-12


def test_deterministic():
    cfg = ds.SearchConfig(2, 8, 3, seed=5)
    a, b = ds.search_design(cfg), ds.search_design(cfg)
    assert np.array_equal(a.design.vectors, b.design.vectors) and a.iterations == b.iterations


def test_config_validation():
    with pytest.raises(ValueError):
        ds.SearchConfig(2, 1, 3)
    with pytest.raises(ValueError):
        ds.SearchConfig(2, 4, 3, tol=0)


@pytest.mark.parametrize("K,t", [(4, 2), (6, 3), (8, 3)])
def test_converged_results_certify(K, t):
    res = ds.search_design(ds.SearchConfig(2, K, t, seed=K))
    assert res.converged
    assert designs.verify_design(res.design, t, tol=1e-7).passed
