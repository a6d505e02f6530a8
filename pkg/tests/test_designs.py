import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdesign import designs, qcore
from qdesign.errors import ConstructionError, DesignFormatError

BUILTINS = {"icosahedron": 5, "snub_cube_7": 7, "mub_qubit": 2}


@pytest.mark.parametrize("name,t", BUILTINS.items())
def test_builtins_pass_every_lower_strength(name, t):
    d = designs.builtin_design(name)
    assert d.strength == t
    for s in range(1, t + 1):
        rep = designs.verify_design(d, s, tol=1e-8)
        assert rep.passed, (name, s, rep)


def test_icosahedron_certification():
    rep = designs.verify_design(designs.icosahedron(), 5)
    assert rep.residual <= 1e-10
    assert not designs.verify_design(designs.icosahedron(), 7).passed


def test_icosahedron_geometry():
    bloch = np.array([designs.ket_to_bloch(v) for v in designs.icosahedron().vectors])
    dots = np.round(bloch @ bloch.T, 12)
    # every vertex has five nearest neighbours at inner product 1/sqrt(5)
    for row in dots:
        assert np.sum(np.isclose(row, 1 / math.sqrt(5))) == 5
        assert np.sum(np.isclose(row, -1)) == 1


def test_mub_overlaps():
    v = designs.mub_qubit().vectors
    for i in range(6):
        for j in range(6):
            if i // 2 != j // 2:
                assert abs(np.vdot(v[i], v[j])) ** 2 == pytest.approx(0.5, abs=1e-14)
    rep = designs.verify_design(designs.mub_qubit(), 2)
    assert rep.passed and rep.frame_potential == pytest.approx(12)


def test_snub_cube_residual():
    assert designs.verify_design(designs.snub_cube_7(), 7).residual <= 1e-8


def test_design_constant():
    assert designs.design_constant(2, 2) == pytest.approx(1 / 3)
    assert designs.design_constant(2, 5) == pytest.approx(1 / 6)
    assert designs.design_constant(3, 2) == pytest.approx(1 / 6)
    for t in range(1, 9):
        assert designs.design_constant(2, t) == pytest.approx(1 / (t + 1), rel=1e-15)


def test_unknown_builtin():
    with pytest.raises(ValueError):
        designs.builtin_design("dodecahedron")


def test_groupings():
    pairs = designs.icosahedron_pairs()
    assert (pairs.n_povms, pairs.outcomes_per_povm) == (6, 2)
    for p in pairs.povms:
        for e in p.effects:
            assert np.trace(e).real == pytest.approx(1)
    single = designs.single_povm(designs.icosahedron())
    assert (single.n_povms, single.outcomes_per_povm) == (1, 12)
    assert np.trace(single.povms[0].effects[0]).real == pytest.approx(1 / 6)
    cube = designs.single_povm(designs.snub_cube_7())
    assert cube.outcomes_per_povm == 24
    for dsm in (pairs, single, cube, designs.mub_dsm()):
        for p in dsm.povms:
            assert np.abs(sum(p.effects) - np.eye(2)).max() <= 1e-10


def test_bad_groupings_name_the_group():
    ico = designs.icosahedron()
    with pytest.raises(ConstructionError, match="partition"):
        designs.group_to_povms(ico, [[0, 1], [2, 3]])
    with pytest.raises(ConstructionError, match="group 1"):
        designs.group_to_povms(ico, [list(range(6)), list(range(6, 10)), [10, 11]])
    with pytest.raises(ConstructionError, match="group 0 does not sum"):
        designs.group_to_povms(ico, [[0, 1, 2, 3, 4, 5], [6, 7, 8, 9, 10, 11]])


def test_round_trip(tmp_path):
    path = tmp_path / "ico.json"
    designs.design_io(path, "save", designs.icosahedron())
    back = designs.design_io(path, "load")
    assert np.abs(back.vectors - designs.icosahedron().vectors).max() <= 1e-15
    assert back.name == "icosahedron" and back.strength == 5


def _write(tmp_path, doc):
    path = tmp_path / "d.json"
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return path


def test_load_errors(tmp_path):
    good = designs.design_to_dict(designs.mub_qubit())
    bad = dict(good, vectors=[list(v) for v in good["vectors"]])
    bad["vectors"][3] = [[1.0, 0.0], [1.0, 0.0]]
    with pytest.raises(DesignFormatError, match=r"vectors\[3\]"):
        designs.load_design(_write(tmp_path, bad))
    with pytest.raises(DesignFormatError, match="'dim'"):
        designs.load_design(_write(tmp_path, {k: v for k, v in good.items() if k != "dim"}))
    with pytest.raises(DesignFormatError, match="line 2"):
        designs.load_design(_write(tmp_path, '{\n "dim": ,\n}'))
    with pytest.raises(DesignFormatError, match=r"\[re, im\]"):
        designs.load_design(_write(tmp_path, dict(good, vectors=[[1, 0]] * 6)))


def test_capped_verification_uses_frame_potential():
    rep = designs.verify_design(designs.icosahedron(), 5, cap=16)
    assert rep.capped and rep.passed and math.isnan(rep.residual)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), K=st.integers(2, 20), t=st.integers(1, 6))
def test_frame_potential_at_least_welch(seed, K, t):
    rng = qcore.make_rng(seed)
    v = np.array([qcore.haar_ket(2, rng) for _ in range(K)])
    assert designs.frame_potential(v, t) >= designs.welch_bound(K, 2, t) - 1e-12
