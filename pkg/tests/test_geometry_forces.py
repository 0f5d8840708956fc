import numpy as np
import pytest

from platerod.errors import BoundaryError, ConfigError, DomainError
from platerod.forces import ForceData, body_force, force_norms, plate_force, rod_force
from platerod.geometry import Geometry
from platerod.regime import derive_regime


def test_geometry_validation():
    with pytest.raises(DomainError):
        Geometry(0.0, 1, 1, 1)
    with pytest.raises(DomainError):
        Geometry(1, 1, 1, 1, ("front",))
    with pytest.raises(BoundaryError):
        Geometry(1, 1, 1, 1, ())
    g = Geometry(1, 2, 3, 4, ("left", "left", "top"), 2.0)
    assert g.gamma0 == ("left", "top")
    assert g.area == pytest.approx(21.0)


def test_edge_distance_and_gamma0():
    g = Geometry(1, 1, 1, 1, ("left", "bottom"))
    np.testing.assert_allclose(g.edge_distance(np.array([-1.0, 0.0]), np.array([0.5, -0.5])), [0.0, 0.5])
    assert g.on_gamma0(np.array(-1.0), np.array(0.3))
    assert not g.on_gamma0(np.array(1.0), np.array(0.3))


def test_zero_forces():
    fd = ForceData()
    r = derive_regime(3, 3, 0.1)
    x = np.array([[0.1, 0.0], [0.2, 0.0], [0.001, 0.5]])
    assert np.all(body_force(fd, r, x) == 0)
    assert force_norms(fd, Geometry(1, 1, 1, 1)) == (0.0, 0.0)
    assert fd.is_zero


def test_plate_force_scaling():
    fd = ForceData.build(["0", "0", "1"])
    r = derive_regime(3, 3, 0.1)
    np.testing.assert_allclose(plate_force(fd, r, 0.3, -0.2), [0, 0, r.delta**3])


def test_rod_force_scaling_and_support():
    fd = ForceData.build(None, ["0", "0", "1"])
    r = derive_regime(3, 3, 0.1)
    v = rod_force(fd, r, 0.0, 0.0, 0.5)
    np.testing.assert_allclose(v, [0, 0, r.q_eps**2 * r.epsilon**2], rtol=1e-14)
    # below x3 = delta the rod expression is not used
    assert np.all(rod_force(fd, r, 0.0, 0.0, 0.5 * r.delta) == 0)


def test_rod_force_g_terms():
    fd = ForceData.build(None, None, ["1", "0", "0"], ["0", "2", "0"])
    r = derive_regime(4, 4, 0.2)
    x1, x2 = 0.3 * r.epsilon, -0.1 * r.epsilon
    v = rod_force(fd, r, x1, x2, 0.5)
    s = r.q_eps**2 * r.epsilon**4 / r.epsilon**2
    np.testing.assert_allclose(v, [s * x1, s * 2 * x2, 0.0], rtol=1e-13)


def test_force_norms_examples():
    g = Geometry(1, 1, 1, 1, ("left",), 1.0)
    N_fp, N_fr = force_norms(ForceData.build(["0", "0", "1"], ["0", "0", "1"], ["1", "0", "0"]), g)
    assert N_fp == pytest.approx(2.0, rel=1e-10)
    assert N_fr == pytest.approx(2.0, rel=1e-10)


def test_table_profiles(tmp_path):
    p1 = tmp_path / "fr.csv"
    p1.write_text("x3,f1,f2,f3\n0,0,0,0\n1,1,2,3\n")
    p2 = tmp_path / "fp.csv"
    rows = ["x1,x2,f1,f2,f3"] + [f"{a},{b},0,0,{a + b}" for a in (-1, 1) for b in (-1, 1)]
    p2.write_text("\n".join(rows) + "\n")
    fd = ForceData.build(str(p2), str(p1))
    np.testing.assert_allclose(fd.f_r(np.array([0.5])), [[0.5], [1.0], [1.5]])
    np.testing.assert_allclose(fd.f_p(np.array([0.0]), np.array([0.5]))[2], [0.5])
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n")
    with pytest.raises(ConfigError):
        ForceData.build(None, str(bad))
    with pytest.raises(ConfigError):
        ForceData.build(None, str(tmp_path / "missing.csv"))
