import math

import numpy as np
import pytest
from conftest import study_forces, study_geometry, study_lame, study_triple

from platerod import bridge3d as b
from platerod import quadrature as qd
from platerod.errors import MatchingError
from platerod.fields import AnalyticPlateField, AnalyticRodField, LimitTriple
from platerod.forces import ForceData, plate_force, rod_force
from platerod.regime import regime_from_delta

SMALL = b.BridgeQuad(plate_cells=2, plate_order=5, thickness_order=5, rod_cells=4, rod_order=5,
                     disc_radial=6, disc_angular=12)


@pytest.fixture(scope="module")
def approx():
    return b.mollify_triple(study_triple(), study_lame(), study_geometry(), 3.0, 3.0, 2)


@pytest.fixture(scope="module")
def recovery(approx):
    r = regime_from_delta(3.0, 3.0, 0.1)
    return b.build_recovery_deformation(approx, r), r


def cylinder_points(rng, r, n=100):
    th = rng.uniform(0, 2 * math.pi, n)
    rad = r.epsilon * np.sqrt(rng.uniform(0, 1, n))
    return rad * np.cos(th), rad * np.sin(th), rng.uniform(-r.delta, r.delta, n)


def test_smoothstep_and_cutoff():
    t = np.array([-0.5, 0.0, 0.5, 1.0, 1.5])
    np.testing.assert_allclose(b.smoothstep(t), [0, 0, 0.5, 1, 1])
    for d in (1, 2):
        assert np.all(b.smoothstep(np.array([0.0, 1.0]), d) == 0)
    s = np.linspace(0.2, 0.45, 7)
    h = 1e-6
    np.testing.assert_allclose(b.cutoff(s, 4, 1), (b.cutoff(s + h, 4) - b.cutoff(s - h, 4)) / (2 * h), atol=1e-6)
    assert np.all(b.cutoff(np.array([0.0, 0.25]), 4) == 0) and np.all(b.cutoff(np.array([0.5, 3.0]), 4) == 1)


def test_mollify_zero_triple_gives_identity(unit_geometry, unit_lame, rng):
    ap = b.mollify_triple(LimitTriple(), unit_lame, unit_geometry, 3.0, 3.0, 4)
    z = rng.uniform(0, 1, 10)
    for i in range(4):
        assert np.all(ap.triple.rod.eval(i, 0, z) == 0)
    r = regime_from_delta(3.0, 3.0, 0.05)
    v = b.build_recovery_deformation(ap, r)
    x = rng.uniform(-0.9, 0.9, (3, 10))
    x[2] *= r.delta
    np.testing.assert_allclose(v(x), x, atol=1e-15)
    np.testing.assert_allclose(v.plate_grad(*x), 0, atol=1e-15)
    with pytest.raises(ValueError):
        b.mollify_triple(LimitTriple(), unit_lame, unit_geometry, 3.0, 3.0, 1)


def test_mollified_rod_support(approx):
    rod, src = approx.triple.rod, study_triple()
    n = approx.n
    z = np.linspace(0, 1.0 / n, 9)
    u3 = float(src.plate.eval(2, 0, 0, 0.0, 0.0))
    for i in (0, 1, 3):
        for d in (0, 1, 2):
            assert np.all(rod.eval(i, d, z) == 0)
    np.testing.assert_allclose(rod.eval(2, 0, z), u3)
    tail = np.linspace(2.0 / n, 2.0, 9)
    for i in range(4):
        np.testing.assert_allclose(rod.eval(i, 0, tail), src.rod.eval(i, 0, tail), atol=1e-15)


def test_mollified_rod_h2_error_decreases():
    rod = AnalyticRodField("x3**2 - x3**3/3", "0.5*x3**3", "0", "0")
    z, w = qd.composite(qd.breakpoints(0, 1, tuple(1.0 / n for n in (4, 8, 16, 32)) + (0.5, 0.25, 0.125, 0.0625), 4), 8)
    errs = []
    for n in (4, 8, 16, 32):
        m = b.MollifiedRodField(rod, 0.0, n)
        errs.append(math.sqrt(sum(np.sum(w * (m.eval(i, d, z) - rod.eval(i, d, z)) ** 2)
                                  for i in (0, 1) for d in (0, 1, 2))))
    assert all(b_ < a for a, b_ in zip(errs, errs[1:]))


def test_matching_errors(approx):
    with pytest.raises(MatchingError):
        b.build_recovery_deformation(approx, regime_from_delta(3.0, 3.0, 0.6))
    # delta = 0.4 <= 1/n but eps = 0.63 > 1/n: the rod would reach the plate warping support
    r = regime_from_delta(3.0, 3.0, 0.4)
    assert r.delta <= 0.5 < r.epsilon
    with pytest.raises(MatchingError, match="epsilon"):
        b.build_recovery_deformation(approx, r)


def test_junction_cylinder_matching(recovery, rng):
    v, r = recovery
    x = cylinder_points(rng, r)
    np.testing.assert_allclose(v.plate_displacement(*x), v.rod_displacement(*x), atol=1e-14, rtol=0)
    np.testing.assert_allclose(v.plate_grad(*x), v.rod_grad(*x), atol=1e-14, rtol=0)


def test_clamped_on_gamma0(recovery, rng):
    v, r = recovery
    g = v.geometry
    x2 = rng.uniform(*g.x2_range, 20)
    x3 = rng.uniform(-r.delta, r.delta, 20)
    x = np.stack([np.full(20, -g.a), x2, x3])
    np.testing.assert_allclose(v(x), x, atol=1e-15)


def test_gradient_matches_finite_differences(recovery, rng):
    v, r = recovery
    h = 1e-7
    for pts, disp, grad in (((0.3, -0.2, 0.5 * r.delta), v.plate_displacement, v.plate_grad),
                            ((0.3 * r.epsilon, 0.1 * r.epsilon, 0.7), v.rod_displacement, v.rod_grad)):
        x = np.array(pts)
        G = grad(*x)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            np.testing.assert_allclose(G[:, j], (disp(*(x + e)) - disp(*(x - e))) / (2 * h), atol=1e-6)


def test_energy_identity_rotation_reflection(unit_geometry, unit_lame):
    r = regime_from_delta(3.0, 3.0, 0.1)
    fd = ForceData.build(["0.2", "0", "1"], ["0", "0.1", "0.3"], ["0.1", "0", "0"])
    en = b.energy_3d(b.linear_deformation(unit_geometry, r, np.eye(3)), unit_lame, fd, r, SMALL)
    assert en.total == 0 and en.admissible
    c, s = math.cos(0.3), math.sin(0.3)
    Rm = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]]) @ np.array([[1, 0, 0], [0, c, s], [0, -s, c]])
    v = b.linear_deformation(unit_geometry, r, Rm)
    en = b.energy_3d(v, unit_lame, fd, r, SMALL)
    assert en.admissible
    assert abs(en.strain_plate) + abs(en.strain_rod) < 1e-28
    assert en.total == pytest.approx(-en.work)
    # the work is the quadrature of f . (R x - x) over the structure
    X1, X2, W = qd.tensor2d(qd.breakpoints(-1, 1, (), 2), qd.breakpoints(-1, 1, (), 2), 5)
    T, wt = qd.gauss(5)
    work = 0.0
    for k in range(5):
        x = np.stack([X1, X2, r.delta * T[k] + 0 * X1])
        work += r.delta * wt[k] * np.sum(W * np.sum(plate_force(fd, r, X1, X2) * ((Rm - np.eye(3)) @ x), axis=0))
    D1, D2, Wd = qd.polar_disc(6, 12)
    z, wz = qd.composite(qd.breakpoints(r.delta, 1.0, (), 4), 5)
    for k in range(len(z)):
        x = np.stack([r.epsilon * D1, r.epsilon * D2, z[k] + 0 * D1])
        work += wz[k] * r.epsilon**2 * np.sum(Wd * np.sum(rod_force(fd, r, x[0], x[1], x[2]) * ((Rm - np.eye(3)) @ x), axis=0))
    assert en.work == pytest.approx(work, rel=1e-12)
    ref = b.linear_deformation(unit_geometry, r, np.diag([1.0, 1.0, -1.0]))
    en = b.energy_3d(ref, unit_lame, fd, r, SMALL)
    assert not en.admissible and en.total == math.inf


def test_energy_backends_agree(recovery):
    from platerod import kernels

    if not kernels.use_numba():
        pytest.skip("numba not available")
    v, r = recovery
    a = b.energy_3d(v, study_lame(), study_forces(), r, SMALL, backend="numpy")
    c = b.energy_3d(v, study_lame(), study_forces(), r, SMALL, backend="numba")
    assert c.total == pytest.approx(a.total, rel=1e-12)


def test_rescaled_gsv_identity_and_symmetry(unit_geometry, recovery, rng):
    r = regime_from_delta(3.0, 3.0, 0.1)
    pl, rd = b.rescaled_gsv(b.linear_deformation(unit_geometry, r, np.eye(3)), r)
    assert np.all(pl(0.1, 0.2, 0.3) == 0) and np.all(rd(0.1, 0.2, 0.3) == 0)
    v, r = recovery
    pl, rd = b.rescaled_gsv(v, r)
    E = pl(rng.uniform(-1, 1, 5), rng.uniform(-1, 1, 5), rng.uniform(-1, 1, 5))
    np.testing.assert_allclose(E, np.swapaxes(E, 0, 1), atol=1e-15)


def test_rod_centerline_33_entry(approx):
    errs = []
    for d in (0.1, 0.05):
        r = regime_from_delta(3.0, 3.0, d)
        v = b.build_recovery_deformation(approx, r)
        _, rd = b.rescaled_gsv(v, r)
        z = np.linspace(0.6, 1.8, 5)
        rod = approx.triple.rod
        target = rod.eval(2, 1, z) + approx.F.F33(z)
        errs.append(np.max(np.abs(rd(0 * z, 0 * z, z)[2, 2] - target)))
    assert errs[1] < errs[0]


def test_small_study_and_csv(tmp_path):
    res = b.convergence_study(study_triple(), study_lame(), study_forces(), 3.0, 3.0, [0.6, 0.2, 0.1], 2,
                              study_geometry(), SMALL)
    assert len(res.rows) == 2 and len(res.warnings) == 1 and "skipped" in res.warnings[0]
    assert res.rows[1].gap < res.rows[0].gap
    for row in res.rows:
        assert all(np.isfinite(row.values()))
    b.write_study_csv(res.rows, tmp_path / "s.csv")
    b.write_gap_plot_csv(res.rows, tmp_path / "p.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == ",".join(b.STUDY_HEADER) and len(lines) == 3
    with pytest.raises(ValueError):
        b.convergence_study(study_triple(), study_lame(), study_forces(), 3.0, 3.0, [0.1, 0.2], 2,
                            study_geometry(), SMALL)


def test_richardson_exact_for_power_law():
    d = np.array([0.2, 0.1, 0.05, 0.025])
    est, p = b.richardson(d, 3.0 + 0.7 * d**1.5)
    assert est == pytest.approx(3.0, rel=1e-12) and p == pytest.approx(1.5, rel=1e-10)
    est, p = b.richardson(d, np.full(4, 2.0))
    assert est == 2.0 and math.isnan(p)
