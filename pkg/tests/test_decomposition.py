import math

import numpy as np
import pytest

from platerod import quadrature as qd
from platerod.decomposition import (KORN_HEADER, decompose_plate, decompose_rod, korn_report, rescale_plate,
                                    rescale_rod, solve_tilde_u3, write_korn_csv)
from platerod.displacement import CallableDisplacement, ExpressionDisplacement, random_polynomial_displacement
from platerod.errors import BoundaryError, DomainError
from platerod.geometry import Geometry
from platerod.regime import regime_from_delta


def points(rng, n=12, delta=0.1):
    x = rng.uniform(-0.8, 0.8, (3, n))
    x[2] *= delta
    return x


def test_rescalings(rng):
    assert rescale_plate(lambda a, b, c: 0 * c + 2.0, 0.1)(0.3, 0.1, 0.5) == 2.0
    assert rescale_plate(lambda a, b, c: c, 0.1)(0.0, 0.0, 0.7) == pytest.approx(0.07)
    assert rescale_rod(lambda a, b, c: a + b, 0.2)(1.0, 2.0, 0.0) == pytest.approx(0.6)
    with pytest.raises(DomainError):
        rescale_plate(lambda *x: 0, 0.0)
    with pytest.raises(DomainError):
        rescale_rod(lambda *x: 0, -1.0)


def test_rescaling_l2_jacobian(rng):
    u = random_polynomial_displacement(rng, 2)
    d = 0.1
    X1, X2, W = qd.tensor2d(qd.breakpoints(-1, 1, (), 2), qd.breakpoints(-1, 1, (), 2), 5)
    t, wt = qd.gauss(6)
    f = rescale_plate(lambda a, b, c: u.value(a, b, c)[0], d)
    ref = sum(wt[k] * np.sum(W * f(X1, X2, t[k]) ** 2) for k in range(6))
    phys = sum(d * wt[k] * np.sum(W * u.value(X1, X2, d * t[k])[0] ** 2) for k in range(6))
    assert ref == pytest.approx(phys / d, rel=1e-12)
    e = 0.2
    D1, D2, Wd = qd.polar_disc(8, 16)
    g = rescale_rod(lambda a, b, c: u.value(a, b, c)[2], e)
    assert np.sum(Wd * g(D1, D2, 0.4) ** 2) == pytest.approx(
        np.sum(e**2 * Wd * u.value(e * D1, e * D2, 0.4)[2] ** 2) / e**2, rel=1e-12)


def test_plate_examples():
    d = 0.1
    pd = decompose_plate(ExpressionDisplacement("1", "2", "3"), d)
    np.testing.assert_allclose(pd.U(0.2, 0.3), [1, 2, 3])
    np.testing.assert_allclose(pd.R(0.2, 0.3), 0, atol=1e-14)
    pd = decompose_plate(ExpressionDisplacement("x3", "0", "0"), d)
    np.testing.assert_allclose(pd.U(0.2, 0.3), 0, atol=1e-15)
    assert pd.R(0.2, 0.3)[1] == pytest.approx(1.0)
    np.testing.assert_allclose(pd.u_bar(0.2, 0.3, 0.05), 0, atol=1e-14)
    pd = decompose_plate(ExpressionDisplacement("0", "0", "x1"), d)
    np.testing.assert_allclose(pd.U(0.2, 0.3), [0, 0, 0.2], atol=1e-15)
    np.testing.assert_allclose(pd.R(0.2, 0.3)[:2], 0, atol=1e-14)
    with pytest.raises(DomainError):
        decompose_plate(ExpressionDisplacement(), 0.0)


def test_rod_examples():
    e = 0.1
    rd = decompose_rod(ExpressionDisplacement("1", "2", "3"), e)
    np.testing.assert_allclose(rd.W(0.4), [1, 2, 3])
    np.testing.assert_allclose(rd.Q(0.4), 0, atol=1e-14)
    rd = decompose_rod(ExpressionDisplacement("-x2*sin(x3)", "x1*sin(x3)", "0"), e)
    assert rd.Q(0.4)[2] == pytest.approx(math.sin(0.4), rel=1e-12)
    np.testing.assert_allclose(rd.W(0.4), 0, atol=1e-15)
    np.testing.assert_allclose(rd.w_bar(0.05, -0.03, 0.4), 0, atol=1e-15)
    # u3 = x1 h gives Q2 = -h with the reconstruction-consistent moments
    rd = decompose_rod(ExpressionDisplacement("0", "0", "x1*(1 + x3**2)"), e)
    np.testing.assert_allclose(rd.Q(0.5), [0, -1.25, 0], atol=1e-12)
    rd = decompose_rod(ExpressionDisplacement("0", "0", "x2*(1 + x3**2)"), e)
    np.testing.assert_allclose(rd.Q(0.5), [1.25, 0, 0], atol=1e-12)
    with pytest.raises(DomainError):
        decompose_rod(ExpressionDisplacement(), 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_roundtrip_and_moments(seed):
    rng = np.random.default_rng(seed)
    u = random_polynomial_displacement(rng, 3)
    x = points(rng)
    pd = decompose_plate(u, 0.1)
    np.testing.assert_allclose(pd.elementary(*x) + pd.u_bar(*x), u.value(*x), atol=1e-12)
    assert pd.moments(x[0], x[1]) <= 1e-12
    rd = decompose_rod(u, 0.1)
    y = points(rng, delta=1.0)
    y[:2] *= 0.1
    np.testing.assert_allclose(rd.elementary(*y) + rd.w_bar(*y), u.value(*y), atol=1e-12)
    assert rd.moments(np.linspace(0, 1, 5)) <= 1e-12


def test_warping_gradients_match_finite_differences(rng):
    u = random_polynomial_displacement(rng, 3)
    pd, rd = decompose_plate(u, 0.1), decompose_rod(u, 0.1)
    x = np.array([0.3, -0.2, 0.04])
    h = 1e-5
    for dec, f, gf in ((pd, pd.u_bar, pd.grad_u_bar), (rd, rd.w_bar, rd.grad_w_bar)):
        G = gf(*x)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            np.testing.assert_allclose(G[:, j], (f(*(x + e)) - f(*(x - e))) / (2 * h), atol=1e-6)


def test_orthogonality_of_construction(rng):
    # elementary part plus a warping that already has zero moments
    d = 0.1
    U = ExpressionDisplacement("x1*x2", "x2**2", "1 + x1")
    u = ExpressionDisplacement(f"x1*x2 + x3*(x1 + 1) + (x3**2 - {d**2}/3)*x2",
                               f"x2**2 - x3*x2 + (x3**3 - 3*{d**2}/5*x3)",
                               "1 + x1 + (x3**2 - %r/3)" % d**2)
    pd = decompose_plate(u, d)
    x1, x2 = rng.uniform(-1, 1, (2, 5))
    np.testing.assert_allclose(pd.U(x1, x2), U.value(x1, x2, 0 * x1), atol=1e-14)
    np.testing.assert_allclose(pd.R(x1, x2)[:2], [x2, x1 + 1], atol=1e-13)


def test_tilde_u3_zero_and_errors():
    g = Geometry(1.0, 1.0, 1.0, 1.0, ("left",))
    t = solve_tilde_u3(lambda a, b: np.zeros((3,) + np.shape(a)), g, (4, 4))
    assert np.all(t.values == 0)
    with pytest.raises(BoundaryError):
        solve_tilde_u3(lambda a, b: np.zeros((3,) + np.shape(a)), Geometry(1, 1, 1, 1, ()), (4, 4))


def manufactured_R(x1, x2):
    s = x1 + 2.0
    return np.stack([-(s**2 - 1) * np.sin(x2), -2 * s * np.cos(x2), 0 * x1])


def tilde_error(n):
    g = Geometry(1.0, 1.0, 1.0, 1.0, ("left",))
    t = solve_tilde_u3(manufactured_R, g, (n, n))
    assert t.residual <= 1e-10
    X1, X2, W = qd.tensor2d(qd.breakpoints(-1, 1, (), 64), qd.breakpoints(-1, 1, (), 64), 4)
    exact = ((X1 + 2) ** 2 - 1) * np.cos(X2)
    return math.sqrt(np.sum(W * (t(X1, X2) - exact) ** 2))


def test_tilde_u3_manufactured_convergence():
    # U3 = ((x1 + 2)^2 - 1) cos x2 vanishes on x1 = -1; R = (d2 U3, -d1 U3, 0)
    errs = [tilde_error(n) for n in (8, 16, 32)]
    orders = [math.log2(errs[k] / errs[k + 1]) for k in range(2)]
    assert min(orders) >= 1.8


def test_tilde_u3_constant_R_self_convergence():
    g = Geometry(1.0, 1.0, 1.0, 1.0, ("left",))
    R = lambda a, b: np.stack([0 * a + 0.5, 0 * a - 1.0, 0 * a])  # noqa: E731
    ref = solve_tilde_u3(R, g, (64, 64))
    X1, X2, W = qd.tensor2d(qd.breakpoints(-1, 1, (), 16), qd.breakpoints(-1, 1, (), 16), 4)
    errs = [math.sqrt(np.sum(W * (solve_tilde_u3(R, g, (n, n))(X1, X2) - ref(X1, X2)) ** 2)) for n in (4, 8)]
    assert errs[1] < errs[0] / 3


def test_korn_zero_and_rigid(unit_geometry):
    r = regime_from_delta(3, 3, 0.1)
    rows = korn_report(ExpressionDisplacement(), r, unit_geometry, plate_cells=2, tilde_resolution=(4, 4))
    assert all(row.lhs == 0 for row in rows)
    b = np.array([0.01, -0.02, 0.015])
    u = ExpressionDisplacement(f"0.1 + {b[1]}*x3 - {b[2]}*x2", f"{b[2]}*x1 - {b[0]}*x3",
                               f"-0.2 + {b[0]}*x2 - {b[1]}*x1")
    rows = {row.inequality_id: row for row in korn_report(u, r, unit_geometry, plate_cells=2,
                                                          tilde_resolution=(4, 4))}
    assert rows["plate:ubar_L2"].lhs < 1e-13 and rows["rod:wbar_L2"].lhs < 1e-13
    assert rows["plate_korn:ua_L2"].rhs_scale < 1e-13  # infinitesimal rigid motion: G_s = 0


def test_korn_bending_ratios_bounded(tmp_path, unit_geometry):
    u = ExpressionDisplacement("-x3*(x1+1)", "0", "(x1+1)**2/2")
    ratios = []
    for d in (0.2, 0.1, 0.05):
        r = regime_from_delta(3, 3, d)
        rows = korn_report(u, r, unit_geometry, plate_cells=2, tilde_resolution=(4, 4))
        ratios.append({row.inequality_id: row.ratio for row in rows})
    for key in ("plate:ubar_L2", "plate:grad_ubar_L2", "plate:dR_L2", "plate:dU_minus_R_wedge_e"):
        vals = [rt[key] for rt in ratios]
        assert all(np.isfinite(vals)) and max(vals) <= 4 * max(vals[0], 1e-12)
    write_korn_csv(rows, tmp_path / "k.csv")
    head = (tmp_path / "k.csv").read_text().splitlines()[0]
    assert head == ",".join(KORN_HEADER)


def test_korn_nonfinite_raises(unit_geometry):
    bad = CallableDisplacement(lambda a, b, c: np.full((3,) + np.shape(a), np.nan),
                               lambda a, b, c: np.full((3, 3) + np.shape(a), np.nan))
    with pytest.raises(ArithmeticError):
        korn_report(bad, regime_from_delta(3, 3, 0.1), unit_geometry, plate_cells=2, tilde_resolution=(4, 4))
