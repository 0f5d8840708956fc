import numpy as np
import pytest

from platerod import limit as lim
from platerod import reduced as rd
from platerod.fields import AnalyticPlateField, AnalyticRodField
from platerod.material import derived_moduli


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.mark.parametrize("seed", range(4))
def test_brute_force_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    lam, mu = rng.uniform(0.2, 3.0, 2)
    for kp in (3.0, 4.0):
        s = rd.random_rod_sample(rng, kp)
        assert rel(rd.rod_brute_force(s, lam, mu), rd.rod_closed_form(s, lam, mu)) <= 1e-8
    s = rd.random_plate_sample(rng)
    assert rel(rd.plate_brute_force(s, lam, mu), rd.plate_closed_form(s, lam, mu)) <= 1e-8


def test_identity_residual_type_check():
    with pytest.raises(TypeError):
        rd.reduced_identity_residual(object())


def test_pure_modes():
    lam, mu = 1.0, 1.0
    E, nu = derived_moduli(lam, mu)
    s = rd.RodSample(0, 0, 1.0, 0, 0, 0, 0, 4.0)
    assert rd.rod_closed_form(s, lam, mu) == pytest.approx(E * lim.ROD_STRETCH)
    s = rd.RodSample(0, 0, 0, 0, 0, 0, 1.0, 4.0)
    assert rd.rod_brute_force(s, lam, mu) == pytest.approx(mu * np.pi / 4, rel=1e-10)
    s = rd.PlateSample(1.0, 0, 0, 0, 0, 0)
    assert rd.plate_brute_force(s, lam, mu) == pytest.approx(E / (3 * (1 - nu**2)), rel=1e-10)


def test_optimal_plate_warping_attains_minimum(rng):
    lam, mu = 1.4, 0.6
    _, nu = derived_moduli(lam, mu)
    h11, h12, h22, z11, z12, z22 = rng.normal(size=6)
    p = AnalyticPlateField(f"{z11}*x1 + {z12}*x2", f"{z12}*x1 + {z22}*x2",
                           f"({h11}*x1**2 + 2*{h12}*x1*x2 + {h22}*x2**2)/2")
    w = lim.OptimalPlateWarping(p, lim.MembraneStrain(p, 4), nu)
    s = rd.PlateSample(h11, h12, h22, z11, z12, z22)
    val = rd.plate_warping_energy(s, lam, mu, lambda X3: w.dX3(0 * X3, 0 * X3, X3))
    assert rel(val, rd.plate_closed_form(s, lam, mu)) <= 1e-12


def test_optimal_rod_warping_attains_minimum(rng):
    lam, mu = 0.9, 1.3
    _, nu = derived_moduli(lam, mu)
    a, b_, c, q = rng.normal(size=4)
    rod = AnalyticRodField(f"{a}*x3**2/2", f"{b_}*x3**2/2", f"{c}*x3", f"{q}*x3")
    w = lim.OptimalRodWarping(rod, lim.RodCorrection(rod, 4), nu)
    s = rd.RodSample(a, b_, c, 0.0, 0.0, 0.0, q, 4.0)
    val = rd.rod_warping_energy(s, lam, mu, lambda X1, X2: (w.dX(0, X1, X2, 0.0), w.dX(1, X1, X2, 0.0)))
    assert rel(val, rd.rod_closed_form(s, lam, mu)) <= 1e-12
