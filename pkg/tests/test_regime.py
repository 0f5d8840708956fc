import math

import pytest

from platerod.errors import DomainError, RegimeError
from platerod.regime import derive_regime, is_critical, regime_from_delta


def test_critical_regime_values():
    r = derive_regime(3, 3, 0.1)
    assert r.theta == pytest.approx(2.0)
    assert r.eta == pytest.approx(2.0)
    assert r.delta == pytest.approx(0.01, rel=1e-14)
    assert r.q_eps == pytest.approx(0.01, rel=1e-14)
    assert r.plate_nonlinear and r.rod_nonlinear and not r.quadratic


def test_mixed_regime_values():
    r = derive_regime(5, 3, 1e-3)
    assert r.theta == pytest.approx(2.0 / 3.0)
    assert r.eta == pytest.approx(0.0, abs=1e-15)
    assert r.delta == pytest.approx(1e-2, rel=1e-13)
    assert r.q_eps == pytest.approx(1.0, rel=1e-14)
    assert not r.plate_nonlinear and r.rod_nonlinear


@pytest.mark.parametrize("k, kp", [(2.5, 3.0), (3.0, 2.9), (float("nan"), 3.0)])
def test_out_of_range_exponents(k, kp):
    with pytest.raises(RegimeError):
        derive_regime(k, kp, 0.1)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 2.0])
def test_epsilon_domain(eps):
    with pytest.raises(DomainError):
        derive_regime(3, 3, eps)


def test_identities_hold_for_tiny_epsilon():
    # powers like delta**4 amplify the last-bit error of delta, so the
    # bound scales with the exponents at this extreme epsilon
    r = derive_regime(4.5, 5.5, 1e-8)
    assert max(r.identity_residuals().values()) < 5e-14
    assert r.eta > -1


def test_regime_from_delta_round_trip():
    r = regime_from_delta(3, 4, 0.05)
    assert r.delta == pytest.approx(0.05, rel=1e-14)
    assert r.epsilon == pytest.approx(0.05 ** (1 / r.theta), rel=1e-14)


def test_is_critical():
    assert is_critical(3.0) and is_critical(3.0 + 1e-13) and not is_critical(3.1)
    assert not math.isnan(derive_regime(6, 6, 0.5).eta)
