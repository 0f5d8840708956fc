"""Scaling exponents tying the plate thickness to the rod radius."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, RegimeError


def is_critical(k: float) -> bool:
    """kappa == 3 switches on the geometric nonlinearity."""
    return abs(k - 3.0) <= 1e-12


@dataclass(frozen=True)
class ScalingRegime:
    kappa: float
    kappa_prime: float
    theta: float
    eta: float
    epsilon: float
    delta: float
    q_eps: float

    @property
    def plate_nonlinear(self) -> bool:
        return is_critical(self.kappa)

    @property
    def rod_nonlinear(self) -> bool:
        return is_critical(self.kappa_prime)

    @property
    def quadratic(self) -> bool:
        return not (self.plate_nonlinear or self.rod_nonlinear)

    def identity_residuals(self) -> dict[str, float]:
        """Relative residuals of the three parameter identities."""
        d, e, q = self.delta, self.epsilon, self.q_eps
        k, kp, eta = self.kappa, self.kappa_prime, self.eta

        def rel(a, b):
            return abs(a - b) / max(abs(a), abs(b))

        return {
            "lien1": rel(d ** (k - 0.5), q * e**kp),
            "lien2": rel(d ** (k - 2.0), e ** (kp - 1.0)),
            "releta_q": rel(d**3, q * q * e * e),
            "releta_eps": rel(d**3, e ** (2.0 * eta + 2.0)),
        }


def _exponents(kappa: float, kappa_prime: float) -> tuple[float, float]:
    for name, v in (("kappa", kappa), ("kappa_prime", kappa_prime)):
        if not math.isfinite(v) or v < 3.0:
            raise RegimeError(f"{name} must be >= 3, got {v!r}")
    theta = (kappa_prime - 1.0) / (kappa - 2.0)
    eta = 1.5 * theta - 1.0
    return theta, eta


def derive_regime(kappa: float, kappa_prime: float, epsilon: float) -> ScalingRegime:
    theta, eta = _exponents(kappa, kappa_prime)
    if not (0.0 < epsilon < 1.0):
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    # logs keep the identities at round-off level even for tiny epsilon
    le = math.log(epsilon)
    delta = math.exp(theta * le)
    q_eps = math.exp(eta * le)
    return ScalingRegime(float(kappa), float(kappa_prime), theta, eta, float(epsilon), delta, q_eps)


def regime_from_delta(kappa: float, kappa_prime: float, delta: float) -> ScalingRegime:
    """Same as derive_regime but driven by the plate half-thickness."""
    theta, _ = _exponents(kappa, kappa_prime)
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    return derive_regime(kappa, kappa_prime, math.exp(math.log(delta) / theta))
