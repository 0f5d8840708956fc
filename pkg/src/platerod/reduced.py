"""Brute-force oracle for the warping-eliminated limit integrands.

The thickness (plate) or cross-section (rod) integral of Q(2E) is
minimized over a polynomial warping space by solving the normal equations
exactly; the result is compared with the closed-form integrands used by
``limit``. Agreement validates the Lame -> (E, nu) identification and the
energy coefficients independently of any algebra done by hand.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as leg

from . import limit as lim
from . import quadrature as qd
from .material import derived_moduli


@dataclass(frozen=True)
class PlateSample:
    h11: float
    h12: float
    h22: float
    Z11: float
    Z12: float
    Z22: float


@dataclass(frozen=True)
class RodSample:
    W1pp: float
    W2pp: float
    W3p: float
    W1p: float
    W2p: float
    Q3: float
    Q3p: float
    kappa_prime: float = 3.0

    def rotation(self):
        return np.array([-self.W2p, self.W1p, self.Q3])

    def F(self) -> np.ndarray:
        if self.kappa_prime != 3.0:
            return np.zeros((3, 3))
        Q = self.rotation()
        return 0.5 * (Q @ Q * np.eye(3) - np.outer(Q, Q))


def _weights(lam, mu):
    # e = (E11, E22, E33, E12, E13, E23);  Q(2E) = e^T C e
    C = np.zeros((6, 6))
    C[:3, :3] = lam / 2.0
    C += mu * np.diag([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
    return C


def _minimize(e0, M, w, C):
    """min_c sum_q w_q (e0_q + M_q c)^T C (e0_q + M_q c)."""
    A = np.einsum("q,qki,kl,qlj->ij", w, M, C, M)
    b = np.einsum("q,qki,kl,ql->i", w, M, C, e0)
    c = np.linalg.lstsq(A, -b, rcond=1e-13)[0]
    e = e0 + np.einsum("qki,i->qk", M, c)
    return float(np.einsum("q,qk,kl,ql->", w, e, C, e)), c


def section_energy(e: np.ndarray, w: np.ndarray, lam: float, mu: float) -> float:
    """sum_q w_q Q(2E_q) with e in (E11, E22, E33, E12, E13, E23) order."""
    return float(np.einsum("q,qk,kl,ql->", w, e, _weights(lam, mu), e))


# ---------------------------------------------------------------- plate

def plate_base_strain(s: PlateSample, X3):
    z = np.zeros_like(X3)
    return np.stack([-X3 * s.h11 + s.Z11, -X3 * s.h22 + s.Z22, z, -X3 * s.h12 + s.Z12, z, z], axis=1)


def plate_brute_force(s: PlateSample, lam: float, mu: float, degree: int = 6, n: int = 64) -> float:
    X3, w = qd.gauss(n)
    e0 = plate_base_strain(s, X3)
    # derivatives of Legendre P_1..P_degree
    dP = np.stack([leg.legval(X3, leg.legder(np.eye(degree + 1)[k])) for k in range(1, degree + 1)], axis=1)
    nb = dP.shape[1]
    M = np.zeros((len(X3), 6, 3 * nb))
    M[:, 4, 0:nb] = 0.5 * dP        # E13 from u1
    M[:, 5, nb:2 * nb] = 0.5 * dP   # E23 from u2
    M[:, 2, 2 * nb:] = dP           # E33 from u3
    return _minimize(e0, M, w, _weights(lam, mu))[0]


def plate_closed_form(s: PlateSample, lam: float, mu: float) -> float:
    E, nu = derived_moduli(lam, mu)
    bend = (1 - nu) * (s.h11**2 + 2 * s.h12**2 + s.h22**2) + nu * (s.h11 + s.h22) ** 2
    memb = (1 - nu) * (s.Z11**2 + 2 * s.Z12**2 + s.Z22**2) + nu * (s.Z11 + s.Z22) ** 2
    return E / (3 * (1 - nu**2)) * bend + E / (1 - nu**2) * memb


def plate_warping_energy(s: PlateSample, lam: float, mu: float, dwarp, n: int = 64) -> float:
    """Thickness integral for a given warping; ``dwarp(X3)`` returns (3, n)."""
    X3, w = qd.gauss(n)
    e = plate_base_strain(s, X3)
    d = dwarp(X3)
    e[:, 4] += 0.5 * d[0]
    e[:, 5] += 0.5 * d[1]
    e[:, 2] += d[2]
    return section_energy(e, w, lam, mu)


# ---------------------------------------------------------------- rod

def rod_base_strain(s: RodSample, X1, X2):
    F = s.F()
    one = np.ones_like(X1)
    return np.stack([
        F[0, 0] * one,
        F[1, 1] * one,
        -X1 * s.W1pp - X2 * s.W2pp + s.W3p + F[2, 2],
        F[0, 1] * one,
        -0.5 * X2 * s.Q3p + F[0, 2],
        0.5 * X1 * s.Q3p + F[1, 2],
    ], axis=1)


def rod_brute_force(s: RodSample, lam: float, mu: float, degree: int = 3,
                    n_r: int = 16, n_t: int = 32) -> float:
    X1, X2, w = qd.polar_disc(n_r, n_t)
    e0 = rod_base_strain(s, X1, X2)
    exps = [(a, k - a) for k in range(1, degree + 1) for a in range(k + 1)]
    d1 = np.stack([a * X1 ** max(a - 1, 0) * X2**b for a, b in exps], axis=1)
    d2 = np.stack([b * X1**a * X2 ** max(b - 1, 0) for a, b in exps], axis=1)
    nb = len(exps)
    M = np.zeros((len(X1), 6, 3 * nb))
    u1, u2, u3 = slice(0, nb), slice(nb, 2 * nb), slice(2 * nb, 3 * nb)
    M[:, 0, u1] = d1
    M[:, 1, u2] = d2
    M[:, 3, u1] = 0.5 * d2
    M[:, 3, u2] = 0.5 * d1
    M[:, 4, u3] = 0.5 * d1
    M[:, 5, u3] = 0.5 * d2
    return _minimize(e0, M, w, _weights(lam, mu))[0]


def rod_closed_form(s: RodSample, lam: float, mu: float) -> float:
    E, _ = derived_moduli(lam, mu)
    F33 = s.F()[2, 2]
    return (E * lim.ROD_BEND * (s.W1pp**2 + s.W2pp**2)
            + E * lim.ROD_STRETCH * (s.W3p + F33) ** 2
            + mu * lim.ROD_TORSION * s.Q3p**2)


def rod_warping_energy(s: RodSample, lam: float, mu: float, grad, n_r: int = 16, n_t: int = 32) -> float:
    """Cross-section integral for a warping whose in-section gradient is
    ``grad(X1, X2) -> (dX1 w, dX2 w)``, each of shape (3, n)."""
    X1, X2, w = qd.polar_disc(n_r, n_t)
    e = rod_base_strain(s, X1, X2)
    g1, g2 = grad(X1, X2)
    e[:, 0] += g1[0]
    e[:, 1] += g2[1]
    e[:, 3] += 0.5 * (g2[0] + g1[1])
    e[:, 4] += 0.5 * g1[2]
    e[:, 5] += 0.5 * g2[2]
    return section_energy(e, w, lam, mu)


def reduced_identity_residual(sample, lam: float = 1.0, mu: float = 1.0) -> float:
    """|brute-force minimum - closed form| / (1 + |closed form|)."""
    if isinstance(sample, PlateSample):
        brute, closed = plate_brute_force(sample, lam, mu), plate_closed_form(sample, lam, mu)
    elif isinstance(sample, RodSample):
        brute, closed = rod_brute_force(sample, lam, mu), rod_closed_form(sample, lam, mu)
    else:
        raise TypeError(f"expected PlateSample or RodSample, got {type(sample).__name__}")
    return abs(brute - closed) / (1.0 + abs(closed))


def random_plate_sample(rng) -> PlateSample:
    return PlateSample(*rng.normal(size=6))


def random_rod_sample(rng, kappa_prime: float = 3.0) -> RodSample:
    return RodSample(*rng.normal(size=7), kappa_prime=kappa_prime)
