"""St Venant-Kirchhoff material law and Lame parameter bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError

# det F <= 0 maps here; inf + anything stays inf so sums report non-admissibility
INADMISSIBLE = math.inf


@dataclass(frozen=True)
class LameParams:
    lambda_p: float
    mu_p: float
    lambda_r: float
    mu_r: float

    def __post_init__(self):
        for name in ("lambda_p", "mu_p", "lambda_r", "mu_r"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")

    @property
    def plate_moduli(self) -> tuple[float, float]:
        return derived_moduli(self.lambda_p, self.mu_p)

    @property
    def rod_moduli(self) -> tuple[float, float]:
        return derived_moduli(self.lambda_r, self.mu_r)


def derived_moduli(lam: float, mu: float) -> tuple[float, float]:
    """Young modulus and Poisson ratio from Lame coefficients."""
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu!r}")
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam!r}")
    E = mu * (3.0 * lam + 2.0 * mu) / (lam + mu)
    nu = lam / (2.0 * (lam + mu))
    return E, nu


def quadratic_form(E, lam: float, mu: float) -> float:
    """(lam/8) (tr E)^2 + (mu/4) tr(E^2) for a symmetric 3x3 matrix."""
    E = np.asarray(E, dtype=float)
    if E.shape != (3, 3):
        raise ContractError(f"expected a 3x3 matrix, got shape {E.shape}")
    if np.max(np.abs(E - E.T)) > 1e-12:
        raise ContractError("quadratic_form needs a symmetric matrix")
    tr = np.trace(E)
    return float(lam / 8.0 * tr * tr + mu / 4.0 * np.sum(E * E))


def quadratic_form_batch(E: np.ndarray, lam: float, mu: float) -> np.ndarray:
    """Vectorized quadratic form over trailing 3x3 axes (no symmetry check)."""
    tr = E[..., 0, 0] + E[..., 1, 1] + E[..., 2, 2]
    return lam / 8.0 * tr * tr + mu / 4.0 * np.einsum("...ij,...ij->...", E, E)


def svk_density(F, lam: float, mu: float) -> float:
    """Stored energy of a deformation gradient; INADMISSIBLE when det F <= 0."""
    F = np.asarray(F, dtype=float)
    if np.linalg.det(F) <= 0.0:
        return INADMISSIBLE
    return quadratic_form(F.T @ F - np.eye(3), lam, mu)


def green_strain_from_displacement_gradient(H: np.ndarray) -> np.ndarray:
    """Returns F^T F - I for F = I + H, written as H + H^T + H^T H.

    Avoids the cancellation in F^T F - I when H is tiny, which is the
    normal situation in the thin-structure scalings.
    """
    Ht = np.swapaxes(H, -1, -2)
    return H + Ht + Ht @ H


def svk_density_batch(H: np.ndarray, lam: float, mu: float) -> np.ndarray:
    """Energy density for displacement gradients H (shape (..., 3, 3))."""
    W = quadratic_form_batch(green_strain_from_displacement_gradient(H), lam, mu)
    det = np.linalg.det(np.eye(3) + H)
    return np.where(det > 0.0, W, INADMISSIBLE)


def dist_so3(F) -> np.ndarray:
    """Frobenius distance from F (..., 3, 3) to SO(3) via the polar decomposition."""
    F = np.asarray(F, dtype=float)
    U, s, Vt = np.linalg.svd(F)
    d = np.sign(np.linalg.det(U @ Vt))
    d = np.where(d == 0, 1.0, d)
    s_rot = np.ones_like(s)
    s_rot[..., 2] = d
    R = U @ (s_rot[..., :, None] * Vt)
    return np.sqrt(np.sum((F - R) ** 2, axis=(-2, -1)))
