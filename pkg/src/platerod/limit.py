"""The limit functional J3 = Jp + Jr - L3 over junction-constrained triples.

Energies are evaluated in warping-eliminated form. Integrands use the
convention that the 3D density is Q(F^T F - I) = Q(2 E) with E the
Green-St Venant tensor, which fixes the coefficients below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as qd
from .errors import ConstraintError
from .material import derived_moduli
from .regime import is_critical

# rod stretching, bending and torsion weights (times E_r, E_r, mu_r)
ROD_STRETCH = math.pi / 2.0
ROD_BEND = math.pi / 8.0
# a disc has no torsion warping and int_D r^2 = pi/2, so Q(2E) gives mu pi/4
ROD_TORSION = math.pi / 4.0
# int_{D_eps} x_a^2 = pi eps^4 / 4 under the rod force scaling
LOAD_G = math.pi / 4.0


@dataclass(frozen=True)
class QuadSpec:
    """Composite Gauss settings. ``cells`` splits each interval between
    field/force breakpoints; discrete fields report their mesh as breaks."""

    plate_cells: int = 4
    plate_order: int = 6
    rod_cells: int = 8
    rod_order: int = 6


DEFAULT_QUAD = QuadSpec()


def plate_grid(plate, geometry, quad: QuadSpec = DEFAULT_QUAD, extra=((), ())):
    b1 = qd.breakpoints(*geometry.x1_range, tuple(plate.breaks1) + tuple(extra[0]), quad.plate_cells)
    b2 = qd.breakpoints(*geometry.x2_range, tuple(plate.breaks2) + tuple(extra[1]), quad.plate_cells)
    return qd.tensor2d(b1, b2, quad.plate_order)


def rod_grid(rod, L, quad: QuadSpec = DEFAULT_QUAD, extra=(), lo=0.0):
    b = qd.breakpoints(lo, L, tuple(rod.breaks) + tuple(extra), quad.rod_cells)
    return qd.composite(b, quad.rod_order)


# ---------------------------------------------------------------- strains

class MembraneStrain:
    """Z_ab = gamma_ab(U) (+ 1/2 dU3_a dU3_b when kappa = 3)."""

    def __init__(self, plate, kappa: float):
        self.plate = plate
        self.s = 1.0 if is_critical(kappa) else 0.0

    def __call__(self, x1, x2) -> np.ndarray:
        p, s = self.plate, self.s
        a1, a2 = p.eval(2, 1, 0, x1, x2), p.eval(2, 0, 1, x1, x2)
        z11 = p.eval(0, 1, 0, x1, x2) + 0.5 * s * a1 * a1
        z22 = p.eval(1, 0, 1, x1, x2) + 0.5 * s * a2 * a2
        z12 = 0.5 * (p.eval(0, 0, 1, x1, x2) + p.eval(1, 1, 0, x1, x2)) + 0.5 * s * a1 * a2
        return np.array([[z11, z12], [z12, z22]])

    def trace_grad(self, x1, x2) -> np.ndarray:
        """Gradient of Z11 + Z22, shape (2, ...)."""
        p, s = self.plate, self.s
        a1, a2 = p.eval(2, 1, 0, x1, x2), p.eval(2, 0, 1, x1, x2)
        h11, h12, h22 = p.eval(2, 2, 0, x1, x2), p.eval(2, 1, 1, x1, x2), p.eval(2, 0, 2, x1, x2)
        g1 = p.eval(0, 2, 0, x1, x2) + p.eval(1, 1, 1, x1, x2) + s * (a1 * h11 + a2 * h12)
        g2 = p.eval(0, 1, 1, x1, x2) + p.eval(1, 0, 2, x1, x2) + s * (a1 * h12 + a2 * h22)
        return np.array([g1, g2])


def membrane_strain(plate, kappa: float) -> MembraneStrain:
    return MembraneStrain(plate, kappa)


class RodCorrection:
    """F = 1/2 (|Q|^2 I - Q Q^T) for kappa' = 3, Q = (-W2', W1', Q3); else 0."""

    def __init__(self, rod, kappa_prime: float):
        self.rod = rod
        self.s = 1.0 if is_critical(kappa_prime) else 0.0

    def rotation(self, x3, d: int = 0) -> np.ndarray:
        r = self.rod
        return np.array([-r.eval(1, d + 1, x3), r.eval(0, d + 1, x3), r.eval(3, d, x3)])

    def __call__(self, x3) -> np.ndarray:
        Q = self.rotation(x3)
        n2 = np.sum(Q * Q, axis=0)
        F = 0.5 * self.s * (n2 * np.eye(3)[(...,) + (None,) * np.ndim(n2)] - Q[:, None] * Q[None, :])
        return F

    def derivative(self, x3) -> np.ndarray:
        Q, dQ = self.rotation(x3), self.rotation(x3, 1)
        dn2 = 2.0 * np.sum(Q * dQ, axis=0)
        return 0.5 * self.s * (dn2 * np.eye(3)[(...,) + (None,) * np.ndim(dn2)]
                               - dQ[:, None] * Q[None, :] - Q[:, None] * dQ[None, :])

    def F33(self, x3) -> np.ndarray:
        r = self.rod
        return 0.5 * self.s * (r.eval(0, 1, x3) ** 2 + r.eval(1, 1, x3) ** 2)


def rod_correction(rod, kappa_prime: float) -> RodCorrection:
    return RodCorrection(rod, kappa_prime)


# ---------------------------------------------------------------- energies

def plate_energy_density(plate, lp, kappa, x1, x2) -> np.ndarray:
    E, nu = derived_moduli(lp.lambda_p, lp.mu_p)
    h11, h12, h22 = plate.eval(2, 2, 0, x1, x2), plate.eval(2, 1, 1, x1, x2), plate.eval(2, 0, 2, x1, x2)
    Z = membrane_strain(plate, kappa)(x1, x2)
    bend = (1 - nu) * (h11**2 + 2 * h12**2 + h22**2) + nu * (h11 + h22) ** 2
    memb = (1 - nu) * (Z[0, 0] ** 2 + 2 * Z[0, 1] ** 2 + Z[1, 1] ** 2) + nu * (Z[0, 0] + Z[1, 1]) ** 2
    return E / (3 * (1 - nu**2)) * bend + E / (1 - nu**2) * memb


def rod_energy_density(rod, lp, kappa_prime, x3) -> np.ndarray:
    E, _ = derived_moduli(lp.lambda_r, lp.mu_r)
    F33 = rod_correction(rod, kappa_prime).F33(x3)
    bend = rod.eval(0, 2, x3) ** 2 + rod.eval(1, 2, x3) ** 2
    stretch = (rod.eval(2, 1, x3) + F33) ** 2
    twist = rod.eval(3, 1, x3) ** 2
    return E * ROD_BEND * bend + E * ROD_STRETCH * stretch + lp.mu_r * ROD_TORSION * twist


def plate_energy(plate, lp, kappa, geometry, quad: QuadSpec = DEFAULT_QUAD) -> float:
    X1, X2, W = plate_grid(plate, geometry, quad)
    return float(np.sum(W * plate_energy_density(plate, lp, kappa, X1, X2)))


def rod_energy(rod, lp, kappa_prime, L, quad: QuadSpec = DEFAULT_QUAD) -> float:
    z, w = rod_grid(rod, L, quad)
    return float(np.sum(w * rod_energy_density(rod, lp, kappa_prime, z)))


def load_functional(triple, fd, geometry, quad: QuadSpec = DEFAULT_QUAD) -> float:
    """L3 = 2 int f_p.U + pi int f_r.W + (pi/4) sum_a int g_a.(Q ^ e_a)."""
    plate, rod = triple.plate, triple.rod
    X1, X2, W = plate_grid(plate, geometry, quad, fd.plate_breaks)
    lp = 2.0 * np.sum(W * np.sum(fd.f_p(X1, X2) * plate.values(X1, X2), axis=0))
    z, w = rod_grid(rod, geometry.L, quad, fd.rod_breaks)
    vals = rod.values(z)
    lr = math.pi * np.sum(w * np.sum(fd.f_r(z)[:3] * vals[:3], axis=0))
    dW1, dW2, Q3 = rod.eval(0, 1, z), rod.eval(1, 1, z), vals[3]
    g1, g2 = fd.g1(z), fd.g2(z)
    # Q ^ e1 = (0, Q3, -W1'), Q ^ e2 = (-Q3, 0, -W2')
    wedge = g1[1] * Q3 - g1[2] * dW1 - g2[0] * Q3 - g2[2] * dW2
    lg = LOAD_G * np.sum(w * wedge)
    return float(lp + lr + lg)


def total_energy(triple, lp, fd, r, geometry, quad: QuadSpec = DEFAULT_QUAD, tol: float = 1e-10) -> float:
    res = triple.junction_residual()
    if res > tol:
        raise ConstraintError(f"junction tie W3(0) = U3(0,0) violated (relative residual {res:.3e})")
    return (plate_energy(triple.plate, lp, r.kappa, geometry, quad)
            + rod_energy(triple.rod, lp, r.kappa_prime, geometry.L, quad)
            - load_functional(triple, fd, geometry, quad))


# ---------------------------------------------------------------- warpings

class PlateWarping:
    """Warping on omega x (-1, 1). Subclasses give value and derivatives;
    each returns an array of shape (3, ...)."""

    def value(self, x1, x2, X3):
        raise NotImplementedError

    def dX3(self, x1, x2, X3):
        raise NotImplementedError

    def dx(self, a: int, x1, x2, X3):
        raise NotImplementedError


class OptimalPlateWarping(PlateWarping):
    """nu/(1-nu) [(X3^2/2 - 1/6) Lap U3 - X3 tr Z] e3."""

    def __init__(self, plate, Z: MembraneStrain, nu: float):
        self.plate, self.Z, self.c = plate, Z, nu / (1.0 - nu)

    def _parts(self, x1, x2):
        p = self.plate
        lap = p.eval(2, 2, 0, x1, x2) + p.eval(2, 0, 2, x1, x2)
        Z = self.Z(x1, x2)
        return lap, Z[0, 0] + Z[1, 1]

    def value(self, x1, x2, X3):
        lap, tr = self._parts(x1, x2)
        u3 = self.c * ((X3**2 / 2 - 1.0 / 6.0) * lap - X3 * tr)
        z = np.zeros_like(u3)
        return np.stack([z, z, u3])

    def dX3(self, x1, x2, X3):
        lap, tr = self._parts(x1, x2)
        u3 = self.c * (X3 * lap - tr)
        z = np.zeros_like(u3)
        return np.stack([z, z, u3])

    def dx(self, a, x1, x2, X3):
        p = self.plate
        if a == 0:
            dlap = p.eval(2, 3, 0, x1, x2) + p.eval(2, 1, 2, x1, x2)
        else:
            dlap = p.eval(2, 2, 1, x1, x2) + p.eval(2, 0, 3, x1, x2)
        dtr = self.Z.trace_grad(x1, x2)[a]
        u3 = self.c * ((X3**2 / 2 - 1.0 / 6.0) * dlap - X3 * dtr)
        u3 = np.broadcast_to(u3, np.broadcast(x1, x2, X3).shape)
        z = np.zeros_like(u3)
        return np.stack([z, z, u3])


def optimal_plate_warping(plate, Z: MembraneStrain, nu_p: float) -> OptimalPlateWarping:
    return OptimalPlateWarping(plate, Z, nu_p)


class RodWarping:
    """Warping on D x (0, L); value(X1, X2, x3) and derivatives, shape (3, ...)."""

    def value(self, X1, X2, x3):
        raise NotImplementedError

    def dX(self, a: int, X1, X2, x3):
        raise NotImplementedError

    def dx3(self, X1, X2, x3):
        raise NotImplementedError


class OptimalRodWarping(RodWarping):
    """Cross-section warping minimizing the rod integrand.

    w1 = -nu[(X2^2-X1^2)/2 W1'' - X1 X2 W2'' + X1 e] - X1 F11 - X2 F12
    w2 = -nu[(X1^2-X2^2)/2 W2'' - X1 X2 W1'' + X2 e] - X1 F12 - X2 F22
    w3 = -2 X1 F13 - 2 X2 F23,   with e = W3' + F33.
    The F terms make the in-plane strain equal to -nu e I and cancel the
    shear coming from F, which is what the optimality conditions require.
    """

    def __init__(self, rod, F: RodCorrection, nu: float):
        self.rod, self.F, self.nu = rod, F, nu

    def _coef(self, x3, d):
        r = self.rod
        a1, a2 = r.eval(0, 2 + d, x3), r.eval(1, 2 + d, x3)
        if d == 0:
            e = r.eval(2, 1, x3) + self.F.F33(x3)
            F = self.F(x3)
        else:
            F = self.F.derivative(x3)
            e = r.eval(2, 2, x3) + F[2, 2]
        return a1, a2, e, F

    def _eval(self, X1, X2, x3, d=0):
        a1, a2, e, F = self._coef(x3, d)
        nu = self.nu
        w1 = -nu * ((X2**2 - X1**2) / 2 * a1 - X1 * X2 * a2 + X1 * e) - X1 * F[0, 0] - X2 * F[0, 1]
        w2 = -nu * ((X1**2 - X2**2) / 2 * a2 - X1 * X2 * a1 + X2 * e) - X1 * F[0, 1] - X2 * F[1, 1]
        w3 = -2 * X1 * F[0, 2] - 2 * X2 * F[1, 2]
        return np.stack(np.broadcast_arrays(w1, w2, w3))

    def value(self, X1, X2, x3):
        return self._eval(X1, X2, x3)

    def dx3(self, X1, X2, x3):
        return self._eval(X1, X2, x3, d=1)

    def dX(self, a, X1, X2, x3):
        a1, a2, e, F = self._coef(x3, 0)
        nu = self.nu
        if a == 0:
            w1 = -nu * (-X1 * a1 - X2 * a2 + e) - F[0, 0]
            w2 = -nu * (X1 * a2 - X2 * a1) - F[0, 1]
            w3 = -2 * F[0, 2]
        else:
            w1 = -nu * (X2 * a1 - X1 * a2) - F[0, 1]
            w2 = -nu * (-X2 * a2 - X1 * a1 + e) - F[1, 1]
            w3 = -2 * F[1, 2]
        return np.stack(np.broadcast_arrays(w1, w2, w3))


def optimal_rod_warping(rod, F: RodCorrection, nu_r: float) -> OptimalRodWarping:
    return OptimalRodWarping(rod, F, nu_r)


class ZeroPlateWarping(PlateWarping):
    def _z(self, x1, x2, X3):
        return np.zeros((3,) + np.broadcast(x1, x2, X3).shape)

    value = dX3 = _z

    def dx(self, a, x1, x2, X3):
        return self._z(x1, x2, X3)


class ZeroRodWarping(RodWarping):
    def _z(self, X1, X2, x3):
        return np.zeros((3,) + np.broadcast(X1, X2, x3).shape)

    value = dx3 = _z

    def dX(self, a, X1, X2, x3):
        return self._z(X1, X2, x3)


# ---------------------------------------------------------------- limit strains

def limit_strain_plate(plate, Z: MembraneStrain, warping: PlateWarping):
    """E_p(x1, x2, X3): in-plane -X3 d2U3 + Z, column 3 from dX3 of the warping."""

    def E(x1, x2, X3):
        shape = np.broadcast(x1, x2, X3).shape
        out = np.zeros((3, 3) + shape)
        z = Z(x1, x2)
        h = ((2, 0), (1, 1), (0, 2))
        for (a, b), (d1, d2) in zip(((0, 0), (0, 1), (1, 1)), h):
            v = -X3 * plate.eval(2, d1, d2, x1, x2) + z[a, b]
            out[a, b] = v
            out[b, a] = v
        du = warping.dX3(x1, x2, X3)
        out[0, 2] = out[2, 0] = 0.5 * du[0]
        out[1, 2] = out[2, 1] = 0.5 * du[1]
        out[2, 2] = du[2]
        return out

    return E


def limit_strain_rod(rod, F: RodCorrection, warping: RodWarping):
    """E_r(X1, X2, x3) including F."""

    def E(X1, X2, x3):
        shape = np.broadcast(X1, X2, x3).shape
        out = np.zeros((3, 3) + shape)
        g1, g2 = warping.dX(0, X1, X2, x3), warping.dX(1, X1, X2, x3)
        dQ3 = rod.eval(3, 1, x3)
        out[0, 0] = g1[0]
        out[1, 1] = g2[1]
        out[0, 1] = out[1, 0] = 0.5 * (g2[0] + g1[1])
        out[0, 2] = out[2, 0] = -0.5 * X2 * dQ3 + 0.5 * g1[2]
        out[1, 2] = out[2, 1] = 0.5 * X1 * dQ3 + 0.5 * g2[2]
        out[2, 2] = -X1 * rod.eval(0, 2, x3) - X2 * rod.eval(1, 2, x3) + rod.eval(2, 1, x3)
        return out + F(x3)

    return E
