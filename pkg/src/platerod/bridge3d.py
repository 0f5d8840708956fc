"""Recovery deformations on the thin 3D structure and the energy bridge.

For a limit triple, ``mollify_triple`` builds approximants whose rod
fields vanish (W3 frozen to U3(0,0)) near the junction and whose plate
warping vanishes near the junction and the clamped edges.
``build_recovery_deformation`` then gives an admissible 3D deformation
whose rescaled St Venant-Kirchhoff energy tends to J3 of the approximants.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import kernels
from . import limit as lim
from . import quadrature as qd
from .errors import MatchingError
from .fields import LimitTriple, RodField
from .forces import plate_force, rod_force
from .material import derived_moduli
from .regime import is_critical, regime_from_delta

log = logging.getLogger(__name__)

# ---------------------------------------------------------------- cutoff


def smoothstep(t, d: int = 0):
    """C2 quintic step 10t^3 - 15t^4 + 6t^5 on [0, 1] (0 below, 1 above)."""
    t = np.asarray(t, float)
    inside = (t > 0) & (t < 1)
    s = np.clip(t, 0.0, 1.0)
    if d == 0:
        return s**3 * (10 - 15 * s + 6 * s * s)
    if d == 1:
        v = 30 * s**2 * (1 - s) ** 2
    elif d == 2:
        v = 60 * s - 180 * s**2 + 120 * s**3
    elif d == 3:
        v = 60 - 360 * s + 360 * s**2
    else:
        v = np.zeros_like(s)
    return np.where(inside, v, 0.0)


def cutoff(s, n: int, d: int = 0):
    """0 for s <= 1/n, 1 for s >= 2/n; d-th derivative in s."""
    return n**d * smoothstep(n * np.asarray(s, float) - 1.0, d)


# ---------------------------------------------------------------- approximants


class MollifiedRodField(RodField):
    """W_a, Q3 multiplied by the cutoff; W3 = U3(0,0) + cutoff (W3 - W3(0))."""

    def __init__(self, rod: RodField, u3_00: float, n: int):
        self.rod, self.u3_00, self.n = rod, float(u3_00), n
        self.w3_0 = float(rod.eval(2, 0, 0.0))
        self.breaks = tuple(sorted(set(rod.breaks) | {1.0 / n, 2.0 / n}))

    def eval(self, i, d, x3):
        x3 = np.asarray(x3, float)
        z = np.maximum(x3, 0.0)
        out = np.zeros(x3.shape)
        for k in range(d + 1):
            ck = cutoff(z, self.n, k)
            f = self.rod.eval(i, d - k, z)
            if i == 2 and d - k == 0:
                f = f - self.w3_0
            out = out + comb(d, k) * ck * f
        if i == 2 and d == 0:
            out = out + self.u3_00
        return out


class RecoveryPlateWarping(lim.PlateWarping):
    """cutoff(x1, x2) * (optimal warping - s X3 |grad U3|^2 / 2 e3).

    At kappa = 3 the Kirchhoff-Love part of the deformation already puts
    |grad U3|^2 / 2 into the 33 strain; the shift removes it so that the
    33 entry converges to the optimal value. The cutoff vanishes within
    1/n of the junction and of the clamped edges.
    """

    def __init__(self, plate, Z: lim.MembraneStrain, nu: float, n: int, geometry):
        self.plate, self.n, self.geometry = plate, n, geometry
        self.opt = lim.OptimalPlateWarping(plate, Z, nu)
        self.s = Z.s

    def _chi(self, x1, x2):
        """cutoff and its gradient."""
        n, g = self.n, self.geometry
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        r = np.hypot(x1, x2)
        c, dc = cutoff(r, n), cutoff(r, n, 1)
        rs = np.where(r > 0, r, 1.0)
        chi = c
        grad = [dc * x1 / rs, dc * x2 / rs]
        for e in g.gamma0:
            if e == "left":
                dist, dd = x1 + g.a, (1.0, 0.0)
            elif e == "right":
                dist, dd = g.b - x1, (-1.0, 0.0)
            elif e == "bottom":
                dist, dd = x2 + g.c, (0.0, 1.0)
            else:
                dist, dd = g.d - x2, (0.0, -1.0)
            ce, dce = cutoff(dist, n), cutoff(dist, n, 1)
            grad = [grad[a] * ce + chi * dce * dd[a] for a in range(2)]
            chi = chi * ce
        return chi, grad

    def _grad2(self, x1, x2):
        p = self.plate
        return p.eval(2, 1, 0, x1, x2) ** 2 + p.eval(2, 0, 1, x1, x2) ** 2

    def target(self, x1, x2, X3):
        v = self.opt.value(x1, x2, X3)
        v[2] -= 0.5 * self.s * X3 * self._grad2(x1, x2)
        return v

    def value(self, x1, x2, X3):
        chi, _ = self._chi(x1, x2)
        return chi * self.target(x1, x2, X3)

    def dX3(self, x1, x2, X3):
        chi, _ = self._chi(x1, x2)
        v = self.opt.dX3(x1, x2, X3)
        v[2] -= 0.5 * self.s * self._grad2(x1, x2)
        return chi * v

    def dx(self, a, x1, x2, X3):
        chi, gchi = self._chi(x1, x2)
        p = self.plate
        v = self.opt.dx(a, x1, x2, X3)
        u1, u2 = p.eval(2, 1, 0, x1, x2), p.eval(2, 0, 1, x1, x2)
        if a == 0:
            dg = 2 * (u1 * p.eval(2, 2, 0, x1, x2) + u2 * p.eval(2, 1, 1, x1, x2))
        else:
            dg = 2 * (u1 * p.eval(2, 1, 1, x1, x2) + u2 * p.eval(2, 0, 2, x1, x2))
        v[2] -= 0.5 * self.s * X3 * dg
        return gchi[a] * self.target(x1, x2, X3) + chi * v


class _LimitPlateWarping(lim.PlateWarping):
    """Recovery warping plus s X3 |grad U3|^2 / 2 e3: what the rescaled
    strain actually converges to in its X3 column."""

    def __init__(self, rec: RecoveryPlateWarping):
        self.rec = rec

    def dX3(self, x1, x2, X3):
        v = self.rec.dX3(x1, x2, X3)
        v[2] += 0.5 * self.rec.s * self.rec._grad2(x1, x2)
        return v


class _LimitRodWarping(lim.RodWarping):
    """w_bar - x3 (X . d_a grad U3(0)) e_a: the in-plane plate curvature at
    the junction seen by the rod."""

    def __init__(self, base: lim.RodWarping, hess0: np.ndarray):
        self.base, self.h = base, hess0

    def dX(self, a, X1, X2, x3):
        v = self.base.dX(a, X1, X2, x3)
        v[0] = v[0] - x3 * self.h[0, a]
        v[1] = v[1] - x3 * self.h[1, a]
        return v


@dataclass
class Approximants:
    triple: LimitTriple          # plate unchanged, rod mollified
    plate_warping: RecoveryPlateWarping
    rod_warping: lim.OptimalRodWarping
    n: int
    geometry: object
    lp: object
    kappa: float
    kappa_prime: float
    source: LimitTriple = None

    @property
    def Z(self):
        return lim.MembraneStrain(self.triple.plate, self.kappa)

    @property
    def F(self):
        return lim.RodCorrection(self.triple.rod, self.kappa_prime)

    def limit_strain_plate(self):
        return lim.limit_strain_plate(self.triple.plate, self.Z, _LimitPlateWarping(self.plate_warping))

    def limit_strain_rod(self):
        p = self.triple.plate
        h = np.array([[p.eval(2, 2, 0, 0.0, 0.0), p.eval(2, 1, 1, 0.0, 0.0)],
                      [p.eval(2, 1, 1, 0.0, 0.0), p.eval(2, 0, 2, 0.0, 0.0)]], dtype=float)
        return lim.limit_strain_rod(self.triple.rod, self.F, _LimitRodWarping(self.rod_warping, h))

    def limit_J3(self, fd, quad: lim.QuadSpec = lim.DEFAULT_QUAD) -> float:
        from .regime import ScalingRegime

        r = ScalingRegime(self.kappa, self.kappa_prime, 1, 0.5, 0.5, 0.5, 0.5)
        return lim.total_energy(self.triple, self.lp, fd, r, self.geometry, quad)


def mollify_triple(triple: LimitTriple, lp, geometry, kappa: float, kappa_prime: float, n: int) -> Approximants:
    if n < 2:
        raise ValueError("mollification index n must be >= 2")
    plate = triple.plate
    u3_00 = float(plate.eval(2, 0, 0, 0.0, 0.0))
    rod = MollifiedRodField(triple.rod, u3_00, n)
    moll = LimitTriple(plate, rod)
    _, nu_p = derived_moduli(lp.lambda_p, lp.mu_p)
    _, nu_r = derived_moduli(lp.lambda_r, lp.mu_r)
    Z = lim.MembraneStrain(plate, kappa)
    pw = RecoveryPlateWarping(plate, Z, nu_p, n, geometry)
    rw = lim.OptimalRodWarping(rod, lim.RodCorrection(rod, kappa_prime), nu_r)
    return Approximants(moll, pw, rw, n, geometry, lp, kappa, kappa_prime, source=triple)


# ---------------------------------------------------------------- deformation


class Deformation3D:
    """v = identity + u on the plate Omega_delta and the rod B_{eps,delta}.

    Subclasses give the displacement and its gradient by two expressions,
    one for the plate (|x3| < delta) and one for the rod (x3 >= delta);
    gradients are (3, 3, ...) arrays with G[i, j] = d u_i / d x_j.
    ``breaks1``, ``breaks2``, ``rod_breaks`` tell the quadrature where the
    fields lose smoothness.
    """

    geometry = None
    r = None
    breaks1: tuple = ()
    breaks2: tuple = ()
    rod_breaks: tuple = ()

    def plate_displacement(self, x1, x2, x3):
        raise NotImplementedError

    def plate_grad(self, x1, x2, x3):
        raise NotImplementedError

    def rod_displacement(self, x1, x2, x3):
        return self.plate_displacement(x1, x2, x3)

    def rod_grad(self, x1, x2, x3):
        return self.plate_grad(x1, x2, x3)

    def _in_plate(self, x3):
        return np.abs(np.asarray(x3, float)) < self.r.delta

    def displacement(self, x1, x2, x3):
        return np.where(self._in_plate(x3), self.plate_displacement(x1, x2, x3), self.rod_displacement(x1, x2, x3))

    def displacement_grad(self, x1, x2, x3):
        return np.where(self._in_plate(x3), self.plate_grad(x1, x2, x3), self.rod_grad(x1, x2, x3))

    def __call__(self, x):
        x = np.asarray(x, float)
        return x + self.displacement(x[0], x[1], x[2])

    def gradient(self, x):
        x = np.asarray(x, float)
        G = self.displacement_grad(x[0], x[1], x[2])
        return G + np.eye(3).reshape((3, 3) + (1,) * (G.ndim - 2))

    def as_displacement(self):
        from .displacement import CallableDisplacement

        return CallableDisplacement(self.displacement, self.displacement_grad)


class MapDeformation(Deformation3D):
    """A single smooth map v(x) = x + u(x) on the whole structure, given by
    vectorized callables for u and its gradient."""

    def __init__(self, geometry, r, u, grad_u, breaks1=(), breaks2=(), rod_breaks=()):
        self.geometry, self.r = geometry, r
        self._u, self._g = u, grad_u
        self.breaks1, self.breaks2, self.rod_breaks = tuple(breaks1), tuple(breaks2), tuple(rod_breaks)

    def _shape(self, *x):
        return np.broadcast(*(np.asarray(a, float) for a in x)).shape

    def plate_displacement(self, x1, x2, x3):
        return np.broadcast_to(self._u(x1, x2, x3), (3,) + self._shape(x1, x2, x3))

    def plate_grad(self, x1, x2, x3):
        return np.broadcast_to(self._g(x1, x2, x3), (3, 3) + self._shape(x1, x2, x3))


def linear_deformation(geometry, r, A, b=(0.0, 0.0, 0.0)) -> MapDeformation:
    """v(x) = A x + b, e.g. a global rotation (strain 0) or a reflection
    (not admissible)."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    H = A - np.eye(3)

    def u(x1, x2, x3):
        x1, x2, x3 = np.broadcast_arrays(*(np.asarray(a, float) for a in (x1, x2, x3)))
        x = np.stack([x1, x2, x3])
        return np.einsum("ij,j...->i...", H, x) + b.reshape((3,) + (1,) * x1.ndim)

    def g(x1, x2, x3):
        shape = np.broadcast(*(np.asarray(a, float) for a in (x1, x2, x3))).shape
        return np.broadcast_to(H.reshape((3, 3) + (1,) * len(shape)), (3, 3) + shape)

    return MapDeformation(geometry, r, u, g)


class RecoveryDeformation(Deformation3D):
    """Recovery deformation built from mollified limit fields."""

    def __init__(self, approx: Approximants, r):
        self.approx, self.r = approx, r
        self.geometry = approx.geometry
        self.plate = approx.triple.plate
        self.rod = approx.triple.rod
        self.pw, self.rw = approx.plate_warping, approx.rod_warping
        d, e, k, kp = r.delta, r.epsilon, r.kappa, r.kappa_prime
        self.sp, self.t = d ** (k - 1), d ** (k - 2)
        self.sr = e ** (kp - 2)
        self.u3_00 = float(self.plate.eval(2, 0, 0, 0.0, 0.0))
        g, n = self.geometry, approx.n
        cut = (1.0 / n, 2.0 / n, -1.0 / n, -2.0 / n)
        edge1 = (-g.a + 1.0 / n, -g.a + 2.0 / n, g.b - 1.0 / n, g.b - 2.0 / n)
        edge2 = (-g.c + 1.0 / n, -g.c + 2.0 / n, g.d - 1.0 / n, g.d - 2.0 / n)
        self.breaks1 = tuple(self.plate.breaks1) + cut + edge1
        self.breaks2 = tuple(self.plate.breaks2) + cut + edge2
        self.rod_breaks = tuple(self.rod.breaks)

    # -- plate expression
    def plate_displacement(self, x1, x2, x3):
        p, d, sp_, t = self.plate, self.r.delta, self.sp, self.t
        X3 = x3 / d
        ub = self.pw.value(x1, x2, X3)
        return np.stack([
            sp_ * p.eval(0, 0, 0, x1, x2) - t * x3 * p.eval(2, 1, 0, x1, x2) + sp_ * d * ub[0],
            sp_ * p.eval(1, 0, 0, x1, x2) - t * x3 * p.eval(2, 0, 1, x1, x2) + sp_ * d * ub[1],
            t * p.eval(2, 0, 0, x1, x2) + t * d * d * ub[2],
        ])

    def plate_grad(self, x1, x2, x3):
        p, d, sp_, t = self.plate, self.r.delta, self.sp, self.t
        x1, x2, x3 = np.broadcast_arrays(*(np.asarray(a, float) for a in (x1, x2, x3)))
        X3 = x3 / d
        G = np.empty((3, 3) + x1.shape)
        dub = [self.pw.dx(0, x1, x2, X3), self.pw.dx(1, x1, x2, X3)]
        dub3 = self.pw.dX3(x1, x2, X3)
        g3 = [p.eval(2, 1, 0, x1, x2), p.eval(2, 0, 1, x1, x2)]
        h = {(0, 0): p.eval(2, 2, 0, x1, x2), (0, 1): p.eval(2, 1, 1, x1, x2), (1, 1): p.eval(2, 0, 2, x1, x2)}
        h[(1, 0)] = h[(0, 1)]
        for a in range(2):
            for b in range(2):
                dU = p.eval(a, 1 if b == 0 else 0, 1 if b == 1 else 0, x1, x2)
                G[a, b] = sp_ * dU - t * x3 * h[(a, b)] + sp_ * d * dub[b][a]
            G[a, 2] = -t * g3[a] + sp_ * dub3[a]
            G[2, a] = t * g3[a] + t * d * d * dub[a][2]
        G[2, 2] = t * d * dub3[2]
        return G

    # -- rod expression
    def rod_displacement(self, x1, x2, x3):
        p, rod, e, sr, t, sp_ = self.plate, self.rod, self.r.epsilon, self.sr, self.t, self.sp
        X1, X2 = x1 / e, x2 / e
        wb = self.rw.value(X1, X2, x3)
        Q3 = rod.eval(3, 0, x3)
        return np.stack([
            sp_ * p.eval(0, 0, 0, x1, x2) - t * x3 * p.eval(2, 1, 0, x1, x2)
            + sr * (rod.eval(0, 0, x3) - x2 * Q3 + e * e * wb[0]),
            sp_ * p.eval(1, 0, 0, x1, x2) - t * x3 * p.eval(2, 0, 1, x1, x2)
            + sr * (rod.eval(1, 0, x3) + x1 * Q3 + e * e * wb[1]),
            t * p.eval(2, 0, 0, x1, x2) + sr * e * (rod.eval(2, 0, x3) - self.u3_00)
            - sr * (x1 * rod.eval(0, 1, x3) + x2 * rod.eval(1, 1, x3)) + sr * e * e * wb[2],
        ])

    def rod_grad(self, x1, x2, x3):
        p, rod, e, sr, t, sp_ = self.plate, self.rod, self.r.epsilon, self.sr, self.t, self.sp
        x1, x2, x3 = np.broadcast_arrays(*(np.asarray(a, float) for a in (x1, x2, x3)))
        X1, X2 = x1 / e, x2 / e
        G = np.empty((3, 3) + x1.shape)
        dw = [self.rw.dX(0, X1, X2, x3), self.rw.dX(1, X1, X2, x3)]
        dw3 = self.rw.dx3(X1, X2, x3)
        g3 = [p.eval(2, 1, 0, x1, x2), p.eval(2, 0, 1, x1, x2)]
        h = {(0, 0): p.eval(2, 2, 0, x1, x2), (0, 1): p.eval(2, 1, 1, x1, x2), (1, 1): p.eval(2, 0, 2, x1, x2)}
        h[(1, 0)] = h[(0, 1)]
        Q3, dQ3 = rod.eval(3, 0, x3), rod.eval(3, 1, x3)
        dW = [rod.eval(0, 1, x3), rod.eval(1, 1, x3)]
        ddW = [rod.eval(0, 2, x3), rod.eval(1, 2, x3)]
        for a in range(2):
            for b in range(2):
                dU = p.eval(a, 1 if b == 0 else 0, 1 if b == 1 else 0, x1, x2)
                G[a, b] = sp_ * dU - t * x3 * h[(a, b)] + sr * e * dw[b][a]
            G[2, a] = t * g3[a] - sr * dW[a] + sr * e * dw[a][2]
        G[0, 1] -= sr * Q3
        G[1, 0] += sr * Q3
        G[0, 2] = -t * g3[0] + sr * (dW[0] - x2 * dQ3 + e * e * dw3[0])
        G[1, 2] = -t * g3[1] + sr * (dW[1] + x1 * dQ3 + e * e * dw3[1])
        G[2, 2] = sr * e * rod.eval(2, 1, x3) - sr * (x1 * ddW[0] + x2 * ddW[1]) + sr * e * e * dw3[2]
        return G


def build_recovery_deformation(approx: Approximants, r) -> RecoveryDeformation:
    n, g = approx.n, approx.geometry
    if r.delta > 1.0 / n:
        raise MatchingError(f"delta = {r.delta:.4g} exceeds 1/n = {1.0 / n:.4g}")
    if r.epsilon > 1.0 / n:
        raise MatchingError(f"epsilon = {r.epsilon:.4g} exceeds 1/n = {1.0 / n:.4g}: the rod would overlap "
                            "the support of the plate warping")
    if r.epsilon >= min(g.a, g.b, g.c, g.d):
        raise MatchingError("rod cross-section does not fit inside omega")
    return RecoveryDeformation(approx, r)


# ---------------------------------------------------------------- energy


@dataclass(frozen=True)
class BridgeQuad:
    """Rules live in rescaled coordinates (X3 in (-1,1), (X1,X2) in D)
    where the recovery fields are polynomial, so a fixed number of points
    stays exact as delta and eps shrink."""

    plate_cells: int = 4
    plate_order: int = 6
    thickness_order: int = 6
    rod_cells: int = 8
    rod_order: int = 6
    disc_radial: int = 8
    disc_angular: int = 16


@dataclass
class Energy3D:
    strain_plate: float
    strain_rod: float
    work: float
    admissible: bool
    scale: float

    @property
    def total(self) -> float:
        if not self.admissible:
            return math.inf
        return self.strain_plate + self.strain_rod - self.work

    @property
    def rescaled(self) -> float:
        return self.total / self.scale


def _plate_points(v: Deformation3D, fd, quad: BridgeQuad):
    g = v.geometry
    b1 = qd.breakpoints(*g.x1_range, tuple(v.breaks1) + fd.plate_breaks[0], quad.plate_cells)
    b2 = qd.breakpoints(*g.x2_range, tuple(v.breaks2) + fd.plate_breaks[1], quad.plate_cells)
    X1, X2, Wxy = qd.tensor2d(b1, b2, quad.plate_order)
    T, wt = qd.gauss(quad.thickness_order)
    return X1, X2, Wxy, T, wt


def _rod_points(v: Deformation3D, fd, quad: BridgeQuad, lo):
    D1, D2, Wd = qd.polar_disc(quad.disc_radial, quad.disc_angular)
    bz = qd.breakpoints(lo, v.geometry.L, tuple(v.rod_breaks) + fd.rod_breaks, quad.rod_cells)
    z, wz = qd.composite(bz, quad.rod_order)
    return D1, D2, Wd, z, wz


def energy_3d(v: Deformation3D, lp, fd, r, quad: BridgeQuad = BridgeQuad(), backend=None) -> Energy3D:
    """J_delta(v) = int W(grad v) - int f_delta . (v - x) over plate and rod."""
    d, e = r.delta, r.epsilon
    X1, X2, Wxy, T, wt = _plate_points(v, fd, quad)
    P1 = np.repeat(X1, len(T))
    P2 = np.repeat(X2, len(T))
    P3 = np.tile(d * T, len(X1))
    W = np.outer(Wxy, d * wt).ravel()
    H = np.moveaxis(v.plate_grad(P1, P2, P3), (0, 1), (-2, -1))
    sp_, bad_p = kernels.svk_integral(H.reshape(-1, 3, 3), W, lp.lambda_p, lp.mu_p, backend)
    f = plate_force(fd, r, P1, P2)
    work = float(np.sum(W * np.sum(f * v.plate_displacement(P1, P2, P3), axis=0)))

    D1, D2, Wd, z, wz = _rod_points(v, fd, quad, d)
    R1 = np.tile(e * D1, len(z))
    R2 = np.tile(e * D2, len(z))
    R3 = np.repeat(z, len(D1))
    Wr = np.outer(wz, e * e * Wd).ravel()
    H = np.moveaxis(v.rod_grad(R1, R2, R3), (0, 1), (-2, -1))
    sr, bad_r = kernels.svk_integral(H.reshape(-1, 3, 3), Wr, lp.lambda_r, lp.mu_r, backend)
    sr *= r.q_eps**2
    f = rod_force(fd, r, R1, R2, R3)
    work += float(np.sum(Wr * np.sum(f * v.rod_displacement(R1, R2, R3), axis=0)))
    return Energy3D(sp_, sr, work, bad_p + bad_r == 0, d ** (2 * r.kappa - 1))


# ---------------------------------------------------------------- strains


def rescaled_gsv(v: Deformation3D, r):
    """Rescaled Green-St Venant tensors (plate on Omega, rod on B)."""
    d, e = r.delta, r.epsilon

    def gsv(G, scale):
        H = np.moveaxis(G, (0, 1), (-2, -1))
        Ht = np.swapaxes(H, -1, -2)
        return np.moveaxis((H + Ht + Ht @ H) / (2 * scale), (-2, -1), (0, 1))

    def plate(x1, x2, X3):
        return gsv(v.plate_grad(x1, x2, d * np.asarray(X3)), d ** (r.kappa - 1))

    def rod(X1, X2, x3):
        return gsv(v.rod_grad(e * np.asarray(X1), e * np.asarray(X2), x3), e ** (r.kappa_prime - 1))

    return plate, rod


def gsv_errors(v: Deformation3D, r, quad: BridgeQuad = BridgeQuad(), fd=None) -> tuple[float, float]:
    """L2(Omega) and L2(B) distances between rescaled and limit tensors."""
    from .forces import ForceData

    fd = fd or ForceData()
    plate, rod = rescaled_gsv(v, r)
    Ep, Er = v.approx.limit_strain_plate(), v.approx.limit_strain_rod()
    X1, X2, Wxy, T, wt = _plate_points(v, fd, quad)
    P1, P2, P3 = np.repeat(X1, len(T)), np.repeat(X2, len(T)), np.tile(T, len(X1))
    W = np.outer(Wxy, wt).ravel()
    ep = math.sqrt(float(np.sum(W * np.sum((plate(P1, P2, P3) - Ep(P1, P2, P3)) ** 2, axis=(0, 1)))))
    D1, D2, Wd, z, wz = _rod_points(v, fd, quad, 0.0)
    R1, R2, R3 = np.tile(D1, len(z)), np.tile(D2, len(z)), np.repeat(z, len(D1))
    Wr = np.outer(wz, Wd).ravel()
    er = math.sqrt(float(np.sum(Wr * np.sum((rod(R1, R2, R3) - Er(R1, R2, R3)) ** 2, axis=(0, 1)))))
    return ep, er


# ---------------------------------------------------------------- study

STUDY_HEADER = ("delta", "epsilon", "q_eps", "J3d_rescaled", "limit_J3", "gap", "gsv_plate_l2_error",
                "gsv_rod_l2_error")


@dataclass
class ConvergenceRow:
    delta: float
    epsilon: float
    q_eps: float
    J3d_rescaled: float
    limit_J3: float
    gap: float
    gsv_plate_l2_error: float
    gsv_rod_l2_error: float

    def values(self):
        return (self.delta, self.epsilon, self.q_eps, self.J3d_rescaled, self.limit_J3, self.gap,
                self.gsv_plate_l2_error, self.gsv_rod_l2_error)


@dataclass
class StudyResult:
    rows: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def convergence_study(triple, lp, fd, kappa, kappa_prime, deltas, n, geometry,
                      quad: BridgeQuad = BridgeQuad(), limit_quad: lim.QuadSpec = lim.DEFAULT_QUAD,
                      workers: int = 1) -> StudyResult:
    deltas = [float(x) for x in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    approx = mollify_triple(triple, lp, geometry, kappa, kappa_prime, n)
    limit_value = approx.limit_J3(fd, limit_quad)
    out = StudyResult()

    def one(delta):
        r = regime_from_delta(kappa, kappa_prime, delta)
        try:
            v = build_recovery_deformation(approx, r)
        except MatchingError as exc:
            return None, f"delta = {delta:.6g} skipped: {exc}"
        en = energy_3d(v, lp, fd, r, quad)
        ep, er = gsv_errors(v, r, quad, fd)
        J = en.rescaled
        return ConvergenceRow(r.delta, r.epsilon, r.q_eps, J, limit_value, abs(J - limit_value), ep, er), None

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(one, deltas))
    else:
        results = [one(x) for x in deltas]
    for row, warn in results:
        if warn:
            log.warning(warn)
            out.warnings.append(warn)
        else:
            out.rows.append(row)
    return out


def richardson(deltas, values) -> tuple[float, float]:
    """Extrapolate the last three values of a sequence with ratio-2 steps
    (any constant ratio works); returns (limit estimate, observed order)."""
    d = np.asarray(deltas, float)[-3:]
    v = np.asarray(values, float)[-3:]
    ratio = d[0] / d[1]
    num, den = v[0] - v[1], v[1] - v[2]
    if den == 0 or num / den <= 0:
        return float(v[2]), float("nan")
    p = math.log(num / den) / math.log(ratio)
    return float(v[2] - den / (ratio**p - 1.0)), p


def write_study_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STUDY_HEADER)
        for r in rows:
            w.writerow([f"{x:.17g}" for x in r.values()])


def write_gap_plot_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("log10_delta", "log10_gap", "log10_gsv_plate_err", "log10_gsv_rod_err"))
        for r in rows:
            w.writerow([f"{_log10(x):.17g}" for x in (r.delta, r.gap, r.gsv_plate_l2_error, r.gsv_rod_l2_error)])


def _log10(x):
    return math.log10(x) if x > 0 else float("-inf")
