"""Plate and rod displacement decompositions, the auxiliary field U3~, and
empirical envelopes for the Korn-type estimates.

Plate: u = U + x3 (R ^ e3) + u_bar with R ^ e3 = (R2, -R1, 0).
Rod:   u = W + Q ^ (x1 e1 + x2 e2) + w_bar.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from . import quadrature as qd
from .discretization import linear
from .errors import BoundaryError, DomainError
from .material import dist_so3


def rescale_plate(w, delta: float):
    """Pullback (x1, x2, X3) -> w(x1, x2, delta X3)."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    return lambda x1, x2, X3: w(x1, x2, delta * np.asarray(X3))


def rescale_rod(w, epsilon: float):
    """Pullback (X1, X2, x3) -> w(eps X1, eps X2, x3)."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    return lambda X1, X2, x3: w(epsilon * np.asarray(X1), epsilon * np.asarray(X2), x3)


def _wedge_e(R, a):
    """R ^ e_a for a = 0, 1 (shape (3, ...))."""
    z = np.zeros_like(R[0])
    if a == 0:
        return np.stack([z, R[2], -R[1]])
    return np.stack([-R[2], z, R[0]])


# ---------------------------------------------------------------- plate


class PlateDecomposition:
    def __init__(self, u, delta: float, order: int = 16, fd_step: float = 1e-6):
        if not delta > 0:
            raise DomainError("delta must be positive")
        self.u, self.delta = u, delta
        t, w = qd.gauss(order)
        self._t, self._w = delta * t, delta * w
        self.fd_step = fd_step

    def _through(self, f, x1, x2):
        """Evaluate f(x1, x2, x3) on the thickness nodes; returns (..., nt) last."""
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        X1 = x1[..., None] + 0 * self._t
        X2 = x2[..., None] + 0 * self._t
        X3 = np.broadcast_to(self._t, X1.shape)
        return f(X1, X2, X3), X3

    def U(self, x1, x2):
        v, _ = self._through(self.u.value, x1, x2)
        return v @ self._w / (2 * self.delta)

    def grad_U(self, x1, x2):
        """(3, 2, ...): d U_i / d x_a."""
        g, _ = self._through(self.u.grad, x1, x2)
        return g[:, :2] @ self._w / (2 * self.delta)

    def R(self, x1, x2):
        """(R1, R2, R3); R3 is the thickness-averaged in-plane rotation."""
        v, X3 = self._through(self.u.value, x1, x2)
        m = (X3 * v) @ self._w * 1.5 / self.delta**3  # (R ^ e3)_a in m[:2]
        g, _ = self._through(self.u.grad, x1, x2)
        r3 = 0.5 * (g[1, 0] - g[0, 1]) @ self._w / (2 * self.delta)
        return np.stack([-m[1], m[0], r3])

    def grad_R(self, x1, x2):
        """(3, 2, ...). R1, R2 exactly from moments of grad u; R3 by central
        differences (it needs second derivatives of u)."""
        g, X3 = self._through(self.u.grad, x1, x2)
        m = (X3[None, None] * g[:, :2]) @ self._w * 1.5 / self.delta**3  # d_b (R^e3)_a
        h = self.fd_step
        r3_1 = (self.R(x1 + h, x2)[2] - self.R(x1 - h, x2)[2]) / (2 * h)
        r3_2 = (self.R(x1, x2 + h)[2] - self.R(x1, x2 - h)[2]) / (2 * h)
        return np.stack([-m[1], m[0], np.stack([r3_1, r3_2])])

    def elementary(self, x1, x2, x3):
        R = self.R(x1, x2)
        U = self.U(x1, x2)
        return U + x3 * np.stack([R[1], -R[0], np.zeros_like(R[0])])

    def u_bar(self, x1, x2, x3):
        return self.u.value(x1, x2, x3) - self.elementary(x1, x2, x3)

    def grad_u_bar(self, x1, x2, x3):
        G = np.array(self.u.grad(x1, x2, x3), dtype=float)
        gU, gR, R = self.grad_U(x1, x2), self.grad_R(x1, x2), self.R(x1, x2)
        for a in range(2):
            G[:, a] -= gU[:, a]
            G[0, a] -= x3 * gR[1, a]
            G[1, a] += x3 * gR[0, a]
        G[0, 2] -= R[1]
        G[1, 2] += R[0]
        return G

    def moments(self, x1, x2):
        """Max of |int u_bar dx3| and |int x3 u_bar_a dx3| at the given points."""
        v, X3 = self._through(self.u_bar, x1, x2)
        m0 = v @ self._w
        m1 = (X3 * v[:2]) @ self._w
        return float(max(np.max(np.abs(m0)), np.max(np.abs(m1))))


def decompose_plate(u, delta: float, order: int = 16) -> PlateDecomposition:
    return PlateDecomposition(u, delta, order)


# ---------------------------------------------------------------- rod


class RodDecomposition:
    def __init__(self, u, epsilon: float, n_r: int = 16, n_t: int = 32):
        if not epsilon > 0:
            raise DomainError("epsilon must be positive")
        self.u, self.eps = u, epsilon
        X1, X2, w = qd.polar_disc(n_r, n_t)
        self._x1, self._x2, self._w = epsilon * X1, epsilon * X2, epsilon**2 * w

    def _section(self, f, x3):
        x3 = np.asarray(x3, float)
        X3 = x3[..., None] + 0 * self._x1
        return f(np.broadcast_to(self._x1, X3.shape), np.broadcast_to(self._x2, X3.shape), X3)

    def _moments(self, v):
        e = self.eps
        area = math.pi * e**2
        x1, x2, w = self._x1, self._x2, self._w
        W = v @ w / area
        c = 4.0 / (math.pi * e**4)
        Q = np.stack([c * (x2 * v[2]) @ w, -c * (x1 * v[2]) @ w,
                      0.5 * c * (x1 * v[1] - x2 * v[0]) @ w])
        return W, Q

    def W(self, x3):
        return self._moments(self._section(self.u.value, x3))[0]

    def Q(self, x3):
        return self._moments(self._section(self.u.value, x3))[1]

    def dW_dQ(self, x3):
        g = self._section(self.u.grad, x3)
        return self._moments(g[:, 2])

    def elementary(self, x1, x2, x3):
        W, Q = self._moments(self._section(self.u.value, x3))
        z = np.zeros_like(np.asarray(x1, float) + 0 * W[0])
        return W + np.stack([-Q[2] * x2 + z, Q[2] * x1 + z, Q[0] * x2 - Q[1] * x1])

    def w_bar(self, x1, x2, x3):
        return self.u.value(x1, x2, x3) - self.elementary(x1, x2, x3)

    def grad_w_bar(self, x1, x2, x3):
        G = np.array(self.u.grad(x1, x2, x3), dtype=float)
        W, Q = self._moments(self._section(self.u.value, x3))
        dW, dQ = self.dW_dQ(x3)
        for a in range(2):
            G[:, a] -= _wedge_e(Q, a)
        G[:, 2] -= dW + np.stack([-dQ[2] * x2, dQ[2] * x1, dQ[0] * x2 - dQ[1] * x1])
        return G

    def moments(self, x3):
        v = self._section(self.w_bar, x3)
        x1, x2, w = self._x1, self._x2, self._w
        vals = [v @ w, (x1 * v[2]) @ w, (x2 * v[2]) @ w, (x1 * v[1] - x2 * v[0]) @ w]
        return float(max(np.max(np.abs(a)) for a in vals))


def decompose_rod(u, epsilon: float, n_r: int = 16, n_t: int = 32) -> RodDecomposition:
    return RodDecomposition(u, epsilon, n_r, n_t)


# ---------------------------------------------------------------- U3 tilde


@dataclass
class TildeU3:
    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray  # (n1+1, n2+1)
    residual: float

    def __call__(self, x1, x2):
        n1, n2 = len(self.x1) - 1, len(self.x2) - 1
        h1, h2 = self.x1[1] - self.x1[0], self.x2[1] - self.x2[0]
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        c1 = np.clip(np.floor((x1 - self.x1[0]) / h1), 0, n1 - 1).astype(int)
        c2 = np.clip(np.floor((x2 - self.x2[0]) / h2), 0, n2 - 1).astype(int)
        lx, ly = linear((x1 - self.x1[c1]) / h1, h1), linear((x2 - self.x2[c2]) / h2, h2)
        v = self.values
        return (v[c1, c2] * lx[0] * ly[0] + v[c1 + 1, c2] * lx[1] * ly[0]
                + v[c1, c2 + 1] * lx[0] * ly[1] + v[c1 + 1, c2 + 1] * lx[1] * ly[1])


def solve_tilde_u3(R, geometry, resolution=(16, 16), order: int = 3) -> TildeU3:
    """Bilinear Galerkin solution of
    int grad U~ . grad phi = int (R ^ e_a) . e3 d_a phi, phi = 0 on gamma0.
    ``R(x1, x2)`` returns (R1, R2, R3) stacked on axis 0."""
    if not geometry.gamma0:
        raise BoundaryError("U3~ is ill-posed without a clamped edge")
    n1, n2 = resolution
    x1 = np.linspace(*geometry.x1_range, n1 + 1)
    x2 = np.linspace(*geometry.x2_range, n2 + 1)
    h1, h2 = x1[1] - x1[0], x2[1] - x2[0]
    t, wt = qd.gauss_interval(0.0, 1.0, order)
    XI, ETA = np.meshgrid(t, t, indexing="ij")
    XI, ETA, W = XI.ravel(), ETA.ravel(), np.outer(wt, wt).ravel() * h1 * h2
    lx, ly = linear(XI, h1), linear(ETA, h2)
    dx, dy = linear(XI, h1, 1), linear(ETA, h2, 1)
    corners = ((0, 0), (1, 0), (0, 1), (1, 1))
    N1 = np.stack([dx[a] * ly[b] for a, b in corners])  # (4, nq)
    N2 = np.stack([lx[a] * dy[b] for a, b in corners])
    Ke = np.einsum("q,iq,jq->ij", W, N1, N1) + np.einsum("q,iq,jq->ij", W, N2, N2)
    c1, c2 = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    c1, c2 = c1.ravel(), c2.ravel()
    node = lambda p, q: p * (n2 + 1) + q  # noqa: E731
    conn = np.stack([node(c1 + a, c2 + b) for a, b in corners], axis=1)  # (n_el, 4)
    X1 = x1[c1][:, None] + h1 * XI[None]
    X2 = x2[c2][:, None] + h2 * ETA[None]
    Rv = R(X1, X2)
    # (R ^ e1).e3 = -R2, (R ^ e2).e3 = R1
    be = np.einsum("q,eq,iq->ei", W, -Rv[1], N1) + np.einsum("q,eq,iq->ei", W, Rv[0], N2)
    n = (n1 + 1) * (n2 + 1)
    K = sps.coo_matrix((np.broadcast_to(Ke, (len(conn), 4, 4)).ravel(),
                        (np.repeat(conn, 4, axis=1).ravel(), np.tile(conn, (1, 4)).ravel())),
                       shape=(n, n)).tocsr()
    b = np.zeros(n)
    np.add.at(b, conn, be)
    P, Qn = np.meshgrid(np.arange(n1 + 1), np.arange(n2 + 1), indexing="ij")
    fixed = geometry.on_gamma0(x1[P.ravel()], x2[Qn.ravel()], tol=1e-12 * (1 + geometry.a + geometry.b))
    free = np.flatnonzero(~fixed)
    u = np.zeros(n)
    Kff = K[free][:, free].tocsc()
    u[free] = spla.spsolve(Kff, b[free])
    res = float(np.max(np.abs(K[free] @ u - b[free]), initial=0.0))
    return TildeU3(x1, x2, u.reshape(n1 + 1, n2 + 1), res)


# ---------------------------------------------------------------- Korn report

KORN_HEADER = ("inequality_id", "lhs", "rhs_scale", "ratio")


@dataclass(frozen=True)
class KornRow:
    inequality_id: str
    lhs: float
    rhs_scale: float

    @property
    def ratio(self) -> float:
        if self.rhs_scale > 0:
            return self.lhs / self.rhs_scale
        return 0.0 if self.lhs == 0 else math.inf


def _ratio_safe(rows):
    for r in rows:
        if not (np.isfinite(r.lhs) and np.isfinite(r.rhs_scale)):
            raise ArithmeticError(f"non-finite entry in {r.inequality_id}")
    return rows


def _finite(name, a):
    if not np.all(np.isfinite(a)):
        raise ArithmeticError(f"non-finite {name} at a quadrature point")
    return a


def korn_report(u, r, geometry, plate_cells: int = 8, order: int = 5, tilde_resolution=(16, 16),
                rod_cells: int = 8, disc=(8, 16)) -> list[KornRow]:
    """LHS and constant-free RHS of each instrumented estimate for the
    displacement ``u`` on the structure with thickness delta, radius eps."""
    d, e = r.delta, r.epsilon
    pdec = decompose_plate(u, d)
    rdec = decompose_rod(u, e)

    # plate quadrature: omega cells x thickness
    b1 = qd.breakpoints(*geometry.x1_range, (0.0,), plate_cells)
    b2 = qd.breakpoints(*geometry.x2_range, (0.0,), plate_cells)
    X1, X2, Wxy = qd.tensor2d(b1, b2, order)
    t, wt = qd.gauss_interval(-d, d, order + 1)
    P1, P3 = np.meshgrid(X1, t, indexing="ij")
    P2, _ = np.meshgrid(X2, t, indexing="ij")
    Wp = np.outer(Wxy, wt)

    def l2p(f):  # f has trailing (nxy, nt)
        return math.sqrt(float(np.sum(Wp * np.sum(f.reshape(-1, *Wp.shape) ** 2, axis=0))))

    def l2w(f):
        return math.sqrt(float(np.sum(Wxy * np.sum(f.reshape(-1, *Wxy.shape) ** 2, axis=0))))

    Gu = _finite("plate displacement gradient", u.grad(P1, P2, P3))
    Gp = l2p(Gu + np.swapaxes(Gu, 0, 1))
    F = np.moveaxis(np.eye(3)[:, :, None, None] + Gu, (0, 1), (-2, -1))
    dist_p = math.sqrt(float(np.sum(Wp * dist_so3(F) ** 2)))
    uv = _finite("plate displacement", u.value(P1, P2, P3))
    U, gU, R, gR = pdec.U(X1, X2), pdec.grad_U(X1, X2), pdec.R(X1, X2), pdec.grad_R(X1, X2)
    ubar = uv - pdec.elementary(P1, P2, P3)
    gubar = pdec.grad_u_bar(P1, P2, P3)

    # rod quadrature: disc x (-delta, L)
    D1, D2, Wd = qd.polar_disc(*disc)
    bz = qd.breakpoints(-d, geometry.L, (0.0, d), rod_cells)
    z, wz = qd.composite(bz, order + 1)
    Z, R1 = np.meshgrid(z, e * D1, indexing="ij")
    _, R2 = np.meshgrid(z, e * D2, indexing="ij")
    Wr = np.outer(wz, e**2 * Wd)

    def l2r(f):
        return math.sqrt(float(np.sum(Wr * np.sum(f.reshape(-1, *Wr.shape) ** 2, axis=0))))

    def l2z(f):
        return math.sqrt(float(np.sum(wz * np.sum(f.reshape(-1, len(z)) ** 2, axis=0))))

    Gr_u = _finite("rod displacement gradient", u.grad(R1, R2, Z))
    Gr = l2r(Gr_u + np.swapaxes(Gr_u, 0, 1))
    F = np.moveaxis(np.eye(3)[:, :, None, None] + Gr_u, (0, 1), (-2, -1))
    dist_r = math.sqrt(float(np.sum(Wr * dist_so3(F) ** 2)))
    W, Q = rdec.W(z), rdec.Q(z)
    dW, dQ = rdec.dW_dQ(z)
    W0, Q0 = rdec.W(0.0), rdec.Q(0.0)
    wbar = rdec.w_bar(R1, R2, Z)
    gwbar = rdec.grad_w_bar(R1, R2, Z)
    tilde = solve_tilde_u3(pdec.R, geometry, tilde_resolution)

    dUmR = np.stack([gU[:, a] - _wedge_e(R, a) for a in range(2)])
    Qe3 = np.stack([Q[1], -Q[0], np.zeros_like(Q[0])])

    def h1z(f, df):
        return math.sqrt(l2z(f) ** 2 + l2z(df) ** 2)

    rows = [
        KornRow("plate:ubar_L2", l2p(ubar), d * Gp),
        KornRow("plate:grad_ubar_L2", l2p(gubar), Gp),
        KornRow("plate:dR_L2", l2w(gR), d**-1.5 * Gp),
        KornRow("plate:dU_minus_R_wedge_e", l2w(dUmR), d**-0.5 * Gp),
        KornRow("plate:R_H1_plus_U3_H1", math.sqrt(l2w(R) ** 2 + l2w(gR) ** 2)
                + math.sqrt(l2w(U[2]) ** 2 + l2w(gU[2]) ** 2), d**-1.5 * Gp),
        KornRow("plate:R3_L2_plus_Ua_H1", l2w(R[2]) + math.sqrt(l2w(U[:2]) ** 2 + l2w(gU[:2]) ** 2),
                d**-0.5 * Gp),
        KornRow("plate_korn:ua_L2", l2p(uv[:2]), Gp),
        KornRow("plate_korn:u3_L2", l2p(uv[2]), Gp / d),
        KornRow("plate_korn:u_minus_U_L2", l2p(uv - U[:, :, None]), Gp / d),
        KornRow("plate_korn:grad_u_L2", l2p(Gu), Gp / d),
        KornRow("rod:wbar_L2", l2r(wbar), e * Gr),
        KornRow("rod:grad_wbar_L2", l2r(gwbar), Gr),
        KornRow("rod:dQ_L2", l2z(dQ), Gr / e**2),
        KornRow("rod:dW_minus_Q_wedge_e3", l2z(dW - Qe3), Gr / e),
        KornRow("rod:Q_minus_Q0_H1", h1z(Q - Q0[:, None], dQ), Gr / e**2),
        KornRow("rod:W3_minus_W30_H1", h1z(W[2] - W0[2], dW[2]), Gr / e),
        KornRow("rod:Wa_minus_Wa0_H1", h1z(W[:2] - W0[:2, None], dW[:2]),
                Gr / e**2 + e * float(np.linalg.norm(Q0))),
        KornRow("junction:Wa0_squared", float(W0[0] ** 2 + W0[1] ** 2),
                Gp**2 / (e * d) + (1 + d**2 / e**2) * d / e**2 * Gr**2),
        KornRow("junction:W30_minus_tildeU3_squared", float((W0[2] - tilde(0.0, 0.0)) ** 2),
                (1 + e**2 / d) * Gp**2 / d**2 + d / e**2 * Gr**2),
        KornRow("junction:Q0_squared", float(Q0 @ Q0), (1 + e / d**2) * Gp**2 / (e**2 * d) + d / e**4 * Gr**2),
        KornRow("plate:Gs_vs_dist_SO3", Gp, dist_p + dist_p**2 / d**2.5),
        KornRow("rod:Gs_vs_dist_SO3", Gr, dist_r + dist_r**2 / e**3 + (d + e**0.5) * dist_p**2 / (e * d**3)),
    ]
    return _ratio_safe(rows)


def write_korn_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(KORN_HEADER)
        for r in rows:
            w.writerow([r.inequality_id, f"{r.lhs:.17g}", f"{r.rhs_scale:.17g}", f"{r.ratio:.17g}"])
