"""Minimizers for the discrete J3: linear solve, damped Newton, continuation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from ._jit import set_threads
from .assembly import Assembler
from .discretization import DiscreteState, DofMap
from .errors import FactorizationError, WrongRegimeError
from .forces import force_norms

log = logging.getLogger(__name__)

ADVISORY = ("the small-force hypotheses of the existence result may be violated: "
            "reduce the loads (N_fp = {:.4g}, N_fr = {:.4g}) or use continuation")


@dataclass
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 50
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    max_shift: float = 1e6
    advisory_threshold: float | None = None  # warn when N_fp + N_fr exceeds it
    threads: int | None = None


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    grad_norm: float
    energy: float
    regime: object
    warnings: list = field(default_factory=list)
    N_fp: float = 0.0
    N_fr: float = 0.0
    threads: int = 1
    load_fraction: float = 1.0
    energies: list = field(default_factory=list)

    def as_row(self) -> dict:
        r = self.regime
        return {
            "converged": int(self.converged), "iterations": self.iterations,
            "grad_norm": self.grad_norm, "energy": self.energy,
            "kappa": r.kappa, "kappa_prime": r.kappa_prime, "theta": r.theta, "eta": r.eta,
            "N_fp": self.N_fp, "N_fr": self.N_fr, "threads": self.threads,
            "load_fraction": self.load_fraction, "warnings": " | ".join(self.warnings),
        }


class SPDFactor:
    """Sparse LU in symmetric mode with diagonal pivoting, used as an
    LDL^T: the matrix is positive definite iff no off-diagonal pivot was
    needed and all pivots are positive."""

    def __init__(self, A: sps.spmatrix):
        A = sps.csc_matrix(A)
        try:
            self.lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                                options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise FactorizationError(f"singular matrix: {exc}") from None
        diag = self.lu.U.diagonal()
        self.spd = bool(np.all(self.lu.perm_r == self.lu.perm_c) and np.all(diag > 0))
        self.A = A

    def solve(self, b: np.ndarray) -> np.ndarray:
        x = self.lu.solve(b)
        # one step of iterative refinement
        return x + self.lu.solve(b - self.A @ x)


def _norms(dm, fd):
    try:
        return force_norms(fd, dm.geometry)
    except Exception:  # norms are advisory only
        return float("nan"), float("nan")


def _newton_dir(H, g, scale, opts, warnings):
    n = H.shape[0]
    shift = 0.0
    I = sps.identity(n, format="csc")
    while True:
        try:
            F = SPDFactor(H + shift * I if shift else H)
            if F.spd:
                return -F.solve(g), shift
        except FactorizationError:
            pass
        shift = max(1e-10 * scale, 10.0 * shift)
        if shift > opts.max_shift * max(1.0, scale):
            return None, shift


def solve_newton(dm: DofMap, lp, fd, r, opts: SolveOptions | None = None, start=None,
                 assembler: Assembler | None = None):
    """Damped Newton with Armijo backtracking and diagonal-shift regularization."""
    opts = opts or SolveOptions()
    threads = set_threads(opts.threads)
    A = assembler or Assembler(dm, lp, fd, r)
    N_fp, N_fr = _norms(dm, fd)
    warnings = []
    if opts.advisory_threshold is not None and N_fp + N_fr > opts.advisory_threshold:
        warnings.append(ADVISORY.format(N_fp, N_fr))
    s = np.zeros(dm.n_free) if start is None else np.array(
        start.coeffs if isinstance(start, DiscreteState) else start, dtype=float)
    tol = opts.tol * (1.0 + np.linalg.norm(A.load))
    J, g = A.value_gradient(s)
    energies = [J]
    it = 0
    converged = bool(np.max(np.abs(g), initial=0.0) <= tol)
    while not converged and it < opts.max_iter:
        H = A.hessian(s)
        scale = float(abs(H).max()) if H.nnz else 1.0
        p, shift = _newton_dir(H, g, scale, opts, warnings)
        if p is None:
            warnings.append("Hessian indefinite beyond the maximal shift; " + ADVISORY.format(N_fp, N_fr))
            break
        if shift:
            log.debug("iteration %d: diagonal shift %.3e", it, shift)
        slope = float(g @ p)
        if slope >= 0:
            p, slope = -g, -float(g @ g)
        t = 1.0
        for _ in range(opts.max_backtracks):
            Jt, gt = A.value_gradient(s + t * p)
            if Jt <= J + opts.armijo * t * slope:
                break
            t *= opts.backtrack
        else:
            warnings.append(f"line search failed at iteration {it}")
            break
        s, J, g = s + t * p, Jt, gt
        energies.append(J)
        it += 1
        converged = bool(np.max(np.abs(g), initial=0.0) <= tol)
    if not converged and it >= opts.max_iter:
        warnings.append(f"iteration cap {opts.max_iter} reached")
    rep = SolveReport(converged, it, float(np.max(np.abs(g), initial=0.0)), float(J), r, warnings,
                      N_fp, N_fr, threads, 1.0, energies)
    return DiscreteState(s, dm), rep


def solve_linear(dm: DofMap, lp, fd, r, opts: SolveOptions | None = None, assembler=None):
    """Unique minimizer of the quadratic functional (kappa, kappa' > 3)."""
    if not r.quadratic:
        raise WrongRegimeError("solve_linear needs kappa > 3 and kappa' > 3; use solve_newton")
    opts = opts or SolveOptions()
    threads = set_threads(opts.threads)
    A = assembler or Assembler(dm, lp, fd, r)
    H = A.hessian(np.zeros(dm.n_free))
    F = SPDFactor(H)
    if not F.spd:
        raise FactorizationError("stiffness matrix is not positive definite (is gamma0 clamping the plate?)")
    s = F.solve(A.load)
    J, g = A.value_gradient(s)
    res = float(np.max(np.abs(g), initial=0.0))
    tol = opts.tol * (1.0 + np.linalg.norm(A.load))
    N_fp, N_fr = _norms(dm, fd)
    warnings = [] if res <= tol else [f"residual {res:.3e} above tolerance {tol:.3e}"]
    rep = SolveReport(res <= tol, 1, res, J, r, warnings, N_fp, N_fr, threads, 1.0, [0.0, J])
    return DiscreteState(s, dm), rep


def continuation(dm: DofMap, lp, fd, r, steps: int = 1, opts: SolveOptions | None = None, start=None):
    """Solve for loads (k/steps) fd, k = 1..steps, warm-starting each solve."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    state = start
    done = 0.0
    total_it = 0
    rep = None
    for k in range(1, steps + 1):
        frac = k / steps
        f = fd if k == steps else fd.scaled(frac)
        state, rep = solve_newton(dm, lp, f, r, opts, start=state)
        total_it += rep.iterations
        if not rep.converged:
            rep.warnings.append(f"continuation stopped: largest solved load fraction {done:.4g}")
            rep.load_fraction = done
            break
        done = frac
    if steps > 1:
        rep = replace(rep, iterations=total_it, N_fp=_norms(dm, fd)[0], N_fr=_norms(dm, fd)[1])
        if rep.converged:
            rep.load_fraction = 1.0
    return state, rep
