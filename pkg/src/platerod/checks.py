"""Fast invariant suites run by ``platerod check``.

Each suite returns a ``CheckResult``; they are small versions of the
properties exercised by the test suite, sized to finish in seconds.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import PlateRodError


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _regime(cfg):
    from .regime import derive_regime

    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        k, kp = rng.uniform(3, 6, 2)
        r = derive_regime(k, kp, rng.uniform(0.01, 0.9))
        worst = max(worst, max(r.identity_residuals().values()))
    return worst <= 1e-13, f"max identity residual {worst:.2e}"


def _reduced(cfg):
    from .reduced import random_plate_sample, random_rod_sample, reduced_identity_residual

    rng = np.random.default_rng(1)
    worst = max(reduced_identity_residual(random_plate_sample(rng)) for _ in range(5))
    worst = max(worst, max(reduced_identity_residual(random_rod_sample(rng)) for _ in range(5)))
    return worst <= 1e-8, f"max brute-force/closed-form residual {worst:.2e}"


def _small_problem(kappa):
    from .forces import ForceData
    from .geometry import Geometry
    from .material import LameParams
    from .discretization import build_spaces
    from .regime import regime_from_delta

    g = Geometry(1.0, 1.0, 1.0, 1.0, ("left",), 1.0)
    dm = build_spaces(g, (2, 2, 4))
    fd = ForceData.build(["0.1", "0", "0.2 + 0.1*x1"], ["0", "0.05", "0.1"], None, None)
    return dm, LameParams(1.0, 1.0, 1.0, 1.0), fd, regime_from_delta(kappa, kappa, 0.01)


def _gradient(cfg):
    from .assembly import Assembler

    dm, lp, fd, r = _small_problem(3.0)
    A = Assembler(dm, lp, fd, r)
    rng = np.random.default_rng(2)
    s = 0.1 * rng.standard_normal(dm.n_free)
    _, g = A.value_gradient(s)
    worst = 0.0
    for _ in range(3):
        v = rng.standard_normal(dm.n_free)
        h = 1e-5
        fd_ = (A.value(s + h * v) - A.value(s - h * v)) / (2 * h)
        worst = max(worst, abs(fd_ - g @ v) / max(1.0, abs(fd_)))
    return worst <= 1e-6, f"max relative FD mismatch {worst:.2e}"


def _solver(cfg):
    from .solver import solve_newton

    dm, lp, fd, r = _small_problem(4.0)
    state, rep = solve_newton(dm, lp, fd, r)
    t = state.triple()
    plate, rod = t.plate, t.rod
    tie = abs(float(rod.eval(2, 0, 0.0)) - float(plate.eval(2, 0, 0, 0.0, 0.0)))
    clamp = max(abs(float(rod.eval(i, d, 0.0))) for i in (0, 1) for d in (0, 1))
    clamp = max(clamp, abs(float(rod.eval(3, 0, 0.0))))
    ok = rep.converged and rep.iterations == 1 and tie <= 1e-14 and clamp <= 1e-14
    return ok, f"iterations {rep.iterations}, junction residuals {tie:.1e} / {clamp:.1e}"


def _decomposition(cfg):
    from .decomposition import decompose_plate, decompose_rod
    from .displacement import random_polynomial_displacement

    rng = np.random.default_rng(3)
    u = random_polynomial_displacement(rng, 3)
    x = rng.uniform(-0.5, 0.5, (3, 8))
    x[2] *= 0.1
    pd = decompose_plate(u, 0.1)
    err = float(np.max(np.abs(pd.elementary(*x) + pd.u_bar(*x) - u.value(*x))))
    mom = float(np.max(np.abs(pd.moments(x[0], x[1]))))
    rd = decompose_rod(u, 0.1)
    mom = max(mom, float(np.max(np.abs(rd.moments(np.linspace(0.1, 0.9, 5))))))
    return err <= 1e-12 and mom <= 1e-12, f"roundtrip {err:.1e}, moments {mom:.1e}"


def _bridge(cfg):
    from .bridge3d import build_recovery_deformation, mollify_triple
    from .fields import AnalyticPlateField, AnalyticRodField, LimitTriple
    from .geometry import Geometry
    from .material import LameParams
    from .regime import regime_from_delta

    g = Geometry(1.0, 1.0, 1.0, 1.0, ("left",), 1.0)
    plate = AnalyticPlateField("0.1*(x1+1)**2", "0.05*(x1+1)**2*x2", "0.2*(x1+1)**2")
    rod = AnalyticRodField("0.1*x3**2", "0", "0.2 + 0.1*x3", "0.1*x3")
    ap = mollify_triple(LimitTriple(plate, rod), LameParams(1, 1, 1, 1), g, 3.0, 3.0, 4)
    r = regime_from_delta(3.0, 3.0, 0.04)
    v = build_recovery_deformation(ap, r)
    rng = np.random.default_rng(4)
    th = rng.uniform(0, 2 * math.pi, 16)
    rad = r.epsilon * np.sqrt(rng.uniform(0, 1, 16))
    x1, x2, x3 = rad * np.cos(th), rad * np.sin(th), rng.uniform(-r.delta, r.delta, 16)
    gap = float(np.max(np.abs(v.plate_displacement(x1, x2, x3) - v.rod_displacement(x1, x2, x3))))
    ggap = float(np.max(np.abs(v.plate_grad(x1, x2, x3) - v.rod_grad(x1, x2, x3))))
    return max(gap, ggap) <= 1e-14, f"junction cylinder mismatch {max(gap, ggap):.1e}"


def _kernels(cfg):
    if not kernels.use_numba():
        return True, "numba disabled; numpy kernels only"
    rng = np.random.default_rng(5)
    H = 0.1 * rng.standard_normal((200, 3, 3))
    w = rng.uniform(0, 1, 200)
    a = kernels.svk_integral(H, w, 1.3, 0.7, "numba")[0]
    b = kernels.svk_integral(H, w, 1.3, 0.7, "numpy")[0]
    rel = abs(a - b) / abs(b)
    return rel <= 1e-12, f"numba vs numpy relative difference {rel:.1e}"


SUITES = (
    ("regime", _regime),
    ("reduced-energy", _reduced),
    ("gradient", _gradient),
    ("solver-linear", _solver),
    ("decomposition", _decomposition),
    ("bridge-junction", _bridge),
    ("kernels", _kernels),
)


def run_checks(cfg=None) -> list[CheckResult]:
    out = []
    for name, fn in SUITES:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(cfg)
        except (PlateRodError, ArithmeticError, ValueError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out


def format_table(results) -> str:
    w = max(len(r.name) for r in results)
    lines = [f"{'suite'.ljust(w)}  status  detail"]
    for r in results:
        lines.append(f"{r.name.ljust(w)}  {'PASS' if r.passed else 'FAIL'}    {r.detail}")
    return "\n".join(lines)
