"""Displacement fields u on the 3D structure: value and gradient."""
from __future__ import annotations

import numpy as np
import sympy as sp

from . import expressions as ex

VARS = ("x1", "x2", "x3")


class Displacement:
    """u(x) with ``value -> (3, ...)`` and ``grad -> (3, 3, ...)`` where
    grad[i, j] = d u_i / d x_j."""

    def value(self, x1, x2, x3):
        raise NotImplementedError

    def grad(self, x1, x2, x3):
        raise NotImplementedError


class ExpressionDisplacement(Displacement):
    def __init__(self, u1=0, u2=0, u3=0):
        self.exprs = tuple(ex.parse(u, VARS) for u in (u1, u2, u3))
        syms = [ex.SYMBOLS[v] for v in VARS]
        self._v = [ex.lambdify(e, VARS) for e in self.exprs]
        self._g = [[ex.lambdify(sp.diff(e, s), VARS) for s in syms] for e in self.exprs]

    def value(self, x1, x2, x3):
        return np.stack([f(x1, x2, x3) for f in self._v])

    def grad(self, x1, x2, x3):
        return np.stack([np.stack([f(x1, x2, x3) for f in row]) for row in self._g])


class CallableDisplacement(Displacement):
    def __init__(self, value, grad):
        self._value, self._grad = value, grad

    def value(self, x1, x2, x3):
        return self._value(x1, x2, x3)

    def grad(self, x1, x2, x3):
        return self._grad(x1, x2, x3)


def random_polynomial_displacement(rng, degree: int = 3, scale: float = 1.0) -> ExpressionDisplacement:
    """Random polynomial with monomials x1^a x2^b x3^c, a + b + c <= degree."""
    x1, x2, x3 = (ex.SYMBOLS[v] for v in VARS)
    comps = []
    for _ in range(3):
        e = 0
        for a in range(degree + 1):
            for b in range(degree + 1 - a):
                for c in range(degree + 1 - a - b):
                    e += sp.Float(float(scale * rng.normal())) * x1**a * x2**b * x3**c
        comps.append(e)
    return ExpressionDisplacement(*comps)
