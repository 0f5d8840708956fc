"""TOML run configuration: schema, validation and defaults.

Every section is optional except where a command needs it (``triple`` for
``study``, ``decompose.u`` for ``decompose``). Unknown keys are rejected
with a suggestion; all problems are collected and reported together with
the line of the offending key.

Schema (schema_version = 1)::

    schema_version = 1

    [geometry]        a, b, c, d > 0 (omega = (-a, b) x (-c, d)), L > 0,
                      gamma0 = ["left", ...] subset of left/right/bottom/top
    [material]        lambda_p, mu_p, lambda_r, mu_r > 0
    [regime]          kappa >= 3, kappa_prime >= 3, and either epsilon or
                      delta in (0, 1) (used by solve and decompose)
    [forces]          f_p (over x1, x2), f_r, g1, g2 (over x3): a list of
                      three expressions or the path of a CSV table
    [discretization]  n1, n2, n_r >= 1, plate_order, rod_order (Gauss points)
    [solver]          method = "auto" | "newton" | "linear", tol, max_iter,
                      continuation_steps, advisory_threshold
    [triple]          plate = [U1, U2, U3] over (x1, x2),
                      rod = [W1, W2, W3, Q3] over x3
    [study]           deltas (strictly decreasing), n >= 2, workers,
                      plate_cells, plate_order, thickness_order, rod_cells,
                      rod_order, disc_radial, disc_angular
    [decompose]       u = [u1, u2, u3] over (x1, x2, x3), plate_cells, order,
                      tilde_resolution = [m1, m2]
    [output]          directory, plate_samples = [m1, m2], rod_samples

Expressions use + - * / ** and parentheses, numbers, pi, e, the
coordinates of the section, and sin cos tan exp log sqrt abs sinh cosh
tanh atan Piecewise Heaviside Max Min.
"""
from __future__ import annotations

import copy
import difflib
import math
import re
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

SCHEMA_VERSION = 1

_EDGES = ("left", "right", "bottom", "top")


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _positive(v):
    return None if _num(v) and v > 0 else "must be a positive number"


def _pos_int(v):
    return None if _int(v) and v >= 1 else "must be a positive integer"


def _at_least(k):
    def check(v):
        return None if _int(v) and v >= k else f"must be an integer >= {k}"
    return check


def _exponent(v):
    if not _num(v):
        return "must be a number"
    return None if v >= 3 else f"must satisfy kappa >= 3 (got {v}); the model only covers the critical and linear regimes"


def _unit_open(v):
    return None if _num(v) and 0 < v < 1 else "must lie in (0, 1)"


def _opt_unit_open(v):
    return None if v is None else _unit_open(v)


def _str(v):
    return None if isinstance(v, str) and v else "must be a non-empty string"


def _edges(v):
    if not isinstance(v, list) or not v:
        return "must be a non-empty list of edges"
    bad = [e for e in v if e not in _EDGES]
    return f"unknown edge(s) {bad}; choose from {list(_EDGES)}" if bad else None


def _exprs(n):
    def check(v):
        if v is None:
            return None
        if isinstance(v, str):
            return None  # table path
        if isinstance(v, list) and len(v) == n and all(isinstance(x, (str, int, float)) for x in v):
            return None
        return f"must be a list of {n} expressions" + (" or a CSV table path" if n == 3 else "")
    return check


def _deltas(v):
    if not isinstance(v, list) or not v or not all(_num(x) for x in v):
        return "must be a non-empty list of numbers"
    if any(not 0 < x < 1 for x in v):
        return "entries must lie in (0, 1)"
    if any(b >= a for a, b in zip(v, v[1:])):
        return "must be strictly decreasing"
    return None


def _pair(v):
    return None if isinstance(v, list) and len(v) == 2 and all(_int(x) and x >= 1 for x in v) else \
        "must be a list of two positive integers"


def _method(v):
    return None if v in ("auto", "newton", "linear") else 'must be "auto", "newton" or "linear"'


def _opt_positive(v):
    return None if v is None else _positive(v)


# section -> key -> (default, validator); None default means "not set"
SCHEMA = {
    "geometry": {
        "a": (1.0, _positive), "b": (1.0, _positive), "c": (1.0, _positive), "d": (1.0, _positive),
        "L": (1.0, _positive), "gamma0": (["left"], _edges),
    },
    "material": {
        "lambda_p": (1.0, _positive), "mu_p": (1.0, _positive),
        "lambda_r": (1.0, _positive), "mu_r": (1.0, _positive),
    },
    "regime": {
        "kappa": (3.0, _exponent), "kappa_prime": (3.0, _exponent),
        "epsilon": (None, _opt_unit_open), "delta": (None, _opt_unit_open),
    },
    "forces": {"f_p": (None, _exprs(3)), "f_r": (None, _exprs(3)), "g1": (None, _exprs(3)), "g2": (None, _exprs(3))},
    "discretization": {
        "n1": (8, _pos_int), "n2": (8, _pos_int), "n_r": (16, _pos_int),
        "plate_order": (5, _pos_int), "rod_order": (6, _pos_int),
    },
    "solver": {
        "method": ("auto", _method), "tol": (1e-10, _positive), "max_iter": (50, _pos_int),
        "continuation_steps": (1, _pos_int), "advisory_threshold": (None, _opt_positive),
    },
    "triple": {"plate": (None, _exprs(3)), "rod": (None, _exprs(4))},
    "study": {
        "deltas": ([0.2, 0.1, 0.05, 0.025], _deltas), "n": (2, _at_least(2)), "workers": (1, _pos_int),
        "plate_cells": (4, _pos_int), "plate_order": (6, _pos_int), "thickness_order": (6, _pos_int),
        "rod_cells": (8, _pos_int), "rod_order": (6, _pos_int),
        "disc_radial": (8, _pos_int), "disc_angular": (16, _pos_int),
    },
    "decompose": {
        "u": (None, _exprs(3)), "plate_cells": (8, _pos_int), "order": (5, _pos_int),
        "tilde_resolution": ([16, 16], _pair),
    },
    "output": {"directory": ("out", _str), "plate_samples": ([9, 9], _pair), "rod_samples": (17, _pos_int)},
}


class RunConfig(dict):
    """Validated configuration: a nested dict with every default filled.

    Sections are reachable as attributes (``cfg.geometry["a"]``);
    ``base_dir`` resolves relative table paths.
    """

    def __getattr__(self, name):
        try:
            return self[name]
        except KeyError:
            raise AttributeError(name) from None

    base_dir: Path = Path(".")

    def resolved(self) -> dict:
        return copy.deepcopy(dict(self))


def _line_of(text: str, section: str | None, key: str) -> int | None:
    """Best-effort line number of ``key`` (inside ``[section]``)."""
    if text is None:
        return None
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[\s*([^\]]+?)\s*\]", s)
        if m:
            current = m.group(1)
            if section is not None and key is None and current == section:
                return i
            continue
        if re.match(rf"{re.escape(key or '')}\s*=", s) and current == section:
            return i
    return None


def _where(text, section, key):
    ln = _line_of(text, section, key)
    return f" (line {ln})" if ln else ""


def _suggest(word, choices, section=None):
    m = difflib.get_close_matches(word, list(choices), n=1, cutoff=0.6)
    if m:
        return f"; did you mean '{m[0]}'?"
    low = word.lower()
    if "thick" in low or "thik" in low or "radius" in low:
        return "; the plate thickness is regime.delta and the rod radius regime.epsilon"
    if section is None:
        return f"; valid sections: {', '.join(SCHEMA)}"
    elsewhere = {f"{s}.{k}": k for s, keys in SCHEMA.items() if s != section for k in keys}
    m = difflib.get_close_matches(word, list(elsewhere.values()), n=1, cutoff=0.5)
    if m:
        full = next(q for q, k in elsewhere.items() if k == m[0])
        return f"; did you mean '{full}'? (valid keys here: {', '.join(choices)})"
    return f"; valid keys here: {', '.join(choices)}"


def validate(data: dict, text: str | None = None, base_dir: Path | str = ".") -> RunConfig:
    errors = []
    data = dict(data)
    version = data.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version: unsupported version {version!r} (expected {SCHEMA_VERSION})"
                      f"{_where(text, None, 'schema_version')}")
    out = RunConfig(schema_version=SCHEMA_VERSION)
    out.base_dir = Path(base_dir)
    for name, body in data.items():
        if name not in SCHEMA:
            kind = f"unknown section [{name}]" if isinstance(body, dict) else f"unknown top-level key '{name}'"
            where = _where(text, name, None) if isinstance(body, dict) else _where(text, None, name)
            errors.append(f"{kind}{where}{_suggest(name, SCHEMA)}")
        elif not isinstance(body, dict):
            errors.append(f"[{name}] must be a table{_where(text, None, name)}")
    for section, keys in SCHEMA.items():
        given = data.get(section, {})
        if not isinstance(given, dict):
            continue
        sec = {}
        for k, v in given.items():
            if k not in keys:
                errors.append(f"{section}.{k}: unknown key{_where(text, section, k)}{_suggest(k, keys, section)}")
        for k, (default, check) in keys.items():
            v = given.get(k, copy.deepcopy(default))
            if isinstance(default, float) and _int(v):
                v = float(v)
            msg = check(v)
            if msg:
                errors.append(f"{section}.{k}: {msg}{_where(text, section, k)}")
            sec[k] = v
        out[section] = sec
    reg = out.get("regime", {})
    if reg.get("epsilon") is not None and reg.get("delta") is not None:
        errors.append(f"regime: give epsilon or delta, not both{_where(text, 'regime', 'delta')}")
    if errors:
        raise ConfigError(errors)
    return out


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    return validate(data, text, path.parent)


def parse_config_text(text: str, base_dir=".") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    return validate(data, text, base_dir)


# ---------------------------------------------------------------- builders


def build_geometry(cfg: RunConfig):
    from .geometry import Geometry

    g = cfg["geometry"]
    return Geometry(g["a"], g["b"], g["c"], g["d"], tuple(g["gamma0"]), g["L"])


def build_material(cfg: RunConfig):
    from .material import LameParams

    m = cfg["material"]
    return LameParams(m["lambda_p"], m["mu_p"], m["lambda_r"], m["mu_r"])


def build_forces(cfg: RunConfig):
    from .forces import ForceData

    f = cfg["forces"]

    def spec(v):
        if isinstance(v, str):
            p = Path(v)
            return str(p if p.is_absolute() else cfg.base_dir / p)
        return None if v is None else [str(x) for x in v]

    return ForceData.build(spec(f["f_p"]), spec(f["f_r"]), spec(f["g1"]), spec(f["g2"]))


def build_regime(cfg: RunConfig):
    from .regime import derive_regime, regime_from_delta

    r = cfg["regime"]
    if r["epsilon"] is not None:
        return derive_regime(r["kappa"], r["kappa_prime"], r["epsilon"])
    if r["delta"] is not None:
        return regime_from_delta(r["kappa"], r["kappa_prime"], r["delta"])
    raise ConfigError("regime: epsilon or delta is required for this command")


def build_triple(cfg: RunConfig):
    from .fields import AnalyticPlateField, AnalyticRodField, LimitTriple

    t = cfg["triple"]
    if t["plate"] is None and t["rod"] is None:
        raise ConfigError("[triple] with plate and/or rod expressions is required for this command")
    for k, v in t.items():
        if isinstance(v, str):
            raise ConfigError(f"triple.{k}: must be a list of expressions")
    plate = AnalyticPlateField(*[str(x) for x in (t["plate"] or ["0", "0", "0"])])
    rod = AnalyticRodField(*[str(x) for x in (t["rod"] or ["0", "0", "0", "0"])])
    return LimitTriple(plate, rod)
