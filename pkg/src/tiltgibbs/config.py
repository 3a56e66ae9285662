"""Run configuration: a flat ``key = value`` text format and model construction.

Grammar (one entry per line, ``#`` starts a comment, blank lines ignored)::

    family     = weibull            # weibull | exp_exp | power, or "weibull:2"
    k          = 2                  # weibull shape (> 1)
    beta       = 1                  # power exponent (> 0)
    theta      = 0.5                # q-bound constant in (0, 1)
    eta        = 0.0625             # exponent of the R_infinity lower bound
    q_table    = 1,0.1; 5,0.0       # piecewise-linear q as "x,value" pairs
    t_grid     = 10, 30, 100, 300
    n_grid     = 8, 16, 32, 64
    a_schedule = rate:2,0.05        # a0 * n**(1/(2 kappa) - delta), or a list
    delta      = 0.02               # slab half-width (default rule if absent)
    samples    = 200000
    seed       = 0
    out        = results
    y_offsets  = 0.25, -0.25        # conditioning point a_n + offset * s
    mc         = true
    growth_threshold = 0.1

Lists are comma separated.  ``a_schedule`` is either ``rate:a0,delta`` or a
list of levels: one value (held fixed) or one per entry of ``n_grid``.
"""

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameterError
from .model import DEFAULT_ETA, DEFAULT_THETA, growth_schedule, make_builtin

ENV_OUT = "TILTGIBBS_OUT"


class ConfigError(InvalidParameterError):
    """Malformed or inconsistent run configuration."""


def _floats(text):
    items = [s.strip() for s in str(text).split(",") if s.strip()]
    try:
        return tuple(float(s) for s in items)
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return tuple(int(v) for v in vals)


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _number(kind):
    def conv(text):
        try:
            return kind(float(text)) if kind is int else kind(text)
        except ValueError as exc:
            raise ConfigError(f"expected {kind.__name__}, got {text!r}") from exc
    return conv


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run depends on; a run is a pure function of this."""

    family: str = "weibull"
    k: Optional[float] = None
    beta: Optional[float] = None
    theta: float = DEFAULT_THETA
    eta: float = DEFAULT_ETA
    q_table: str = ""
    t_grid: tuple = (10.0, 30.0, 100.0, 300.0)
    n_grid: Optional[tuple] = None
    a_schedule: Optional[str] = None
    delta: Optional[float] = None
    samples: int = 200_000
    seed: int = 0
    out: str = field(default="", compare=False)
    y_offsets: tuple = (0.25, -0.25)
    mc: bool = True
    growth_threshold: float = 0.1

    def with_defaults(self, **defaults):
        """Fill fields still at ``None`` from command-specific defaults."""
        fill = {k: v for k, v in defaults.items() if getattr(self, k) is None}
        return dataclasses.replace(self, **fill)

    def items(self):
        """``(key, text)`` pairs in field order; the output directory is excluded."""
        out = []
        for f in dataclasses.fields(self):
            if f.name == "out":
                continue
            out.append((f.name, _format_value(getattr(self, f.name))))
        return out

    def to_text(self):
        return "".join(f"{k} = {v}\n" for k, v in self.items())


def _format_value(v):
    if v is None:
        return "default"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


_CONVERTERS = {
    "family": str,
    "k": _number(float),
    "beta": _number(float),
    "theta": _number(float),
    "eta": _number(float),
    "q_table": str,
    "t_grid": _floats,
    "n_grid": _ints,
    "a_schedule": str,
    "delta": _number(float),
    "samples": _number(int),
    "seed": _number(int),
    "out": str,
    "y_offsets": _floats,
    "mc": _bool,
    "growth_threshold": _number(float),
}


def parse_text(text):
    """Parse ``key = value`` lines into a dict of typed values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in _CONVERTERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _CONVERTERS[key](value.strip())
    return values


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def merge(flags=None, file_values=None):
    """Defaults, then flags, then the config file (which wins)."""
    values = {"out": os.environ.get(ENV_OUT, ".")}
    for src in (flags or {}, file_values or {}):
        src = {k: v for k, v in src.items() if v is not None}
        if "family" in src:
            src.update(split_family(src["family"], src))
        values.update(src)
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def split_family(spec, values=None):
    """``"weibull:2"`` -> ``{"family": "weibull", "k": 2.0}``; bare names pass through."""
    name, _, arg = str(spec).partition(":")
    name = name.strip().lower().replace("-", "_")
    out = {"family": name}
    if arg:
        key = {"weibull": "k", "power": "beta"}.get(name)
        if key is None:
            raise ConfigError(f"family {name!r} takes no parameter")
        if values is None or values.get(key) is None:
            out[key] = _number(float)(arg)
    return out


def validate(cfg):
    if cfg.family not in ("weibull", "exp_exp", "power"):
        raise ConfigError(f"unknown family {cfg.family!r}")
    if cfg.n_grid is not None and len(cfg.n_grid) == 0:
        raise ConfigError("n_grid is empty")
    if cfg.n_grid is not None and min(cfg.n_grid) < 1:
        raise ConfigError("n_grid entries must be >= 1")
    if len(cfg.t_grid) == 0:
        raise ConfigError("t_grid is empty")
    if min(cfg.t_grid) < 0:
        raise ConfigError("t_grid entries must be >= 0")
    if cfg.samples < 16:
        raise ConfigError("samples must be at least 16")
    if cfg.delta is not None and not cfg.delta > 0:
        raise ConfigError("delta must be positive")
    if not 0.0 < cfg.theta < 1.0:
        raise ConfigError("theta must lie in (0, 1)")
    if not 0.0 < cfg.eta < 0.125:
        raise ConfigError("eta must lie in (0, 1/8)")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if len(cfg.y_offsets) == 0:
        raise ConfigError("y_offsets is empty")


def parse_q_table(text):
    """Piecewise-linear ``q`` from ``"x,v; x,v; ..."``, constant beyond the ends."""
    pairs = []
    for chunk in text.split(";"):
        if chunk.strip():
            xv = _floats(chunk)
            if len(xv) != 2:
                raise ConfigError(f"q_table entry {chunk!r} is not an x,value pair")
            pairs.append(xv)
    if not pairs:
        raise ConfigError("q_table has no entries")
    xs, vs = np.array(sorted(pairs)).T
    if np.any(np.diff(xs) <= 0):
        raise ConfigError("q_table abscissae must be distinct")
    return PiecewiseLinear(xs, vs)


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """Linear interpolant through ``(knots, values)``, constant beyond the ends."""

    knots: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.knots, self.values)


def build_model(cfg):
    """Construct and normalize the model described by ``cfg``."""
    params = {}
    if cfg.family == "weibull" and cfg.k is not None:
        params["k"] = cfg.k
    if cfg.family == "power" and cfg.beta is not None:
        params["beta"] = cfg.beta
    model = make_builtin(cfg.family, **params)
    if cfg.q_table or cfg.theta != model.theta:
        extra = {"theta": cfg.theta}
        if cfg.q_table:
            extra["q"] = parse_q_table(cfg.q_table)
            extra["breaks"] = tuple(float(v) for v in extra["q"].knots if v > 0)
        model = dataclasses.replace(model, **extra).normalized()
    return model


def resolve_schedule(cfg, model):
    """Mean levels ``a_n`` for each ``n`` in ``cfg.n_grid``."""
    n = np.asarray(cfg.n_grid, dtype=float)
    spec = cfg.a_schedule.strip()
    if spec.startswith("rate:"):
        args = _floats(spec[len("rate:"):])
        if len(args) != 2 or not args[0] > 0:
            raise ConfigError("a_schedule 'rate:a0,delta' needs a0 > 0 and delta")
        return np.atleast_1d(growth_schedule(model, n, args[0], args[1]))
    levels = np.array(_floats(spec))
    if levels.size == 1:
        return np.full(n.size, levels[0])
    if levels.size != n.size:
        raise ConfigError("a_schedule list must have one entry or one per n")
    return levels
