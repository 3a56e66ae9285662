"""Light-tailed densities ``p(x) = c exp(-(g(x) - q(x)))`` on the half-line.

A :class:`DensityModel` bundles the exponent ``g``, the perturbation ``q``,
``h = g'`` with its first three derivatives, the log normalizer and a
regularity class tag.  Builtin families:

``weibull(k)``
    ``g(x) = x**k - (k-1) log x``, regularly varying ``h`` of index ``k-1``.
``exp_exp``
    ``g(x) = h(x) = exp(x - 1)``, rapidly varying ``h`` with ``psi(u) = log u + 1``.
``power(beta)``
    ``g(x) = x**(beta+1)/(beta+1)``, ``h(x) = x**beta`` with slowly varying part 1.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _quadrature
from ._roots import newton_increasing
from .errors import InvalidParameterError, NonIntegrableError, OutOfDomainError

FD_STEP = 1e-5
DEFAULT_THETA = 0.5
DEFAULT_ETA = 1.0 / 16.0


@dataclass(frozen=True)
class RBeta:
    beta: float

    def __str__(self):
        return f"RBeta(beta={self.beta:g})"


@dataclass(frozen=True)
class RInfinity:
    def __str__(self):
        return "RInfinity"


def _central_diff(f):
    def df(x):
        x = np.asarray(x, dtype=float)
        d = np.maximum(np.abs(x), 1e-3) * FD_STEP
        return (f(x + d) - f(x - d)) / (2.0 * d)

    return df


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class DensityModel:
    """Immutable description of one density; see :func:`make_builtin`.

    ``breaks`` lists points where ``q`` (or ``g``) is not smooth; quadrature
    panels are split there.  ``epsilon`` optionally holds the closed-form Karamata function: in the
    ``x`` variable for ``RBeta`` models and in the ``t`` variable of the
    ``psi``-representation for ``RInfinity`` models.
    """

    g: Callable
    h: Callable
    h1: Callable
    h2: Callable
    h3: Callable
    class_hint: object
    q: Callable = _zero
    log_c: float = 0.0
    theta: float = DEFAULT_THETA
    x_min: float = 0.0
    name: str = "custom"
    params: tuple = ()
    epsilon: Optional[Callable] = field(default=None, compare=False)
    growth_index: Optional[float] = None
    breaks: tuple = ()

    def log_kernel(self, x):
        """``-g(x) + q(x)`` (no normalizer), ``-inf`` off the support."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = -self.g(np.where(x > 0, x, 1.0)) + self.q(np.where(x > 0, x, 1.0))
        return np.where(x > 0, out, -np.inf)

    def log_pdf(self, x):
        return self.log_c + self.log_kernel(x)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def psi(self, u):
        return psi(self, u)

    def normalized(self):
        return replace(self, log_c=normalize(self))

    def mode_and_scale(self, t):
        """Location and width of the peak of ``exp(t x - g(x))``."""
        h_lo = float(self.h(self.x_min)) if self.x_min > 0 else float(_h_at_zero(self))
        center = self.x_min if t <= h_lo else psi(self, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            curv = float(self.h1(max(center, 1e-300)))
        scale = 1.0 / np.sqrt(curv) if np.isfinite(curv) and curv > 1e-12 else 1.0
        return center, min(scale, max(1.0, center))

    def __str__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.name}({args})" if args else self.name


def _h_at_zero(model):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = float(model.h(0.0))
    return v if np.isfinite(v) else -np.inf


def make_builtin(family, **params):
    """Build and normalize one of the builtin families.

    >>> make_builtin("weibull", k=2).h(1.0)
    1.0
    """
    family = family.lower().replace("-", "_")
    if family == "weibull":
        k = float(params.pop("k", 2.0))
        if not k > 1.0:
            raise InvalidParameterError(f"weibull requires k > 1, got {k}")
        km1 = k - 1.0
        model = DensityModel(
            g=lambda x: x**k - km1 * np.log(x),
            h=lambda x: k * x**km1 - km1 / x,
            h1=lambda x: k * km1 * x ** (k - 2.0) + km1 / x**2,
            h2=lambda x: k * km1 * (k - 2.0) * x ** (k - 3.0) - 2.0 * km1 / x**3,
            h3=lambda x: k * km1 * (k - 2.0) * (k - 3.0) * x ** (k - 4.0) + 6.0 * km1 / x**4,
            class_hint=RBeta(km1),
            x_min=(km1 / k) ** (1.0 / k) + 1e-6,
            name="weibull",
            params=(("k", k),),
            epsilon=lambda x: k * km1 / (k * x**k - km1),
            growth_index=k,
        )
    elif family == "exp_exp":
        e = lambda x: np.exp(x - 1.0)  # noqa: E731
        model = DensityModel(
            g=e, h=e, h1=e, h2=e, h3=e,
            class_hint=RInfinity(),
            name="exp_exp",
            epsilon=lambda t: 1.0 / (np.log(t) + 1.0),
        )
    elif family == "power":
        b = float(params.pop("beta", 1.0))
        if not b > 0.0:
            raise InvalidParameterError(f"power requires beta > 0, got {b}")
        model = DensityModel(
            g=lambda x: x ** (b + 1.0) / (b + 1.0),
            h=lambda x: x**b,
            h1=lambda x: b * x ** (b - 1.0),
            h2=lambda x: b * (b - 1.0) * x ** (b - 2.0),
            h3=lambda x: b * (b - 1.0) * (b - 2.0) * x ** (b - 3.0),
            class_hint=RBeta(b),
            name="power",
            params=(("beta", b),),
            epsilon=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            growth_index=b + 1.0,
        )
    else:
        raise InvalidParameterError(f"unknown family {family!r}")
    if params:
        raise InvalidParameterError(f"unexpected parameters for {family}: {sorted(params)}")
    return model.normalized()


def from_functions(g, class_hint, *, q=None, h=None, h1=None, h2=None, h3=None,
                   theta=DEFAULT_THETA, x_min=0.0, name="custom", growth_index=None):
    """User-defined model; missing derivatives default to central differences."""
    if not 0.0 < theta < 1.0:
        raise InvalidParameterError("theta must lie in (0, 1)")
    h = h or _central_diff(g)
    h1 = h1 or _central_diff(h)
    h2 = h2 or _central_diff(h1)
    h3 = h3 or _central_diff(h2)
    model = DensityModel(g=g, h=h, h1=h1, h2=h2, h3=h3, q=q or _zero,
                         class_hint=class_hint, theta=theta, x_min=x_min, name=name,
                         growth_index=growth_index)
    return model.normalized()


def normalize(model):
    """Log normalizing constant making ``exp(log_c - g + q)`` integrate to one."""
    xs = np.logspace(1, 3, 21)
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = np.asarray(model.g(xs), dtype=float) / xs
    finite = ratio[np.isfinite(ratio)]
    if finite.size >= 2 and np.any(np.diff(finite) <= 0):
        raise NonIntegrableError("g(x)/x is not increasing; tail is not light")
    center, scale = model.mode_and_scale(0.0)
    panels = _quadrature.panel_rule(model.log_kernel, center, scale, breaks=model.breaks)
    return -panels.log_integral()


def psi(model, u):
    """Inverse of the increasing function ``h``: the ``x`` with ``h(x) = u``."""
    u = float(u)
    lo = model.x_min
    h_lo = float(model.h(lo)) if lo > 0 else _h_at_zero(model)
    if u < h_lo or not np.isfinite(u):
        raise OutOfDomainError(f"u={u!r} is below the range of h (h(x_min)={h_lo:.6g})")
    if u == h_lo:
        return lo
    ftol = 1e-10 * max(1.0, abs(u))
    hi = max(2.0 * lo, 1.0)
    while float(model.h(hi)) < u:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise OutOfDomainError(f"h never reaches {u!r}")

    def fdf(x):
        return float(model.h(x)) - u, float(model.h1(x))

    return newton_increasing(fdf, lo, hi, ftol=ftol)


def epsilon_of(model, x):
    """Karamata function of the slowly varying part.

    ``RBeta``: ``x l'(x)/l(x)`` with ``l = h/x**beta``.  ``RInfinity``: the
    ``epsilon`` of the representation of ``psi`` evaluated at ``t = h(x)``.
    """
    x = np.asarray(x, dtype=float)
    hint = model.class_hint
    if isinstance(hint, RBeta):
        if model.epsilon is not None:
            return model.epsilon(x)
        return x * model.h1(x) / model.h(x) - hint.beta
    t = model.h(x)
    return psi_epsilon(model, t)


def psi_epsilon(model, t):
    """``t psi'(t) / psi(t)`` for an ``RInfinity`` model, as a function of ``t``."""
    t = np.asarray(t, dtype=float)
    if model.epsilon is not None:
        return model.epsilon(t)
    x = np.vectorize(lambda u: psi(model, u))(t)
    return t / (x * model.h1(x))


def growth_schedule(model, n, a0, delta):
    """Mean levels ``a_n`` growing slowly enough for the extreme-deviation regime.

    For power-like ``psi`` the admissible rate is ``a_n**kappa / sqrt(n) -> 0``
    (``kappa`` the model's growth index), giving ``a0 * n**(1/(2 kappa) - delta)``.
    Rapidly varying models use ``a0 + (1/2 - delta) log n``.
    """
    n = np.asarray(n, dtype=float)
    if model.growth_index is not None:
        return a0 * n ** (1.0 / (2.0 * model.growth_index) - delta)
    return a0 + (0.5 - delta) * np.log(n)


# -- regularity certification -------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    witness: float


@dataclass(frozen=True)
class RegularityReport:
    regularity_class: str
    beta_estimate: Optional[float]
    epsilon_values: np.ndarray
    checks: tuple

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)


def _log_slope(x, y):
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _fd_derivs(f, x, rel):
    d = x * rel
    f0, fp, fm = f(x), f(x + d), f(x - d)
    return (fp - fm) / (2 * d), (fp - 2 * f0 + fm) / d**2


def classify(model, x_grid=None, eta=DEFAULT_ETA, slope_tol=0.05):
    """Numerically certify the regularity class of ``h``.

    Limits are replaced by trends over the top decade of ``x_grid``.  For
    ``RInfinity`` models the grid is read in the ``t`` variable of the
    ``psi``-representation (``x = psi(t)``), since ``h`` explodes too fast
    for an ``x`` grid spanning three decades.  Failures are recorded, not
    raised.
    """
    hint = model.class_hint
    if x_grid is None:
        x_grid = np.logspace(0, 4, 41) if isinstance(hint, RBeta) else np.logspace(1, 8, 71)
    grid = np.asarray(x_grid, dtype=float)
    if grid.min() <= 0 or np.log10(grid.max() / grid.min()) < 3.0 - 1e-9:
        raise InvalidParameterError("classification grid must be positive and span >= 3 decades")
    top = grid >= grid.max() / 10.0
    checks = []

    if isinstance(hint, RBeta):
        eps_fn = lambda x: epsilon_of(model, x)  # noqa: E731
        eps = eps_fn(grid)
        d1, d2 = _fd_derivs(eps_fn, grid, 1e-3)
        d1b, d2b = _fd_derivs(eps_fn, grid, 5e-4)
        noise = 10.0 * (np.abs(d1 - d1b) * grid + np.abs(d2 - d2b) * grid**2).max() + 1e-300
        for name, vals in (("eps_derivative_bounded", grid * np.abs(d1)),
                           ("eps_second_derivative_bounded", grid**2 * np.abs(d2))):
            v = vals[top] + noise
            checks.append(Check(name, bool(np.all(np.isfinite(v)) and _log_slope(grid[top], v) <= slope_tol),
                                float(vals[top].max())))
        hs = np.asarray(model.h(grid[top]), dtype=float)
        beta_est = _log_slope(grid[top], hs)
        x_for_q = grid
    else:
        eps_fn = lambda t: psi_epsilon(model, t)  # noqa: E731
        eps = eps_fn(grid)
        d1, d2 = _fd_derivs(eps_fn, grid, 1e-3)
        d1b, d2b = _fd_derivs(eps_fn, grid, 5e-4)
        band = 10.0 * (np.abs(d1 - d1b) * grid + np.abs(d2 - d2b) * grid**2).max() / np.abs(eps).min()
        for name, vals in (("eps_relative_derivative_vanishes", np.abs(grid * d1 / eps)),
                           ("eps_relative_second_derivative_vanishes", np.abs(grid**2 * d2 / eps))):
            v = vals[top]
            checks.append(Check(name, bool(v[-1] <= v[0] + band and np.all(np.diff(v) <= band)),
                                float(v[-1])))
        lower = grid[top] ** eta * eps[top]
        ok = bool(np.all(lower > 0) and _log_slope(grid[top], lower) >= -slope_tol)
        checks.append(Check("eps_power_lower_bound", ok, float(lower.min())))
        beta_est = None
        x_for_q = np.array([psi(model, t) for t in grid])

    # perturbation bound sup_{|v-x|<theta x} |q(v)| <= 1/(x sqrt(h(x))) for large x
    xq = x_for_q[x_for_q >= x_for_q.max() / 10.0]
    offsets = np.linspace(-model.theta, model.theta, 33)[1:-1]
    v = xq[:, None] * (1.0 + offsets[None, :])
    qmax = np.abs(model.q(v)).max(axis=1)
    bound = 1.0 / (xq * np.sqrt(model.h(xq)))
    ratio = qmax / bound
    checks.append(Check("perturbation_bound", bool(np.all(ratio <= 1.0)), float(ratio.max())))

    return RegularityReport(
        regularity_class=str(hint),
        beta_estimate=beta_est,
        epsilon_values=np.column_stack([grid, eps]),
        checks=tuple(checks),
    )
