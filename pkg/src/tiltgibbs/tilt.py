"""Exponential tilting: log-MGF, tilted moments and their Abelian asymptotics.

All MGF-scale quantities stay in log space; ``K(x, t) = t x - g(x)`` reaches
thousands of nats for moderate ``t``.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from . import _quadrature
from ._roots import expand_bracket, newton_increasing
from .errors import BelowMeanError, InvalidParameterError, OutOfDomainError
from .model import psi

M6 = 15.0  # sixth moment of the standard normal
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Moments(NamedTuple):
    m: float
    s2: float
    mu3: float


@dataclass(frozen=True)
class TiltState:
    t: float
    x_hat: float
    sigma: float
    log_phi: float
    m_exact: float
    s2_exact: float
    mu3_exact: float
    m_asym: float
    s2_asym: float
    mu3_asym: float
    m_refined: float


@dataclass(frozen=True)
class Diagnostics:
    h2_sigma3: float
    h2_sigma4: float
    log_sigma_over_K: float
    sup_h3_window: float


def tilted_panels(model, t):
    """Quadrature panels for ``exp(t x) p(x)`` (log integrand includes ``log c``)."""
    return _tilted(model, float(t))[0]


@lru_cache(maxsize=4096)
def _tilted(model, t):
    if t < 0 or not math.isfinite(t):
        raise InvalidParameterError(f"tilt parameter must be finite and >= 0, got {t!r}")
    center, scale = model.mode_and_scale(t)
    panels = _quadrature.panel_rule(lambda x: model.log_pdf(x) + t * x, center, scale,
                                    breaks=model.breaks)
    log_phi = 0.0 if t == 0.0 else panels.log_integral()
    wts = panels.scaled()
    wts = wts / wts.sum()
    m = float(np.sum(wts * panels.x))
    d = panels.x - m
    s2 = float(np.sum(wts * d * d))
    mu3 = float(np.sum(wts * d * d * d))
    return panels, log_phi, Moments(m, s2, mu3)


def log_mgf_quadrature(model, t):
    """``log Phi(t)`` by log-space panel quadrature (``0`` at ``t = 0``)."""
    return _tilted(model, float(t))[1]


def _laplace_point(model, t):
    x_hat = psi(model, t)
    if not x_hat > 0.0 or x_hat < 2.0 * model.x_min:
        raise OutOfDomainError(f"t={t} too small for the Laplace approximation")
    sigma = 1.0 / math.sqrt(float(model.h1(x_hat)))
    return x_hat, sigma


def log_mgf_laplace(model, t):
    """Abel-type approximation ``log c + log sqrt(2 pi) + log sigma + K(x_hat, t)``."""
    x_hat, sigma = _laplace_point(model, t)
    k_hat = t * x_hat - float(model.g(x_hat))
    return model.log_c + LOG_SQRT_2PI + math.log(sigma) + k_hat


def psi_moment_integral(model, t, alpha):
    """Signed log of ``int (x - x_hat)**alpha exp(t x) p(x) dx``."""
    if alpha not in (0, 1, 2, 3):
        raise InvalidParameterError("alpha must be one of 0, 1, 2, 3")
    x_hat = psi(model, t)
    panels = tilted_panels(model, t)
    return panels.signed_log_integral((panels.x - x_hat) ** alpha)


def _gauss_partial_moments(L, top):
    """``I_j = int_{-L}^{L} y**j exp(-y**2/2) dy`` for ``j = 0..top``."""
    out = np.zeros(top + 1)
    out[0] = math.sqrt(2.0 * math.pi) * (2.0 * ndtr(L) - 1.0) if L > 0 else 0.0
    edge = 0.0 if math.isinf(L) else math.exp(-0.5 * L * L)
    for j in range(2, top + 1, 2):
        boundary = 0.0 if math.isinf(L) else 2.0 * L ** (j - 1) * edge
        out[j] = (j - 1) * out[j - 2] - boundary
    return out


def t1_term(model, t, alpha, l=None):
    """Truncated Gaussian expansion term of ``Psi(t, alpha)`` up to the cubic correction.

    ``l`` is the slowly varying cutoff (default ``(log t)**3``); the
    integration half-width is ``l**(1/3) / sqrt(2)``.  ``l = inf`` gives the
    untruncated limit.
    """
    if l is None:
        l = math.log(t) ** 3
    if not l > 1.0:
        raise InvalidParameterError("cutoff l must exceed 1")
    L = math.inf if math.isinf(l) else l ** (1.0 / 3.0) / math.sqrt(2.0)
    x_hat, sigma = _laplace_point(model, t)
    skew = float(model.h2(x_hat)) * sigma**3
    moments = _gauss_partial_moments(L, alpha + 3)
    return float(moments[alpha] - skew / 6.0 * moments[alpha + 3])


def moments_exact(model, t):
    """Mean, variance and third central moment of the tilted density (quadrature)."""
    return _tilted(model, float(t))[2]


def moments_asymptotic(model, t, order="leading"):
    """Leading ``(psi, psi', (M6 - 9)/6 psi'')``; ``refined`` corrects the mean.

    The refined mean is ``x_hat - h''(x_hat) sigma**4 / 2``.
    """
    x_hat, sigma = _laplace_point(model, t)
    h1 = float(model.h1(x_hat))
    h2 = float(model.h2(x_hat))
    dpsi = 1.0 / h1
    d2psi = -h2 / h1**3 + 0.0  # no signed zero
    m = x_hat
    if order == "refined":
        m = x_hat - h2 * sigma**4 / 2.0
    elif order != "leading":
        raise InvalidParameterError(f"unknown order {order!r}")
    return Moments(m, dpsi, (M6 - 9.0) / 6.0 * d2psi)


def skewness(model, t):
    mom = moments_exact(model, t)
    return mom.mu3 / mom.s2**1.5


def tilt_solve(model, a, t0=None):
    """Tilt ``t`` with ``m(t) = a`` via bracketed Newton on ``m`` (derivative ``s**2``)."""
    a = float(a)
    base = moments_exact(model, 0.0).m
    if not a > base:
        raise BelowMeanError(f"a={a:g} does not exceed the untilted mean {base:g}")

    def fdf(t):
        mom = moments_exact(model, t)
        return mom.m - a, mom.s2

    guess = t0
    if guess is None or not guess > 0:
        guess = float(model.h(a)) if a > model.x_min else 1.0
        if not (math.isfinite(guess) and guess > 0):
            guess = 1.0
    hi = guess
    if fdf(hi)[0] < 0:
        lo, hi = expand_bracket(lambda t: fdf(t)[0], hi, 1.5 * hi + 1.0)
    else:
        lo = 0.0
        # tighten from below to keep Newton inside the steep range
        probe = 0.5 * guess
        while probe > 1e-8 and fdf(probe)[0] >= 0:
            hi, probe = probe, 0.5 * probe
        lo = probe if probe > 1e-8 else 0.0
    return newton_increasing(fdf, lo, hi, x0=guess, ftol=1e-8 * abs(a))


def tilt_state(model, t):
    """Every per-``t`` quantity: exact (quadrature) and asymptotic moments."""
    t = float(t)
    x_hat, sigma = _laplace_point(model, t)
    exact = moments_exact(model, t)
    lead = moments_asymptotic(model, t, "leading")
    refined = moments_asymptotic(model, t, "refined")
    return TiltState(
        t=t, x_hat=x_hat, sigma=sigma, log_phi=log_mgf_quadrature(model, t),
        m_exact=exact.m, s2_exact=exact.s2, mu3_exact=exact.mu3,
        m_asym=lead.m, s2_asym=lead.s2, mu3_asym=lead.mu3, m_refined=refined.m,
    )


def diagnostics(model, t, l=None):
    """Quantities the Laplace expansion needs to vanish as ``t`` grows."""
    x_hat, sigma = _laplace_point(model, t)
    h2 = float(model.h2(x_hat))
    if l is None:
        l = math.log(t) ** 3
    # int_1^t psi(u) du through d/dt [t psi(t) - g(psi(t))] = psi(t)
    x_one = psi(model, 1.0)
    integral = (t * x_hat - float(model.g(x_hat))) - (x_one - float(model.g(x_one)))
    window = np.linspace(x_hat - sigma * l, x_hat + sigma * l, 401)
    window = window[window > max(model.x_min, 0.0)]
    with np.errstate(all="ignore"):
        h3 = np.abs(np.asarray(model.h3(window), dtype=float))
    return Diagnostics(
        h2_sigma3=h2 * sigma**3,
        h2_sigma4=h2 * sigma**4,
        log_sigma_over_K=abs(math.log(sigma)) / integral,
        sup_h3_window=float(np.nanmax(h3)) * sigma**4 * l**4,
    )
