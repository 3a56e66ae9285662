"""Edgeworth expansion for normalized sums of tilted summands, and its Fourier oracle.

For a mean level ``a_n`` the summands follow the tilted density ``pi^{a_n}``;
``pi_bar`` is its standardization and ``rho_n`` the density of the
standardized sum of ``n`` such summands.  The Edgeworth approximation uses the
exact tilted moments; the oracle inverts ``charfn(tau / sqrt(n))**n``.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import OracleFailureError
from .tilt import moments_exact, tilt_solve, tilted_panels, log_mgf_quadrature

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
TAU_STEP = 0.01
CF_CUTOFF = 1e-14
TAU_MAX = 5000.0


@dataclass(frozen=True)
class TiltedLaw:
    """Tilted density at mean ``a``: tilt ``t``, sd ``s`` and its quadrature panels."""

    a: float
    t: float
    s: float
    mu3: float
    log_phi: float
    nodes: np.ndarray = field(repr=False)
    probs: np.ndarray = field(repr=False)


@lru_cache(maxsize=512)
def tilted_law(model, a):
    t = tilt_solve(model, a)
    mom = moments_exact(model, t)
    panels = tilted_panels(model, t)
    probs = panels.scaled()
    return TiltedLaw(a=float(a), t=t, s=math.sqrt(mom.s2), mu3=mom.mu3,
                     log_phi=log_mgf_quadrature(model, t),
                     nodes=panels.x, probs=probs / probs.sum())


def tilted_pdf(model, t, x):
    """``exp(t x) p(x) / Phi(t)``, zero off the support."""
    x = np.asarray(x, dtype=float)
    return np.exp(model.log_pdf(x) + t * x - log_mgf_quadrature(model, t))


def normalized_tilted_pdf(model, a_n, x):
    """``s * pi^{a_n}(s x + a_n)`` where ``s**2`` is the tilted variance."""
    law = tilted_law(model, float(a_n))
    return law.s * tilted_pdf(model, law.t, law.s * np.asarray(x, dtype=float) + law.a)


def standard_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return INV_SQRT_2PI * np.exp(-0.5 * x * x)


def edgeworth_density(model, a_n, n, x):
    """One-term Edgeworth approximation of the standardized ``n``-fold sum density."""
    law = tilted_law(model, float(a_n))
    x = np.asarray(x, dtype=float)
    coef = law.mu3 / (6.0 * math.sqrt(n) * law.s**3)
    return standard_normal_pdf(x) * (1.0 + coef * (x**3 - 3.0 * x))


def charfn(model, a_n, tau):
    """Characteristic function of ``pi_bar^{a_n}`` at ``tau`` (scalar or array)."""
    law = tilted_law(model, float(a_n))
    tau = np.asarray(tau, dtype=float)
    z = (law.nodes - law.a) / law.s
    phase = np.multiply.outer(tau, z)
    out = np.cos(phase) @ law.probs + 1j * (np.sin(phase) @ law.probs)
    return out


def _sum_charfn_grid(model, a_n, n, step, cutoff):
    """Grid ``tau >= 0`` and ``charfn(tau/sqrt(n))**n`` truncated at ``cutoff``."""
    block = 512
    taus, vals = [], []
    start = 0.0
    while True:
        tau = start + step * np.arange(block)
        cf = charfn(model, a_n, tau / math.sqrt(n)) ** n
        taus.append(tau)
        vals.append(cf)
        small = np.abs(cf) < cutoff
        if small[-(block // 4):].all():
            break
        start = tau[-1] + step
        if start > TAU_MAX:
            raise OracleFailureError("characteristic function does not decay; cannot invert")
    tau = np.concatenate(taus)
    cf = np.concatenate(vals)
    keep = np.nonzero(np.abs(cf) >= cutoff)[0]
    last = keep[-1] + 2 if keep.size else 2
    return tau[:last], cf[:last]


def convolution_density_oracle(model, a_n, n, x_grid, tau_step=TAU_STEP, cutoff=CF_CUTOFF):
    """Density of the standardized ``n``-fold sum by Fourier inversion (trapezoid rule)."""
    tau_pos, cf_pos = _sum_charfn_grid(model, a_n, n, tau_step, cutoff)
    tau = np.concatenate([-tau_pos[:0:-1], tau_pos])
    cf = np.concatenate([np.conj(cf_pos[:0:-1]), cf_pos])
    wts = np.full(tau.size, tau_step)
    wts[0] = wts[-1] = 0.5 * tau_step
    x = np.asarray(x_grid, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    flat_x, flat_out = x.ravel(), out.reshape(-1)
    for i in range(0, flat_x.size, 256):
        chunk = flat_x[i:i + 256]
        kernel = np.exp(-1j * np.multiply.outer(chunk, tau))
        flat_out[i:i + 256] = kernel @ (wts * cf) / (2.0 * math.pi)
    residue = np.abs(out.imag).max() if out.size else 0.0
    if residue >= 1e-8:
        raise OracleFailureError(f"imaginary residue {residue:.2e} in Fourier inversion")
    return out.real


def doubling_discrepancy(model, a_n, n, x_grid=None, lattice_step=0.01, half_width=16.0):
    """Sup difference between ``rho_2n`` and the rescaled self-convolution of ``rho_n``.

    ``rho_n`` is tabulated on a lattice; the self-convolution is a Riemann sum
    on that lattice, evaluated where ``sqrt(2) x`` is a lattice point.
    """
    m = int(round(half_width / lattice_step))
    lattice = lattice_step * np.arange(-m, m + 1)
    rho = convolution_density_oracle(model, a_n, n, lattice)
    conv = np.convolve(rho, rho, mode="same") * lattice_step  # value at lattice points
    if x_grid is None:
        k = int(5.0 * math.sqrt(2.0) / lattice_step)
        idx = np.arange(-k, k + 1, 5) + m
    else:
        idx = np.rint(np.asarray(x_grid) * math.sqrt(2.0) / lattice_step).astype(int) + m
    z = lattice[idx]
    doubled = math.sqrt(2.0) * conv[idx]
    direct = convolution_density_oracle(model, a_n, 2 * n, z / math.sqrt(2.0))
    return float(np.max(np.abs(doubled - direct)))


def parseval_sides(model, a_n, tau_step=TAU_STEP):
    """``(int |charfn|**2 dtau, 2 pi int pi_bar**2 dx)``."""
    tau, cf = _sum_charfn_grid(model, a_n, 1, tau_step, 1e-7)
    sq = np.abs(cf) ** 2
    lhs = 2.0 * tau_step * (np.sum(sq) - 0.5 * sq[0] - 0.5 * sq[-1])
    law = tilted_law(model, float(a_n))
    panels = tilted_panels(model, law.t)
    log_pi = panels.logf - law.log_phi
    rhs = 2.0 * math.pi * law.s * float(np.sum(panels.w * np.exp(2.0 * log_pi)))
    return lhs, rhs


@dataclass
class EdgeworthResult:
    a_n: float
    n: int
    x_grid: np.ndarray
    rho_hat: np.ndarray
    rho_oracle: np.ndarray
    sup_err: float
    scaled_err: float

    def rows(self):
        err = np.abs(self.rho_oracle - self.rho_hat)
        return zip(self.x_grid, self.rho_hat, self.rho_oracle, err)


def default_grid():
    return np.round(np.linspace(-5.0, 5.0, 201), 12)


def sup_error_scan(model, a_n, n, x_grid=None):
    """Edgeworth vs Fourier oracle on ``x_grid`` (default ``[-5, 5]`` step 0.05)."""
    x = default_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    rho_hat = edgeworth_density(model, a_n, n, x)
    rho = convolution_density_oracle(model, a_n, n, x)
    sup_err = float(np.max(np.abs(rho - rho_hat)))
    return EdgeworthResult(a_n=float(a_n), n=int(n), x_grid=x, rho_hat=rho_hat,
                           rho_oracle=rho, sup_err=sup_err, scaled_err=math.sqrt(n) * sup_err)
