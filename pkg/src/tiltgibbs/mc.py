"""Monte Carlo oracles for tilted sampling and slab-conditioned densities.

Random streams come from the counter-based Philox generator keyed by
``(seed, stream)``, so every batch is reproducible on its own and results do
not depend on evaluation order.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import _quadrature
from .errors import InsufficientAcceptanceError, InvalidParameterError
from .tilt import moments_exact, tilt_solve, tilted_panels

N_BATCHES = 16
MIN_ACCEPTANCE = 1e-3
SLAB_C0 = 4.0
SUBCELLS = 32
_CHUNK_DRAWS = 4_000_000
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n_samples: int
    seed: int
    acceptance_rate: float
    n_accepted: int = 0


def generator(seed, stream=0):
    key = np.array([int(seed) & _MASK64, int(stream) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@lru_cache(maxsize=256)
def _inverse_cdf(model, t):
    panels = tilted_panels(model, t)
    peak = panels.peak
    logf = lambda x: model.log_pdf(x) + t * x - peak  # noqa: E731
    cuts = []
    for a, b in zip(panels.edges[:-1], panels.edges[1:]):
        cuts.append(np.linspace(a, b, SUBCELLS + 1)[:-1])
    cuts = np.append(np.concatenate(cuts), panels.edges[-1])
    mass = np.empty(cuts.size - 1)
    for i, (a, b) in enumerate(zip(cuts[:-1], cuts[1:])):
        x, w = _quadrature.gauss_nodes(a, b)
        mass[i] = np.sum(w * np.exp(logf(x)))
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    cdf /= cdf[-1]
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return PchipInterpolator(cdf[keep], cuts[keep], extrapolate=False)


def sample_tilted(model, t, count, seed, stream=0):
    """``count`` i.i.d. draws from the tilted density ``pi_t`` by inverse CDF."""
    inv = _inverse_cdf(model, float(t))
    u = generator(seed, stream).random(int(count))
    return inv(u)


def default_delta(model, a_n, n, c0=SLAB_C0):
    s = math.sqrt(moments_exact(model, tilt_solve(model, a_n)).s2)
    return c0 * s / (2.0 * math.sqrt(n))


def _slab_draws(model, t, a_n, n, k, delta, count, seed, stream):
    """First ``k`` coordinates of slab-accepted vectors among ``count`` draws."""
    inv = _inverse_cdf(model, t)
    rng = generator(seed, stream)
    rows = max(1, _CHUNK_DRAWS // n)
    kept, done = [], 0
    while done < count:
        r = min(rows, count - done)
        x = inv(rng.random((r, n)))
        mean = x.mean(axis=1)
        kept.append(x[np.abs(mean - a_n) <= delta, :k])
        done += r
    return np.concatenate(kept)


def _slab_batches(model, a_n, n, k, delta, n_samples, seed):
    if n_samples < N_BATCHES:
        raise InvalidParameterError(f"need at least {N_BATCHES} samples")
    if delta is not None and not delta > 0:
        raise InvalidParameterError("slab half-width must be positive")
    t = tilt_solve(model, a_n)
    if delta is None:
        delta = default_delta(model, a_n, n)
    per = n_samples // N_BATCHES
    batches = [_slab_draws(model, t, a_n, n, k, delta, per, seed, b) for b in range(N_BATCHES)]
    total = per * N_BATCHES
    accepted = sum(len(b) for b in batches)
    rate = accepted / total
    if rate < MIN_ACCEPTANCE:
        raise InsufficientAcceptanceError(
            f"slab acceptance {rate:.2e} below {MIN_ACCEPTANCE:g}; raise delta or n_samples")
    return batches, total, rate


def silverman_bandwidth(sample):
    """Per-coordinate normal-reference bandwidth for a ``(N, d)`` sample."""
    sample = np.atleast_2d(sample)
    count, d = sample.shape
    sd = sample.std(axis=0, ddof=1)
    return sd * (4.0 / ((d + 2.0) * count)) ** (1.0 / (d + 4.0))


def _kernel_values(sample, y, bw, kernel="gaussian4"):
    """Product kernel weights; ``gaussian4`` is the fourth-order ``(3 - u**2)/2 * phi(u)``."""
    u = (sample - y[None, :]) / bw[None, :]
    vals = np.exp(-0.5 * np.sum(u * u, axis=1)) / np.prod(bw * math.sqrt(2.0 * math.pi))
    if kernel == "gaussian4":
        vals = vals * np.prod(0.5 * (3.0 - u * u), axis=1)
    elif kernel != "gaussian":
        raise InvalidParameterError(f"unknown kernel {kernel!r}")
    return vals


def conditional_density_mc(model, a_n, n, y, delta=None, n_samples=200_000, seed=0,
                           bandwidth_scale=1.0, kernel="gaussian4"):
    """Density of ``(X_1..X_k)`` at ``y`` given ``|S_n/n - a_n| <= delta``.

    Vectors are drawn i.i.d. from ``pi^{a_n}``, under which the slab is not
    rare; conditionally on the exact sum the law is the same as under ``p``,
    so the slab estimate mixes exact point-conditionals over the slab.  The
    density at ``y`` is a Gaussian-based kernel estimate over accepted draws
    (fourth order by default, so smoothing bias is O(h**4)), with a
    batch-means standard error over 16 independent streams.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    batches, total, rate = _slab_batches(model, a_n, n, len(y), delta, n_samples, seed)
    pooled = np.concatenate(batches)
    bw = silverman_bandwidth(pooled) * bandwidth_scale
    per_batch = np.array([_kernel_values(b, y, bw, kernel).mean() if len(b) else 0.0
                          for b in batches])
    value = float(_kernel_values(pooled, y, bw, kernel).mean())
    stderr = float(per_batch.std(ddof=1) / math.sqrt(len(batches)))
    return McEstimate(value=value, stderr=stderr, n_samples=total, seed=int(seed),
                      acceptance_rate=rate, n_accepted=len(pooled))


def independence_check(model, a_n, n, n_samples=200_000, seed=0, delta=None):
    """Correlation of ``(X_1, X_2)`` among slab-accepted vectors."""
    batches, total, rate = _slab_batches(model, a_n, n, 2, delta, n_samples, seed)
    pooled = np.concatenate(batches)
    per_batch = np.array([np.corrcoef(b[:, 0], b[:, 1])[0, 1] for b in batches])
    return McEstimate(value=float(np.corrcoef(pooled[:, 0], pooled[:, 1])[0, 1]),
                      stderr=float(per_batch.std(ddof=1) / math.sqrt(len(batches))),
                      n_samples=total, seed=int(seed), acceptance_rate=rate,
                      n_accepted=len(pooled))
