"""Log-space composite Gauss-Legendre quadrature on the half-line.

Integrands of the form ``exp(logf(x))`` with a single dominant peak are
integrated on a fixed core window ``center +/- 12 scale`` cut into 24 panels,
extended by geometrically widening tail panels until the relative tail
contribution drops below ``rel_tail``.  Only ``logf - peak`` is ever
exponentiated.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonIntegrableError

GL_ORDER = 20
CORE_HALF_WIDTH = 12.0
CORE_PANELS = 24
MAX_TAIL_PANELS = 400
GRADED_LEVELS = 24  # geometric refinement toward an endpoint singularity at `lower`

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def gauss_nodes(a, b):
    """Nodes and weights of the GL rule mapped to ``[a, b]``."""
    half = 0.5 * (b - a)
    return a + half * (_GL_X + 1.0), half * _GL_W


def _eval(logf, a, b):
    x, w = gauss_nodes(a, b)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lf = np.asarray(logf(x), dtype=float)
    if np.any(np.isnan(lf)) or np.any(lf == np.inf):
        raise NonIntegrableError(f"integrand not finite on [{a:.6g}, {b:.6g}]")
    return x, w, lf


def _log_panel_mass(w, lf):
    top = lf.max()
    if top == -np.inf:
        return -np.inf
    return top + np.log(np.sum(w * np.exp(lf - top)))


@dataclass(frozen=True)
class Panels:
    """Quadrature nodes ``x``, weights ``w`` and log-integrand ``logf`` (ordered by x)."""

    x: np.ndarray
    w: np.ndarray
    logf: np.ndarray
    edges: np.ndarray

    @property
    def peak(self):
        return float(self.logf.max())

    def scaled(self):
        """``w * exp(logf - peak)``; multiply by ``exp(peak)`` to undo."""
        return self.w * np.exp(self.logf - self.peak)

    def log_integral(self):
        return self.peak + float(np.log(np.sum(self.scaled())))

    def signed_log_integral(self, factor):
        """``(sign, log|I|)`` for ``I = int factor(x) exp(logf(x)) dx``."""
        total = float(np.sum(self.scaled() * factor))
        if total == 0.0:
            return 0, -np.inf
        return (1 if total > 0 else -1), self.peak + float(np.log(abs(total)))


def panel_rule(logf, center, scale, lower=0.0, rel_tail=1e-16, breaks=()):
    """Build the panel decomposition for ``exp(logf)`` on ``[lower, inf)``.

    ``breaks`` lists points where ``logf`` has a kink; panels are split there.
    """
    if not (np.isfinite(center) and np.isfinite(scale) and scale > 0):
        raise NonIntegrableError(f"bad quadrature window center={center!r} scale={scale!r}")
    core = center + scale * np.linspace(-CORE_HALF_WIDTH, CORE_HALF_WIDTH, CORE_PANELS + 1)
    core = np.unique(np.clip(core, lower, None))
    if core.size < 2:
        core = np.array([lower, lower + scale])

    pieces = []
    for a, b in zip(core[:-1], core[1:]):
        pieces.append((a, b) + _eval(logf, a, b))
    core_mass = np.logaddexp.reduce([_log_panel_mass(p[3], p[4]) for p in pieces])
    if not np.isfinite(core_mass):
        raise NonIntegrableError("integrand vanishes on the core window")
    cutoff = core_mass + np.log(rel_tail)

    # right tail
    a, width = core[-1], scale
    for _ in range(MAX_TAIL_PANELS):
        b = a + width
        x, w, lf = _eval(logf, a, b)
        pieces.append((a, b, x, w, lf))
        if _log_panel_mass(w, lf) < cutoff and lf[-1] <= lf[0]:
            break
        a, width = b, 2.0 * width
    else:
        raise NonIntegrableError("right tail does not decay")

    # left tail down to `lower`
    b, width = core[0], scale
    while b > lower:
        a = max(lower, b - width)
        x, w, lf = _eval(logf, a, b)
        pieces.append((a, b, x, w, lf))
        if _log_panel_mass(w, lf) < cutoff and lf[0] <= lf[-1]:
            break
        b, width = a, 2.0 * width

    # split panels at known kinks so every panel sees a smooth integrand
    if len(breaks):
        split = []
        for piece in pieces:
            a, b = piece[:2]
            inner = [c for c in breaks if a < c < b]
            if inner:
                cuts = [a] + sorted(inner) + [b]
                split += [(u, v) + _eval(logf, u, v) for u, v in zip(cuts[:-1], cuts[1:])]
            else:
                split.append(piece)
        pieces = split

    # grade a boundary panel with non-negligible mass: p may behave like x**alpha at 0
    graded = []
    for piece in pieces:
        a, b, _, w, lf = piece
        if a == lower and _log_panel_mass(w, lf) >= cutoff:
            cuts = lower + (b - lower) * 2.0 ** -np.arange(GRADED_LEVELS, -1, -1.0)
            cuts = np.concatenate([[lower], cuts])
            graded += [(u, v) + _eval(logf, u, v) for u, v in zip(cuts[:-1], cuts[1:])]
        else:
            graded.append(piece)
    pieces = graded

    pieces.sort(key=lambda p: p[0])
    edges = np.array([pieces[0][0]] + [p[1] for p in pieces])
    return Panels(
        x=np.concatenate([p[2] for p in pieces]),
        w=np.concatenate([p[3] for p in pieces]),
        logf=np.concatenate([p[4] for p in pieces]),
        edges=edges,
    )
