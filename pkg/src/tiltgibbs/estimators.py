"""scikit-learn style density estimators over the functional API.

The numerical modules are plain functions of a model; these wrappers only
add parameter handling, input validation and the ``fit``/``score_samples``
protocol so the densities can be used inside sklearn tooling.
"""

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .config import split_family
from .edgeworth import edgeworth_density
from .errors import InvalidParameterError
from .gibbs import build_chain, log_tilted_pdf
from .mc import sample_tilted
from .model import make_builtin
from .tilt import moments_exact, tilt_solve


def model_from_spec(family):
    """``"weibull:2"``, ``"exp_exp"`` or ``"power:1"`` -> normalized model."""
    spec = split_family(family)
    name = spec.pop("family")
    return make_builtin(name, **spec)


def _column(X):
    X = check_array(X, ensure_2d=True, dtype=np.float64)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single feature, got {X.shape[1]}")
    return X[:, 0]


class TiltedDensity(DensityMixin, BaseEstimator):
    """Tilted member ``pi_t`` of a base family, fitted by moment matching.

    For an exponential family the likelihood equation is ``m(t) = mean(X)``,
    so ``fit`` solves it with :func:`tilt_solve`.  Samples whose mean does not
    exceed the base mean give the boundary value ``t = 0``.

    Parameters
    ----------
    family : str
        Base density, e.g. ``"weibull:2"``, ``"exp_exp"``, ``"power:1"``.

    Attributes
    ----------
    t_ : float
        Fitted tilt parameter.
    mean_, variance_, third_moment_ : float
        Moments of the fitted tilted density.
    """

    def __init__(self, family="weibull:2"):
        self.family = family

    def fit(self, X, y=None):
        x = _column(X)
        self.model_ = model_from_spec(self.family)
        base = moments_exact(self.model_, 0.0).m
        mean = float(x.mean())
        self.t_ = tilt_solve(self.model_, mean) if mean > base else 0.0
        mom = moments_exact(self.model_, self.t_)
        self.mean_, self.variance_, self.third_moment_ = mom
        self.n_features_in_ = 1
        return self

    def score_samples(self, X):
        """Log density of each sample under the fitted tilt."""
        check_is_fitted(self, "t_")
        return log_tilted_pdf(self.model_, self.t_, _column(X))

    def score(self, X, y=None):
        return float(np.sum(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        """Draws of shape ``(n_samples, 1)``; ``random_state`` is an integer seed."""
        check_is_fitted(self, "t_")
        seed = 0 if random_state is None else int(random_state)
        return sample_tilted(self.model_, self.t_, n_samples, seed)[:, None]


class EdgeworthDensity(DensityMixin, BaseEstimator):
    """One-term Edgeworth density of the standardized sum of ``n`` tilted draws.

    ``score_samples`` returns ``log rho_hat``; points where the expansion is
    not positive get ``-inf``.
    """

    def __init__(self, family="weibull:2", a_n=5.0, n=16):
        self.family = family
        self.a_n = a_n
        self.n = n

    def fit(self, X=None, y=None):
        if int(self.n) < 1:
            raise InvalidParameterError("n must be >= 1")
        self.model_ = model_from_spec(self.family)
        self.t_ = tilt_solve(self.model_, self.a_n)
        mom = moments_exact(self.model_, self.t_)
        self.skewness_ = mom.mu3 / mom.s2**1.5
        self.n_features_in_ = 1
        return self

    def score_samples(self, X):
        check_is_fitted(self, "t_")
        rho = edgeworth_density(self.model_, self.a_n, int(self.n), _column(X))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(rho > 0, np.log(np.where(rho > 0, rho, 1.0)), -np.inf)


class GibbsConditionalDensity(DensityMixin, BaseEstimator):
    """Approximate density of ``(X_1..X_k)`` given ``S_n = n a_n``.

    ``method="chain"`` uses the re-centred product ``g_m``; ``"product"``
    uses the single tilt ``g_{a_n}``.  Each row of ``X`` is one point ``y``.
    """

    def __init__(self, family="weibull:2", a_n=3.0, n=100, method="chain"):
        self.family = family
        self.a_n = a_n
        self.n = n
        self.method = method

    def fit(self, X=None, y=None):
        if self.method not in ("chain", "product"):
            raise InvalidParameterError(f"unknown method {self.method!r}")
        self.model_ = model_from_spec(self.family)
        self.t_ = tilt_solve(self.model_, self.a_n)
        if X is not None:
            self.n_features_in_ = check_array(X).shape[1]
        return self

    def score_samples(self, X):
        check_is_fitted(self, "t_")
        X = check_array(X, dtype=np.float64)
        if self.method == "product":
            return np.sum(log_tilted_pdf(self.model_, self.t_, X), axis=1)
        return np.array([build_chain(self.model_, self.a_n, int(self.n), row).log_g_m
                         for row in X])
