"""Elementary random primitives: samplers, log-density scorers, proposals.

Each sampler consumes a fixed number of ``rng.random()`` calls so that every
engine sees the same random stream:

    bernoulli    1
    categorical  1   (inverse CDF)
    uniform      1
    gaussian     2   (Box-Muller, cosine branch only)
    gamma        1   (inverse regularized incomplete gamma)
    dirichlet    K   (one gamma draw per component)

All scores are natural-log densities or masses; values outside the support
score ``-inf``.
"""

from __future__ import annotations

import math
import sys
from typing import Callable, Optional

from scipy.special import gammaincinv

from .errors import ErpParamError

NEG_INF = -math.inf
_LOG_2PI = math.log(2.0 * math.pi)
_TINY = sys.float_info.min


def _is_num(x) -> bool:
    return x.__class__ is not bool and isinstance(x, (int, float))


def _log(x: float) -> float:
    return math.log(x) if x > 0 else NEG_INF


class Erp:
    """Descriptor for one primitive distribution."""

    __slots__ = ("name", "nparams", "check", "draw", "logp", "in_support", "support_of")

    def __init__(self, name, nparams, check, draw, logp, in_support, support_of=None):
        self.name = name
        self.nparams = nparams
        self.check = check
        self.draw = draw
        self.logp = logp
        self.in_support = in_support
        # finite support enumerator, only for discrete distributions
        self.support_of: Optional[Callable] = support_of

    @property
    def discrete(self) -> bool:
        return self.support_of is not None

    def __repr__(self):
        return f"Erp({self.name})"


def _vector_check(check):
    """Skip re-validating a weight vector already seen (tuples are immutable)."""
    ok: dict = {}

    def checked(params):
        w = params[0]
        if ok.get(id(w)) is w:
            return
        check(params)
        if len(ok) > 4096:
            ok.clear()
        ok[id(w)] = w
    return checked


# -- bernoulli --------------------------------------------------------------

def _bern_check(params):
    (p,) = params
    if not _is_num(p) or not 0.0 <= p <= 1.0:
        raise ErpParamError(f"bernoulli: p must be a probability in [0, 1], got {p!r}")


def _bern_draw(params, rng):
    return rng.random() < params[0]


def _bern_logp(params, x):
    if x is True:
        return _log(params[0])
    if x is False:
        return _log(1.0 - params[0])
    return NEG_INF


# -- categorical ------------------------------------------------------------

def _cat_check(params):
    (w,) = params
    if not isinstance(w, tuple) or not w:
        raise ErpParamError(f"categorical: weights must be a non-empty list, got {w!r}")
    total = 0.0
    for i, x in enumerate(w):
        if not _is_num(x) or x < 0 or x != x:
            raise ErpParamError(f"categorical: weight {i} must be a non-negative number, got {x!r}")
        total += x
    if not total > 0 or math.isinf(total):
        raise ErpParamError("categorical: weights must have a positive finite sum")


def _cat_draw(params, rng):
    w = params[0]
    target = rng.random() * sum(w)
    acc = 0.0
    last = 0
    for i, x in enumerate(w):
        if x > 0:
            acc += x
            last = i
            if target < acc:
                return i
    return last  # rounding at the top of the CDF


def _cat_logp(params, x):
    w = params[0]
    if x.__class__ is not int or not 0 <= x < len(w):
        return NEG_INF
    return _log(w[x] / sum(w))


def _cat_support(params):
    return range(len(params[0]))


# -- uniform ----------------------------------------------------------------

def _unif_check(params):
    a, b = params
    if not (_is_num(a) and _is_num(b)) or not a < b or math.isinf(a) or math.isinf(b):
        raise ErpParamError(f"uniform: need finite a < b, got a={a!r}, b={b!r}")


def _unif_draw(params, rng):
    a, b = params
    return a + (b - a) * rng.random()


def _unif_logp(params, x):
    a, b = params
    if not _is_num(x) or not a <= x <= b:
        return NEG_INF
    return -math.log(b - a)


# -- gaussian ---------------------------------------------------------------

def _gauss_check(params):
    mu, sigma = params
    if not _is_num(mu) or math.isinf(mu) or mu != mu:
        raise ErpParamError(f"gaussian: mu must be a finite number, got {mu!r}")
    if not _is_num(sigma) or not 0 < sigma < math.inf:
        raise ErpParamError(f"gaussian: sigma must be positive, got {sigma!r}")


def _gauss_draw(params, rng):
    mu, sigma = params
    u1 = rng.random()
    u2 = rng.random()
    z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
    return mu + sigma * z


def _gauss_logp(params, x):
    mu, sigma = params
    if not _is_num(x) or math.isinf(x) or x != x:
        return NEG_INF
    d = (x - mu) / sigma
    return -0.5 * d * d - math.log(sigma) - 0.5 * _LOG_2PI


# -- gamma ------------------------------------------------------------------

def _gamma_check(params):
    shape, scale = params
    if not _is_num(shape) or not 0 < shape < math.inf:
        raise ErpParamError(f"gamma: shape must be positive, got {shape!r}")
    if not _is_num(scale) or not 0 < scale < math.inf:
        raise ErpParamError(f"gamma: scale must be positive, got {scale!r}")


def _gamma_unit(shape, u):
    g = float(gammaincinv(shape, u))
    return g if g > 0 else _TINY


def _gamma_draw(params, rng):
    shape, scale = params
    return _gamma_unit(shape, rng.random()) * scale


def _gamma_logp(params, x):
    k, theta = params
    if not _is_num(x) or not 0 < x < math.inf:
        return NEG_INF
    return (k - 1.0) * math.log(x) - x / theta - math.lgamma(k) - k * math.log(theta)


# -- dirichlet --------------------------------------------------------------

def _dir_check(params):
    (alpha,) = params
    if not isinstance(alpha, tuple) or len(alpha) < 2:
        raise ErpParamError(f"dirichlet: alpha must be a list of length >= 2, got {alpha!r}")
    for i, a in enumerate(alpha):
        if not _is_num(a) or not 0 < a < math.inf:
            raise ErpParamError(f"dirichlet: alpha[{i}] must be positive, got {a!r}")


def _dir_draw(params, rng):
    alpha = params[0]
    gs = [_gamma_unit(a, rng.random()) for a in alpha]
    total = sum(gs)
    return tuple(g / total for g in gs)


def _dir_logp(params, x):
    alpha = params[0]
    if not isinstance(x, tuple) or len(x) != len(alpha):
        return NEG_INF
    total = 0.0
    out = math.lgamma(sum(alpha))
    for a, xi in zip(alpha, x):
        if not _is_num(xi) or xi < 0:
            return NEG_INF
        total += xi
        out -= math.lgamma(a)
        if xi == 0:
            # the density vanishes at the boundary when a > 1 and diverges
            # when a < 1; both are treated as outside the support
            if a != 1:
                return NEG_INF
        elif a != 1:
            out += (a - 1.0) * math.log(xi)
    if abs(total - 1.0) > 1e-8:
        return NEG_INF
    return out


def _support_from_logp(logp):
    def check(params, x):
        return logp(params, x) > NEG_INF
    return check


ERPS: dict[str, Erp] = {
    "bernoulli": Erp("bernoulli", 1, _bern_check, _bern_draw, _bern_logp,
                     _support_from_logp(_bern_logp),
                     lambda params: (True, False)),
    "categorical": Erp("categorical", 1, _vector_check(_cat_check), _cat_draw, _cat_logp,
                       _support_from_logp(_cat_logp),
                       _cat_support),
    "uniform": Erp("uniform", 2, _unif_check, _unif_draw, _unif_logp,
                   _support_from_logp(_unif_logp)),
    "gaussian": Erp("gaussian", 2, _gauss_check, _gauss_draw, _gauss_logp,
                    _support_from_logp(_gauss_logp)),
    "gamma": Erp("gamma", 2, _gamma_check, _gamma_draw, _gamma_logp,
                 _support_from_logp(_gamma_logp)),
    "dirichlet": Erp("dirichlet", 1, _vector_check(_dir_check), _dir_draw, _dir_logp,
                     _support_from_logp(_dir_logp)),
}


def get(name: str) -> Erp:
    try:
        return ERPS[name]
    except KeyError:
        raise ErpParamError(f"unknown distribution {name!r}") from None


def _checked(name, params) -> Erp:
    e = get(name)
    if len(params) != e.nparams:
        raise ErpParamError(f"{name}: expected {e.nparams} parameter(s), got {len(params)}")
    e.check(params)
    return e


def score(name: str, params: tuple, value) -> float:
    """Log-probability of ``value``; ``-inf`` outside the support."""
    return _checked(name, params).logp(params, value)


def sample(name: str, params: tuple, rng):
    return _checked(name, params).draw(params, rng)


def support_check(name: str, params: tuple, value) -> bool:
    return _checked(name, params).in_support(params, value)


def propose(name: str, params: tuple, old, rng):
    """Prior-resample proposal: ``(new, score(new), score(old))``."""
    e = _checked(name, params)
    new = e.draw(params, rng)
    return new, e.logp(params, new), e.logp(params, old)


def sample_and_score(name: str, params: tuple, rng):
    """Draw a value and return it with its score; one parameter check."""
    e = _checked(name, params)
    v = e.draw(params, rng)
    return v, e.logp(params, v)
