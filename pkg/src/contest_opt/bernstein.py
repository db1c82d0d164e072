"""Degree-(n-1) Bernstein basis and the policy polynomial h.

The basis indexed by rank is ``a_i(x) = C(n-1, i-1) x^(n-i) (1-x)^(i-1)``
for i = 1..n, so ``a_1(x) = x^(n-1)`` and ``a_n(x) = (1-x)^(n-1)``.  The
policy polynomial ``h(x, p) = sum_i a_i(x) p_i`` is strictly increasing in
x whenever p is nontrivial; everything downstream (equilibrium CDF, reduced
objectives, bounds) is built on h, its derivative and its inverse.

Binomial coefficients are taken in log space so that evaluation stays
stable well beyond n = 60.
"""

from __future__ import annotations

from functools import lru_cache
from math import lgamma

import numpy as np

from .errors import DomainError, RangeError, TrivialPolicyError
from .policy import Policy, is_nontrivial

TOL_INV = 1e-12
MAX_BISECT = 200


def log_binomial(n: int, k: int) -> float:
    """log C(n, k) via lgamma; requires 0 <= k <= n."""
    if not 0 <= k <= n:
        raise DomainError("binomial out of range: C(%d, %d)" % (n, k))
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def _check_unit_interval(x: np.ndarray) -> None:
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError("x must lie in [0, 1]")


@lru_cache(maxsize=64)
def _log_binomials(n: int) -> np.ndarray:
    # log C(n-1, i-1) for i = 1..n
    return np.array([log_binomial(n - 1, i - 1) for i in range(1, n + 1)])


def basis_matrix(n: int, x: np.ndarray) -> np.ndarray:
    """All basis values at once: shape ``(len(x), n)``, column i-1 is a_i(x).

    Rows sum to one (binomial theorem).  Endpoints are patched exactly:
    a_i(0) = [i == n], a_i(1) = [i == 1].
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    x = np.asarray(x, dtype=float)
    _check_unit_interval(x)
    flat = np.atleast_1d(x).ravel()
    logc = _log_binomials(n)
    powers_x = np.arange(n - 1, -1, -1.0)  # n-i for i=1..n
    powers_1mx = np.arange(0, n, 1.0)  # i-1 for i=1..n
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(flat)[:, None]
        log1mx = np.log1p(-flat)[:, None]
        out = np.exp(logc[None, :] + powers_x[None, :] * logx + powers_1mx[None, :] * log1mx)
    at0 = flat == 0.0
    at1 = flat == 1.0
    if np.any(at0):
        out[at0] = 0.0
        out[at0, n - 1] = 1.0
    if np.any(at1):
        out[at1] = 0.0
        out[at1, 0] = 1.0
    return out.reshape(x.shape + (n,)) if x.shape else out.reshape((1, n))


def basis_eval(n: int, i: int, x):
    """a_i(x) = C(n-1, i-1) x^(n-i) (1-x)^(i-1), in [0, 1]."""
    if n < 2 or not 1 <= i <= n:
        raise DomainError("rank index i=%d outside 1..%d" % (i, n))
    x_arr = np.asarray(x, dtype=float)
    _check_unit_interval(x_arr)
    values = basis_matrix(n, np.atleast_1d(x_arr))[..., i - 1]
    return float(values[0]) if np.isscalar(x) or x_arr.ndim == 0 else values


def basis_integral(n: int, i: int) -> float:
    """Exact moment of any basis element over [0, 1]: always 1/n."""
    if n < 2 or not 1 <= i <= n:
        raise DomainError("rank index i=%d outside 1..%d" % (i, n))
    return 1.0 / n


def h_eval(p: Policy, x):
    """Policy polynomial h(x, p); h(0, p) = p_n and h(1, p) = p_1."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    _check_unit_interval(x_arr)
    values = basis_matrix(p.n, x_arr) @ p.as_array()
    return float(values[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else values


def h_derivative(p: Policy, x):
    """dh/dx, nonnegative everywhere and strictly positive on (0,1) for
    nontrivial p.

    Computed in the telescoped form
    ``(n-1) * sum_k (p_k - p_{k+1}) a_k^{(n-1)}(x)`` over k = 1..n-1, where
    ``a^{(n-1)}`` is the one-degree-lower basis.  The (n-1) prefactor is
    validated against central finite differences in the test suite.
    """
    n = p.n
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    _check_unit_interval(x_arr)
    arr = p.as_array()
    diffs = arr[:-1] - arr[1:]  # nonnegative for a valid policy
    if n == 2:
        values = np.full_like(x_arr, diffs[0])
    else:
        values = (n - 1) * (basis_matrix(n - 1, x_arr) @ diffs)
    return float(values[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else values


def h_inverse(p: Policy, y, tol: float = TOL_INV, max_iter: int = MAX_BISECT):
    """Unique x in [0, 1] with h(x, p) = y, by bisection.

    h is strictly increasing for nontrivial p, so bisection converges
    unconditionally; y must lie in [p_n, p_1].
    """
    if not is_nontrivial(p):
        raise TrivialPolicyError("h is constant for the all-equal policy")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    lo_val, hi_val = p.pn, p.p1
    slack = 1e-9 * max(1.0, abs(hi_val))
    if np.any(y_arr < lo_val - slack) or np.any(y_arr > hi_val + slack):
        raise RangeError(
            "y outside [p_n, p_1] = [%.9g, %.9g]" % (lo_val, hi_val)
        )
    y_clip = np.clip(y_arr, lo_val, hi_val)
    lo = np.zeros_like(y_clip)
    hi = np.ones_like(y_clip)
    # dh/dx <= n-1, so an x-interval of tol/(n-1) pins h within tol
    x_tol = tol / max(p.n - 1, 1)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = h_eval(p, mid) < y_clip
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) <= x_tol:
            break
    out = 0.5 * (lo + hi)
    out[y_clip == lo_val] = 0.0
    out[y_clip == hi_val] = 1.0
    return float(out[0]) if np.isscalar(y) or np.asarray(y).ndim == 0 else out
