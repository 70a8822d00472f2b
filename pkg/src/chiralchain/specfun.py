"""Special functions: generalized Laguerre polynomials and Bessel functions.

Laguerre polynomials are evaluated by the three-term recurrence in the
degree, which is valid for any real order including the degenerate
``alpha = -1`` (where ``scipy.special.eval_genlaguerre`` refuses to work).
Bessel functions are thin wrappers around ``scipy.special``.
"""

import numpy as np
from scipy import optimize, special

from .errors import DomainError

__all__ = [
    "laguerre_gen",
    "laguerre_sequence",
    "bessel_j",
    "bessel_j_zero",
    "cyl_bessel_complex",
]


def laguerre_sequence(n_max, alpha, x):
    """Generalized Laguerre polynomials of degree ``0..n_max``.

    Parameters
    ----------
    n_max : int
        highest degree, ``n_max >= 0``
    alpha : float
        order of the polynomial family
    x : float or numpy.ndarray
        evaluation points

    Returns
    -------
    numpy.ndarray
        array of shape ``(n_max + 1,) + np.shape(x)``; row ``k`` holds
        ``L_k^{(alpha)}(x)``

    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max == 0:
        return out
    out[1] = 1.0 + alpha - x
    for k in range(2, n_max + 1):
        out[k] = ((2 * k - 1 + alpha - x) * out[k - 1] - (k - 1 + alpha) * out[k - 2]) / k
    return out


def laguerre_gen(n, alpha, x):
    """Generalized Laguerre polynomial ``L_n^{(alpha)}(x)``.

    Uses the recurrence
    ``k L_k = (2k - 1 + alpha - x) L_{k-1} - (k - 1 + alpha) L_{k-2}``
    with ``L_0 = 1`` and ``L_1 = 1 + alpha - x``.
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    if n == 0:
        val = np.ones_like(x)
    else:
        prev, cur = np.ones_like(x), 1.0 + alpha - x
        for k in range(2, n + 1):
            prev, cur = cur, ((2 * k - 1 + alpha - x) * cur - (k - 1 + alpha) * prev) / k
        val = cur
    return float(val) if val.ndim == 0 else val


def bessel_j(nu, x):
    """Bessel function of the first kind ``J_nu(x)`` for integer ``nu >= 0``."""
    val = special.jv(nu, x)
    return float(val) if np.ndim(val) == 0 else val


def bessel_j_zero(nu, k):
    """k-th positive zero of ``J_nu``.

    Sign changes are located by stepping from ``nu`` (every positive zero
    lies above it) in increments well below the zero spacing, then each
    bracket is refined with Brent's method.
    """
    nu, k = int(nu), int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if nu < 0:
        raise ValueError(f"nu must be >= 0, got {nu}")
    step = 0.25
    a = max(float(nu), 1e-3)
    fa = special.jv(nu, a)
    found = 0
    while True:
        b = a + step
        fb = special.jv(nu, b)
        if fa == 0.0:
            found += 1
            if found == k:
                return a
        elif fa * fb < 0:
            found += 1
            if found == k:
                return optimize.brentq(lambda s: special.jv(nu, s), a, b, xtol=1e-14, rtol=1e-15)
        a, fa = b, fb


def cyl_bessel_complex(kind, n, z, with_derivative=False):
    """Cylinder functions of integer order and complex argument.

    Parameters
    ----------
    kind : {"J", "H1"}
        Bessel function of the first kind or Hankel function of the first kind
    n : int
        order, ``|n| <= 64``
    z : complex or array of complex
        argument
    with_derivative : bool
        also return the derivative with respect to ``z``

    Returns
    -------
    complex or tuple of complex
        value, or ``(value, derivative)``

    """
    if kind not in ("J", "H1"):
        raise ValueError(f"kind must be 'J' or 'H1', got {kind!r}")
    if abs(n) > 64:
        raise DomainError(f"|n| must not exceed 64, got {n}")
    z = np.asarray(z, dtype=complex)
    if kind == "J":
        f = special.jv
    else:
        if np.any(z == 0):
            raise DomainError("Hankel function H1 is singular at z = 0")
        f = special.hankel1
    val = f(n, z)
    if not with_derivative:
        return complex(val) if val.ndim == 0 else val
    der = 0.5 * (f(n - 1, z) - f(n + 1, z))
    if val.ndim == 0:
        return complex(val), complex(der)
    return val, der
