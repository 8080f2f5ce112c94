"""
Spectrum Sensing - Special Functions
Gaussian tail Q and its inverse, the regularized upper incomplete gamma
function and the generalized Marcum Q function.

All functions are pure scalar maps returning Python floats. Probabilities are
clamped to [0, 1] after evaluation so that long products in the fusion layer
never drift outside the unit interval.
"""

import math
import os
import sys

import numpy as np
from scipy import special

sys.path.insert(0, os.path.dirname(__file__))

from errors import DomainError

# Poisson weights below this are dropped from the Marcum series.
MARCUM_TERM_TOL = 1e-16
SERIES_MAX_TERMS = 100_000


def _clamp(p):
    return min(1.0, max(0.0, float(p)))


def _require_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")


# ============================================================
# Gaussian tail
# ============================================================

def gaussian_q(x):
    """Q(x) = P(Z > x) for a standard normal Z."""
    x = float(x)
    _require_finite("x", x)
    return _clamp(0.5 * special.erfc(x / math.sqrt(2.0)))


def gaussian_q_inv(p):
    """Inverse of gaussian_q on the open interval (0, 1)."""
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"gaussian_q_inv needs 0 < p < 1, got {p}")
    # Q^-1(p) = -Phi^-1(p)
    return float(-special.ndtri(p))


# ============================================================
# Incomplete gamma / Marcum Q
# ============================================================

def reg_upper_gamma(a, x):
    """Gamma(a, x) / Gamma(a)."""
    a, x = float(a), float(x)
    _require_finite("a", a)
    _require_finite("x", x)
    if a <= 0:
        raise DomainError(f"reg_upper_gamma needs a > 0, got a={a}")
    if x < 0:
        raise DomainError(f"reg_upper_gamma needs x >= 0, got x={x}")
    if x == 0:
        return 1.0
    return _clamp(special.gammaincc(a, x))


def log_reg_lower_gamma(a, x):
    """
    log(gamma(a, x) / Gamma(a)), finite where the ratio itself underflows.

    Below x = a + 1 the power series

        P(a, x) = x^a e^-x / Gamma(a+1) * sum_j x^j / ((a+1)...(a+j))

    is summed directly; above it, 1 - Gamma(a, x)/Gamma(a) carries no
    cancellation.
    """
    a, x = float(a), float(x)
    _require_finite("a", a)
    _require_finite("x", x)
    if a <= 0:
        raise DomainError(f"log_reg_lower_gamma needs a > 0, got a={a}")
    if x < 0:
        raise DomainError(f"log_reg_lower_gamma needs x >= 0, got x={x}")
    if x == 0:
        return -math.inf
    if x >= a + 1.0:
        return math.log1p(-special.gammaincc(a, x))

    term = total = 1.0
    j = 0
    while term > total * 1e-17 and j < SERIES_MAX_TERMS:
        j += 1
        term *= x / (a + j)
        total += term
    return a * math.log(x) - x - float(special.gammaln(a + 1.0)) + math.log(total)


def marcum_q(m, a, b):
    """
    Generalized Marcum Q_m(a, b).

    Evaluated as the Poisson mixture

        Q_m(a, b) = sum_k  e^(-a^2/2) (a^2/2)^k / k!  *  Gamma(m+k, b^2/2) / Gamma(m+k)

    i.e. the survival function of a noncentral chi-square with 2m degrees of
    freedom and noncentrality a^2, evaluated at b^2.
    """
    a, b = float(a), float(b)
    _require_finite("a", a)
    _require_finite("b", b)
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError(f"marcum_q order must be a positive integer, got {m}")
    if a < 0 or b < 0:
        raise DomainError(f"marcum_q needs a >= 0 and b >= 0, got a={a}, b={b}")
    m = int(m)
    if b == 0:
        return 1.0

    lam = a * a / 2.0
    x = b * b / 2.0
    if lam == 0:
        return _clamp(special.gammaincc(m, x))

    # Cover the Poisson mass well past the mode, then drop negligible terms.
    k_max = int(math.ceil(lam + 12.0 * math.sqrt(lam) + 40.0))
    k = np.arange(k_max + 1, dtype=float)
    log_w = -lam + k * math.log(lam) - special.gammaln(k + 1.0)
    weights = np.exp(log_w)
    keep = weights >= MARCUM_TERM_TOL
    terms = weights[keep] * special.gammaincc(m + k[keep], x)
    return _clamp(math.fsum(terms.tolist()))
