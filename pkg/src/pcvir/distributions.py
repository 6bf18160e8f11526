"""Normal, chi-squared and Student t primitives used by the importance
adjustment, the Hosmer-Lemeshow test and the Welch comparison.

Only ``exp``, ``log``, ``sqrt`` and ``lgamma`` from the standard library are
used so that golden values are stable across platforms.
"""

import math

from .exceptions import DomainError

_SQRT2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)
_TINY = 1e-300
_EPS = 1e-16


def _check_finite(x, name):
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")


def _erfc_positive(x):
    """erfc(x) for x >= 0 with full relative precision.

    Uses the positive-term series erf(x) = 2/sqrt(pi) exp(-x^2)
    sum 2^n x^(2n+1) / (2n+1)!! for small x and the Laplace continued
    fraction (modified Lentz) for large x.
    """
    if x < 2.5:
        term = x
        total = x
        n = 0
        x2 = x * x
        while term > total * _EPS:
            n += 1
            term *= 2.0 * x2 / (2 * n + 1)
            total += term
        return 1.0 - 2.0 / _SQRT_PI * math.exp(-x2) * total

    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    f = x
    c = x
    d = 0.0
    k = 1
    while True:
        a = k / 2.0
        d = x + a * d
        d = _TINY if d == 0.0 else d
        c = x + a / c
        c = _TINY if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        k += 1
        if abs(delta - 1.0) < _EPS or k > 500:
            break
    return math.exp(-x * x) / _SQRT_PI / f


def normal_cdf(z):
    """Standard normal CDF."""
    z = float(z)
    _check_finite(z, "z")
    tail = 0.5 * _erfc_positive(abs(z) / _SQRT2)
    return tail if z < 0 else 1.0 - tail


def normal_sf(z):
    """Upper tail 1 - Phi(z), accurate far into the tail."""
    return normal_cdf(-z)


def normal_pdf(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


# Acklam's rational approximation (relative error 1.15e-9), polished below.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p):
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def normal_quantile(p):
    """Inverse of :func:`normal_cdf`.

    Raises
    ------
    DomainError
        If ``p`` is outside [0, 1] or is exactly 0 or 1 (infinite quantile).
    """
    p = float(p)
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        raise DomainError(f"quantile of {p} is infinite")
    if p == 0.5:
        return 0.0
    # Work in the smaller tail so the Newton residual keeps relative precision.
    if p > 0.5:
        return -normal_quantile(1.0 - p)
    x = _acklam(p)
    for _ in range(2):
        # Halley step on Phi(x) - p
        err = normal_cdf(x) - p
        u = err / normal_pdf(x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def _gamma_series(a, x):
    # lower regularized P(a, x)
    ap = a
    total = 1.0 / a
    delta = total
    for _ in range(10000):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a, x):
    # upper regularized Q(a, x), modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = _TINY if abs(d) < _TINY else d
        c = b + an / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_q(a, x):
    """Upper regularized incomplete gamma Q(a, x)."""
    if x < 0 or a <= 0:
        raise DomainError(f"gamma_q needs a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def chi_squared_sf(x, df):
    """Upper-tail probability P(X >= x) for a chi-squared variable."""
    x = float(x)
    _check_finite(x, "x")
    if x < 0:
        raise DomainError(f"chi-squared statistic must be >= 0, got {x}")
    if df < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df}")
    return min(1.0, max(0.0, gamma_q(df / 2.0, x / 2.0)))


def _beta_cf(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = _TINY if abs(d) < _TINY else d
    d = 1.0 / d
    h = d
    for m in range(1, 10000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def beta_inc(a, b, x):
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"beta_inc needs x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log(1.0 - x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_sf(t, df):
    """Upper tail P(T >= t) of Student's t with (possibly fractional) df."""
    if df <= 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    tail = 0.5 * beta_inc(df / 2.0, 0.5, df / (df + t * t))
    return tail if t >= 0 else 1.0 - tail


def welch_t_test(a, b):
    """Two-sided Welch two-sample t-test.

    Returns
    -------
    (t, df, p) : tuple of float
        Welch statistic, Welch-Satterthwaite degrees of freedom and two-sided
        p-value. When both samples have zero variance and equal means the
        result is ``(0.0, nan, 1.0)``.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if len(a) < 2 or len(b) < 2:
        raise DomainError("welch_t_test needs at least 2 observations per sample")
    na, nb = len(a), len(b)
    ma, mb = math.fsum(a) / na, math.fsum(b) / nb
    va = math.fsum((v - ma) ** 2 for v in a) / (na - 1)
    vb = math.fsum((v - mb) ** 2 for v in b) / (nb - 1)
    sa, sb = va / na, vb / nb
    diff = ma - mb
    if sa + sb == 0.0:
        if diff == 0.0:
            return 0.0, math.nan, 1.0
        raise DomainError("both samples have zero variance but different means")
    t = diff / math.sqrt(sa + sb)
    # exact antisymmetry: -(x - y) == (y - x) in IEEE arithmetic
    df = (sa + sb) ** 2 / (sa * sa / (na - 1) + sb * sb / (nb - 1))
    p = min(1.0, 2.0 * t_sf(abs(t), df))
    return t, df, p
