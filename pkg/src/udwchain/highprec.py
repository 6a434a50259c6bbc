"""Arbitrary-precision scalar and dense linear-algebra kernels.

Everything downstream of the thermal coefficient pipeline runs through the
functions in this module: Cholesky factorization of moment matrices whose
entries span hundreds of orders of magnitude, triangular inversion, matrix
exponentials, the Hurwitz zeta function and polygamma functions, and an
adaptive quadrature of the bath weight moments that serves as the
cross-check oracle for the closed-form moment route.

Big matrices are plain nested lists of ``mpmath`` numbers (row major).
Precision is always a per-call parameter carried by :class:`PrecisionConfig`;
no global state is mutated outside a ``workdps`` context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from mpmath import mp, mpf, mpc, bernoulli, factorial

from .errors import (
    DomainError,
    NonConvergence,
    NotPositiveDefinite,
    SingularDiagonal,
)

__all__ = [
    "PrecisionConfig",
    "big_identity",
    "big_from_rows",
    "big_matmul",
    "big_transpose",
    "frobenius_norm",
    "cholesky_lower",
    "invert_lower_triangular",
    "matrix_exponential",
    "hurwitz_zeta",
    "hurwitz_zeta_range",
    "polygamma",
    "integrate_weight_moment_numeric",
]


@dataclass(frozen=True)
class PrecisionConfig:
    """Decimal precision budget for one computation.

    ``working_digits`` is the number of significant decimal digits the caller
    wants to trust in the result; ``guard_digits`` are added on top for
    intermediate arithmetic.  Results of every kernel in this module are
    reproducible to the working precision when rerun with doubled digits.
    """

    working_digits: int = 50
    guard_digits: int = 10

    def __post_init__(self):
        if self.working_digits < 15:
            raise ValueError("working_digits must be at least 15 (double precision floor)")
        if self.guard_digits < 0:
            raise ValueError("guard_digits must be non-negative")

    @property
    def dps(self) -> int:
        return self.working_digits + self.guard_digits


# default used when a caller passes precision=None
DEFAULT_PRECISION = PrecisionConfig(50)

# default for the thermal coefficient pipeline; the coefficient magnitudes at
# N=250 span ~430 orders of magnitude, so "several hundred" digits are needed
THERMAL_PRECISION = PrecisionConfig(300)


def _as_precision(precision) -> PrecisionConfig:
    if precision is None:
        return DEFAULT_PRECISION
    if isinstance(precision, int):
        return PrecisionConfig(precision)
    return precision


# ---------------------------------------------------------------------------
# nested-list matrix helpers
# ---------------------------------------------------------------------------

def big_identity(n):
    return [[mp.one if i == j else mp.zero for j in range(n)] for i in range(n)]


def big_from_rows(rows):
    """Convert any nested iterable (numpy array, lists of floats) to mpf rows."""
    return [[mp.mpmathify(x) for x in row] for row in rows]


def big_transpose(a):
    return [list(col) for col in zip(*a)]


def big_matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    bt = big_transpose(b)
    return [[mp.fsum(a[i][k] * bt[j][k] for k in range(m)) for j in range(p)] for i in range(n)]


def frobenius_norm(a):
    return mp.sqrt(mp.fsum(abs(x) ** 2 for row in a for x in row))


# ---------------------------------------------------------------------------
# Cholesky and triangular inverse
# ---------------------------------------------------------------------------

def cholesky_lower(matrix, precision=None):
    """Lower-triangular L with ``matrix = L L^T`` for a symmetric SPD matrix.

    The matrix is given as nested lists (or any 2-D iterable) of values that
    ``mpmath`` can coerce.  Pivots are computed with the textbook recurrence;
    a pivot that is non-positive, or smaller than the rounding noise floor of
    the sums that produced it, raises :class:`NotPositiveDefinite` --- the
    intended signal that the working precision is too low for this matrix.
    """
    prec = _as_precision(precision)
    with mp.workdps(prec.dps):
        m = big_from_rows(matrix)
        n = len(m)
        if any(len(row) != n for row in m):
            raise ValueError("cholesky_lower needs a square matrix")
        low = [[mp.zero] * n for _ in range(n)]
        noise = mpf(10) ** (-(prec.dps - 6))
        for i in range(n):
            li = low[i]
            for j in range(i + 1):
                lj = low[j]
                s = mp.fsum(li[k] * lj[k] for k in range(j))
                if i == j:
                    pivot = m[i][i] - s
                    floor = (abs(m[i][i]) + abs(s)) * noise
                    if pivot <= 0:
                        raise NotPositiveDefinite(i, "pivot <= 0")
                    if pivot < floor:
                        raise NotPositiveDefinite(i, "pivot below rounding noise; raise digits")
                    li[j] = mp.sqrt(pivot)
                else:
                    li[j] = (m[i][j] - s) / lj[j]
        return low


def invert_lower_triangular(low, precision=None):
    """Inverse of a lower-triangular matrix by forward substitution."""
    prec = _as_precision(precision)
    with mp.workdps(prec.dps):
        lo = big_from_rows(low)
        n = len(lo)
        inv = [[mp.zero] * n for _ in range(n)]
        for i in range(n):
            if lo[i][i] == 0:
                raise SingularDiagonal(i)
            inv[i][i] = 1 / lo[i][i]
            li = lo[i]
            for j in range(i):
                inv[i][j] = -inv[i][i] * mp.fsum(li[k] * inv[k][j] for k in range(j, i))
        return inv


# ---------------------------------------------------------------------------
# matrix exponential (scaling and squaring with a Taylor kernel)
# ---------------------------------------------------------------------------

def matrix_exponential(k_matrix, t=1, precision=None):
    """``exp(t K)`` for a square matrix (real or complex) at arbitrary precision.

    Intended for moderate sizes (validation runs, small generators); the
    production double-precision engines use scipy directly.
    """
    prec = _as_precision(precision)
    with mp.workdps(prec.dps):
        a = big_from_rows(k_matrix)
        n = len(a)
        tt = mp.mpmathify(t)
        if tt == 0:
            return big_identity(n)
        a = [[tt * x for x in row] for row in a]
        # scale so the 1-norm is <= 1/2, Taylor, then square back
        norm1 = max(mp.fsum(abs(a[i][j]) for i in range(n)) for j in range(n))
        squarings = max(0, int(mp.ceil(mp.log(norm1 / mpf("0.5"), 2)))) if norm1 > 0 else 0
        scale = mpf(2) ** (-squarings)
        a = [[x * scale for x in row] for row in a]
        result = big_identity(n)
        term = big_identity(n)
        tol = mpf(10) ** (-(prec.dps + 5))
        for order in range(1, 10 * prec.dps + 50):
            term = big_matmul(term, a)
            term = [[x / order for x in row] for row in term]
            result = [[result[i][j] + term[i][j] for j in range(n)] for i in range(n)]
            if frobenius_norm(term) < tol:
                break
        else:
            raise NonConvergence("matrix exponential Taylor series did not converge")
        for _ in range(squarings):
            result = big_matmul(result, result)
        return result


# ---------------------------------------------------------------------------
# Hurwitz zeta (Euler-Maclaurin) and polygamma
# ---------------------------------------------------------------------------

def hurwitz_zeta_range(s_max, a, precision=None):
    """``zeta(s, a)`` for every integer ``s = 2 .. s_max`` in one pass.

    Euler-Maclaurin with the shift count chosen so ``|a + M| >= s_max +
    working_digits/2``; the direct sum and the Bernoulli tail are shared
    across all orders, which is what makes the density-reconstruction tables
    (one ``a`` per grid point, hundreds of orders) affordable.

    Returns a list ``z`` with ``z[s] = zeta(s, a)`` (entries 0 and 1 unused).
    """
    prec = _as_precision(precision)
    a = mp.mpmathify(a)
    if mp.re(a) <= 0:
        raise DomainError("hurwitz zeta requires Re(a) > 0")
    if s_max < 2:
        raise ValueError("s_max must be >= 2")
    with mp.workdps(prec.dps + 10):
        shift = max(0, int(mp.ceil(s_max + prec.dps / 2 - abs(a))) + 1)
        out = [mp.zero] * (s_max + 1)
        for j in range(shift):
            inv = 1 / (a + j)
            p = inv
            for s in range(2, s_max + 1):
                p *= inv
                out[s] += p
        z = a + shift
        invz = 1 / z
        invz2 = invz * invz
        tiny = mpf(10) ** (-(prec.dps + 5))
        p = invz
        for s in range(2, s_max + 1):
            p *= invz  # z^(-s)
            tail = p * z / (s - 1) + p / 2
            poch = mpf(s)
            zp = p * invz
            k = 1
            while k <= 2 * prec.dps + 200:
                term = bernoulli(2 * k) / factorial(2 * k) * poch * zp
                tail += term
                if abs(term) < tiny * (abs(out[s]) + abs(tail) + tiny):
                    break
                poch *= (s + 2 * k - 1) * (s + 2 * k)
                zp *= invz2
                k += 1
            else:
                raise NonConvergence("Euler-Maclaurin tail did not converge")
            out[s] += tail
        return out


def hurwitz_zeta(s, a, precision=None):
    """Hurwitz zeta ``zeta(s, a)`` for integer s >= 2 and Re(a) > 0."""
    return hurwitz_zeta_range(int(s), a, precision)[int(s)]


def polygamma(m, x, precision=None):
    """``psi^(m)(x)`` for integer m >= 1 and x > 0.

    Uses ``psi^(m)(x) = (-1)^(m+1) m! zeta(m+1, x)``, i.e. the same
    recurrence-shift plus asymptotic-series evaluation as the zeta kernel.
    """
    if m < 1:
        raise ValueError("polygamma order must be >= 1")
    x = mp.mpmathify(x)
    if not (mp.im(x) == 0 and mp.re(x) > 0):
        raise DomainError("polygamma requires real x > 0")
    prec = _as_precision(precision)
    with mp.workdps(prec.dps + 10):
        z = hurwitz_zeta(m + 1, x, prec)
        return (-1) ** (m + 1) * factorial(m) * z


# ---------------------------------------------------------------------------
# quadrature oracle for the thermal weight moments
# ---------------------------------------------------------------------------

def _weight_density(k, length, beta):
    """Bath weight w(k) = k e^{-2L|k|} e^{beta k/2} / (4 pi sinh(beta k/2)).

    The k=0 singularity of 1/sinh is removable; w(0) = 1/(2 pi beta).
    """
    if k == 0:
        return 1 / (2 * mp.pi * beta)
    return k * mp.e ** (-2 * length * abs(k) + beta * k / 2) / (4 * mp.pi * mp.sinh(beta * k / 2))


def _tail_cutoff(n, rate, dps):
    # solve (n+1) ln k - rate*k == logf(peak) - (dps+12) ln 10 iteratively
    peak = (n + 1) / rate
    cut = peak + (dps + 12) * mp.log(10) / rate
    for _ in range(4):
        cut = peak + ((dps + 12) * mp.log(10) + (n + 1) * mp.log(cut / peak)) / rate
    return cut


def integrate_weight_moment_numeric(n, length, beta, precision=None, rel_tol=mpf("1e-20")):
    """Adaptive quadrature of ``integral dk w(k) k^n`` (test oracle).

    Splits at k=0 and truncates both exponential tails where the integrand
    has dropped ``working_digits + 12`` orders below its peak.  Production
    code never calls this; it exists so every module can cross-check the
    closed-form polygamma moments.
    """
    prec = _as_precision(precision) if precision is not None else PrecisionConfig(40)
    with mp.workdps(prec.dps + 10):
        length = mp.mpmathify(length)
        beta = mp.mpmathify(beta)
        if length <= 0 or beta <= 0:
            raise DomainError("need L > 0 and beta > 0")
        cut_pos = _tail_cutoff(n, 2 * length, prec.dps)
        cut_neg = _tail_cutoff(n, 2 * length + beta, prec.dps)

        def f(k):
            return _weight_density(k, length, beta) * k ** n if k != 0 else (
                _weight_density(k, length, beta) if n == 0 else mp.zero)

        value, err = mp.quad(f, [-cut_neg, 0, cut_pos], error=True, maxdegree=10)
        if not (abs(err) <= abs(value) * rel_tol + mpf(10) ** (-(prec.dps - 2))):
            raise NonConvergence(
                f"weight moment quadrature n={n}: estimated error {mp.nstr(err, 3)} "
                f"vs value {mp.nstr(value, 3)}")
        return value
