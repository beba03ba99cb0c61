"""
Polynomial and Rational Arithmetic
==================================
Floating-point polynomial, Laurent-polynomial and rational-function algebra
with root finding; every filter construction in the toolkit sits on it.

- Coefficients are stored in ascending powers: ``coeffs[k]`` multiplies z**k.
- Values are immutable once built; every operation returns a new value.
- Roots come from companion-matrix eigenvalues (scipy.linalg), polished by
  Newton steps on the original polynomial. Repeated roots at +1 and -1 are
  detected exactly and deflated first.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from numbers import Number

import numpy as np
from numpy.polynomial import polynomial as npp
from scipy import linalg

import settings
from qmf_errors import PoleError, RealizabilityError, ValidationError

logger = logging.getLogger(__name__)


# ============================================================================
# COEFFICIENT HELPERS
# ============================================================================

def _as_coeffs(values):
    arr = np.atleast_1d(np.asarray(values, dtype=float)).ravel()
    if arr.size == 0:
        return np.zeros(1)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("polynomial coefficients must be finite", invariant="finite coefficients")
    return arr


def _strip_leading(coeffs, tol):
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return np.zeros(1)
    keep = len(coeffs)
    while keep > 1 and abs(coeffs[keep - 1]) <= tol * scale:
        keep -= 1
    return coeffs[:keep].copy()


def _strip_cancelled(coeffs, magnitude, tol):
    """Drop top coefficients that are rounding residue of a sum whose terms had ``magnitude``."""
    keep = len(coeffs)
    while keep > 1 and abs(coeffs[keep - 1]) <= tol * magnitude[keep - 1]:
        keep -= 1
    return coeffs[:keep]


def _deflate(coeffs, z0):
    """Synthetic division by (z - z0); returns (quotient, remainder)."""
    quotient = np.zeros(len(coeffs) - 1, dtype=np.result_type(coeffs, z0))
    acc = coeffs[-1]
    for k in range(len(coeffs) - 2, -1, -1):
        quotient[k] = acc
        acc = coeffs[k] + acc * z0
    return quotient, acc


# ============================================================================
# POLYNOMIAL TYPES
# ============================================================================

@dataclass(frozen=True, eq=False)
class RealPoly:
    """Real polynomial in ascending coefficient order.

    The highest stored coefficient is nonzero, or the polynomial is exactly
    ``[0]``. Built from raw coefficients, leading ones below ``CANONICAL_TOL``
    relative to the largest are stripped; interior small coefficients are
    kept. Arithmetic results strip only coefficients that cancelled.
    """

    coeffs: np.ndarray

    # numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __post_init__(self):
        coeffs = _strip_leading(_as_coeffs(self.coeffs), settings.CANONICAL_TOL)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def one(cls):
        return cls([1.0])

    @classmethod
    def exact(cls, values):
        """Keep every coefficient; only exact zeros are stripped from the top.

        Cascade factors carry tiny end coefficients that must survive to stay
        palindromic.
        """
        coeffs = _as_coeffs(values)
        nonzero = np.flatnonzero(coeffs)
        coeffs = coeffs[:nonzero[-1] + 1].copy() if nonzero.size else np.zeros(1)
        coeffs.setflags(write=False)
        poly = cls.__new__(cls)
        object.__setattr__(poly, "coeffs", coeffs)
        return poly

    @classmethod
    def binomial(cls, a, b, power):
        """(a + b z)**power."""
        return cls.exact(npp.polypow([a, b], power))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return self.degree == 0 and self.coeffs[0] == 0.0

    @property
    def leading(self):
        return float(self.coeffs[-1])

    def norm(self):
        return float(np.max(np.abs(self.coeffs)))

    def __call__(self, z):
        return poly_eval(self, z)

    def _combine(self, other, sign):
        other = _coerce(other)
        size = max(len(self.coeffs), len(other.coeffs))
        a = np.pad(self.coeffs, (0, size - len(self.coeffs)))
        b = np.pad(other.coeffs, (0, size - len(other.coeffs)))
        total = _strip_cancelled(a + sign * b, np.abs(a) + np.abs(b), settings.CANONICAL_TOL)
        return RealPoly.exact(total)

    # Products and sign changes cannot cancel a top coefficient, so they keep
    # every coefficient; sums strip only what cancelled at its own index.
    def __add__(self, other):
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return RealPoly.exact(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Number):
            return RealPoly.exact(self.coeffs * float(other))
        other = _coerce(other)
        return RealPoly.exact(npp.polymul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return RealPoly.exact(self.coeffs / float(scalar))

    def __pow__(self, power):
        return RealPoly.exact(npp.polypow(self.coeffs, power))

    def reflect(self):
        """p(-z)."""
        signs = np.where(np.arange(len(self.coeffs)) % 2, -1.0, 1.0)
        return RealPoly.exact(self.coeffs * signs)

    def reciprocal(self):
        """z**d p(1/z)."""
        return RealPoly(self.coeffs[::-1])

    def dilate(self, factor):
        """p(z**factor)."""
        out = np.zeros(self.degree * factor + 1)
        out[::factor] = self.coeffs
        return RealPoly.exact(out)

    def monic(self):
        return RealPoly.exact(self.coeffs / self.leading)

    def allclose(self, other, tol):
        """Coefficientwise match, relative to the larger norm."""
        other = _coerce(other)
        size = max(len(self.coeffs), len(other.coeffs))
        a = np.pad(self.coeffs, (0, size - len(self.coeffs)))
        b = np.pad(other.coeffs, (0, size - len(other.coeffs)))
        scale = max(self.norm(), other.norm(), 1.0)
        return bool(np.max(np.abs(a - b)) <= tol * scale)

    def tolist(self):
        return [float(c) for c in self.coeffs]

    def __repr__(self):
        return f"RealPoly({self.tolist()})"


def _coerce(value):
    if isinstance(value, RealPoly):
        return value
    if isinstance(value, Number):
        return RealPoly([float(value)])
    return RealPoly(value)


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Laurent polynomial: ``coeffs[k]`` multiplies z**(low + k).

    Exact zeros are trimmed from both ends; tiny end coefficients are kept,
    cascade products legitimately carry them.
    """

    low: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = _as_coeffs(self.coeffs)
        nonzero = np.flatnonzero(coeffs)
        if nonzero.size == 0:
            coeffs, low = np.zeros(1), 0
        else:
            low = int(self.low) + int(nonzero[0])
            coeffs = coeffs[nonzero[0]:nonzero[-1] + 1].copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def high(self):
        return self.low + len(self.coeffs) - 1

    @property
    def support_length(self):
        return len(self.coeffs)

    def __call__(self, z):
        return poly_eval(self, z)

    def is_palindromic(self, tol):
        """Coefficients symmetric about the centre of the support (absolute tol)."""
        return bool(np.max(np.abs(self.coeffs - self.coeffs[::-1])) <= tol)

    def tolist(self):
        return [float(c) for c in self.coeffs]


# ============================================================================
# EVALUATION, GCD, MULTIPLICITY
# ============================================================================

def poly_eval(p, z):
    """Horner evaluation of a RealPoly or LaurentPoly at a scalar or array."""
    z_arr = np.asarray(z, dtype=complex)
    value = npp.polyval(z_arr, p.coeffs)
    if isinstance(p, LaurentPoly) and p.low != 0:
        if p.low < 0 and np.any(z_arr == 0):
            raise PoleError("Laurent polynomial", 0)
        value = value * z_arr ** p.low
    if np.ndim(value) == 0:
        return complex(value)
    return value


def poly_gcd(a, b, tol=settings.GCD_TOL):
    """Monic approximate GCD by Euclid's algorithm.

    A remainder counts as zero once every coefficient falls below ``tol``
    relative to the scale of the division that produced it.
    """
    a, b = _coerce(a), _coerce(b)
    if a.is_zero and b.is_zero:
        raise ValidationError("gcd of two zero polynomials is undefined", invariant="not both zero")
    if a.is_zero:
        return b.monic()
    if b.is_zero:
        return a.monic()

    x, y = a.coeffs / a.norm(), b.coeffs / b.norm()
    if len(x) < len(y):
        x, y = y, x
    while len(y) > 1:
        quotient, remainder = npp.polydiv(x, y)
        threshold = tol * max(1.0, float(np.max(np.abs(quotient))))
        remainder = np.atleast_1d(remainder)
        while len(remainder) > 1 and abs(remainder[-1]) <= threshold:
            remainder = remainder[:-1]
        if np.max(np.abs(remainder)) <= threshold:
            return RealPoly(y).monic()
        x, y = y, remainder / np.max(np.abs(remainder))
    return RealPoly.one()


def multiplicity_at(p, z0, tol=settings.MULTIPLICITY_TOL):
    """Order of the zero of ``p`` at ``z0``.

    Taylor coefficients at z0 come from repeated synthetic division; each
    must be below ``tol * ||p||_inf`` for the count to continue.
    """
    p = _coerce(p)
    if p.is_zero:
        raise ValidationError("multiplicity of the zero polynomial is undefined", invariant="nonzero")
    threshold = tol * p.norm()
    coeffs = np.asarray(p.coeffs, dtype=np.result_type(p.coeffs, z0))
    count = 0
    while len(coeffs) > 1:
        quotient, remainder = _deflate(coeffs, z0)
        if abs(remainder) > threshold:
            break
        count += 1
        coeffs = quotient
    return count


def is_palindromic(p, tol=settings.PALINDROME_TOL):
    """coeffs[k] == coeffs[d-k] within ``tol`` relative to the largest coefficient."""
    p = _coerce(p)
    return bool(np.max(np.abs(p.coeffs - p.coeffs[::-1])) <= tol * max(p.norm(), 1e-300))


def poly_sqrt(p, tol=settings.SQUARE_TOL):
    """Palindromic square root of a palindromic perfect square.

    The lower half of the root follows the power-series recursion from the
    constant term; the upper half mirrors it.
    """
    p = _coerce(p)
    if p.degree % 2 or p.coeffs[0] <= 0:
        raise ValidationError("polynomial is not a perfect square", invariant="perfect square")
    c = p.coeffs
    half_degree = p.degree // 2
    root = np.zeros(half_degree + 1)
    root[0] = np.sqrt(c[0])
    middle = half_degree // 2
    for k in range(1, middle + 1):
        root[k] = (c[k] - np.dot(root[1:k], root[k - 1:0:-1])) / (2.0 * root[0])
    root[half_degree - middle:] = root[middle::-1]

    residual = np.max(np.abs(npp.polymul(root, root) - c))
    if residual > tol * p.norm():
        raise ValidationError(
            f"polynomial is not a perfect square (residual {residual:.3g})", invariant="perfect square"
        )
    return RealPoly(root)


def mobius_transform(p, degree=None):
    """(1+t)**d p(beta(t)) = sum_k p_k (1-t)**k (1+t)**(d-k), beta(t) = (1-t)/(1+t)."""
    p = _coerce(p)
    d = p.degree if degree is None else int(degree)
    if d < p.degree:
        raise ValidationError("transform degree is below the polynomial degree", invariant="degree")
    total = np.zeros(d + 1)
    for k, coeff in enumerate(p.coeffs):
        if coeff == 0.0:
            continue
        term = npp.polymul(npp.polypow([1.0, -1.0], k), npp.polypow([1.0, 1.0], d - k))
        total[:len(term)] += coeff * term
    return RealPoly(total)


# ============================================================================
# ROOTS
# ============================================================================

@dataclass(frozen=True)
class ComplexRootSet:
    """Roots with multiplicities, closed under conjugation."""

    roots: tuple = ()

    @property
    def degree(self):
        return sum(mult for _, mult in self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    def values(self):
        """All roots repeated by multiplicity."""
        out = [value for value, mult in self.roots for _ in range(mult)]
        return np.array(out, dtype=complex)

    def multiplicity_near(self, z0, tol=settings.CLUSTER_TOL):
        return sum(mult for value, mult in self.roots if abs(value - z0) <= tol * max(1.0, abs(z0)))

    def expand(self, leading=1.0):
        values = self.values()
        if values.size == 0:
            return RealPoly([leading])
        return RealPoly(leading * npp.polyfromroots(values).real)

    def residual(self, p):
        """Relative coefficient residual of re-expanding against ``p``."""
        p = _coerce(p)
        expanded = self.expand(p.leading).coeffs
        size = max(len(expanded), len(p.coeffs))
        diff = np.pad(expanded, (0, size - len(expanded))) - np.pad(p.coeffs, (0, size - len(p.coeffs)))
        return float(np.max(np.abs(diff)) / p.norm())

    def contains(self, expected, tol):
        """True if every expected value (with repetition) matches a distinct root."""
        remaining = list(self.values())
        for target in expected:
            if not remaining:
                return False
            distances = [abs(r - target) for r in remaining]
            j = int(np.argmin(distances))
            if distances[j] > tol * max(1.0, abs(target)):
                return False
            remaining.pop(j)
        return True

    def matches(self, expected, tol):
        expected = list(expected)
        return len(expected) == self.degree and self.contains(expected, tol)

    @classmethod
    def from_values(cls, values, tol=settings.CLUSTER_TOL):
        return cls(_cluster(_pair_conjugates(values, settings.CONJUGATE_TOL), tol))


def _pair_conjugates(values, tol):
    real, upper, lower = [], [], []
    for v in (complex(v) for v in values):
        if abs(v.imag) <= tol * max(1.0, abs(v)):
            real.append(complex(v.real, 0.0))
        elif v.imag > 0:
            upper.append(v)
        else:
            lower.append(v)

    paired = list(real)
    for u in upper:
        if not lower:
            paired.append(complex(u.real, 0.0))
            continue
        j = int(np.argmin([abs(w - u.conjugate()) for w in lower]))
        partner = lower.pop(j)
        mean = (u + partner.conjugate()) / 2
        paired.extend([mean, mean.conjugate()])
    paired.extend(complex(w.real, 0.0) for w in lower)
    return paired


def cluster_values(values, tol=settings.CLUSTER_TOL):
    """Group nearby complex values into (mean, count) pairs, sorted."""
    return _cluster([complex(v) for v in values], tol)


def _cluster(values, tol):
    clusters = []
    for v in sorted(values, key=lambda c: (c.real, c.imag)):
        for cluster in clusters:
            if abs(v - cluster[0]) <= tol * max(1.0, abs(cluster[0])):
                cluster[1].append(v)
                break
        else:
            clusters.append([v, [v]])
    out = []
    for _, members in clusters:
        mean = complex(np.mean(members))
        out.append((mean, len(members)))
    return tuple(sorted(out, key=lambda r: (r[0].real, r[0].imag)))


def _polish(coeffs, guesses):
    deriv = npp.polyder(coeffs)
    out = []
    for r in guesses:
        r = complex(r)
        value = npp.polyval(r, coeffs)
        for _ in range(settings.NEWTON_STEPS):
            slope = npp.polyval(r, deriv)
            if slope == 0 or value == 0:
                break
            candidate = r - value / slope
            candidate_value = npp.polyval(candidate, coeffs)
            if abs(candidate_value) >= abs(value):
                break
            r, value = candidate, candidate_value
        out.append(r)
    return out


def poly_roots(p):
    """Roots of ``p`` with multiplicities.

    Zeros at 0, -1 and +1 are counted exactly and deflated; the rest are
    companion-matrix eigenvalues polished on the original polynomial.
    """
    p = _coerce(p)
    if p.is_zero:
        raise ValidationError("the zero polynomial has no root set", invariant="nonzero polynomial")

    exact = []
    scale = p.norm()
    at_origin = 0
    while at_origin < p.degree and abs(p.coeffs[at_origin]) <= settings.CANONICAL_TOL * scale:
        at_origin += 1
    if at_origin:
        exact.append((0j, at_origin))

    work = np.array(p.coeffs[at_origin:], dtype=float)
    for z0 in (-1.0, 1.0):
        if len(work) < 2:
            break
        count = multiplicity_at(RealPoly(work), z0)
        for _ in range(count):
            work, _ = _deflate(work, z0)
        if count:
            exact.append((complex(z0), count))

    roots = []
    if len(work) > 1:
        guesses = linalg.eigvals(linalg.companion(work[::-1]))
        roots = _cluster(_pair_conjugates(_polish(p.coeffs, guesses), settings.CONJUGATE_TOL),
                         settings.CLUSTER_TOL)

    result = ComplexRootSet(tuple(sorted(exact + list(roots), key=lambda r: (r[0].real, r[0].imag))))
    residual = result.residual(p)
    logger.debug("poly_roots degree=%d exact=%s residual=%.3g", p.degree, exact, residual)
    if residual > settings.ROOT_RESIDUAL_TOL:
        logger.warning("⚠️ root re-expansion residual %.3g exceeds %.0e", residual, settings.ROOT_RESIDUAL_TOL)
    return result


# ============================================================================
# RATIONAL FILTERS
# ============================================================================

@dataclass(frozen=True, eq=False)
class RationalFilter:
    """H(z) = num(z) / den(z) with the design metadata that produced it.

    Filters built from a palindromic A(z) keep it as ``a_poly`` with the
    sign ``a_sign``, so that H = A (A + s sqrt2 A~) / (A^2 + A~^2 + s sqrt2 A A~).
    Evaluation then goes through the roots of A instead of Horner on the
    expanded num and den, whose coefficients span many orders of magnitude
    at high order.
    """

    num: RealPoly
    den: RealPoly
    m: int = None
    sign_at_i: int = None
    lambdas: tuple = ()
    provenance: str = ""
    a_poly: RealPoly = None
    a_sign: int = None

    def __post_init__(self):
        object.__setattr__(self, "num", _coerce(self.num))
        object.__setattr__(self, "den", _coerce(self.den))
        object.__setattr__(self, "lambdas", tuple(complex(v) for v in self.lambdas))
        if self.den.is_zero:
            raise ValidationError("denominator is the zero polynomial", invariant="den nonzero")
        den_at_one = abs(self.den(1.0))
        if den_at_one <= settings.NORMALIZATION_TOL * self.den.norm():
            raise ValidationError("denominator vanishes at z = 1", invariant="den(1) != 0")
        if self.a_poly is not None:
            object.__setattr__(self, "a_poly", _coerce(self.a_poly))
            if self.a_sign not in (1, -1):
                raise ValidationError(f"factored sign must be +1 or -1, got {self.a_sign}", invariant="sign")
            a, a_tilde = self.a_poly, self.a_poly.reflect()
            cross = (self.a_sign * np.sqrt(2.0)) * a_tilde
            if a.degree * 2 != self.den.degree or not ((a * (a + cross)).allclose(self.num, settings.GCD_TOL)
                    and (a * (a + cross) + a_tilde * a_tilde).allclose(self.den, settings.GCD_TOL)):
                raise ValidationError("A(z) does not reproduce num and den", invariant="factored form")

    @property
    def order(self):
        return max(self.num.degree, self.den.degree)

    @property
    def is_factored(self):
        return self.a_poly is not None

    @cached_property
    def a_roots(self):
        return poly_roots(self.a_poly) if self.a_poly.degree else ComplexRootSet()

    def _a_values(self, z):
        value = np.full(z.shape, self.a_poly.leading, dtype=complex)
        for root, mult in self.a_roots:
            value = value * (z - root) ** mult
        return value

    def fraction(self, z):
        """(num(z), den(z), bound) with ``bound`` the size of the terms summed into den(z).

        A pole lies at z when |den(z)| is negligible next to ``bound``.
        """
        z_arr = np.asarray(z, dtype=complex)
        if not self.is_factored:
            bound = poly_eval(RealPoly.exact(np.abs(self.den.coeffs)), np.abs(z_arr)).real
            return self.num(z_arr), self.den(z_arr), bound
        a, a_tilde = self._a_values(z_arr), self._a_values(-z_arr)
        omega = self.a_sign * np.exp(0.25j * np.pi)
        num = a * (a + self.a_sign * np.sqrt(2.0) * a_tilde)
        den = (a + omega * a_tilde) * (a + np.conj(omega) * a_tilde)
        return num, den, (np.abs(a) + np.abs(a_tilde)) ** 2

    def __call__(self, z):
        """num(z)/den(z): through A(z) when factored, by Horner otherwise."""
        if not self.is_factored:
            return self.num(z) / self.den(z)
        num, den, _ = self.fraction(z)
        value = num / den
        return complex(value) if value.ndim == 0 else value

    @cached_property
    def zeros(self):
        return poly_roots(self.num)

    @cached_property
    def poles(self):
        if self.den.degree == 0:
            return ComplexRootSet()
        return poly_roots(self.den)

    def response(self, z):
        """Root-factored evaluation; accurate next to high-order zeros."""
        if self.is_factored:
            return self(z)
        z_arr = np.asarray(z, dtype=complex)
        value = np.full(z_arr.shape, self.num.leading / self.den.leading, dtype=complex)
        for root, mult in self.zeros:
            value = value * (z_arr - root) ** mult
        for root, mult in self.poles:
            value = value / (z_arr - root) ** mult
        return complex(value) if value.ndim == 0 else value

    def one_minus(self):
        """Numerator of 1 - H."""
        return self.den - self.num

    def one_plus(self):
        """Numerator of 1 + H."""
        return self.den + self.num

    def is_normalized(self, tol=settings.NORMALIZATION_TOL):
        den_at_one = self.den(1.0).real
        return abs(self.num(1.0).real - den_at_one) <= tol * abs(den_at_one)

    def validate(self):
        """Check coprimality and that no pole sits on the unit circle."""
        powers = np.arange(len(self.num.coeffs))
        for pole, _ in self.poles:
            if abs(abs(pole) - 1.0) <= settings.CIRCLE_TOL:
                raise RealizabilityError(f"pole {pole:.6g} lies on the unit circle", invariant="no circle poles")
            scale = float(np.sum(np.abs(self.num.coeffs) * abs(pole) ** powers))
            if abs(self.num(pole)) <= settings.COPRIME_TOL * scale:
                raise ValidationError(
                    f"numerator and denominator share the root {pole:.6g}", invariant="coprime"
                )
        return self

    def with_provenance(self, provenance):
        return RationalFilter(self.num, self.den, self.m, self.sign_at_i, self.lambdas, provenance,
                              self.a_poly, self.a_sign)
