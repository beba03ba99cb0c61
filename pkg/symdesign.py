"""
Zero-Symmetry Filter Design
===========================
Constructors for every 0-SYM quadrature mirror filter:

- from an even all-pass function a(z)
- from the preimages of one (m, sign of H(i), multiset Lambda)
- from prescribed stopband zeros
- the maximally flat family E(n, delta)

All constructors share one expansion path: given the palindromic polynomial
A(z) and a sign s,

    H = A (A + s sqrt2 A~) / (A^2 + A~^2 + s sqrt2 A A~),   A~(z) = A(-z).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

import settings
from analysis import symmetry_deviations
from polyrat import (ComplexRootSet, RationalFilter, RealPoly, cluster_values, mobius_transform,
                     multiplicity_at, poly_gcd, poly_roots, poly_sqrt)
from qmf_errors import InvalidAllPassError, PoleError, SymmetryViolationError, ValidationError

logger = logging.getLogger(__name__)

SQRT2 = float(np.sqrt(2.0))


# ============================================================================
# MOBIUS HELPERS
# ============================================================================

def _complex_input(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _complex_output(arr, scalar):
    return complex(arr) if scalar else arr


def beta(z):
    """Bilinear map (1 - z) / (1 + z)."""
    arr, scalar = _complex_input(z)
    if np.any(1.0 + arr == 0):
        raise PoleError("beta", -1)
    return _complex_output((1.0 - arr) / (1.0 + arr), scalar)


def eta(z):
    """(z + 1/z) / 2."""
    arr, scalar = _complex_input(z)
    if np.any(arr == 0):
        raise PoleError("eta", 0)
    return _complex_output((arr + 1.0 / arr) / 2.0, scalar)


def gamma(z):
    """(z - 1/z) / 2."""
    arr, scalar = _complex_input(z)
    if np.any(arr == 0):
        raise PoleError("gamma", 0)
    return _complex_output((arr - 1.0 / arr) / 2.0, scalar)


def nu(z):
    """(1 + sqrt2 z) / (1 + sqrt2 z + z^2)."""
    arr, scalar = _complex_input(z)
    denominator = 1.0 + SQRT2 * arr + arr * arr
    if np.any(denominator == 0):
        raise PoleError("nu", z)
    return _complex_output((1.0 + SQRT2 * arr) / denominator, scalar)


def doubling_orbit(z, iterations):
    """Iterates of z -> 1/eta(z); on the circle this conjugates angle doubling."""
    orbit = [complex(z)]
    current = complex(z)
    for _ in range(iterations):
        denominator = 1.0 + current * current
        if denominator == 0:
            raise PoleError("inverse eta", current)
        current = 2.0 * current / denominator
        orbit.append(current)
    return np.array(orbit)


# ============================================================================
# DESIGN TYPES
# ============================================================================

@dataclass(frozen=True)
class MaxflatId:
    n: int
    delta: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"maxflat order n must be a positive integer, got {self.n}", invariant="n >= 1")
        if self.delta not in (0, 1):
            raise ValidationError(f"delta must be 0 or 1, got {self.delta}", invariant="delta in {0, 1}")

    @property
    def sign_at_i(self):
        return -1 if self.delta else 1


@dataclass(frozen=True, eq=False)
class AllPass:
    """a(z) = s (-1)^(m+r) B(z^2) / (z^(2m) B~(z^2)), B~ the reciprocal of B, r = deg B.

    ``sign`` is the value a(i); ``n_shift`` is m, half the pole order at 0.
    """

    sign: int
    n_shift: int
    b_poly: RealPoly = field(default_factory=RealPoly.one)

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidAllPassError(f"all-pass sign must be +1 or -1, got {self.sign}", invariant="sign")
        if not isinstance(self.b_poly, RealPoly):
            object.__setattr__(self, "b_poly", RealPoly(self.b_poly))
        if self.b_poly.is_zero or self.b_poly.coeffs[0] == 0:
            raise InvalidAllPassError("B(0) must be nonzero", invariant="B(0) != 0")

    @property
    def r(self):
        return self.b_poly.degree

    @property
    def scale(self):
        return self.sign * (-1) ** (self.n_shift + self.r)

    def evaluate(self, z):
        arr, scalar = _complex_input(z)
        w = arr * arr
        value = self.scale * self.b_poly(w) / (arr ** (2 * self.n_shift) * self.b_poly.reciprocal()(w))
        return _complex_output(value, scalar)

    __call__ = evaluate


@dataclass(frozen=True, eq=False)
class PreimageSpec:
    """Minimal parameters of a 0-SYM filter: m, sign of H(i) and the multiset Lambda.

    Lambda is canonicalized on construction: each entry is replaced by the
    member of {lambda, 1/lambda} with modulus > 1 (on the circle, Im >= 0) and
    the multiset is sorted.
    """

    m: int
    sign_at_i: int
    lambdas: tuple = ()

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValidationError(f"m must be a positive integer, got {self.m}", invariant="m >= 1")
        if self.sign_at_i not in (1, -1):
            raise ValidationError(f"sign at i must be +1 or -1, got {self.sign_at_i}", invariant="sign")
        values = [complex(v) for v in self.lambdas]
        _validate_lambdas(values)
        object.__setattr__(self, "lambdas", tuple(sorted((_canonical_lambda(v) for v in values),
                                                         key=lambda c: (round(c.real, 12), round(c.imag, 12)))))

    @property
    def r(self):
        return len(self.lambdas)

    @property
    def etas(self):
        return [eta(v) for v in self.lambdas]

    def same_as(self, other, tol=settings.PREIMAGE_TOL):
        if (self.m, self.sign_at_i, self.r) != (other.m, other.sign_at_i, other.r):
            return False
        return ComplexRootSet(cluster_values(self.lambdas)).matches(other.lambdas, tol)


def _canonical_lambda(value):
    modulus = abs(value)
    if abs(modulus - 1.0) <= settings.PREIMAGE_TOL:
        value = value / modulus
        return value if value.imag >= 0 else value.conjugate()
    return value if modulus > 1.0 else 1.0 / value


def _validate_lambdas(values):
    tol = settings.PREIMAGE_TOL
    for v in values:
        for forbidden in (0, 1, -1, 1j, -1j):
            if abs(v - forbidden) <= tol:
                raise ValidationError(f"lambda = {v:.6g} is a forbidden value {forbidden}",
                                      invariant="forbidden value")
    for i, a in enumerate(values):
        for b in values[i:]:
            if abs(a + b) <= tol * max(1.0, abs(a)) or abs(a * b + 1.0) <= tol:
                raise ValidationError(f"lambdas {a:.6g} and {b:.6g} form a negation pair",
                                      invariant="negation pair")
        for b in values[i + 1:]:
            if abs(a * b - 1.0) <= tol and abs(a - b) > tol:
                raise ValidationError(f"lambdas {a:.6g} and {b:.6g} are reciprocals", invariant="reciprocal pair")

    etas = [(v + 1.0 / v) / 2.0 for v in values]
    scale = max([1.0] + [abs(e) for e in etas])
    if not ComplexRootSet(tuple((e, 1) for e in etas)).matches([e.conjugate() for e in etas], tol * scale * 10):
        raise ValidationError("eta(lambda) values are not closed under conjugation", invariant="conjugate closure")


# ============================================================================
# SHARED EXPANSION
# ============================================================================

def _filter_from_a(a_poly, sign, m, sign_at_i, lambdas, provenance):
    a_tilde = a_poly.reflect()
    num = a_poly * (a_poly + sign * SQRT2 * a_tilde)
    den = a_poly * a_poly + a_tilde * a_tilde + sign * SQRT2 * (a_poly * a_tilde)
    logger.debug("built %s: order %d", provenance, max(num.degree, den.degree))
    return RationalFilter(num, den, m=m, sign_at_i=sign_at_i, lambdas=tuple(lambdas), provenance=provenance,
                          a_poly=a_poly, a_sign=sign)


def _a_from_etas(m, etas):
    a_poly = np.array(RealPoly.binomial(1.0, 1.0, 2 * m).coeffs, dtype=complex)
    remaining = list(etas)
    while remaining:
        e = remaining.pop(0)
        if abs(e.imag) <= settings.CONJUGATE_TOL * max(1.0, abs(e)):
            a_poly = np.convolve(a_poly, [1.0, 2.0 * e.real, 1.0])
            continue
        distances = [abs(x - e.conjugate()) for x in remaining]
        if not distances or min(distances) > settings.CLUSTER_TOL * max(1.0, abs(e)):
            a_poly = np.convolve(a_poly, [1.0, 2.0 * e.real, 1.0])
            continue
        partner = remaining.pop(int(np.argmin(distances)))
        pair = np.convolve([1.0, 2.0 * e, 1.0], [1.0, 2.0 * partner, 1.0])
        a_poly = np.convolve(a_poly, pair)
    return RealPoly(a_poly.real)


# ============================================================================
# CONSTRUCTORS
# ============================================================================

def build_from_allpass(a):
    """0-SYM filter H = nu(1 / a(beta(z))) of an even all-pass ``a``."""
    if not isinstance(a, AllPass):
        raise InvalidAllPassError("expected an AllPass value", invariant="all-pass")
    if a.n_shift < 1:
        raise InvalidAllPassError(
            f"all-pass needs a pole of order >= 2 at 0, got order {2 * a.n_shift}", invariant="pole at 0"
        )
    b_rec = a.b_poly.reciprocal()
    if a.r and poly_gcd(a.b_poly, b_rec).degree > 0:
        raise InvalidAllPassError("B shares a root with its reciprocal", invariant="B coprime with reciprocal")

    # A(z) = (1+z)^(2m) sum_j b_j (1-z)^(2j) (1+z)^(2r-2j)
    b_even = a.b_poly.dilate(2) if a.r else a.b_poly
    a_poly = RealPoly.binomial(1.0, 1.0, 2 * a.n_shift) * mobius_transform(b_even, 2 * a.r)
    return _filter_from_a(a_poly, a.scale, a.n_shift, a.sign, (),
                          f"build_from_allpass(sign={a.sign}, m={a.n_shift}, B={a.b_poly.tolist()})")


def allpass_from_rational(num, den, grid=settings.ALLPASS_GRID, tol=settings.ALLPASS_TOL):
    """Read a(z) = num(z)/den(z) as an AllPass, checking evenness and a(z) a(1/z) = 1."""
    num, den = RealPoly(getattr(num, "coeffs", num)), RealPoly(getattr(den, "coeffs", den))
    if num.is_zero or den.is_zero:
        raise InvalidAllPassError("all-pass numerator and denominator must be nonzero", invariant="all-pass")

    angles = 2.0 * np.pi * (np.arange(grid) + 0.25) / grid
    z = 1.3 * np.exp(1j * angles)
    with np.errstate(divide="ignore", invalid="ignore"):
        a_z, a_inv, a_neg = num(z) / den(z), num(1 / z) / den(1 / z), num(-z) / den(-z)
    if not np.all(np.isfinite(a_z * a_inv)) or np.max(np.abs(a_z * a_inv - 1.0)) > tol:
        raise InvalidAllPassError("a(z) a(1/z) != 1", invariant="all-pass")
    if np.max(np.abs(a_z - a_neg) / np.maximum(1.0, np.abs(a_z))) > tol:
        raise InvalidAllPassError("a(z) != a(-z)", invariant="even")

    low_num = int(np.flatnonzero(num.coeffs)[0])
    low_den = int(np.flatnonzero(den.coeffs)[0])
    n0, d0 = num.coeffs[low_num:], den.coeffs[low_den:]
    shift = low_den - low_num
    if shift % 2:
        raise InvalidAllPassError("odd power of z in an even all-pass", invariant="even")
    b = n0[::2] / n0[0]
    b_poly = RealPoly(b)
    scale = n0[0] * b_poly.leading / d0[0]
    if abs(abs(scale) - 1.0) > 1e-8:
        raise InvalidAllPassError(f"all-pass constant {scale:.6g} is not +-1", invariant="all-pass")
    m = shift // 2
    sign = int(np.sign(scale)) * (-1) ** (m + b_poly.degree)
    return AllPass(sign=sign, n_shift=m, b_poly=b_poly)


def extract_allpass(H):
    """Even all-pass a with H = nu(1 / a(beta(z))).

    Reads A(-z) off 1 - H = A(-z)^2 / den, then B off (1+t)^d A(beta(t)) = 2^d B(t^2).
    """
    deviations = symmetry_deviations(H)
    for identity, deviation in deviations.items():
        if deviation > settings.SYM_TOL:
            raise SymmetryViolationError(
                f"filter is not 0-SYM: {identity} fails by {deviation:.3g}", identity=identity
            )
    if not H.is_normalized():
        raise ValidationError("filter is not normalized at z = 1", invariant="H(1) = 1")

    a_poly = _a_from_filter(H)

    zero_order = multiplicity_at(a_poly, -1.0)
    if zero_order % 2 or zero_order == 0:
        raise SymmetryViolationError(f"zero at -1 of order {zero_order} is not even and positive",
                                     identity="even zero order at -1")
    m = zero_order // 2
    d = a_poly.degree
    r = d // 2 - m
    transformed = mobius_transform(a_poly, d).coeffs
    b = np.array([transformed[2 * j] if 2 * j < len(transformed) else 0.0 for j in range(r + 1)])
    b_poly = RealPoly(b / b[0])

    sign = 1 if H(1j).real > 0 else -1
    logger.debug("extracted all-pass: sign=%d m=%d r=%d", sign, m, r)
    return AllPass(sign=sign, n_shift=m, b_poly=b_poly)


def _a_from_filter(H):
    """A(z) from den - num = A(-z)^2, up to a positive scale."""
    one_minus = H.one_minus()
    if one_minus.coeffs[0] < 0:
        one_minus = -one_minus
    return poly_sqrt(one_minus).reflect()


def build_from_preimages(spec):
    """0-SYM filter with 2m zeros at -1, H(i) of the given sign and preimages of one Lambda."""
    if not isinstance(spec, PreimageSpec):
        raise ValidationError("expected a PreimageSpec", invariant="spec")
    a_poly = _a_from_etas(spec.m, spec.etas)
    sign = spec.sign_at_i * (-1) ** (spec.m + spec.r)
    lambdas_text = ", ".join(f"{v.real:.17g}{v.imag:+.17g}j" for v in spec.lambdas)
    return _filter_from_a(a_poly, sign, spec.m, spec.sign_at_i, spec.lambdas,
                          f"build_from_preimages(m={spec.m}, sign={spec.sign_at_i:+d}, lambdas=[{lambdas_text}])")


def design_stopband(m, sign, thetas=(), extra=()):
    """0-SYM filter vanishing in the stopband exactly at e^(+-i theta) and -1."""
    lambdas = []
    for theta in thetas:
        if not np.pi / 2 < theta < np.pi:
            raise ValidationError(f"stopband angle {theta:.6g} is outside (pi/2, pi)", invariant="theta in stopband")
        lambdas.append(-np.exp(1j * theta))
    for value in extra:
        value = complex(value)
        if value.real <= 0:
            raise ValidationError(f"extra preimage {value:.6g} is not in the right half plane",
                                  invariant="Re(lambda) > 0")
        if abs(abs(value) - 1.0) <= settings.PREIMAGE_TOL:
            raise ValidationError(f"extra preimage {value:.6g} lies on the unit circle", invariant="|lambda| != 1")
        lambdas.append(value)
    spec = PreimageSpec(m=m, sign_at_i=sign, lambdas=tuple(lambdas))
    return build_from_preimages(spec).with_provenance(
        f"design_stopband(m={m}, sign={sign:+d}, thetas={[float(t) for t in thetas]}, "
        f"extra={[str(complex(v)) for v in extra]})"
    )


def _as_id(ident):
    return ident if isinstance(ident, MaxflatId) else MaxflatId(*ident)


def maxflat(ident):
    """Maximally flat filter E(n, delta): 2n zeros at -1, order 4n."""
    ident = _as_id(ident)
    a_poly = RealPoly.binomial(1.0, 1.0, 2 * ident.n)
    sign = (-1) ** (ident.delta + ident.n)
    return _filter_from_a(a_poly, sign, ident.n, ident.sign_at_i, (), f"maxflat(n={ident.n}, delta={ident.delta})")


def maxflat_zeros(ident):
    ident = _as_id(ident)
    n, delta = ident.n, ident.delta
    radius = 2.0 ** (-1.0 / (4 * n))
    js = np.arange(-n + 1, n + 1)
    points = radius * np.exp(1j * np.pi * (2 * js + n + delta - 1) / (2 * n))
    others = ComplexRootSet.from_values(beta(points))
    return ComplexRootSet(tuple(sorted(((-1 + 0j, 2 * n),) + others.roots, key=lambda r: (r[0].real, r[0].imag))))


def maxflat_poles(ident):
    ident = _as_id(ident)
    n, delta = ident.n, ident.delta
    js = np.arange(-n + 1, n + 1)
    t = np.tan(np.pi * (5 + 8 * js + 4 * delta + 4 * n) / (16 * n))
    return ComplexRootSet.from_values(np.concatenate([1j * t, -1j * t]))


def maxflat_response(ident, xi):
    """Closed form E(n, delta)(e^(i xi)) = nu((-1)^delta tan^(2n)(xi/2))."""
    ident = _as_id(ident)
    x = (-1) ** ident.delta * np.tan(np.asarray(xi, dtype=float) / 2.0) ** (2 * ident.n)
    return (1.0 + SQRT2 * x) / (1.0 + SQRT2 * x + x * x)


def maxflat_family(ns, delta=0, points=settings.FREQ_POINTS):
    """Closed-form responses on (-pi, pi], one column per order n."""
    xi = -np.pi + 2.0 * np.pi * np.arange(points) / points
    frame = pd.DataFrame({"x": xi})
    for n in ns:
        frame[f"n={n}"] = maxflat_response(MaxflatId(n, delta), xi)
    return frame


def highpass(H):
    """G(z) = -z H(-1/z)."""
    d = max(H.num.degree, H.den.degree)

    def flipped(poly):
        padded = np.pad(poly.coeffs, (0, d + 1 - len(poly.coeffs)))
        signs = np.where(np.arange(d + 1) % 2, -1.0, 1.0)
        return (padded * signs)[::-1]

    num = np.concatenate([[0.0], -flipped(H.num)])
    den = flipped(H.den)
    common = min(int(np.flatnonzero(num)[0]), int(np.flatnonzero(den)[0]))
    return RationalFilter(RealPoly.exact(num[common:]), RealPoly.exact(den[common:]),
                          provenance=f"highpass({H.provenance})")


def transition_slope(spec):
    """Slope of the frequency response at xi = pi/2."""
    if not isinstance(spec, PreimageSpec):
        raise ValidationError("expected a PreimageSpec", invariant="spec")
    total = spec.m + sum(1.0 / e for e in spec.etas)
    return float((-(2.0 - SQRT2 * spec.sign_at_i) * total).real)


def response_from_allpass(a, xi):
    """H(e^(i xi)) = (X - 1)/(X + 1) with X = (1 + sqrt2 a(-i tan(xi/2)))^2."""
    values = np.real(a.evaluate(-1j * np.tan(np.asarray(xi, dtype=float) / 2.0)))
    x = (1.0 + SQRT2 * values) ** 2
    return (x - 1.0) / (x + 1.0)


def recover_preimage_spec(H):
    """Inverse of build_from_preimages for a 0-SYM filter."""
    a = extract_allpass(H)
    a_poly = _a_from_filter(H)
    # roots of A besides -1 are -lambda and -1/lambda; both canonicalize to lambda
    canonical = [_canonical_lambda(-value) for value, mult in poly_roots(a_poly)
                 for _ in range(mult) if abs(value + 1.0) > settings.CLUSTER_TOL]
    lambdas = [value for value, count in cluster_values(canonical, 1e-6) for _ in range(count // 2)]
    return PreimageSpec(m=a.n_shift, sign_at_i=a.sign, lambdas=tuple(lambdas))
