"""
FIR Cascade Approximation
=========================
Approximates an IIR 0-SYM filter by a cascade of palindromic FIR factors

    F(z) = z^-N P(z) prod_k F_k(z^(2^k)),

certifies the relative accuracy and the QMF defect, and runs a periodic
two-channel filter bank on signals.

Construction notes:
- With w = z^2 the denominator is C(w); its roots pair as (q, 1/q), |q| < 1.
- 1/(1-u) is expanded as prod_k (1 + u^(2^k)) for u = q w and u = q / w; a
  pair leaves the product once |q|^(2^k) drops below the drop tolerance.
- P is the numerator over 2^deg(num); every other constant goes into F_1 and
  the factors F_k, k >= 2, are normalized to F_k(1) = 1.
- F approximates z^D H, D = ``delay``; the shift N stays 0.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

import settings
from polyrat import LaurentPoly, RealPoly, is_palindromic, poly_roots
from qmf_errors import PreconditionError, RealizabilityError, ValidationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True, eq=False)
class FirCascade:
    shift_N: int
    P: RealPoly
    factors: tuple
    epsilon: float
    achieved: float
    delay: int = 0

    def __post_init__(self):
        if not isinstance(self.P, RealPoly):
            object.__setattr__(self, "P", RealPoly.exact(self.P))
        factors = tuple((int(level), poly if isinstance(poly, RealPoly) else RealPoly.exact(poly))
                        for level, poly in self.factors)
        object.__setattr__(self, "factors", tuple(sorted(factors, key=lambda item: item[0])))

    @property
    def top_level(self):
        return max((level for level, _ in self.factors), default=0)

    def validate(self):
        """Re-check the cascade invariants; raises ValidationError on the first failure."""
        if self.shift_N < 0 or self.delay < 0:
            raise ValidationError("shift and delay must be nonnegative", invariant="shift >= 0")
        for level, poly in self.factors:
            if level < 1:
                raise ValidationError(f"factor level {level} must be >= 1", invariant="level >= 1")
            if not is_palindromic(poly, settings.PALINDROME_TOL):
                raise ValidationError(f"factor F_{level} is not palindromic", invariant="palindromic factors")
        if self.achieved > self.epsilon:
            raise ValidationError(f"achieved error {self.achieved:.3g} exceeds epsilon {self.epsilon:.3g}",
                                  invariant="achieved <= epsilon")
        if not flatten(self).is_palindromic(10.0 * self.epsilon):
            raise ValidationError("flattened cascade is not palindromic", invariant="linear phase")
        return self


@dataclass(frozen=True, eq=False)
class Signal:
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float).ravel()
        if samples.size == 0:
            raise ValidationError("signal must be nonempty", invariant="nonempty signal")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("signal samples must be finite", invariant="finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @classmethod
    def from_csv(cls, path):
        """Single-column CSV; a non-numeric first row is taken as the header.

        Every other cell must parse as a number; blank lines count as cells
        except at the end of the file.
        """
        try:
            frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=False, keep_default_na=False)
        except pd.errors.EmptyDataError as exc:
            raise ValidationError(f"{path} holds no samples", invariant="signal csv") from exc
        cells = frame.iloc[:, 0].fillna("").astype(str).str.strip()
        while len(cells) and cells.iloc[-1] == "":
            cells = cells.iloc[:-1]
        values = pd.to_numeric(cells, errors="coerce")
        start = 1 if len(values) and np.isnan(values.iloc[0]) and cells.iloc[0] != "" else 0
        bad = np.flatnonzero(np.isnan(values.to_numpy(dtype=float)[start:]))
        if bad.size:
            row = start + int(bad[0])
            raise ValidationError(f"{path}: line {row + 1} holds {cells.iloc[row]!r}, not a number",
                                  invariant="signal csv")
        return cls(values.to_numpy(dtype=float)[start:])

    def to_csv(self, path):
        pd.DataFrame({"value": self.samples}).to_csv(
            path, index=False, float_format=settings.CSV_FLOAT_FORMAT, lineterminator="\n"
        )


# ============================================================================
# CONSTRUCTION
# ============================================================================

def _inner_roots(c_poly):
    inner, outer = [], 0
    for q, mult in poly_roots(c_poly):
        if abs(abs(q) - 1.0) <= settings.CIRCLE_TOL:
            raise RealizabilityError(f"pole pair at {q:.6g} lies on the unit circle", invariant="no circle poles")
        if abs(q) < 1.0:
            inner.extend([q] * mult)
        else:
            outer += mult
    if len(inner) != outer:
        raise ValidationError("denominator roots do not pair as (q, 1/q)", invariant="palindromic denominator")
    return inner


def _top_level(inner, epsilon):
    moduli = np.abs(np.asarray(inner))
    top = 0
    while np.sum(moduli ** (2 ** (top + 1))) > epsilon / 2.0:
        top += 1
    return top


def _assemble(inner, top, drop_tol, constant):
    levels = {}
    shift = len(inner)
    for k in range(top + 1):
        kept = [q for q in inner if abs(q) ** (2 ** k) > drop_tol]
        if not kept:
            break
        product = np.ones(1, dtype=complex)
        for q in kept:
            qk = q ** (2 ** k)
            product = np.convolve(product, [qk, 1.0 + qk * qk, qk])
        levels[k + 1] = product.real
        shift += len(kept) * 2 ** k

    first = levels.pop(1, np.ones(1))
    factors = []
    for level in sorted(levels):
        value = float(np.sum(levels[level]))
        constant *= value
        factors.append((level, RealPoly.exact(levels[level] / value)))
    logger.debug("cascade schedule: top=%d drop=%.3g degrees=%s", top, drop_tol,
                 [len(first) - 1] + [poly.degree for _, poly in factors])
    return ((1, RealPoly.exact(first * constant)),) + tuple(factors), 2 * shift


def _relative_error(factors, delay, den, scale, grid):
    """sup |1 - z^-D F(z) / H(z)|; the numerator of H cancels against P."""
    xi = TWO_PI * np.arange(grid) / grid
    product = np.ones(grid, dtype=complex)
    for level, poly in factors:
        product *= poly(np.exp(1j * (2 ** level) * xi))
    ratio = np.exp(-1j * delay * xi) * product * den(np.exp(1j * xi)) / scale
    return float(np.max(np.abs(1.0 - ratio)))


def fir_approximate(H, epsilon, grid=settings.CASCADE_GRID):
    """FIR cascade F with sup |H - z^-D F| / |H| <= epsilon on the unit circle."""
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}", invariant="epsilon > 0")
    den = H.den
    if den.degree == 0:
        return FirCascade(0, RealPoly.exact(H.num.coeffs / den.coeffs[0]), (), epsilon, 0.0, 0)
    if epsilon >= 1.0 / (2 * den.degree):
        raise PreconditionError(
            f"epsilon {epsilon:g} must be below 1/(2 deg Q) = {1.0 / (2 * den.degree):g}", invariant="epsilon bound"
        )
    if den.degree % 2 or np.max(np.abs(den.coeffs[1::2]), initial=0.0) > settings.PALINDROME_TOL * den.norm():
        raise ValidationError("denominator is not an even polynomial", invariant="even denominator")

    c_poly = RealPoly(den.coeffs[::2])
    inner = _inner_roots(c_poly)
    scale = 2.0 ** H.num.degree
    kappa = float((np.prod([-q for q in inner]) / c_poly.leading).real)
    top = _top_level(inner, epsilon)
    drop_tol = epsilon / (4.0 * len(inner))

    for _ in range(settings.CASCADE_MAX_ATTEMPTS):
        factors, delay = _assemble(inner, top, drop_tol, kappa * scale)
        achieved = _relative_error(factors, delay, den, scale, grid)
        if achieved <= epsilon:
            break
        logger.warning("⚠️ cascade error %.3g above %.3g, raising top level to %d", achieved, epsilon, top + 1)
        top += 1
        drop_tol /= 2.0
    else:
        raise PreconditionError(f"cascade did not reach epsilon {epsilon:g}", invariant="achieved <= epsilon")

    logger.info("✅ cascade: %d factors, top level %d, delay %d, achieved %.3g",
                len(factors), max(level for level, _ in factors), delay, achieved)
    return FirCascade(0, RealPoly.exact(H.num.coeffs / scale), factors, epsilon, achieved, delay)


# ============================================================================
# EVALUATION
# ============================================================================

def _dilated(coeffs, factor):
    out = np.zeros((len(coeffs) - 1) * factor + 1)
    out[::factor] = coeffs
    return out


def flatten(F):
    """Expanded product z^-N P(z) prod F_k(z^(2^k))."""
    coeffs = np.asarray(F.P.coeffs, dtype=float)
    for level, poly in F.factors:
        coeffs = np.convolve(coeffs, _dilated(poly.coeffs, 2 ** level))
    return LaurentPoly(-F.shift_N, coeffs)


def evaluate_cascade(F, z):
    """Factored evaluation of the cascade at z."""
    z_arr = np.asarray(z, dtype=complex)
    value = F.P(z_arr) * z_arr ** (-F.shift_N)
    for level, poly in F.factors:
        value = value * poly(z_arr ** (2 ** level))
    return value


def qmf_defect(F, grid=settings.DEFECT_GRID):
    """sup |F(w)F(1/w) + F(-w)F(-1/w) - 1| on the unit circle."""
    w = np.exp(1j * TWO_PI * np.arange(grid) / grid)
    values = evaluate_cascade(F, np.concatenate([w, 1.0 / w, -w, -1.0 / w])).reshape(4, grid)
    return float(np.max(np.abs(values[0] * values[1] + values[2] * values[3] - 1.0)))


# ============================================================================
# FILTER BANK
# ============================================================================

def _bank_filters(F, length):
    h = flatten(F)
    low = np.zeros(length)
    np.add.at(low, (h.low + np.arange(h.support_length)) % length, h.coeffs)
    j = np.arange(length)
    high = np.where(j % 2, -1.0, 1.0) * low[(1 - j) % length]
    return low, high


def _check_length(length):
    if length < 4 or length % 2:
        raise ValidationError(f"signal length must be even and >= 4, got {length}", invariant="even length")


def analysis_bank(F, samples):
    """Low and high channels: circular correlation with sqrt2 h and sqrt2 g, then 2-fold decimation."""
    samples = np.asarray(samples, dtype=float)
    _check_length(len(samples))
    low, high = _bank_filters(F, len(samples))
    spectrum = np.fft.fft(samples)
    low_channel = np.sqrt(2.0) * np.fft.ifft(np.conj(np.fft.fft(low)) * spectrum).real
    high_channel = np.sqrt(2.0) * np.fft.ifft(np.conj(np.fft.fft(high)) * spectrum).real
    return low_channel[::2], high_channel[::2]


def synthesis_bank(F, low_channel, high_channel, length):
    """2-fold upsampling followed by circular convolution with sqrt2 h and sqrt2 g."""
    _check_length(length)
    low, high = _bank_filters(F, length)
    up_low, up_high = np.zeros(length), np.zeros(length)
    up_low[::2], up_high[::2] = low_channel, high_channel
    spectrum = np.fft.fft(up_low) * np.fft.fft(low) + np.fft.fft(up_high) * np.fft.fft(high)
    return np.sqrt(2.0) * np.fft.ifft(spectrum).real


def filterbank_roundtrip(F, x):
    """Max absolute reconstruction error of the periodic two-channel bank."""
    samples = x.samples if isinstance(x, Signal) else Signal(x).samples
    low_channel, high_channel = analysis_bank(F, samples)
    rebuilt = synthesis_bank(F, low_channel, high_channel, len(samples))
    return float(np.max(np.abs(rebuilt - samples)))
