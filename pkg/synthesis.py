"""
Response and Wavelet Sampling
=============================
Data for plots and numeric checks:

- frequency responses H(e^(-i xi)) on (-pi, pi]
- scaling function and wavelet samples from the two-scale relation, run as a
  cascade iteration on a dyadic grid
- Riemann moment sums of sampled functions

The scaling function is centered to be even about 0, the wavelet even about 1/2.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import signal

import settings
from cascade import flatten
from qmf_errors import RealizabilityError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SampledGrid:
    """Values at x0 + i dx."""

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size == 0:
            raise ValidationError("sampled grid must be nonempty", invariant="nonempty grid")
        if not self.dx > 0:
            raise ValidationError(f"grid step must be positive, got {self.dx}", invariant="dx > 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(len(self.values))

    def __len__(self):
        return len(self.values)

    def to_frame(self):
        return pd.DataFrame({"x": self.x, "value": self.values})

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT, lineterminator="\n")

    @classmethod
    def from_csv(cls, path):
        frame = pd.read_csv(path)
        if list(frame.columns) != ["x", "value"] or frame.empty:
            raise ValidationError(f"{path} is not an x,value grid", invariant="grid csv")
        x = frame["x"].to_numpy(dtype=float)
        dx = float(x[1] - x[0]) if len(x) > 1 else 1.0
        return cls(float(x[0]), dx, frame["value"].to_numpy(dtype=float))


# ============================================================================
# FREQUENCY RESPONSE
# ============================================================================

def freq_response(H, points=settings.FREQ_POINTS):
    """H(e^(-i xi)) at xi = -pi + 2 pi i / points; the imaginary part must vanish."""
    if points < 2:
        raise ValidationError(f"need at least 2 points, got {points}", invariant="points >= 2")
    xi = -np.pi + 2.0 * np.pi * np.arange(points) / points
    z = np.exp(-1j * xi)
    num_values, den_values, bound = H.fraction(z)
    if np.any(np.abs(den_values) <= 1e-12 * bound):
        raise RealizabilityError("filter has a pole on the sampled circle", invariant="no circle poles")
    values = num_values / den_values
    imaginary = float(np.max(np.abs(values.imag)))
    if imaginary > settings.IMAG_RESPONSE_TOL:
        raise ValidationError(f"response is not real (imaginary part {imaginary:.3g})", invariant="real response")
    if imaginary > 1e-12:
        logger.warning("⚠️ discarding imaginary residue %.3g of the response", imaginary)
    return SampledGrid(-np.pi, 2.0 * np.pi / points, values.real)


# ============================================================================
# CASCADE ITERATION
# ============================================================================

def _normalized_taps(F):
    taps = flatten(F)
    total = float(np.sum(taps.coeffs))
    if abs(total - 1.0) > max(5.0 * F.epsilon, 1e-12):
        raise ValidationError(f"cascade coefficients sum to {total:.12g}, not 1", invariant="H(1) = 1")
    if (taps.high - taps.low) % 2:
        raise ValidationError("cascade support has no integer center", invariant="odd support")
    return taps.coeffs


def _iterate(taps, levels):
    """Dyadic cascade from the box: a_J = a_(J-1) * (2h upsampled by 2^(J-1))."""
    samples = np.ones(1)
    for level in range(levels):
        step = 2 ** level
        upsampled = np.zeros((len(taps) - 1) * step + 1)
        upsampled[::step] = 2.0 * taps
        samples = signal.fftconvolve(samples, upsampled)
        logger.debug("cascade level %d: %d samples", level + 1, len(samples))
    return samples


def scaling_samples(F, levels=settings.CASCADE_LEVELS):
    """phi on the grid 2^-levels, even about 0."""
    if levels < 1:
        raise ValidationError(f"levels must be >= 1, got {levels}", invariant="levels >= 1")
    taps = _normalized_taps(F)
    half_width = (len(taps) - 1) // 2
    scale = 2 ** levels
    samples = _iterate(taps, levels)
    return SampledGrid(-half_width * (scale - 1) / scale, 1.0 / scale, samples)


def wavelet_samples(F, levels=settings.CASCADE_LEVELS):
    """psi(x) = 2 sum g_k phi(2x - k), g_k = (-1)^k h_(1-k); even about 1/2."""
    if levels < 1:
        raise ValidationError(f"levels must be >= 1, got {levels}", invariant="levels >= 1")
    taps = _normalized_taps(F)
    half_width = (len(taps) - 1) // 2
    phi = _iterate(taps, levels - 1)

    # h is centered: taps[j] = h_(j - half_width); g runs over k = 1 - half_width .. 1 + half_width
    ks = np.arange(1 - half_width, 2 + half_width)
    g = np.where(ks % 2, -1.0, 1.0) * taps[half_width - (1 - ks)]
    step = 2 ** (levels - 1)
    upsampled = np.zeros((len(g) - 1) * step + 1)
    upsampled[::step] = 2.0 * g
    samples = signal.fftconvolve(phi, upsampled)

    scale = 2 ** levels
    x0 = (step - half_width * (scale - 1)) / scale
    return SampledGrid(x0, 1.0 / scale, samples)


def moment_sums(grid, k):
    """Riemann sum of x^k v(x) dx."""
    if k < 0:
        raise ValidationError(f"moment order must be >= 0, got {k}", invariant="k >= 0")
    return float(np.sum(grid.x ** k * grid.values) * grid.dx)
