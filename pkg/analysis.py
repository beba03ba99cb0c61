"""
Filter Verification
===================
Checks every identity a candidate QMF filter is expected to satisfy.

- QMF residual on the unit circle
- 0-SYM symmetry identities on a mixed grid
- vanishing moments from the zero orders at -1 and +1
- Cohen's condition on the finite set of unit-circle zeros
- positivity of the frequency response, pole/zero geometry
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

import settings
from polyrat import ComplexRootSet, multiplicity_at, poly_roots, poly_sqrt
from qmf_errors import RealizabilityError, ValidationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
SQRT2 = float(np.sqrt(2.0))


# ============================================================================
# REPORT TYPES
# ============================================================================

@dataclass(frozen=True)
class CohenResult:
    passed: bool
    witness: tuple = ()
    max_cycle: int = settings.COHEN_MAX_CYCLE

    def to_dict(self):
        return {"passed": self.passed, "witness": list(self.witness), "max_cycle": self.max_cycle}


@dataclass(frozen=True)
class FilterReport:
    qmf_residual: float
    sym_residual: float
    wavelet_moments: int
    scaling_moments: int
    cohen: CohenResult
    min_response: float
    poles_imaginary: bool
    stopband_zeros: tuple = field(default_factory=tuple)

    @property
    def is_qmf(self):
        return self.qmf_residual <= settings.QMF_TOL

    @property
    def is_zero_symmetric(self):
        return self.sym_residual <= settings.SYM_TOL

    @property
    def passed(self):
        return self.is_qmf and self.is_zero_symmetric and self.cohen.passed

    def to_dict(self):
        report = asdict(self)
        report["cohen"] = self.cohen.to_dict()
        report["stopband_zeros"] = list(self.stopband_zeros)
        report["is_qmf"] = self.is_qmf
        report["is_zero_symmetric"] = self.is_zero_symmetric
        report["passed"] = self.passed
        return report


# ============================================================================
# IDENTITY RESIDUALS
# ============================================================================

def _circle(grid):
    return np.exp(1j * TWO_PI * np.arange(grid) / grid)


def qmf_residual(H, grid=settings.ANALYSIS_GRID):
    """sup |H(z)H(1/z) + H(-z)H(-1/z) - 1| over the grid points e^(2 pi i j / grid)."""
    if grid < 16:
        raise ValidationError(f"grid must have at least 16 points, got {grid}", invariant="grid >= 16")
    z = _circle(grid)
    points = np.concatenate([z, 1.0 / z, -z, -1.0 / z])
    num_values, den_values, bound = H.fraction(points)
    if np.any(np.abs(den_values) <= 1e-12 * bound):
        raise RealizabilityError("filter has a pole on the evaluation grid", invariant="no circle poles")
    values = (num_values / den_values).reshape(4, grid)
    residual = values[0] * values[1] + values[2] * values[3] - 1.0
    return float(np.max(np.abs(residual)))


def _mixed_grid(grid):
    on_circle = grid // 2
    off_circle = (grid - on_circle) // 2
    circle = np.exp(1j * TWO_PI * (np.arange(on_circle) + 0.5) / on_circle)
    ring = np.exp(1j * TWO_PI * (np.arange(off_circle) + 0.3) / off_circle)
    return np.concatenate([circle, 0.8 * ring, 1.25 * ring])


def symmetry_deviations(H, grid=settings.SYM_GRID):
    """Scaled deviations of the two 0-SYM identities, keyed by identity."""
    z = _mixed_grid(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        h_z, h_neg, h_inv = H(z), H(-z), H(1.0 / z)
        square_sum = np.abs(h_z ** 2 + h_neg ** 2 - 1.0) / np.maximum(1.0, np.abs(h_z) ** 2 + np.abs(h_neg) ** 2)
        reciprocal = np.abs(h_z - h_inv) / np.maximum(1.0, np.maximum(np.abs(h_z), np.abs(h_inv)))
    return {
        "H(z)^2 + H(-z)^2 = 1": float(np.max(square_sum)),
        "H(z) = H(1/z)": float(np.max(reciprocal)),
    }


def check_sym(H):
    """Largest 0-SYM deviation; the filter is 0-SYM iff this is <= SYM_TOL."""
    return max(symmetry_deviations(H).values())


def vanishing_moments(H):
    """(M, N): order of -1 as a zero of H and of +1 as a zero of 1 - H."""
    if not H.is_normalized():
        raise ValidationError("vanishing moments need H(1) = 1", invariant="H(1) = 1")
    if H.is_factored:
        # num = A (A + s sqrt2 A~) and den - num = A~^2
        a_tilde = H.a_poly.reflect()
        second = H.a_poly + (H.a_sign * SQRT2) * a_tilde
        wavelet = multiplicity_at(H.a_poly, -1.0) + multiplicity_at(second, -1.0)
        return wavelet, 2 * multiplicity_at(a_tilde, 1.0)
    return multiplicity_at(H.num, -1.0), multiplicity_at(H.one_minus(), 1.0)


# ============================================================================
# COHEN'S CONDITION
# ============================================================================

def _circle_zero_angles(H):
    return [float(np.angle(value)) % TWO_PI for value, _ in H.zeros
            if abs(abs(value) - 1.0) <= settings.CIRCLE_TOL]


def _angle_distance(a, b):
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def cohen_check(H, max_cycle=settings.COHEN_MAX_CYCLE):
    """Look for a nontrivial doubling cycle on which the shifted response vanishes.

    W holds the angles w with m0(w + pi) = 0, m0(xi) = H(e^(-i xi)). Each w
    has at most one edge, w -> 2w mod 2pi, when 2w matches a member of W.
    The witness starts at the smallest angle on the first cycle found.
    """
    if max_cycle < 2:
        raise ValidationError(f"max_cycle must be >= 2, got {max_cycle}", invariant="max_cycle >= 2")
    tol = settings.ANGLE_MATCH_TOL
    omegas = []
    for theta in _circle_zero_angles(H):
        omega = (-theta - np.pi) % TWO_PI
        if _angle_distance(omega, 0.0) <= tol:
            continue
        if all(_angle_distance(omega, known) > tol for known in omegas):
            omegas.append(omega)
    omegas.sort()

    def locate(angle):
        for index, known in enumerate(omegas):
            if _angle_distance(angle, known) <= tol:
                return index
        return None

    successor = {index: locate((2.0 * omega) % TWO_PI) for index, omega in enumerate(omegas)}
    for start in range(len(omegas)):
        path, node = [start], start
        for _ in range(max_cycle):
            node = successor[node]
            if node is None or (node in path and node != start):
                break
            if node == start:
                witness = tuple(omegas[k] for k in path)
                logger.debug("Cohen cycle of length %d found", len(witness))
                return CohenResult(False, witness, max_cycle)
            path.append(node)
    return CohenResult(True, (), max_cycle)


# ============================================================================
# RESPONSE AND GEOMETRY
# ============================================================================

def positivity_check(H, grid=settings.ANALYSIS_GRID):
    """Minimum of the frequency response over (-pi, pi), endpoints excluded."""
    xi = -np.pi + TWO_PI * np.arange(1, grid) / grid
    return float(np.min(np.real(H.response(np.exp(-1j * xi)))))


def geometry_report(H):
    poles_imaginary = all(abs(p.real) <= settings.IMAGINARY_POLE_TOL * (1.0 + abs(p)) for p, _ in H.poles)
    stopband = []
    for theta in (float(np.angle(v)) for v, _ in H.zeros if abs(abs(v) - 1.0) <= settings.CIRCLE_TOL):
        if np.pi / 2 < theta <= np.pi and all(abs(theta - t) > settings.ANGLE_MATCH_TOL for t in stopband):
            stopband.append(theta)
    return {"poles_imaginary": poles_imaginary, "stopband_zeros": tuple(sorted(stopband))}


def preimages(H, value):
    """Distinct points where H takes the value +1 or -1 (each listed once).

    1 - H and 1 + H have perfect-square numerators for a 0-SYM filter.
    """
    if value == 1:
        numerator = H.one_minus()
    elif value == -1:
        numerator = H.one_plus()
    else:
        raise ValidationError(f"preimages are available for +1 and -1 only, got {value}", invariant="value")
    if numerator.coeffs[0] < 0:
        numerator = -numerator
    root = poly_sqrt(numerator)
    return poly_roots(root) if root.degree else ComplexRootSet()


def verify_filter(H, grid=settings.ANALYSIS_GRID, max_cycle=settings.COHEN_MAX_CYCLE):
    """Run every check and collect a FilterReport."""
    wavelet_moments, scaling_moments = vanishing_moments(H)
    geometry = geometry_report(H)
    report = FilterReport(
        qmf_residual=qmf_residual(H, grid),
        sym_residual=check_sym(H),
        wavelet_moments=wavelet_moments,
        scaling_moments=scaling_moments,
        cohen=cohen_check(H, max_cycle),
        min_response=positivity_check(H, grid),
        poles_imaginary=geometry["poles_imaginary"],
        stopband_zeros=geometry["stopband_zeros"],
    )
    logger.debug("verify %s: qmf=%.3g sym=%.3g cohen=%s", H.provenance, report.qmf_residual,
                 report.sym_residual, report.cohen.passed)
    return report
