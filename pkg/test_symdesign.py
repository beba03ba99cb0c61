import numpy as np
import pytest

from analysis import check_sym, preimages, qmf_residual, vanishing_moments
from conftest import (MAXFLAT3_P, REFERENCE_POLES, REFERENCE_ZEROS, annulus_points, circle_spec,
                      random_spec)
from polyrat import RationalFilter, RealPoly
from qmf_errors import InvalidAllPassError, PoleError, SymmetryViolationError, ValidationError
from symdesign import (AllPass, MaxflatId, PreimageSpec, allpass_from_rational, beta, build_from_allpass,
                       build_from_preimages, design_stopband, doubling_orbit, eta, extract_allpass, gamma,
                       highpass, maxflat, maxflat_family, maxflat_poles, maxflat_response, maxflat_zeros, nu,
                       recover_preimage_spec, response_from_allpass, transition_slope)

MAXFLAT_IDS = [(n, delta) for n in range(1, 7) for delta in (0, 1)]


def _close(lhs, rhs, tol):
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    return np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))) <= tol


# ==============================================================================
# MOBIUS MAPS
# ==============================================================================

def test_beta_is_an_involution():
    z = annulus_points(np.random.default_rng(1))
    assert _close(beta(beta(z)), z, 1e-12)


def test_beta_maps_circle_to_imaginary_axis():
    xi = np.linspace(-3.0, 3.0, 31)
    assert np.allclose(beta(np.exp(1j * xi)), -1j * np.tan(xi / 2.0), atol=1e-12)


def test_maps_name_their_pole():
    with pytest.raises(PoleError) as exc:
        beta(-1.0)
    assert exc.value.map_name == "beta"
    with pytest.raises(PoleError):
        eta(0.0)
    with pytest.raises(PoleError):
        gamma(np.array([1.0, 0.0]))


def test_beta_of_shifted_circle_point_for_real_lambda():
    lam, xi = 2.5, np.linspace(-3.0, 3.0, 13)
    lhs = beta(np.exp(1j * xi) / lam)
    rhs = (gamma(lam) - 1j * np.sin(xi)) / (eta(lam) + np.cos(xi))
    assert _close(lhs, rhs, 1e-12)


def test_nu_takes_one_over_sqrt2_at_plus_minus_one():
    assert abs(nu(1.0) - 1 / np.sqrt(2.0)) < 1e-15
    assert abs(nu(-1.0) + 1 / np.sqrt(2.0)) < 1e-15


def _disk_points(rng, count=64, inner=0.2, outer=0.8):
    return rng.uniform(inner, outer, count) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, count))


def test_nu_reciprocal_squares_at_a_real_point():
    assert abs(nu(0.37) ** 2 + nu(1 / 0.37) ** 2 - 1.0) <= 1e-14


@pytest.mark.parametrize("case", range(200))
def test_nu_reciprocal_squares_sum_to_one(case):
    z = _disk_points(np.random.default_rng(100 + case), inner=0.3, outer=0.85)
    assert _close(nu(z) ** 2 + nu(1.0 / z) ** 2, np.ones_like(z), 1e-10)


def test_inverse_eta_conjugates_squaring_at_a_point():
    z = 0.3 + 0.4j
    assert abs(beta(1.0 / eta(beta(z))) - z * z) <= 1e-14


@pytest.mark.parametrize("case", range(200))
def test_inverse_eta_conjugates_squaring(case):
    z = _disk_points(np.random.default_rng(300 + case))
    assert _close(beta(1.0 / eta(beta(z))), z * z, 1e-12)


@pytest.mark.parametrize("case", range(200))
def test_beta_of_eta_is_minus_beta_squared(case):
    z = _disk_points(np.random.default_rng(400 + case))
    assert _close(beta(eta(z)), -beta(z) ** 2, 1e-12)


@pytest.mark.parametrize("xi", np.linspace(-np.pi / 2 + 0.1, np.pi / 2 - 0.1, 9))
def test_doubling_orbit_converges_to_one(xi):
    assert abs(doubling_orbit(np.exp(1j * xi), 60)[-1] - 1.0) <= 1e-9


# ==============================================================================
# MAXIMALLY FLAT FAMILY
# ==============================================================================

def test_maxflat_numerator_matches_reference_prefactor(maxflat3):
    assert np.max(np.abs(maxflat3.num.coeffs / 4096.0 - np.array(MAXFLAT3_P))) <= 1e-12


def test_maxflat_order_and_sign():
    H = maxflat(MaxflatId(1, 1))
    assert H.order == 4
    assert H.sign_at_i == -1
    with pytest.raises(ValidationError):
        MaxflatId(0, 0)
    with pytest.raises(ValidationError):
        MaxflatId(2, 2)


@pytest.mark.parametrize("n,delta", [(n, d) for n in (1, 2, 3, 5) for d in (0, 1)])
def test_maxflat_roots_match_closed_forms(n, delta):
    H = maxflat((n, delta))
    assert H.zeros.matches(maxflat_zeros((n, delta)).values(), 1e-9)
    assert H.poles.matches(maxflat_poles((n, delta)).values(), 1e-9)
    assert all(abs(p.real) <= 1e-9 for p, _ in H.poles)


@pytest.mark.parametrize("n,delta", MAXFLAT_IDS)
def test_maxflat_closed_form_response(n, delta):
    H = maxflat((n, delta))
    xi = np.linspace(-2.8, 2.8, 57)
    assert np.allclose(H(np.exp(1j * xi)).real, maxflat_response((n, delta), xi), atol=1e-10)
    assert np.sign(H(1j).real) == (-1) ** delta


@pytest.mark.parametrize("n,delta", MAXFLAT_IDS)
def test_maxflat_is_zero_symmetric_qmf(n, delta):
    H = maxflat((n, delta))
    assert qmf_residual(H) <= 1e-10
    assert check_sym(H) <= 1e-9


@pytest.mark.parametrize("case", range(200))
def test_maxflat_order_doubling_recurrence(case):
    rng = np.random.default_rng(500 + case)
    s, delta = int(rng.integers(1, 4)), int(rng.integers(0, 2))
    z = annulus_points(rng)
    big = maxflat((2 * s, delta))
    small = maxflat((s, (delta + s) % 2))
    assert _close(big(z), small(1.0 / eta(z)), 1e-9)


@pytest.mark.parametrize("case", range(200))
def test_maxflat_reflected_bilinear_identity(case):
    rng = np.random.default_rng(700 + case)
    n, delta = int(rng.integers(1, 5)), int(rng.integers(0, 2))
    z = annulus_points(rng, inner=0.8, outer=1.2)
    H = maxflat((n, delta))
    s = (-1) ** (delta + n)
    lhs = beta(-H(-beta(z)))
    assert _close(lhs, (1.0 + s * np.sqrt(2.0) * z ** (2 * n)) ** 2, 1e-8)


def test_maxflat_family_columns():
    frame = maxflat_family([2, 3, 8], delta=0, points=64)
    assert list(frame.columns) == ["x", "n=2", "n=3", "n=8"]
    assert len(frame) == 64
    assert frame["x"].iloc[0] == -np.pi


def test_stopband_response_decreases_with_order():
    xi = np.linspace(np.pi / 2 + 0.1, np.pi - 0.01, 50)
    responses = [maxflat_response((n, 0), xi) for n in (2, 3, 8, 20)]
    for lower, higher in zip(responses, responses[1:]):
        assert np.all(higher <= lower + 1e-15)


# ==============================================================================
# ALL-PASS PARAMETERIZATION
# ==============================================================================

def test_allpass_rejects_bad_input():
    with pytest.raises(InvalidAllPassError):
        AllPass(sign=2, n_shift=1)
    with pytest.raises(InvalidAllPassError):
        build_from_allpass(AllPass(sign=1, n_shift=0))
    with pytest.raises(InvalidAllPassError):
        build_from_allpass(AllPass(sign=1, n_shift=1, b_poly=RealPoly([1.0, -2.5, 1.0])))


def test_allpass_identity_and_reconstruction():
    a = AllPass(sign=-1, n_shift=2, b_poly=RealPoly([1.0, 0.3]))
    z = annulus_points(np.random.default_rng(3))
    assert _close(a(z) * a(1.0 / z), np.ones_like(z), 1e-12)
    assert _close(a(z), a(-z), 1e-12)
    assert abs(a(1j) - a.sign) < 1e-12

    H = build_from_allpass(a)
    assert qmf_residual(H) <= 1e-10
    assert check_sym(H) <= 1e-9
    assert _close(1.0 / beta(H(z)), (1.0 + np.sqrt(2.0) * a(beta(z))) ** 2, 1e-7)

    recovered = extract_allpass(H)
    assert (recovered.sign, recovered.n_shift) == (a.sign, a.n_shift)
    assert recovered.b_poly.allclose(a.b_poly, 1e-8)


def test_allpass_from_rational_reads_back_parameters():
    scale = 1 * (-1) ** (2 + 1)
    num = [scale * 1.0, 0.0, scale * 0.3]
    den = [0.0, 0.0, 0.0, 0.0, 0.3, 0.0, 1.0]
    a = allpass_from_rational(num, den)
    assert (a.sign, a.n_shift) == (1, 2)
    assert a.b_poly.allclose(RealPoly([1.0, 0.3]), 1e-12)


def test_allpass_from_rational_rejects_non_allpass():
    with pytest.raises(InvalidAllPassError):
        allpass_from_rational([1.0], [0.0, 0.0, 2.0])
    with pytest.raises(InvalidAllPassError):
        allpass_from_rational([1.0], [0.0, 1.0])


def test_response_from_allpass_matches_filter():
    a = AllPass(sign=1, n_shift=1, b_poly=RealPoly([1.0, -0.4]))
    H = build_from_allpass(a)
    xi = np.linspace(-2.8, 2.8, 41)
    assert np.allclose(response_from_allpass(a, xi), H(np.exp(1j * xi)).real, atol=1e-10)


def _random_allpass(rng):
    b = np.ones(1)
    for root in rng.uniform(0.1, 0.8, int(rng.integers(0, 3))) * rng.choice([-1.0, 1.0]):
        b = np.convolve(b, [1.0, root])
    b_poly = RealPoly(b)
    return AllPass(sign=int(rng.choice([-1, 1])), n_shift=int(rng.integers(1, 3)), b_poly=b_poly)


@pytest.mark.parametrize("sign,delta", [(1, 0), (-1, 1)])
def test_monomial_allpass_gives_first_maxflat(sign, delta):
    a = AllPass(sign=sign, n_shift=1)
    assert abs(a(0.5) - (-sign) * 0.5 ** -2) <= 1e-12
    H, E = build_from_allpass(a), maxflat((1, delta))
    assert H.num.allclose(E.num, 1e-12)
    assert H.den.allclose(E.den, 1e-12)


@pytest.mark.parametrize("n,delta", MAXFLAT_IDS)
def test_monomial_allpass_gives_maxflat(n, delta):
    H, E = build_from_allpass(AllPass(sign=(-1) ** delta, n_shift=n)), maxflat((n, delta))
    assert H.num.allclose(E.num, 1e-12)
    assert H.den.allclose(E.den, 1e-12)


@pytest.mark.parametrize("case", range(50))
def test_passband_is_where_allpass_leaves_the_gap(case):
    rng = np.random.default_rng(6000 + case)
    a = _random_allpass(rng)
    H = build_from_allpass(a)
    xi = np.linspace(-3.0, 3.0, 600)
    values = np.real(a(-1j * np.tan(xi / 2.0)))
    response = H(np.exp(1j * xi)).real
    inside = (values > 1e-6) | (values < -np.sqrt(2.0) - 1e-6)
    gap = (values < -1e-6) & (values > -np.sqrt(2.0) + 1e-6)
    assert np.all((response[inside] > 0.0) & (response[inside] <= 1.0))
    assert np.all(response[gap] < 0.0)


def test_extract_allpass_rejects_asymmetric_filter():
    haar = RationalFilter([0.5, 0.5], [1.0])
    with pytest.raises(SymmetryViolationError) as exc:
        extract_allpass(haar)
    assert exc.value.identity == "H(z)^2 + H(-z)^2 = 1"


# ==============================================================================
# PREIMAGE DESIGNS
# ==============================================================================

@pytest.mark.parametrize("name", ["fifths", "narrow"])
def test_reference_zeros_and_poles(name):
    H = build_from_preimages(circle_spec(name))
    zero_tol = 1e-5 if name == "fifths" else 1e-6
    assert H.zeros.matches(REFERENCE_ZEROS[name], zero_tol)
    assert H.poles.matches(REFERENCE_POLES[name], 1e-6)


@pytest.mark.parametrize("bad", [
    (-1.0,), (1.0,), (1j,), (0.0,),
    (2.0, -2.0),
    (2.0, 0.5),
    (2.0 + 1.0j,),
])
def test_invalid_preimage_sets(bad):
    with pytest.raises(ValidationError):
        PreimageSpec(m=1, sign_at_i=1, lambdas=bad)


def test_spec_canonicalizes_lambdas():
    spec = PreimageSpec(m=1, sign_at_i=1, lambdas=(0.5, np.exp(-0.3j)))
    assert abs(spec.lambdas[0] - np.exp(0.3j)) < 1e-12
    assert abs(spec.lambdas[1] - 2.0) < 1e-12


@pytest.mark.parametrize("n,delta", MAXFLAT_IDS)
def test_empty_preimage_set_gives_maxflat(n, delta):
    H = build_from_preimages(PreimageSpec(m=n, sign_at_i=(-1) ** delta))
    E = maxflat((n, delta))
    assert H.num.allclose(E.num, 1e-12)
    assert H.den.allclose(E.den, 1e-12)


def test_stopband_without_angles_gives_maxflat():
    H, E = design_stopband(2, 1), maxflat((2, 0))
    assert H.num.allclose(E.num, 1e-12)
    assert H.den.allclose(E.den, 1e-12)


@pytest.mark.parametrize("case", range(50))
def test_distinct_specs_give_distinct_filters(case):
    first = random_spec(np.random.default_rng(4000 + case))
    second = random_spec(np.random.default_rng(5000 + case))
    z = np.exp(2j * np.pi * np.arange(1024) / 1024)
    gap = np.max(np.abs(build_from_preimages(first)(z) - build_from_preimages(second)(z)))
    assert first.same_as(second) or gap > 1e-6
    reordered = PreimageSpec(first.m, first.sign_at_i, tuple(reversed(first.lambdas)))
    assert np.max(np.abs(build_from_preimages(reordered)(z) - build_from_preimages(first)(z))) <= 1e-12


@pytest.mark.parametrize("case", range(100))
def test_poles_avoid_circle_and_real_axis(case):
    H = build_from_preimages(random_spec(np.random.default_rng(7000 + case)))
    for pole, _ in H.poles:
        assert abs(abs(pole) - 1.0) >= 1e-6
        assert abs(pole.imag) >= 1e-6


@pytest.mark.parametrize("case", range(100))
def test_zero_orders_and_allpass_pole_agree(case):
    spec = random_spec(np.random.default_rng(8000 + case))
    H = build_from_preimages(spec)
    assert vanishing_moments(H) == (2 * spec.m, 4 * spec.m)
    assert vanishing_moments(RationalFilter(H.num, H.den)) == (2 * spec.m, 4 * spec.m)
    assert extract_allpass(H).n_shift == spec.m


@pytest.mark.parametrize("case", range(200))
def test_identity_suite_on_random_designs(case):
    rng = np.random.default_rng(case)
    spec = random_spec(rng)
    H = build_from_preimages(spec)
    z = annulus_points(rng)
    assert qmf_residual(H, grid=256) <= 1e-10
    assert check_sym(H) <= 1e-10
    assert abs(H(1.0) - 1.0) <= 1e-12
    assert np.sign(H(1j).real) == spec.sign_at_i
    assert _close(H(z), H(1.0 / z), 1e-9)


@pytest.mark.parametrize("case", range(50))
def test_right_half_plane_geometry(case):
    H = build_from_preimages(random_spec(np.random.default_rng(1000 + case)))
    assert all(abs(p.real) <= 1e-8 * (1.0 + abs(p)) for p, _ in H.poles)
    assert all(value.real < 1e-9 for value, _ in preimages(H, -1))


@pytest.mark.parametrize("case", range(20))
def test_transition_slope_matches_finite_difference(case):
    spec = random_spec(np.random.default_rng(2000 + case))
    H = build_from_preimages(spec)
    h = 1e-5
    upper, lower = H(np.exp(1j * (np.pi / 2 + h))).real, H(np.exp(1j * (np.pi / 2 - h))).real
    slope = (upper - lower) / (2 * h)
    expected = transition_slope(spec)
    assert abs(slope - expected) <= 1e-6 * abs(expected)


@pytest.mark.parametrize("case", range(10))
def test_recover_preimage_spec_roundtrip(case):
    spec = random_spec(np.random.default_rng(3000 + case))
    assert recover_preimage_spec(build_from_preimages(spec)).same_as(spec, tol=1e-7)


def test_recover_reference_spec(narrow_filter):
    assert recover_preimage_spec(narrow_filter).same_as(circle_spec("narrow"), tol=1e-7)


def test_stopband_zeros_land_on_angles():
    thetas = (0.6 * np.pi, 0.8 * np.pi)
    H = design_stopband(1, 1, thetas=thetas)
    expected = [np.exp(1j * t) for t in thetas] + [np.exp(-1j * t) for t in thetas]
    assert H.zeros.contains(expected, 1e-9)
    assert H.zeros.multiplicity_near(-1.0) == 2


def test_stopband_rejects_bad_angles_and_extras():
    with pytest.raises(ValidationError):
        design_stopband(1, 1, thetas=(0.3 * np.pi,))
    with pytest.raises(ValidationError):
        design_stopband(1, 1, extra=(-2.0,))
    with pytest.raises(ValidationError):
        design_stopband(1, 1, extra=(np.exp(0.2j),))


def test_highpass_mirror(maxflat3):
    G = highpass(maxflat3)
    z = annulus_points(np.random.default_rng(5))
    assert _close(G(z), -z * maxflat3(-1.0 / z), 1e-9)


@pytest.mark.parametrize("case", range(20))
def test_highpass_is_one_at_nyquist_and_qmf(case):
    H = build_from_preimages(random_spec(np.random.default_rng(9000 + case)))
    G = highpass(H)
    assert abs(G(-1.0) - 1.0) <= 1e-12
    assert qmf_residual(G) <= 1e-10
