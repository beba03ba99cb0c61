"""
Shared fixtures: reference filters and random preimage specs.
"""

import numpy as np
import pytest

from cascade import FirCascade, fir_approximate
from polyrat import RealPoly
from symdesign import MaxflatId, PreimageSpec, build_from_preimages, maxflat


def _mirror(half):
    return list(half) + list(half[-2::-1])


# ==============================================================================
# CASCADE OF E(3, 0) AT EPSILON 1e-8
# ==============================================================================
MAXFLAT3_P = _mirror([-0.0001011263580012439, 0.0029296875, 0.01818488314800746, 0.0537109375,
                    0.1156706046299813, 0.193359375, 0.2324912771600248])
MAXFLAT3_FACTORS = {
    1: _mirror([-0.00268082617584078, 0.6429247852752233, -4.433610674839401, 8.58673343148004]),
    2: _mirror([1.348299677989997e-7, 0.007308809891655256, 0.162081739736554, 0.6612186310836452]),
    3: _mirror([0.0001276629992294306, 0.03971627520745388, 0.920312123586633]),
    4: _mirror([1.925310635034675e-8, 0.001585818961857287, 0.996828323570073]),
    5: [2.492072168636633e-6, 0.999995015855663, 2.492072168636633e-6],
}


def _with_conjugates(values):
    out = []
    for v in values:
        out.append(complex(v))
        if complex(v).imag != 0:
            out.append(complex(v).conjugate())
    return out


def _with_negatives(values):
    out = []
    for v in values:
        out.extend([complex(v), -complex(v)])
    return out


# ==============================================================================
# ZEROS AND POLES OF TWO PREIMAGE DESIGNS (m = 1, sign +1)
# ==============================================================================
CIRCLE_PAIR_SPECS = {
    "fifths": (0.4, 0.8),
    "narrow": (0.21, 0.31),
}
REFERENCE_ZEROS = {
    "fifths": _with_conjugates([-1, -1, -0.74212 + 0.67026705j, -0.30901699 + 0.95105652j, 0.17142917,
                                0.65396257 + 0.75652691j, 0.80901699 + 0.58778525j, 5.8333128]),
    "narrow": _with_conjugates([-1, -1, -0.79015501 + 0.61290705j, -0.56208338 + 0.82708057j,
                                0.03560146 + 0.65573566j, 0.036837087, 0.082552825 + 1.5205228j, 27.146554]),
}
REFERENCE_POLES = {
    "fifths": _with_conjugates(_with_negatives([0.84955807 + 0.74802903j, 0.66304573 + 0.58380642j]))
    + _with_negatives([0.40197132j, 2.4877396j]),
    "narrow": _with_negatives([0.083442717j, 0.57528543j, 0.73702991j, 1.356797j, 1.7382676j, 11.984269j]),
}


def circle_spec(name):
    t1, t2 = CIRCLE_PAIR_SPECS[name]
    return PreimageSpec(m=1, sign_at_i=1, lambdas=(np.exp(1j * np.pi * t1), np.exp(1j * np.pi * t2)))


def random_spec(rng):
    """Valid spec with every lambda in the open right half plane."""
    lambdas = []
    for _ in range(int(rng.integers(1, 3))):
        kind = int(rng.integers(0, 3))
        if kind == 0:
            lambdas.append(complex(rng.uniform(1.5, 4.0)))
        elif kind == 1:
            lambdas.append(np.exp(1j * np.pi * rng.uniform(0.05, 0.45)))
        else:
            value = rng.uniform(1.5, 3.0) * np.exp(1j * rng.uniform(0.2, 1.2))
            lambdas.extend([value, value.conjugate()])
    return PreimageSpec(m=int(rng.integers(1, 3)), sign_at_i=int(rng.choice([-1, 1])), lambdas=tuple(lambdas))


def annulus_points(rng, count=64, inner=0.7, outer=1.4):
    return rng.uniform(inner, outer, count) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, count))


@pytest.fixture(scope="session")
def maxflat3():
    return maxflat(MaxflatId(3, 0))


@pytest.fixture(scope="session")
def maxflat3_cascade(maxflat3):
    return fir_approximate(maxflat3, 1e-8)


@pytest.fixture(scope="session")
def reference_cascade():
    factors = tuple((level, RealPoly.exact(coeffs)) for level, coeffs in MAXFLAT3_FACTORS.items())
    return FirCascade(0, RealPoly.exact(MAXFLAT3_P), factors, 1e-8, 0.0, 104)


@pytest.fixture(scope="session")
def fifths_filter():
    return build_from_preimages(circle_spec("fifths"))


@pytest.fixture(scope="session")
def narrow_filter():
    return build_from_preimages(circle_spec("narrow"))
