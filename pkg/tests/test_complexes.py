import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ramanujan_bigraphs.complexes import (complex_spectrum, containment, endoscopic_point,
                                          in_tempered_region, reference_curves, region_distance,
                                          split_generators, tempered_point)
from ramanujan_bigraphs.errors import BadParams, ConfigError

OMEGA = np.exp(2j * math.pi / 3)


@pytest.fixture(scope="module")
def c72():
    return complex_spectrum(7, 2)


def values(cs):
    return np.array([complex(a, b) for a, b in cs.eigenvalues])


def multiset_close(a, b, tol):
    return all(np.min(np.abs(b - z)) < tol for z in a) and all(np.min(np.abs(a - z)) < tol for z in b)


def test_split_colors():
    gs, colors = split_generators(7)
    assert [int((colors == c).sum()) for c in (1, 2)] == [57, 57]


def test_size_and_perron(c72):
    ev = values(c72)
    assert len(ev) == 216  # three colour classes of 72
    # 57 colour-1 generators reduce to 21 distinct elements mod 2: weighted entries
    assert not c72.injective and c72.perron == 57
    assert np.abs(ev).max() == pytest.approx(57)
    assert sum(c72.trivial) == 3


def test_normal_operator(c72):
    assert c72.normality_residual < 1e-10


def test_trace(c72):
    # A_1 moves every element to another colour, so no fixed points
    assert c72.trace == 0
    assert abs(values(c72).sum()) < 1e-8


def test_omega_and_conjugation_symmetry(c72):
    ev = values(c72)
    assert multiset_close(ev * OMEGA, ev, 1e-9)
    assert multiset_close(np.conj(ev), ev, 1e-9)


def test_containment(c72):
    assert all(containment(c72))


def test_root_test_agrees_with_grid(c72):
    for z, d, triv in zip(values(c72), c72.distances, c72.trivial):
        if triv:
            continue
        if in_tempered_region(z, 7, tol=1e-6):
            assert d["tempered"] <= d["resolution"] + 1e-6
        else:
            assert d["endoscopic"] <= d["resolution"] + 1e-6


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.sampled_from([2, 7, 13]))
def test_tempered_points_pass_root_test(a, b, p):
    assert in_tempered_region(tempered_point(a, b, p), p, tol=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi), st.sampled_from([7, 13]))
def test_endoscopic_points_outside(t, p):
    # |z| = p^1.5 + ... exceeds the tempered bound 3p
    z = endoscopic_point(t, p)
    assert not in_tempered_region(z, p)


@pytest.mark.parametrize("a,b", [(0.3, 1.1), (2.0, 5.0), (4.4, 0.2)])
def test_region_distance_on_torus(a, b):
    dt, de, res = region_distance(tempered_point(a, b, 7), 7)
    assert dt <= res and de > 1


def test_region_distance_special_points():
    assert region_distance(21, 7)[0] <= region_distance(21, 7)[2]
    dt, de, res = region_distance(7**1.5 + 7 + math.sqrt(7), 7)
    assert de <= res
    # 1 + w + conj(w) = 0 for w a primitive cube root of unity
    assert region_distance(0, 7)[0] <= region_distance(0, 7)[2]
    assert in_tempered_region(0, 7)


def test_region_distance_on_curve():
    dt, de, res = region_distance(endoscopic_point(1.3, 7), 7)
    assert de <= res and dt > 1


def test_reference_curves_shape():
    ref = reference_curves(7, samples=100)
    assert len(ref["tempered_boundary"]) == len(ref["endoscopic"]) == 100
    assert max(math.hypot(*z) for z in ref["tempered_boundary"]) == pytest.approx(21)


@pytest.mark.parametrize("p", [3, 5])
def test_inert_or_ramified_rejected(p):
    with pytest.raises(ConfigError):
        complex_spectrum(p, 2)


def test_other_lattices_rejected():
    with pytest.raises(BadParams):
        complex_spectrum(7, 2, kind="gauss")


@pytest.mark.parametrize("w", [21.001, -10.6, 22j, 7 * (3 + 1e-4) * OMEGA])
def test_points_beyond_deltoid_rejected(w):
    assert not in_tempered_region(w, 7)
