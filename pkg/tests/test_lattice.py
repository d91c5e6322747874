import itertools

import numpy as np
import pytest

from ramanujan_bigraphs.errors import DegenerateColor, InvalidPrime
from ramanujan_bigraphs.lattice import (ExactGroup, check_bicayley_axioms, closed_form_p2,
                                        generator_system, lattice_spec, level, split_color)
from ramanujan_bigraphs.rings import qmat_identity, qmat_mul, qmat_star, to_array, QuadInt, EISENSTEIN


@pytest.fixture(scope="module")
def eis2():
    return generator_system("eisenstein", 2)


def keyset(mats):
    return {np.asarray(m, dtype=np.int64).tobytes() for m in mats}


@pytest.mark.parametrize("kind, p, count, classes", [
    ("eisenstein", 2, 18, 9),
    ("eisenstein", 5, 630, 126),
    ("mumford", 3, 84, 28),
    ("gauss", 3, 84, 28),
])
def test_generator_counts(kind, p, count, classes):
    gs = generator_system(kind, p)
    assert len(gs) == count
    assert len(gs.classes) == classes
    assert {len(c) for c in gs.classes} == {p}


def test_p2_matches_closed_form(eis2):
    assert keyset(eis2.scaled) == keyset(closed_form_p2())


@pytest.mark.parametrize("kind, p", [("eisenstein", 2), ("eisenstein", 5), ("mumford", 3), ("gauss", 3)])
def test_unitarity_and_non_scalar(kind, p):
    gs = generator_system(kind, p)
    spec = gs.spec
    phi = spec.phi
    target = phi * p * p
    for t in gs.scaled:
        lhs = qmat_mul(qmat_mul(qmat_star(t, spec.ring), phi, spec.ring), t, spec.ring)
        assert np.array_equal(lhs, target)
        off_diag = t[~np.eye(3, dtype=bool)]
        assert off_diag.any() or len({tuple(t[i, i]) for i in range(3)}) > 1


def test_split_mode_unitarity():
    gs = generator_system("eisenstein", 7, "split")
    assert len(gs) == 2 * 57
    ring = gs.spec.ring
    for t in gs.scaled:
        assert np.array_equal(qmat_mul(qmat_star(t, ring), t, ring), qmat_identity(7))


@pytest.mark.parametrize("kind, p, mode", [
    ("eisenstein", 3, "inert"),   # excluded
    ("eisenstein", 7, "inert"),   # splits
    ("eisenstein", 5, "split"),   # inert
    ("mumford", 2, "inert"),
    ("mumford", 7, "inert"),
    ("mumford", 11, "inert"),     # 11 splits in Z[lambda]
    ("gauss", 2, "inert"),
    ("eisenstein", 4, "inert"),
])
def test_inadmissible_primes(kind, p, mode):
    with pytest.raises(InvalidPrime):
        generator_system(kind, p, mode)


def test_levels(eis2):
    for t in eis2.scaled:
        assert level(t, 2, 1) == 2
    assert level(qmat_identity(1), 2) == 0
    w = to_array([[QuadInt(0, int(i == j), EISENSTEIN) for j in range(3)] for i in range(3)])
    assert level(w, 2) == 0


def test_p2_classes_are_inverse_pairs(eis2):
    G = ExactGroup(eis2.spec, 2)
    keys = [G.canon(t) for t in eis2.scaled]
    for members in eis2.classes:
        a, b = members
        assert G.invert(keys[a]) == keys[b]


@pytest.mark.parametrize("kind, p", [("eisenstein", 2), ("eisenstein", 5), ("mumford", 3)])
def test_bicayley_axioms(kind, p):
    gs = generator_system(kind, p)
    G = ExactGroup(gs.spec, p)
    keys = [G.canon(t) for t in gs.scaled]
    ok, witness = check_bicayley_axioms(keys, gs.classes, G.multiply, G.invert, G.identity)
    assert ok, witness
    assert np.array_equal(gs.inv_map[gs.inverse], gs.class_of)


def test_merged_classes_violate_axioms(eis2):
    G = ExactGroup(eis2.spec, 2)
    keys = [G.canon(t) for t in eis2.scaled]
    merged = [eis2.classes[0] + eis2.classes[1]] + list(eis2.classes[2:])
    ok, witness = check_bicayley_axioms(keys, merged, G.multiply, G.invert, G.identity)
    assert not ok and "class 0" in witness


@pytest.mark.parametrize("kind, p", [("eisenstein", 2), ("mumford", 3), ("gauss", 3)])
def test_partition_matches_tree_neighbours(kind, p):
    """s ~ t iff s^-1 t lies in S, i.e. s and t share a right vertex in the tree."""
    gs = generator_system(kind, p)
    G = ExactGroup(gs.spec, p)
    keys = [G.canon(t) for t in gs.scaled]
    in_s = set(keys)
    for a, b in itertools.combinations(range(len(keys)), 2):
        linked = G.multiply(G.invert(keys[a]), keys[b]) in in_s
        assert linked == (gs.class_of[a] == gs.class_of[b])


def test_inverse_is_a_fixed_point_free_involution():
    gs = generator_system("eisenstein", 5)
    idx = np.arange(len(gs))
    assert np.array_equal(gs.inverse[gs.inverse], idx)
    assert not np.any(gs.inverse == idx)
    assert np.array_equal(gs.inv_map, gs.class_of[gs.inverse])


def test_split_colours_p7():
    gs = generator_system("eisenstein", 7, "split")
    colours = np.array([split_color(t, 7) for t in gs.scaled])
    assert (colours == 1).sum() == 57 and (colours == 2).sum() == 57
    G = ExactGroup(gs.spec, 7)
    keys = [G.canon(t) for t in gs.scaled]
    where = {k: i for i, k in enumerate(keys)}
    for i, k in enumerate(keys):
        assert colours[where[G.invert(k)]] == 3 - colours[i]


def test_scalar_colour_rejected():
    spec = lattice_spec("eisenstein")
    with pytest.raises(DegenerateColor):
        split_color(qmat_identity(7), 7, spec)
