import math
from collections import deque

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from ramanujan_bigraphs.bigraph import (Bigraph, complete_bigraph, from_edges, girth,
                                        incidence_bigraph, nb_diameter, nb_matrix, nb_reach,
                                        random_bigraph, reduce_and_close, reduce_generators)
from ramanujan_bigraphs.errors import BadParams, Oversize
from ramanujan_bigraphs.lattice import generator_system


def psu3_order(q):
    return q**3 * (q**3 + 1) * (q * q - 1) // math.gcd(3, q + 1)


def brute_girth(g):
    """Shortest cycle through each edge: drop the edge, BFS between its ends."""
    best = math.inf
    n = g.n_left + g.n_right
    adj = [[] for _ in range(n)]
    for e, (a, b) in enumerate(zip(g.edge_left, g.edge_right)):
        adj[a].append((g.n_left + b, e))
        adj[g.n_left + b].append((a, e))
    for e, (a, b) in enumerate(zip(g.edge_left, g.edge_right)):
        dist = {a: 0}
        todo = deque([a])
        while todo:
            u = todo.popleft()
            for v, f in adj[u]:
                if f != e and v not in dist:
                    dist[v] = dist[u] + 1
                    todo.append(v)
        t = g.n_left + b
        if t in dist:
            best = min(best, dist[t] + 1)
    return best


def brute_nb(g):
    """NB matrix of a simple bigraph straight from the definition."""
    darts = [(a, g.n_left + b) for a, b in zip(g.edge_left, g.edge_right)]
    darts += [(v, u) for u, v in darts]
    rows, cols = [], []
    for i, (u, v) in enumerate(darts):
        for j, (x, w) in enumerate(darts):
            if x == v and w != u:
                rows.append(i)
                cols.append(j)
    n = len(darts)
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


@pytest.fixture(scope="module")
def small_graphs(sym3, k36, p32):
    return [sym3, k36, p32, random_bigraph(12, 3, 2, seed=4)]


def test_sym3_shape(sym3):
    assert (sym3.n_left, sym3.n_right, sym3.K, sym3.k) == (6, 9, 2, 1)
    assert girth(sym3) == 8 == brute_girth(sym3)


def test_complete_girth(k36):
    assert (k36.K, k36.k) == (5, 2)
    assert girth(k36) == 4 == brute_girth(k36)


@pytest.mark.parametrize("d, k, n, K1", [(3, 2, 15, 7), (3, 3, 40, 13)])
def test_incidence_shapes(d, k, n, K1):
    g = incidence_bigraph(d, k)
    assert g.n_left == n and g.K + 1 == K1 and g.k + 1 == k + 1


@pytest.mark.parametrize("d, k", [(2, 2), (3, 4), (3, 1)])
def test_incidence_rejects(d, k):
    with pytest.raises(BadParams):
        incidence_bigraph(d, k)


def test_random_bigraph_girth(small_graphs):
    g = small_graphs[-1]
    assert girth(g) == brute_girth(g)


def test_from_edges_rejects_irregular():
    with pytest.raises(BadParams):
        from_edges(2, 2, [(0, 0), (0, 1), (1, 1)])


def test_group_order_eis_5_2(x52_pair):
    _, G = x52_pair
    assert len(G) == 72 == (2**8 - 2**6 + 2**5 - 2**3) // 3


@pytest.mark.slow
def test_group_order_eis_2_5():
    G = reduce_and_close(generator_system("eisenstein", 2), 5)
    assert len(G) == psu3_order(5) == 126000
    assert G.injective


def test_closure_cap():
    with pytest.raises(Oversize):
        reduce_and_close(generator_system("eisenstein", 5), 2, cap=50)


def test_reduction_rejects_q_equal_p():
    with pytest.raises(BadParams):
        reduce_generators(generator_system("eisenstein", 5), 5)


def test_x52_shape(x52):
    assert (x52.n_left, x52.n_right, x52.K, x52.k) == (72, 1512, 125, 5)
    assert not x52.weighted
    x52.check()


def test_x52_girth(x52):
    g = girth(x52)
    assert g % 2 == 0 and g > 2 * math.log(2, 5)
    assert g == girth(x52, sources=range(x52.n_left))


def test_x52_left_transitive(x52_pair):
    g, G = x52_pair
    rng = np.random.default_rng(0)
    K1 = g.K + 1
    for a in rng.integers(0, len(G), 50):
        # x -> a x on the left, edge (x, j) -> (a x, j)
        lmap = np.array([G.multiply(int(a), x) for x in range(g.n_left)])
        assert len(set(lmap.tolist())) == g.n_left
        e_img = lmap[g.edge_left] * K1 + np.arange(g.N) % K1
        assert np.array_equal(g.edge_left[e_img], lmap[g.edge_left])
        rmap = {}
        for r, r2 in zip(g.edge_right, g.edge_right[e_img]):
            assert rmap.setdefault(int(r), int(r2)) == int(r2)
        assert len(set(rmap.values())) == g.n_right


def test_schreier_projective_plane(y27):
    assert y27.n_left == 57 and (y27.K, y27.k) == (8, 2)
    assert y27.class_size.sum() == y27.N
    assert set(np.unique(y27.class_size)) <= {1, 3}
    assert y27.weighted


def test_schreier_isotropic(y25):
    assert y25.n_left == 126 and y25.n_right == 378
    assert np.all(y25.class_size == 3)


def test_cayley_weights_trivial(x52):
    assert np.all(x52.weights == 1)


def test_nb_matrix_matches_definition(small_graphs):
    for g in small_graphs:
        assert (nb_matrix(g) != brute_nb(g)).nnz == 0


def test_nb_reach_small(small_graphs):
    for g in small_graphs:
        B = brute_nb(g).astype(bool).astype(np.int64)
        for e in (0, g.N - 1, g.N, 2 * g.N - 1):
            v = np.zeros(2 * g.N, dtype=np.int64)
            v[e] = 1
            for ell in range(6):
                assert nb_reach(g, e, ell) == np.count_nonzero(v)
                v = (B.T @ v > 0).astype(np.int64)


def test_nb_reach_trivial(x52):
    assert nb_reach(x52, 0, 0) == 1
    assert nb_reach(x52, 0, 1) == x52.k


def test_nb_diameter_small(small_graphs):
    for g in small_graphs:
        d = shortest_path(brute_nb(g), unweighted=True)
        assert nb_diameter(g) == int(d.max())


def test_nb_diameter_x52(x52):
    bound = 2 * math.log(x52.N) / math.log(math.sqrt(x52.K * x52.k)) + 12
    assert nb_diameter(x52) <= bound


def test_nb_diameter_orbit_shortcut(sym3):
    full = Bigraph(**{**sym3.__dict__, "left_transitive": False})
    assert nb_diameter(full) == nb_diameter(sym3)


def test_json_roundtrip(y27):
    h = Bigraph.from_json(y27.to_json())
    assert h.to_json() == y27.to_json()
    assert np.array_equal(nb_matrix(h).toarray(), nb_matrix(y27).toarray())


def test_csv_dump(k36):
    lines = k36.to_csv().splitlines()
    assert lines[0] == "left,right" and len(lines) == k36.N + 1
