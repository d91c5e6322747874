"""Finite quotients of the lattices and the bigraphs built from them.

Group elements are 3x3 matrices over F_q or F_{q^2}, encoded entrywise by
the field codes of ``rings.FiniteField`` and taken up to scalars: the
canonical representative has its first nonzero entry (row-major) equal
to one.  Closure is a breadth-first search that multiplies a whole layer
by every generator at once.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from dataclasses import field as dc_field
from itertools import combinations, product
from typing import Callable, Hashable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import Acyclic, AxiomViolation, BadParams, Oversize
from .lattice import GeneratorSystem
from .rings import FiniteField, Reduction, reduction

DEFAULT_CLOSURE_CAP = 2_000_000
SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# matrices over finite fields


def fmat_mul(A: np.ndarray, B: np.ndarray, F: FiniteField) -> np.ndarray:
    """Batched product of (..., 9) code arrays."""
    A = A.reshape(A.shape[:-1] + (3, 3))
    B = B.reshape(B.shape[:-1] + (3, 3))
    out = np.empty(np.broadcast_shapes(A.shape, B.shape), dtype=np.int64)
    for i in range(3):
        for j in range(3):
            acc = F.mul[A[..., i, 0], B[..., 0, j]]
            acc = F.add[acc, F.mul[A[..., i, 1], B[..., 1, j]]]
            out[..., i, j] = F.add[acc, F.mul[A[..., i, 2], B[..., 2, j]]]
    return out.reshape(out.shape[:-2] + (9,))


def projective_canon(A: np.ndarray, F: FiniteField) -> np.ndarray:
    """Scale each row vector so that its first nonzero entry is one."""
    A = np.asarray(A, dtype=np.int64)
    nz = A != 0
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(A, first[..., None], axis=-1)
    return F.mul[A, F.inv[lead]]


def encode(A: np.ndarray, F: FiniteField) -> np.ndarray:
    """Pack canonical code vectors into int64 keys."""
    weights = F.size ** np.arange(A.shape[-1] - 1, -1, -1, dtype=np.int64)
    return A @ weights


@dataclass
class FiniteGroup:
    """A finite group with a fixed symmetric generating list.

    ``rmul[g, a]`` is the index of ``g * s_a``.  Element 0 is the identity and
    indices follow breadth-first discovery order.
    """

    elements: np.ndarray | list
    gens: np.ndarray | list
    rmul: np.ndarray
    injective: bool
    field: FiniteField | None = None
    reduction: Reduction | None = None
    keys: np.ndarray | None = dc_field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.rmul)

    def index_of(self, codes: np.ndarray) -> np.ndarray:
        k = encode(projective_canon(codes, self.field), self.field)
        order = np.argsort(self.keys)
        pos = np.searchsorted(self.keys[order], k)
        pos = np.minimum(pos, len(order) - 1)
        idx = order[pos]
        if np.any(self.keys[idx] != k):
            raise KeyError("element not in group")
        return idx

    def multiply(self, x: int, y: int) -> int:
        prod = fmat_mul(self.elements[x], self.elements[y], self.field)
        return int(self.index_of(prod[None])[0])


def reduce_generators(gs: GeneratorSystem, q: int) -> tuple[Reduction, np.ndarray]:
    """Images of the group elements ``s = t/p`` as canonical code vectors."""
    if q == gs.p or q in gs.spec.excluded_primes:
        raise BadParams(f"q={q} is not admissible for p={gs.p} and the {gs.spec.kind} lattice")
    red = reduction(gs.spec.ring, q)
    codes = red.codes(gs.scaled[..., 0], gs.scaled[..., 1]).reshape(len(gs), 9)
    # the scalar 1/p disappears projectively
    return red, projective_canon(codes, red.field)


def close_group(gens: np.ndarray, F: FiniteField, cap: int = DEFAULT_CLOSURE_CAP) -> FiniteGroup:
    """Breadth-first closure of a symmetric generating set in PGL_3."""
    gens = projective_canon(gens, F)
    ident = projective_canon(np.array([1, 0, 0, 0, 1, 0, 0, 0, 1]), F)
    elements = [ident[None]]
    keys = [encode(ident[None], F)]
    known = np.array(keys[0])
    frontier = ident[None]
    total = 1
    while len(frontier):
        prods = fmat_mul(frontier[:, None, :], gens[None, :, :], F).reshape(-1, 9)
        prods = projective_canon(prods, F)
        k = encode(prods, F)
        uniq, first = np.unique(k, return_index=True)
        fresh = ~np.isin(uniq, known)
        first = np.sort(first[fresh])
        frontier = prods[first]
        total += len(frontier)
        if total > cap:
            raise Oversize(f"group closure exceeded the cap of {cap} elements")
        elements.append(frontier)
        keys.append(k[first])
        known = np.concatenate([known, k[first]])
    E = np.concatenate(elements)
    K = np.concatenate(keys)
    order = np.argsort(K)
    prods = projective_canon(fmat_mul(E[:, None, :], gens[None, :, :], F), F)
    pk = encode(prods, F)
    rmul = order[np.searchsorted(K[order], pk)].astype(np.int64)
    gk = encode(gens, F)
    injective = len(np.unique(gk)) == len(gk) and not np.any(gk == K[0])
    return FiniteGroup(E, gens, rmul, bool(injective), F, None, K)


def reduce_and_close(gs: GeneratorSystem, q: int, cap: int = DEFAULT_CLOSURE_CAP) -> FiniteGroup:
    red, codes = reduce_generators(gs, q)
    G = close_group(codes, red.field, cap)
    G.reduction = red
    return G


def close_abstract(gens: Sequence[Hashable], multiply: Callable, identity: Hashable,
                   cap: int = DEFAULT_CLOSURE_CAP) -> FiniteGroup:
    """Closure for small groups given by a Python multiplication."""
    index = {identity: 0}
    elements = [identity]
    queue = deque([identity])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = multiply(g, s)
            if h not in index:
                index[h] = len(elements)
                elements.append(h)
                queue.append(h)
                if len(elements) > cap:
                    raise Oversize(f"group closure exceeded the cap of {cap} elements")
    rmul = np.array([[index[multiply(g, s)] for s in gens] for g in elements], dtype=np.int64)
    injective = len(set(gens)) == len(gens) and identity not in gens
    return FiniteGroup(elements, list(gens), rmul, injective)


def compose_perm(g: tuple, h: tuple) -> tuple:
    """Right action convention: apply g, then h."""
    return tuple(h[g[i]] for i in range(len(g)))


def sym3_toy() -> tuple[FiniteGroup, list[tuple[int, ...]], np.ndarray]:
    """Sym(3) with its three transpositions, each forming its own class."""
    gens = [(1, 0, 2), (0, 2, 1), (2, 1, 0)]
    G = close_abstract(gens, compose_perm, (0, 1, 2))
    classes = [(0,), (1,), (2,)]
    inverse = np.array([0, 1, 2])
    return G, classes, inverse


# ---------------------------------------------------------------------------
# bigraphs


@dataclass
class Bigraph:
    """(K+1, k+1)-biregular bipartite graph.

    Edge ``e`` joins ``edge_left[e]`` to ``edge_right[e]``; edges of a left
    vertex ``x`` occupy positions ``x*(K+1) .. x*(K+1)+K``.  Directed edges are
    numbered ``e`` (left to right) and ``e + N`` (right to left).
    """

    n_left: int
    n_right: int
    K: int
    k: int
    edge_left: np.ndarray
    edge_right: np.ndarray
    class_size: np.ndarray
    labels: dict = dc_field(default_factory=dict)
    left_transitive: bool = False
    # continuation[e] lists the edges f such that e (left to right) is
    # followed by f (right to left); None means "the other edges at r"
    continuation: np.ndarray | None = dc_field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.n_left

    @property
    def N(self) -> int:
        return len(self.edge_left)

    @property
    def weights(self) -> np.ndarray:
        return self.class_size / (self.k + 1)

    @property
    def weighted(self) -> bool:
        return bool(np.any(self.class_size != self.k + 1))

    def count_matrix(self) -> sp.csr_matrix:
        """Edge multiplicities c[l, r]."""
        data = np.ones(self.N, dtype=np.int64)
        C = sp.csr_matrix((data, (self.edge_left, self.edge_right)),
                          shape=(self.n_left, self.n_right))
        C.sum_duplicates()
        return C

    @property
    def simple(self) -> bool:
        return not self.weighted and int(self.count_matrix().max()) == 1

    def right_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_right, minlength=self.n_right)

    def adjacency(self) -> sp.csr_matrix:
        """Full symmetric adjacency on L then R (unweighted)."""
        C = self.count_matrix()
        return sp.bmat([[None, C], [C.T, None]], format="csr")

    def check(self) -> None:
        left = np.bincount(self.edge_left, minlength=self.n_left)
        if np.any(left != self.K + 1):
            raise AxiomViolation("left degrees are not K+1")
        if not self.weighted and np.any(self.right_degrees() != self.k + 1):
            raise AxiomViolation("right degrees are not k+1")
        if self.n_right * (self.k + 1) != self.n_left * (self.K + 1) and not self.weighted:
            raise AxiomViolation("|R|(k+1) != |L|(K+1)")
        ncomp, _ = connected_components(self.adjacency(), directed=False)
        if ncomp != 1:
            raise AxiomViolation(f"bigraph has {ncomp} components")

    def header(self) -> dict:
        return {
            "K": self.K,
            "k": self.k,
            "n_left": self.n_left,
            "n_right": self.n_right,
            "N": self.N,
            "weights": [[int(s), self.k + 1] for s in self.class_size],
            "labels": self.labels,
        }

    def to_json(self) -> str:
        payload = dict(self.header())
        payload["edges"] = np.stack([self.edge_left, self.edge_right], axis=1).tolist()
        payload["left_transitive"] = self.left_transitive
        payload["schema_version"] = SCHEMA_VERSION
        if self.continuation is not None:
            payload["continuation"] = self.continuation.tolist()
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Bigraph":
        d = json.loads(text)
        edges = np.array(d["edges"], dtype=np.int64).reshape(-1, 2)
        sizes = np.array([w[0] for w in d["weights"]], dtype=np.int64)
        cont = d.get("continuation")
        cont = None if cont is None else np.array(cont, dtype=np.int64).reshape(len(edges), -1)
        return cls(d["n_left"], d["n_right"], d["K"], d["k"], edges[:, 0], edges[:, 1],
                   sizes, d.get("labels", {}), d.get("left_transitive", False), cont)

    def to_csv(self) -> str:
        lines = ["left,right"] + [f"{a},{b}" for a, b in zip(self.edge_left, self.edge_right)]
        return "\n".join(lines) + "\n"


def from_edges(n_left: int, n_right: int, edges: Sequence[tuple[int, int]], labels=None) -> Bigraph:
    """Build a bigraph from an explicit edge list, inferring the degrees."""
    E = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    ldeg = np.bincount(E[:, 0], minlength=n_left)
    rdeg = np.bincount(E[:, 1], minlength=n_right)
    if len(set(ldeg)) != 1 or len(set(rdeg)) != 1:
        raise BadParams("edge list is not biregular")
    K, k = int(ldeg[0]) - 1, int(rdeg[0]) - 1
    g = Bigraph(n_left, n_right, K, k, E[:, 0], E[:, 1],
                np.full(n_right, k + 1, dtype=np.int64), dict(labels or {}))
    g.check()
    return g


def schreier_bigraph(action: np.ndarray, class_of: np.ndarray, inverse: np.ndarray,
                     K: int, k: int, labels=None, left_transitive: bool = False) -> Bigraph:
    """Schreier bigraph of a right action given as ``action[x, a] = x * s_a``.

    Right vertices are the classes of ``~`` on pairs (x, j), generated by
    ``(x, j) ~ (x s, i(s^-1))`` for ``s`` in ``S^j``.
    """
    action = np.asarray(action, dtype=np.int64)
    nY, M = action.shape
    K1 = K + 1
    inv_class = class_of[inverse]
    src = (np.arange(nY)[:, None] * K1 + class_of[None, :]).ravel()
    dst = (action * K1 + inv_class[None, :]).ravel()
    graph = sp.csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(nY * K1, nY * K1))
    _, comp = connected_components(graph, directed=True, connection="weak")
    # relabel classes by first appearance in (x, j) order
    _, first = np.unique(comp, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    right = rank[comp]
    sizes = np.bincount(right)
    if np.any(sizes > k + 1):
        raise AxiomViolation("a right class has more than k+1 members")
    edge_left = np.repeat(np.arange(nY), K1)
    members = np.argsort(class_of, kind="stable").reshape(K1, k)
    # (x, j) continues through s in S^j to the pair (x s, i(s^-1))
    cont = action[:, members] * K1 + inv_class[members][None, :, :]
    g = Bigraph(nY, len(sizes), K, k, edge_left, right, sizes, dict(labels or {}),
                left_transitive, cont.reshape(nY * K1, k))
    g.check()
    return g


def cayley_bigraph(group: FiniteGroup, classes: Sequence[Sequence[int]], inverse: np.ndarray,
                   labels=None) -> Bigraph:
    class_of = np.empty(sum(len(c) for c in classes), dtype=np.int64)
    for ci, members in enumerate(classes):
        class_of[list(members)] = ci
    sizes = {len(c) for c in classes}
    if len(sizes) != 1:
        raise AxiomViolation("classes have different sizes")
    K, k = len(classes) - 1, sizes.pop()
    g = schreier_bigraph(group.rmul, class_of, np.asarray(inverse), K, k, labels,
                         left_transitive=True)
    if group.injective and np.any(g.class_size != k + 1):
        raise AxiomViolation("right classes of an injective Cayley bigraph must have k+1 members")
    return g


def arithmetic_cayley(gs: GeneratorSystem, q: int, cap: int = DEFAULT_CLOSURE_CAP) -> tuple[Bigraph, FiniteGroup]:
    G = reduce_and_close(gs, q, cap)
    labels = {"lattice": gs.spec.kind, "p": gs.p, "q": q, "kind": "cayley",
              "reduction": G.reduction.metadata(), "injective": G.injective}
    return cayley_bigraph(G, gs.classes, gs.inverse, labels), G


# ---------------------------------------------------------------------------
# projective point actions


def projective_points(F: FiniteField, isotropic: bool = False) -> np.ndarray:
    """Canonical points of P^2(F), optionally only those with v* v = 0."""
    pts = []
    for v in product(range(F.size), repeat=3):
        v = np.array(v)
        if not v.any():
            continue
        nz = np.nonzero(v)[0][0]
        if v[nz] != 1:
            continue
        pts.append(v)
    P = np.array(pts, dtype=np.int64)
    if isotropic:
        h = F.mul[F.frob[P], P]
        s = F.add[F.add[h[:, 0], h[:, 1]], h[:, 2]]
        P = P[s == 0]
    return P


def point_action(points: np.ndarray, gens: np.ndarray, F: FiniteField) -> np.ndarray:
    """Right action ``x -> x s`` of generators on row vectors."""
    S = gens.reshape(-1, 3, 3)
    X = points
    out = np.empty((len(X), len(S)), dtype=np.int64)
    keys = encode(projective_canon(X, F), F)
    order = np.argsort(keys)
    for a, s in enumerate(S):
        img = np.empty_like(X)
        for j in range(3):
            acc = F.mul[X[:, 0], s[0, j]]
            acc = F.add[acc, F.mul[X[:, 1], s[1, j]]]
            img[:, j] = F.add[acc, F.mul[X[:, 2], s[2, j]]]
        k = encode(projective_canon(img, F), F)
        pos = np.searchsorted(keys[order], k)
        if np.any(pos >= len(order)) or np.any(keys[order][np.minimum(pos, len(order) - 1)] != k):
            raise AxiomViolation("generator does not preserve the point set")
        out[:, a] = order[pos]
    return out


def arithmetic_schreier(gs: GeneratorSystem, q: int, action: str) -> Bigraph:
    red, codes = reduce_generators(gs, q)
    if action == "projective-plane":
        pts = projective_points(red.field)
    elif action == "isotropic":
        if red.field.degree != 2:
            raise BadParams("the isotropic action needs an inert q")
        pts = projective_points(red.field, isotropic=True)
    else:
        raise BadParams(f"unknown action {action!r}")
    act = point_action(pts, codes, red.field)
    labels = {"lattice": gs.spec.kind, "p": gs.p, "q": q, "kind": "schreier",
              "action": action, "reduction": red.metadata()}
    return schreier_bigraph(act, gs.class_of, gs.inverse, gs.K, gs.k, labels)


# ---------------------------------------------------------------------------
# incidence and synthetic bigraphs


def incidence_bigraph(d: int, k: int) -> Bigraph:
    """Points against planes through the origin of F_k^{d+1}."""
    if d < 3:
        raise BadParams("incidence bigraphs need d >= 3")
    if k < 2 or any(k % r == 0 for r in range(2, k)):
        raise BadParams("only prime k is supported")
    F = FiniteField(k, 1)
    dim = d + 1
    pts = []
    for v in product(range(k), repeat=dim):
        v = np.array(v)
        if v.any() and v[np.nonzero(v)[0][0]] == 1:
            pts.append(v)
    P = np.array(pts)
    index = {tuple(v): i for i, v in enumerate(P)}
    planes = set()
    for a, b in combinations(range(len(P)), 2):
        members = set()
        for x, y in product(range(k), repeat=2):
            if x == 0 and y == 0:
                continue
            w = (x * P[a] + y * P[b]) % k
            w = F.mul[w, F.inv[w[np.nonzero(w)[0][0]]]]
            members.add(index[tuple(w)])
        planes.add(tuple(sorted(members)))
    planes = sorted(planes)
    edges = [(x, r) for r, plane in enumerate(planes) for x in plane]
    return from_edges(len(P), len(planes), edges, {"kind": "incidence", "d": d, "k": k})


def complete_bigraph(n_left: int, n_right: int) -> Bigraph:
    edges = [(x, r) for x in range(n_left) for r in range(n_right)]
    return from_edges(n_left, n_right, edges, {"kind": "complete"})


def random_bigraph(n_left: int, K: int, k: int, seed: int, tries: int = 1000) -> Bigraph:
    """Uniform configuration-model bigraph without multiple edges."""
    if (n_left * (K + 1)) % (k + 1):
        raise BadParams("(K+1) n must be divisible by k+1")
    n_right = n_left * (K + 1) // (k + 1)
    rng = np.random.default_rng(seed)
    stubs_l = np.repeat(np.arange(n_left), K + 1)
    for _ in range(tries):
        stubs_r = rng.permutation(np.repeat(np.arange(n_right), k + 1))
        pairs = set(zip(stubs_l.tolist(), stubs_r.tolist()))
        if len(pairs) == len(stubs_l):
            g = from_edges(n_left, n_right, list(pairs), {"kind": "random", "seed": seed})
            return g
    raise BadParams("could not sample a simple bigraph")


# ---------------------------------------------------------------------------
# girth and non-backtracking structure


def girth(g: Bigraph, sources: Sequence[int] | None = None) -> int:
    """Length of the shortest cycle by truncated BFS from left vertices."""
    if sources is None:
        sources = [0] if g.left_transitive else range(g.n_left)
    nL = g.n_left
    # incidence lists on vertices L then R, storing (neighbour, edge id)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(nL + g.n_right)]
    for e, (a, b) in enumerate(zip(g.edge_left.tolist(), g.edge_right.tolist())):
        adj[a].append((nL + b, e))
        adj[nL + b].append((a, e))
    best = None
    for s in sources:
        dist = {s: 0}
        via = {s: -1}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if best is not None and 2 * dist[u] + 1 >= best:
                break
            for w, e in adj[u]:
                if e == via[u]:
                    continue
                if w not in dist:
                    dist[w] = dist[u] + 1
                    via[w] = e
                    queue.append(w)
                else:
                    c = dist[u] + dist[w] + 1
                    if best is None or c < best:
                        best = c
    if best is None:
        raise Acyclic("bigraph has no cycle")
    return best


def right_edge_table(g: Bigraph) -> np.ndarray:
    """Edges at each right vertex, padded with N."""
    order = np.argsort(g.edge_right, kind="stable")
    deg = g.right_degrees()
    table = np.full((g.n_right, int(deg.max())), g.N, dtype=np.int64)
    start = np.concatenate([[0], np.cumsum(deg)[:-1]])
    table[g.edge_right[order], np.arange(g.N) - np.repeat(start, deg)] = order
    return table


def continuations(g: Bigraph) -> np.ndarray:
    """(N, k) table of NB continuations of each left-to-right edge."""
    if g.continuation is not None:
        return g.continuation
    table = right_edge_table(g)
    if table.shape[1] != g.k + 1 or np.any(table == g.N):
        raise AxiomViolation("right degrees must be k+1 without a continuation table")
    cand = table[g.edge_right]
    keep = cand != np.arange(g.N)[:, None]
    return cand[keep].reshape(g.N, g.k)


def nb_matrix(g: Bigraph) -> sp.csr_matrix:
    """Non-backtracking operator: B[x, y] counts the ways y continues x.

    Directed edge e < N runs left to right along edge e, and e + N runs
    back.  On Schreier orbigraphs the continuations come from the group
    action, so an edge may continue into its own reverse.
    """
    N, K1 = g.N, g.K + 1
    cont = continuations(g)
    rows1 = np.repeat(np.arange(N), cont.shape[1])
    cols1 = cont.ravel() + N
    e = np.repeat(np.arange(N), K1)
    f = (g.edge_left[:, None] * K1 + np.arange(K1)[None, :]).ravel()
    keep = f != e
    rows = np.concatenate([rows1, e[keep] + N])
    cols = np.concatenate([cols1, f[keep]])
    B = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(2 * N, 2 * N))
    B.sum_duplicates()
    return B


def _or_of_others(M: np.ndarray) -> np.ndarray:
    """For each row, the OR of all other entries in that row."""
    pre = np.bitwise_or.accumulate(M, axis=1)
    suf = np.bitwise_or.accumulate(M[:, ::-1], axis=1)[:, ::-1]
    out = np.zeros_like(M)
    out[:, 1:] |= pre[:, :-1]
    out[:, :-1] |= suf[:, 1:]
    return out


class NBStepper:
    """One NB step on bit-packed sets of directed edges.

    A state is a pair of uint64 arrays (lr, rl) indexed by undirected edge;
    bit b marks membership in the b-th of up to 64 simultaneous sets.
    """

    def __init__(self, g: Bigraph):
        self.g = g
        self.K1 = g.K + 1
        cont = continuations(g)
        # predecessors of each reversed edge, padded with N (a zero slot)
        flat = cont.ravel()
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=g.N)
        width = max(int(counts.max()), 1)
        start = np.concatenate([[0], np.cumsum(counts)[:-1]])
        pred = np.full((g.N, width), g.N, dtype=np.int64)
        pred[flat[order], np.arange(len(flat)) - np.repeat(start, counts)] = order // cont.shape[1]
        self.pred = pred

    def step(self, lr: np.ndarray, rl: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self.g
        padded = np.concatenate([lr, np.zeros(1, dtype=np.uint64)])
        new_rl = np.bitwise_or.reduce(padded[self.pred], axis=1)
        new_lr = _or_of_others(rl.reshape(g.n_left, self.K1)).ravel()
        return new_lr, new_rl


def nb_reach(g: Bigraph, e: int, length: int, stepper: NBStepper | None = None) -> int:
    """Number of directed edges at the end of some NB path of the given length from e."""
    stepper = NBStepper(g) if stepper is None else stepper
    lr = np.zeros(g.N, dtype=np.uint64)
    rl = np.zeros(g.N, dtype=np.uint64)
    (lr if e < g.N else rl)[e % g.N] = 1
    for _ in range(length):
        lr, rl = stepper.step(lr, rl)
    return int(np.count_nonzero(lr) + np.count_nonzero(rl))


def nb_eccentricities(g: Bigraph, sources: np.ndarray, stepper: NBStepper | None = None) -> np.ndarray:
    """Largest NB distance from each source directed edge."""
    stepper = NBStepper(g) if stepper is None else stepper
    N = g.N
    ecc = np.zeros(len(sources), dtype=np.int64)
    for lo in range(0, len(sources), 64):
        batch = sources[lo:lo + 64]
        bits = np.left_shift(np.uint64(1), np.arange(len(batch), dtype=np.uint64))
        full = np.bitwise_or.reduce(bits)
        lr = np.zeros(N, dtype=np.uint64)
        rl = np.zeros(N, dtype=np.uint64)
        np.bitwise_or.at(lr, batch[batch < N], bits[batch < N])
        np.bitwise_or.at(rl, batch[batch >= N] - N, bits[batch >= N])
        seen_lr, seen_rl = lr.copy(), rl.copy()
        steps = 0
        last = np.zeros(len(batch), dtype=np.int64)
        while True:
            lr, rl = stepper.step(lr, rl)
            steps += 1
            fresh_lr, fresh_rl = lr & ~seen_lr, rl & ~seen_rl
            fresh = np.bitwise_or.reduce(fresh_lr) | np.bitwise_or.reduce(fresh_rl)
            if not fresh:
                break
            last[(fresh & bits) != 0] = steps
            seen_lr |= lr
            seen_rl |= rl
            if steps > 4 * N + 4:
                break
        complete = np.bitwise_and.reduce(seen_lr) & np.bitwise_and.reduce(seen_rl) & full
        if complete != full:
            raise AxiomViolation("some directed edge is unreachable by NB paths")
        ecc[lo:lo + len(batch)] = last
    return ecc


def nb_diameter(g: Bigraph, stepper: NBStepper | None = None) -> int:
    """Largest NB distance between two directed edges.

    For left-transitive bigraphs one source per edge orbit suffices: the
    edges (identity, j) in both orientations.
    """
    if g.left_transitive:
        base = np.arange(g.K + 1)
        sources = np.concatenate([base, base + g.N])
    else:
        sources = np.arange(2 * g.N)
    return int(nb_eccentricities(g, sources, stepper).max())
