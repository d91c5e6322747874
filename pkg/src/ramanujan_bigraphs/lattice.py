"""Level-two generator sets of the Eisenstein, Gauss and Mumford lattices.

The generators are stored in scaled form ``t = p*s``: integral 3x3 matrices
with ``t* Phi t = p^2 Phi`` (inert primes) or ``t* Phi t = p Phi`` (split
primes, used for the two-dimensional complexes).  Enumeration is exhaustive:
every column of ``t`` is a lattice vector of prescribed Hermitian length, so
the columns are found with a Fincke-Pohst search and glued together by
backtracking on the off-diagonal inner products.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import InvalidPrime, PartitionShapeError, DegenerateColor
from .rings import (
    EISENSTEIN,
    GAUSS,
    MUMFORD7,
    QuadInt,
    RingSpec,
    divisible_by,
    ideal_valuation,
    qmat_adj,
    qmat_det,
    qmat_mul,
    qmat_scale,
    qmat_star,
    to_array,
)

EntryCondition = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def _eis_diag(a, b):
    return (a % 3 == 1) & (b % 3 == 0)


def _gauss_diag(a, b):
    # x - 1 divisible by 2+2i  <=>  (x-1)(2-2i) = 0 mod 8
    a1 = a - 1
    return ((2 * a1 + 2 * b) % 8 == 0) & ((2 * b - 2 * a1) % 8 == 0)


def _mumford_low(a, b):
    # O/(lambda) = F_2 with lambda -> 0
    return a % 2 == 0


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    ring: RingSpec
    phi_rows: tuple
    excluded_primes: frozenset
    conditions: tuple  # ((i, j, predicate), ...)

    @property
    def phi(self) -> np.ndarray:
        return np.array(self.phi_rows, dtype=np.int64)

    @property
    def phi_det(self) -> QuadInt:
        return qmat_det(self.phi, self.ring)

    def congruence(self, T: np.ndarray) -> np.ndarray:
        """Batched congruence predicate on arrays of shape (..., 3, 3, 2)."""
        ok = np.ones(T.shape[:-3], dtype=bool)
        for i, j, pred in self.conditions:
            ok &= pred(T[..., i, j, 0], T[..., i, j, 1])
        return ok

    def column_conditions(self, j: int) -> list[tuple[int, EntryCondition]]:
        return [(i, pred) for (i, jj, pred) in self.conditions if jj == j]

    def is_inert(self, p: int) -> bool:
        return not self.ring.ramified(p) and not self.ring.splits(p)

    def validate_prime(self, p: int, mode: str) -> None:
        if not _is_prime(p):
            raise InvalidPrime(f"{p} is not prime")
        if p in self.excluded_primes:
            raise InvalidPrime(f"p={p} is excluded for the {self.kind} lattice")
        if mode == "inert" and not self.is_inert(p):
            raise InvalidPrime(f"p={p} is not inert in the {self.ring.label} ring")
        if mode == "split" and not self.ring.splits(p):
            raise InvalidPrime(f"p={p} does not split in the {self.ring.label} ring")
        if mode not in ("inert", "split"):
            raise InvalidPrime(f"unknown mode {mode!r}")


def _identity_rows():
    return tuple(tuple((1 if i == j else 0, 0) for j in range(3)) for i in range(3))


def _mumford_phi():
    lam, lbar, three = (0, 1), (-1, -1), (3, 0)
    return ((three, lbar, lbar), (lam, three, lbar), (lam, lam, three))


EISENSTEIN_LATTICE = LatticeSpec(
    "eisenstein", EISENSTEIN, _identity_rows(), frozenset({3}),
    tuple((i, i, _eis_diag) for i in range(3)),
)
GAUSS_LATTICE = LatticeSpec(
    "gauss", GAUSS, _identity_rows(), frozenset({2}),
    tuple((i, i, _gauss_diag) for i in range(3)),
)
MUMFORD_LATTICE = LatticeSpec(
    "mumford", MUMFORD7, _mumford_phi(), frozenset({2, 7}),
    tuple((i, j, _mumford_low) for i in range(3) for j in range(3) if i > j),
)

LATTICES = {s.kind: s for s in (EISENSTEIN_LATTICE, GAUSS_LATTICE, MUMFORD_LATTICE)}


def lattice_spec(kind: str) -> LatticeSpec:
    try:
        return LATTICES[kind.lower()]
    except KeyError:
        raise InvalidPrime(f"unknown lattice {kind!r}; choose from {sorted(LATTICES)}") from None


# ---------------------------------------------------------------------------
# Hermitian forms in integer coordinates


def hermitian_forms(spec: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Integer matrices Ha, Hb with ``x* Phi y = x^T Ha y + (x^T Hb y) tau``.

    Coordinates of a column vector are ``(a0, b0, a1, b1, a2, b2)``.
    """
    ring = spec.ring
    phi = spec.phi
    Ha = np.zeros((6, 6), dtype=np.int64)
    Hb = np.zeros((6, 6), dtype=np.int64)
    basis = [QuadInt(1, 0, ring), QuadInt(0, 1, ring)]
    for u in range(6):
        for v in range(6):
            iu, cu = divmod(u, 2)
            iv, cv = divmod(v, 2)
            e = QuadInt(int(phi[iu, iv, 0]), int(phi[iu, iv, 1]), ring)
            z = basis[cu].conj() * e * basis[cv]
            Ha[u, v], Hb[u, v] = z.a, z.b
    return Ha, Hb


def short_vectors(gram: np.ndarray, bound: float) -> np.ndarray:
    """All integer vectors ``x`` with ``x^T gram x <= bound``.

    Breadth-first Fincke-Pohst: coordinates are fixed from the last to the
    first, each level expanding every partial vector over its admissible
    integer interval.
    """
    G = np.asarray(gram, dtype=float)
    n = G.shape[0]
    R = np.linalg.cholesky(G).T  # G = R^T R, R upper
    qd = np.diag(R) ** 2
    qo = R / np.diag(R)[:, None]
    slack = 1e-9 * max(bound, 1.0)
    X = np.zeros((1, n), dtype=np.int64)
    T = np.array([bound + slack])
    for i in range(n - 1, -1, -1):
        c = -(X[:, i + 1:] @ qo[i, i + 1:]) if i < n - 1 else np.zeros(len(X))
        r = np.sqrt(np.maximum(T, 0.0) / qd[i])
        lo = np.ceil(c - r - 1e-12).astype(np.int64)
        hi = np.floor(c + r + 1e-12).astype(np.int64)
        cnt = np.maximum(hi - lo + 1, 0)
        keep = cnt > 0
        X, T, c, lo, cnt = X[keep], T[keep], c[keep], lo[keep], cnt[keep]
        rep = np.repeat(np.arange(len(X)), cnt)
        offs = np.arange(int(cnt.sum())) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        X = X[rep].copy()
        xi = lo[rep] + offs
        X[:, i] = xi
        T = T[rep] - qd[i] * (xi - c[rep]) ** 2
        ok = T >= -slack
        X, T = X[ok], T[ok]
    return X


def _vectors_to_columns(V: np.ndarray) -> np.ndarray:
    return V.reshape(-1, 3, 2)


# ---------------------------------------------------------------------------
# generator systems


@dataclass
class GeneratorSystem:
    spec: LatticeSpec
    p: int
    mode: str
    scaled: np.ndarray  # (M, 3, 3, 2)
    classes: list[tuple[int, ...]] | None = None
    inverse: np.ndarray | None = None  # generator index -> index of its inverse
    class_of: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.scaled)

    @property
    def K(self) -> int:
        return self.p**3

    @property
    def k(self) -> int:
        return self.p

    @property
    def inv_map(self) -> np.ndarray:
        """Generator index -> class index containing its inverse."""
        return self.class_of[self.inverse]

    def with_classes(self, classes: list[tuple[int, ...]]) -> "GeneratorSystem":
        class_of = np.empty(len(self), dtype=np.int64)
        for ci, members in enumerate(classes):
            class_of[list(members)] = ci
        return GeneratorSystem(self.spec, self.p, self.mode, self.scaled,
                               [tuple(c) for c in classes], self.inverse, class_of)

    def to_json(self) -> str:
        payload = {
            "ring": self.spec.ring.label,
            "lattice": self.spec.kind,
            "p": self.p,
            "mode": self.mode,
            "matrices": self.scaled.tolist(),
            "classes": [list(c) for c in self.classes] if self.classes else None,
            "inverse": self.inverse.tolist() if self.inverse is not None else None,
            "inv_map": self.inv_map.tolist() if self.classes else None,
        }
        return json.dumps(payload, sort_keys=True)


def normalize_units(T: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    """Canonical unit multiple of each matrix in a batch.

    Among the unit multiples satisfying the congruence (all of them when
    none does), pick the lexicographically largest coordinate sequence.
    """
    T = np.asarray(T)
    single = T.ndim == 3
    if single:
        T = T[None]
    units = spec.ring.units()
    cands = np.stack([qmat_scale(T, u) for u in units], axis=1)  # (M, U, 3,3,2)
    ok = spec.congruence(cands)
    none = ~ok.any(axis=1)
    ok[none] = True
    flat = cands.reshape(len(T), len(units), -1)
    out = np.empty_like(T)
    for m in range(len(T)):
        idx = np.nonzero(ok[m])[0]
        rows = [tuple(flat[m, u]) for u in idx]
        best = idx[int(max(range(len(rows)), key=lambda r: rows[r]))]
        out[m] = cands[m, best]
    return out[0] if single else out


def _sort_matrices(T: np.ndarray) -> np.ndarray:
    flat = T.reshape(len(T), -1)
    order = np.lexsort(flat.T[::-1])
    return T[order]


def enumerate_generators(spec: LatticeSpec, p: int, mode: str = "inert") -> GeneratorSystem:
    """Exhaustive search for the scaled level-two generators."""
    spec.validate_prime(p, mode)
    scale = p * p if mode == "inert" else p
    Ha, Hb = hermitian_forms(spec)
    gram = (Ha + Ha.T) / 2.0
    phi = spec.phi
    columns = []
    for j in range(3):
        target = scale * int(phi[j, j, 0])
        V = short_vectors(gram, target)
        exact = np.einsum("mi,ij,mj->m", V, Ha, V)
        V = V[exact == target]
        C = _vectors_to_columns(V)
        ok = np.ones(len(C), dtype=bool)
        for i, pred in spec.column_conditions(j):
            ok &= pred(C[:, i, 0], C[:, i, 1])
        columns.append(V[ok])

    def pair_mask(j: int, k: int) -> np.ndarray:
        ta, tb = scale * int(phi[j, k, 0]), scale * int(phi[j, k, 1])
        A = columns[j] @ Ha @ columns[k].T
        B = columns[j] @ Hb @ columns[k].T
        return (A == ta) & (B == tb)

    m01, m02, m12 = pair_mask(0, 1), pair_mask(0, 2), pair_mask(1, 2)
    found = []
    for i0, i1 in zip(*np.nonzero(m01)):
        for i2 in np.nonzero(m02[i0] & m12[i1])[0]:
            found.append((i0, i1, i2))
    if not found:
        return GeneratorSystem(spec, p, mode, np.zeros((0, 3, 3, 2), dtype=np.int64))
    idx = np.array(found)
    T = np.empty((len(idx), 3, 3, 2), dtype=np.int64)
    for j in range(3):
        T[:, :, j, :] = _vectors_to_columns(columns[j][idx[:, j]])
    T = T[spec.congruence(T) & ~_is_scalar(T)]
    T = normalize_units(T, spec)
    T = np.unique(T.reshape(len(T), -1), axis=0).reshape(-1, 3, 3, 2)
    T = _sort_matrices(T)
    gs = GeneratorSystem(spec, p, mode, T)
    gs.inverse = _inverse_indices(gs)
    return gs


def _is_scalar(T: np.ndarray) -> np.ndarray:
    off = np.ones((3, 3), dtype=bool)
    np.fill_diagonal(off, False)
    zero_off = np.all(T[:, off] == 0, axis=(-1, -2))
    d = T[:, [0, 1, 2], [0, 1, 2], :]
    same = np.all(d[:, 0] == d[:, 1], axis=-1) & np.all(d[:, 1] == d[:, 2], axis=-1)
    return zero_off & same


def sharp(T: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    """``adj(Phi) T* Phi``, i.e. ``det(Phi) * Phi^{-1} T* Phi``."""
    ring = spec.ring
    adj = qmat_adj(spec.phi, ring)
    return qmat_mul(qmat_mul(adj, qmat_star(T, ring), ring), spec.phi, ring)


def _exact_div_det(T: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    d = spec.phi_det
    nd = d.norm()
    Z = qmat_scale(T, d.conj())
    if np.any(Z % nd):
        raise PartitionShapeError("adjugate form is not divisible by det(Phi)")
    return Z // nd


def _key(T: np.ndarray) -> bytes:
    return np.ascontiguousarray(T, dtype=np.int64).tobytes()


def _inverse_indices(gs: GeneratorSystem) -> np.ndarray:
    spec = gs.spec
    inv = normalize_units(_exact_div_det(sharp(gs.scaled, spec), spec), spec)
    lookup = {_key(t): i for i, t in enumerate(gs.scaled)}
    out = np.empty(len(gs), dtype=np.int64)
    for i, t in enumerate(inv):
        j = lookup.get(_key(t))
        if j is None:
            raise PartitionShapeError(f"inverse of generator {i} is not in the generator set")
        out[i] = j
    return out


def partition_by_neighbor(gs: GeneratorSystem) -> GeneratorSystem:
    """Split S into the classes S^i: t ~ t' iff p*det(Phi) | adj(Phi) t* Phi t'."""
    if gs.mode != "inert":
        raise PartitionShapeError("the neighbour partition is defined for inert primes")
    spec, p = gs.spec, gs.p
    d = spec.phi_det * p
    left = sharp(gs.scaled, spec)
    M = len(gs)
    rel = np.zeros((M, M), dtype=bool)
    for a in range(M):
        prod = qmat_mul(left[a][None], gs.scaled, spec.ring)
        rel[a] = divisible_by(prod, d)
    classes, seen = [], np.zeros(M, dtype=bool)
    for a in range(M):
        if seen[a]:
            continue
        members = np.nonzero(rel[a])[0]
        if not np.all(rel[np.ix_(members, members)]):
            raise PartitionShapeError("neighbour relation is not transitive")
        seen[members] = True
        classes.append(tuple(int(x) for x in members))
    K, k = gs.K, gs.k
    sizes = sorted({len(c) for c in classes})
    if len(classes) != K + 1 or sizes != [k]:
        raise PartitionShapeError(
            f"expected {K + 1} classes of size {k}, got {len(classes)} classes of sizes {sizes}"
        )
    return gs.with_classes(classes)


def generator_system(kind: str, p: int, mode: str = "inert") -> GeneratorSystem:
    gs = enumerate_generators(lattice_spec(kind), p, mode)
    expected = p * (p**3 + 1) if mode == "inert" else 2 * (p * p + p + 1)
    if len(gs) != expected:
        raise PartitionShapeError(f"found {len(gs)} generators, expected {expected}")
    return partition_by_neighbor(gs) if mode == "inert" else gs


# ---------------------------------------------------------------------------
# level, colours and the abstract axioms


def level(T: np.ndarray, p: int, m: int = 0) -> int:
    """Level of ``g = T / p^m``: minus twice the least p-adic order of an entry."""
    T = np.asarray(T)
    best = None
    for val in T.reshape(-1, 2):
        if not val.any():
            continue
        o = min(_vp(int(x), p) for x in val if x)
        best = o if best is None else min(best, o)
    if best is None:
        raise ValueError("zero matrix has no level")
    return -2 * (best - m)


def _vp(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def split_color(t: np.ndarray, p: int, spec: LatticeSpec = EISENSTEIN_LATTICE) -> int:
    det = qmat_det(np.asarray(t), spec.ring)
    c = ideal_valuation(det, p, "p", spec.ring) % 3
    if c == 0:
        raise DegenerateColor("determinant valuation is divisible by 3")
    return c


def check_bicayley_axioms(
    elements: Sequence[Hashable],
    classes: Sequence[Sequence[int]],
    multiply: Callable[[Hashable, Hashable], Hashable],
    invert: Callable[[Hashable], Hashable],
    identity: Hashable,
) -> tuple[bool, str | None]:
    """Check symmetry, 1 not in S, and s^-1 t in S^{i(s^-1)} for s != t in one class."""
    where = {}
    for ci, members in enumerate(classes):
        for a in members:
            where[elements[a]] = ci
    for s in where:
        if s == identity:
            return False, f"identity {s!r} lies in S"
        if invert(s) not in where:
            return False, f"inverse of {s!r} is not in S"
    for ci, members in enumerate(classes):
        for a in members:
            s = elements[a]
            target = where[invert(s)]
            for b in members:
                if a == b:
                    continue
                u = multiply(invert(s), elements[b])
                if where.get(u) != target:
                    return False, (
                        f"s={s!r}, t={elements[b]!r} in class {ci}: s^-1 t={u!r} "
                        f"is in class {where.get(u)} instead of {target}"
                    )
    return True, None


class ExactGroup:
    """Projective multiplication of scaled lattice elements over O[1/p].

    An element is stored as a canonical primitive integral matrix: powers of
    p are divided out and the unit ambiguity is fixed by ``normalize_units``.
    """

    def __init__(self, spec: LatticeSpec, p: int):
        self.spec, self.p = spec, p

    def canon(self, T: np.ndarray) -> bytes:
        T = np.asarray(T, dtype=np.int64)
        while T.any() and not np.any(T % self.p):
            T = T // self.p
        return _key(normalize_units(T, self.spec))

    def decode(self, key: bytes) -> np.ndarray:
        return np.frombuffer(key, dtype=np.int64).reshape(3, 3, 2)

    def multiply(self, x: bytes, y: bytes) -> bytes:
        return self.canon(qmat_mul(self.decode(x), self.decode(y), self.spec.ring))

    def invert(self, x: bytes) -> bytes:
        return self.canon(_exact_div_det(sharp(self.decode(x), self.spec), self.spec))

    @property
    def identity(self) -> bytes:
        return self.canon(to_array([[QuadInt(int(i == j), 0, self.spec.ring) for j in range(3)]
                                    for i in range(3)]))


def closed_form_p2() -> np.ndarray:
    """Scaled p=2 Eisenstein generators from the sigma/tau conjugates of A^{+-1}."""
    ring = EISENSTEIN

    def q(a, b=0):
        return QuadInt(a, b, ring)

    s3 = q(1, 2)  # 1 + 2w = sqrt(-3)
    zero = q(0)
    two_a = to_array([[q(-1), zero, s3], [zero, q(2), zero], [s3, zero, q(-1)]])
    two_a_inv = to_array([[q(-1), zero, s3.conj()], [zero, q(2), zero], [s3.conj(), zero, q(-1)]])
    w = q(0, 1)
    sigma = to_array([[q(1), zero, zero], [zero, w, zero], [zero, zero, w * w]])
    sigma_inv = qmat_star(sigma, ring)
    tau = to_array([[zero, q(1), zero], [zero, zero, q(1)], [q(1), zero, zero]])
    tau_inv = qmat_star(tau, ring)

    def power(M, e):
        out = to_array([[q(int(i == j)) for j in range(3)] for i in range(3)])
        for _ in range(e):
            out = qmat_mul(out, M, ring)
        return out

    mats = []
    for a in range(3):
        for b in range(3):
            left = qmat_mul(power(sigma, a), power(tau, b), ring)
            right = qmat_mul(power(tau_inv, b), power(sigma_inv, a), ring)
            for core in (two_a, two_a_inv):
                mats.append(qmat_mul(qmat_mul(left, core, ring), right, ring))
    T = normalize_units(np.array(mats), EISENSTEIN_LATTICE)
    return _sort_matrices(T)
