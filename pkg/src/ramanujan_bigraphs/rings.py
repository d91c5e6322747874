"""Exact arithmetic in imaginary quadratic orders and their residue fields.

An order is described by the minimal polynomial of its generator,
``tau**2 = t*tau - n``.  Elements are pairs ``(a, b)`` meaning ``a + b*tau``.
Matrices over an order are stored as integer arrays of shape ``(..., 3, 3, 2)``
so that the enumeration code can work on whole batches at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import RamifiedPrime, ZeroElement

_INT64_GUARD = 2**62


@dataclass(frozen=True)
class RingSpec:
    label: str
    t: int
    n: int

    @property
    def disc(self) -> int:
        return self.t * self.t - 4 * self.n

    def ramified(self, q: int) -> bool:
        return self.disc % q == 0

    def units(self) -> list["QuadInt"]:
        """All elements of norm one, in a fixed order."""
        out = []
        for a in range(-2, 3):
            for b in range(-2, 3):
                if a * a + self.t * a * b + self.n * b * b == 1:
                    out.append(QuadInt(a, b, self))
        return out

    def splits(self, q: int) -> bool:
        if self.ramified(q):
            return False
        return bool(_roots_mod(self.t, self.n, q))


EISENSTEIN = RingSpec("Eisenstein", -1, 1)
GAUSS = RingSpec("Gauss", 0, 1)
MUMFORD7 = RingSpec("Mumford7", -1, 2)

RINGS = {r.label: r for r in (EISENSTEIN, GAUSS, MUMFORD7)}


@dataclass(frozen=True)
class QuadInt:
    a: int
    b: int
    ring: RingSpec = EISENSTEIN

    def _check(self, other: "QuadInt") -> None:
        if other.ring != self.ring:
            raise ValueError("elements live in different rings")

    def __add__(self, other: "QuadInt") -> "QuadInt":
        self._check(other)
        return QuadInt(self.a + other.a, self.b + other.b, self.ring)

    def __sub__(self, other: "QuadInt") -> "QuadInt":
        self._check(other)
        return QuadInt(self.a - other.a, self.b - other.b, self.ring)

    def __neg__(self) -> "QuadInt":
        return QuadInt(-self.a, -self.b, self.ring)

    def __mul__(self, other: "QuadInt | int") -> "QuadInt":
        if isinstance(other, int):
            return QuadInt(self.a * other, self.b * other, self.ring)
        self._check(other)
        t, n = self.ring.t, self.ring.n
        a, b, c, d = self.a, self.b, other.a, other.b
        return QuadInt(a * c - n * b * d, a * d + b * c + t * b * d, self.ring)

    __rmul__ = __mul__

    def conj(self) -> "QuadInt":
        return QuadInt(self.a + self.ring.t * self.b, -self.b, self.ring)

    def norm(self) -> int:
        t, n = self.ring.t, self.ring.n
        return self.a * self.a + t * self.a * self.b + n * self.b * self.b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def divides(self, other: "QuadInt") -> bool:
        """True when ``other / self`` lies in the order."""
        nd = self.norm()
        if nd == 0:
            return other.is_zero()
        z = other * self.conj()
        return z.a % nd == 0 and z.b % nd == 0

    def exact_div(self, d: "QuadInt") -> "QuadInt":
        nd = d.norm()
        z = self * d.conj()
        if z.a % nd or z.b % nd:
            raise ValueError(f"{d} does not divide {self}")
        return QuadInt(z.a // nd, z.b // nd, self.ring)

    def __repr__(self) -> str:
        sym = {"Eisenstein": "w", "Gauss": "i", "Mumford7": "l"}[self.ring.label]
        return f"({self.a}{self.b:+d}{sym})"


def qi_arith(x: QuadInt, y: QuadInt, op: str, ring: RingSpec | None = None) -> QuadInt:
    if ring is not None and (x.ring != ring or y.ring != ring):
        raise ValueError("ring mismatch")
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown op {op!r}")


def qi_norm_conj(x: QuadInt) -> tuple[int, QuadInt]:
    return x.norm(), x.conj()


# ---------------------------------------------------------------------------
# residue fields


def _roots_mod(t: int, n: int, q: int) -> list[int]:
    return [r for r in range(q) if (r * r - t * r + n) % q == 0]


class FiniteField:
    """F_q or F_{q^2}; elements are integer codes ``c0 + q*c1``.

    The quadratic extension is F_q[x]/(x^2 - t x + n) using the ring's own
    minimal polynomial, so that reduction sends tau to the class of x.
    """

    def __init__(self, q: int, degree: int, t: int = 0, n: int = 0):
        self.q = q
        self.degree = degree
        self.t = t % q
        self.n = n % q
        self.size = q**degree
        codes = np.arange(self.size)
        c0, c1 = codes % q, codes // q
        if degree == 1:
            add = (c0[:, None] + c0[None, :]) % q
            mul = (c0[:, None] * c0[None, :]) % q
        else:
            a0, a1 = c0[:, None], c1[:, None]
            b0, b1 = c0[None, :], c1[None, :]
            add = (a0 + b0) % q + q * ((a1 + b1) % q)
            r0 = (a0 * b0 - self.n * a1 * b1) % q
            r1 = (a0 * b1 + a1 * b0 + self.t * a1 * b1) % q
            mul = r0 + q * r1
        self.add = add.astype(np.int64)
        self.mul = mul.astype(np.int64)
        self.neg = np.array([self._neg(c) for c in range(self.size)], dtype=np.int64)
        inv = np.zeros(self.size, dtype=np.int64)
        for c in range(1, self.size):
            inv[c] = int(np.nonzero(self.mul[c] == 1)[0][0])
        self.inv = inv
        frob = np.zeros(self.size, dtype=np.int64)
        for c in range(self.size):
            frob[c] = self.power(c, q)
        self.frob = frob

    def _neg(self, c: int) -> int:
        q = self.q
        return (-(c % q)) % q + q * ((-(c // q)) % q)

    def power(self, c: int, e: int) -> int:
        out, base = 1, c
        while e:
            if e & 1:
                out = int(self.mul[out, base])
            base = int(self.mul[base, base])
            e >>= 1
        return out

    def from_int(self, v):
        return np.asarray(v, dtype=np.int64) % self.q

    def __repr__(self) -> str:
        return f"GF({self.q}^{self.degree})"


@dataclass(frozen=True)
class GFElem:
    field: FiniteField
    code: int

    def __add__(self, other: "GFElem") -> "GFElem":
        return GFElem(self.field, int(self.field.add[self.code, other.code]))

    def __sub__(self, other: "GFElem") -> "GFElem":
        return self + (-other)

    def __neg__(self) -> "GFElem":
        return GFElem(self.field, int(self.field.neg[self.code]))

    def __mul__(self, other: "GFElem") -> "GFElem":
        return GFElem(self.field, int(self.field.mul[self.code, other.code]))

    def frobenius(self) -> "GFElem":
        return GFElem(self.field, int(self.field.frob[self.code]))

    @property
    def coords(self) -> tuple[int, int]:
        q = self.field.q
        return self.code % q, self.code // q


@dataclass(frozen=True)
class Reduction:
    """Ring homomorphism from an order onto a residue field."""

    ring: RingSpec
    q: int
    field: FiniteField
    tau: int  # code of the image of tau
    root: int | None  # chosen root when q splits

    def codes(self, a, b) -> np.ndarray:
        """Vectorised image of ``a + b*tau``."""
        f = self.field
        a = np.asarray(a, dtype=np.int64) % self.q
        b = np.asarray(b, dtype=np.int64) % self.q
        return f.add[a, f.mul[b, self.tau]]

    def conj_codes(self, a, b) -> np.ndarray:
        t = self.ring.t
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return self.codes(a + t * b, -b)

    def metadata(self) -> dict:
        return {"q": self.q, "degree": self.field.degree, "root": self.root}


@lru_cache(maxsize=None)
def reduction(ring: RingSpec, q: int) -> Reduction:
    if ring.ramified(q):
        raise RamifiedPrime(f"{q} divides the discriminant {ring.disc} of the {ring.label} ring")
    roots = _roots_mod(ring.t, ring.n, q)
    if roots:
        r = min(roots)
        return Reduction(ring, q, FiniteField(q, 1), r, r)
    field = FiniteField(q, 2, ring.t, ring.n)
    return Reduction(ring, q, field, q, None)  # code q is the class of x


def reduce_mod_q(x: QuadInt, q: int, ring: RingSpec | None = None) -> GFElem:
    red = reduction(ring or x.ring, q)
    return GFElem(red.field, int(red.codes(x.a, x.b)))


def p_divides_matrix(T, p: int) -> bool:
    """True iff every coordinate of every entry is divisible by p."""
    if isinstance(T, np.ndarray):
        return bool(np.all(T % p == 0))
    return all(e.a % p == 0 and e.b % p == 0 for row in T for e in row)


@lru_cache(maxsize=None)
def prime_generator(ring: RingSpec, p: int, root: int) -> QuadInt:
    """A generator of the prime ideal (p, tau - root) of norm p."""
    bound = int(2 * p**0.5) + 2
    best = None
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            x = QuadInt(a, b, ring)
            if x.norm() == p and (a + b * root) % p == 0:
                key = (abs(a) + abs(b), a, b)
                if best is None or key < best[0]:
                    best = (key, x)
    if best is None:
        raise ValueError(f"no generator of norm {p} found")
    return best[1]


def ideal_valuation(x: QuadInt, p: int, which: str = "p", ring: RingSpec | None = None) -> int:
    """Valuation of ``x`` at one of the two primes above a split ``p``.

    ``which='p'`` uses the ideal ``(p, tau - r)`` with ``r`` the smallest
    root of the minimal polynomial mod p; ``which='conj'`` uses the other.
    """
    ring = ring or x.ring
    if x.is_zero():
        raise ZeroElement("valuation of zero")
    roots = _roots_mod(ring.t, ring.n, p)
    if len(roots) != 2:
        raise ValueError(f"{p} does not split in the {ring.label} ring")
    r = min(roots) if which == "p" else max(roots)
    pi = prime_generator(ring, p, r)
    v = 0
    while (x.a + x.b * r) % p == 0:
        x = x.exact_div(pi)
        v += 1
    return v


# ---------------------------------------------------------------------------
# batched 3x3 matrices over an order, arrays of shape (..., 3, 3, 2)


def check_range(arr: np.ndarray) -> np.ndarray:
    if arr.size and int(np.abs(arr).max()) >= _INT64_GUARD:
        raise OverflowError("matrix entries left the 64-bit range")
    return arr


def qmat_mul(X: np.ndarray, Y: np.ndarray, ring: RingSpec) -> np.ndarray:
    a, b = X[..., 0], X[..., 1]
    c, d = Y[..., 0], Y[..., 1]
    ac = np.matmul(a, c)
    bd = np.matmul(b, d)
    re = ac - ring.n * bd
    im = np.matmul(a, d) + np.matmul(b, c) + ring.t * bd
    return check_range(np.stack([re, im], axis=-1))


def qmat_conj(X: np.ndarray, ring: RingSpec) -> np.ndarray:
    return np.stack([X[..., 0] + ring.t * X[..., 1], -X[..., 1]], axis=-1)


def qmat_star(X: np.ndarray, ring: RingSpec) -> np.ndarray:
    """Conjugate transpose."""
    return np.swapaxes(qmat_conj(X, ring), -2, -3)


def qmat_scale(X: np.ndarray, z: QuadInt) -> np.ndarray:
    a, b = X[..., 0], X[..., 1]
    t, n = z.ring.t, z.ring.n
    re = a * z.a - n * b * z.b
    im = a * z.b + b * z.a + t * b * z.b
    return np.stack([re, im], axis=-1)


def qmat_identity(scale: int = 1) -> np.ndarray:
    out = np.zeros((3, 3, 2), dtype=np.int64)
    for i in range(3):
        out[i, i, 0] = scale
    return out


def to_array(M) -> np.ndarray:
    """Convert a nested list of QuadInt into the array layout."""
    return np.array([[[e.a, e.b] for e in row] for row in M], dtype=np.int64)


def from_array(A: np.ndarray, ring: RingSpec) -> list[list[QuadInt]]:
    return [[QuadInt(int(A[i, j, 0]), int(A[i, j, 1]), ring) for j in range(3)] for i in range(3)]


def qmat_det(A: np.ndarray, ring: RingSpec) -> QuadInt:
    M = from_array(A, ring)
    zero = QuadInt(0, 0, ring)
    det = zero
    for (i, j, k), sgn in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                           ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1)):
        term = M[0][i] * M[1][j] * M[2][k]
        det = det + term if sgn > 0 else det - term
    return det


def qmat_adj(A: np.ndarray, ring: RingSpec) -> np.ndarray:
    """Adjugate, so that ``adj(A) @ A = det(A) * I``."""
    M = from_array(A, ring)
    out = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [x for x in range(3) if x != j]
            c = [x for x in range(3) if x != i]
            minor = M[r[0]][c[0]] * M[r[1]][c[1]] - M[r[0]][c[1]] * M[r[1]][c[0]]
            out[i][j] = minor if (i + j) % 2 == 0 else -minor
    return to_array(out)


def divisible_by(X: np.ndarray, d: QuadInt) -> np.ndarray:
    """Entrywise test ``d | X``; reduces over the last three axes."""
    nd = d.norm()
    Z = qmat_scale(X, d.conj())
    return np.all(Z % nd == 0, axis=(-1, -2, -3))
