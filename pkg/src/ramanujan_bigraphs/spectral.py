"""Adjacency and non-backtracking spectra of bigraphs.

Adjacency spectra come from the |L| x |L| matrix A^2|_L = C W^{-1} C^T where
C counts edges and W holds the right weights |r|/(k+1).  Every nontrivial
positive eigenvalue lambda produces the four B-eigenvalues +-mu^+, +-mu^-
with mu^{+-} = sqrt(e^{+-i theta} sqrt(Kk)), and the remaining B-spectrum is
fixed by dimension counts.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import asdict, dataclass, field
from collections import deque

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment

from .bigraph import SCHEMA_VERSION, Bigraph, nb_matrix
from .errors import BudgetExceeded, CountMismatch, OutOfRange, RankMismatch

GRAM_BUDGET = 8192
DIRECT_BUDGET = 4000


@dataclass
class SpectrumReport:
    K: int
    k: int
    n: int
    n_right: int
    N: int
    gram_eigenvalues: list[float]  # ascending eigenvalues of A^2|_L
    kernel_tol: float
    E_numeric: int
    E_exact: int | None = None
    weighted: bool = False
    labels: dict = field(default_factory=dict)

    @property
    def E(self) -> int:
        return self.E_exact if self.E_exact is not None else self.E_numeric

    @property
    def N_X(self) -> int:
        return self.E + self.n_right - self.n

    @property
    def chi(self) -> int:
        # equals n(Kk-1)/(k+1) + 1 when |R| = n(K+1)/(k+1)
        return self.N - self.n - self.n_right + 1

    @property
    def pf(self) -> float:
        return math.sqrt((self.K + 1) * (self.k + 1))

    @property
    def lambdas(self) -> np.ndarray:
        """Positive adjacency eigenvalues, descending, pf first."""
        ev = np.sort(np.asarray(self.gram_eigenvalues))[::-1]
        ev = ev[: self.n - self.E]
        return np.sqrt(np.clip(ev, 0.0, None))

    @property
    def nontrivial(self) -> np.ndarray:
        return self.lambdas[1:]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        d["derived"] = {
            "E": self.E,
            "N_X": self.N_X,
            "chi": self.chi,
            "pf": self.pf,
            "lambdas": self.lambdas.tolist(),
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SpectrumReport":
        d = json.loads(text)
        d.pop("schema_version", None)
        d.pop("derived", None)
        return cls(**d)


def gram_matrix(g: Bigraph) -> np.ndarray:
    """Dense A^2|_L."""
    C = g.count_matrix().astype(np.float64)
    Cw = C @ sp.diags(1.0 / g.weights)
    return np.asarray((Cw @ C.T).todense())


def gram_spectrum(g: Bigraph, budget: int = GRAM_BUDGET) -> SpectrumReport:
    if g.n_left > budget:
        raise BudgetExceeded(f"|L| = {g.n_left} exceeds the dense Gram budget {budget}")
    ev = np.linalg.eigvalsh(gram_matrix(g))
    Kk = g.K * g.k
    tol = math.sqrt(np.finfo(float).eps) * Kk
    E = int(np.count_nonzero(ev < tol))
    return SpectrumReport(g.K, g.k, g.n_left, g.n_right, g.N, ev.tolist(), tol, E,
                          weighted=g.weighted, labels=dict(g.labels))


# ---------------------------------------------------------------------------
# exact excessiveness


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    r = int(math.isqrt(m))
    return all(m % d for d in range(2, r + 1))


def primes_above(lo: int, count: int = 2) -> list[int]:
    out, m = [], lo + 1
    while len(out) < count:
        if _is_prime(m):
            out.append(m)
        m += 1
    return out


def _reduce(x: np.ndarray, pf: float) -> None:
    """In-place x -= rint(x/p)*p; exact on integers below 2^53, result in (-1.5p, 1.5p)."""
    q = np.rint(x * (1.0 / pf))
    q *= pf
    x -= q


def modular_rank(M: np.ndarray, p: int, panel: int = 64) -> int:
    """Rank of an integer matrix over F_p by blocked elimination in float64.

    Residues are kept loosely reduced in (-1.5p, 1.5p). Each panel is
    factored on a contiguous copy; the trailing block is then updated with
    one matrix product, which stays exact as long as 4 * panel * p^2 < 2^53.
    """
    if 4 * panel * float(p) ** 2 >= 2.0**53:
        raise ValueError("prime too large for exact float64 elimination")
    pf = float(p)
    A = np.remainder(np.array(M, dtype=np.float64), pf)
    n_rows, n_cols = A.shape
    rank = 0
    for c0 in range(0, n_cols, panel):
        c1 = min(c0 + panel, n_cols)
        r0 = rank
        P = A[r0:, c0:c1].copy()  # panel rows r0.. in local coordinates
        perm = np.arange(r0, n_rows)
        pivots = []
        for jj in range(c1 - c0):
            t = rank - r0
            if rank == n_rows:
                break
            col = P[t:, jj]
            np.remainder(col, pf, out=col)  # exact zero test
            nz = np.flatnonzero(col)
            if not len(nz):
                continue
            i = t + nz[0]
            if i != t:
                P[[t, i]] = P[[i, t]]
                perm[[t, i]] = perm[[i, t]]
            inv = float(pow(int(P[t, jj]), -1, p))
            mult = P[t + 1:, jj] * inv
            _reduce(mult, pf)
            rest = P[t + 1:, jj + 1:]
            rest -= np.outer(mult, P[t, jj + 1:])
            _reduce(rest, pf)
            P[t + 1:, jj] = mult  # multipliers stored in place
            pivots.append(jj)
            rank += 1
        A[r0:] = A[perm]
        A[r0:, c0:c1] = P
        m = rank - r0
        if m == 0 or c1 == n_cols:
            continue
        cols = [c0 + jj for jj in pivots]
        # forward substitution on the pivot rows, then one trailing product
        U = A[r0:rank, c1:]
        for t in range(1, m):
            U[t] -= A[r0 + t, cols[:t]] @ U[:t]
            _reduce(U[t], pf)
        if rank < n_rows:
            T = A[rank:, c1:]
            T -= A[rank:, cols] @ U
            _reduce(T, pf)
    return rank


def integer_gram(g: Bigraph) -> np.ndarray:
    """Integer matrix with the same rank as A^2|_L: C diag(m/|r|) C^T."""
    sizes = g.class_size.astype(np.int64)
    m = int(np.lcm.reduce(sizes))
    C = g.count_matrix().astype(np.int64)
    G = C @ sp.diags(m // sizes) @ C.T
    return np.asarray(G.todense(), dtype=np.int64)


def exact_excessiveness(g: Bigraph, primes: list[int] | None = None,
                        report: SpectrumReport | None = None) -> int:
    """dim ker A|_L from modular ranks at two primes above 2N."""
    G = integer_gram(g)
    if primes is None:
        primes = primes_above(max(2 * g.N, 1 << 20), 2)
    ranks = [modular_rank(G, p) for p in primes]
    if len(set(ranks)) != 1:
        raise RankMismatch(f"modular ranks {ranks} at primes {primes} disagree")
    E = g.n_left - ranks[0]
    if report is not None and report.E_numeric != E:
        raise RankMismatch(f"exact kernel {E} != numeric kernel {report.E_numeric}")
    return E


def with_exact_kernel(g: Bigraph, report: SpectrumReport) -> SpectrumReport:
    report.E_exact = exact_excessiveness(g, report=report)
    return report


# ---------------------------------------------------------------------------
# theta and mu


def theta_of_lambda(lam: float, K: int, k: int) -> complex:
    pf = math.sqrt((K + 1) * (k + 1))
    if lam < -1e-12 or lam > pf * (1 + 1e-12):
        raise OutOfRange(f"lambda = {lam} is outside [0, {pf}]")
    x = (lam * lam - K - k) / (2 * math.sqrt(K * k))
    if x > 1:
        return complex(0.0, -math.acosh(x))
    if x < -1:
        return complex(math.pi, math.acosh(-x))
    return complex(math.acos(x), 0.0)


def _upper_sqrt(z: complex) -> complex:
    r = cmath.sqrt(z)
    if r.imag < 0 or (r.imag == 0 and r.real < 0):
        r = -r
    return r


def mu_of_lambda(lam: float, K: int, k: int) -> tuple[complex, complex]:
    th = theta_of_lambda(lam, K, k)
    s = math.sqrt(K * k)
    return _upper_sqrt(cmath.exp(1j * th) * s), _upper_sqrt(cmath.exp(-1j * th) * s)


# ---------------------------------------------------------------------------
# B-spectrum


def block_structure_counts(report: SpectrumReport, tol: float = 1e-9) -> dict:
    """Block counts of the unitary decomposition of B."""
    K, k = report.K, report.k
    lo, hi = (math.sqrt(K) - math.sqrt(k)) ** 2, (math.sqrt(K) + math.sqrt(k)) ** 2
    lam2 = report.nontrivial**2
    scale = tol * math.sqrt(K * k)
    inside = (lam2 >= lo - scale) & (lam2 <= hi + scale)
    counts = {
        "pf": 1,
        "type_2a": int(np.count_nonzero(inside)),
        "type_2b": int(np.count_nonzero(~inside)),
        "E": report.E,
        "N_X": report.N_X,
        "chi": report.chi,
        "degenerate": int(np.count_nonzero(np.abs(lam2 - lo) <= scale) + np.count_nonzero(np.abs(lam2 - hi) <= scale)),
    }
    total = 2 + 4 * (counts["type_2a"] + counts["type_2b"]) + 2 * (report.E + report.N_X + report.chi)
    if total != 2 * report.N or counts["type_2a"] + counts["type_2b"] != report.n - 1 - report.E:
        raise CountMismatch(f"block dimensions sum to {total}, expected {2 * report.N}")
    return counts


def b_spectrum_from_a(report: SpectrumReport) -> np.ndarray:
    K, k = report.K, report.k
    s = math.sqrt(K * k)
    vals: list[complex] = [s, -s]
    for lam in report.nontrivial:
        mp, mm = mu_of_lambda(float(lam), K, k)
        vals += [mp, -mp, mm, -mm]
    vals += [1j * math.sqrt(K), -1j * math.sqrt(K)] * report.E
    vals += [1j * math.sqrt(k), -1j * math.sqrt(k)] * report.N_X
    vals += [1.0, -1.0] * report.chi
    out = np.array(vals, dtype=complex)
    if len(out) != 2 * report.N or report.N_X < 0 or report.chi < 0:
        raise CountMismatch(f"B-spectrum has {len(out)} values, expected {2 * report.N}")
    return out


def b_direct(g: Bigraph, budget: int = DIRECT_BUDGET) -> np.ndarray:
    if 2 * g.N > budget:
        raise BudgetExceeded(f"2N = {2 * g.N} exceeds the direct eigensolve budget {budget}")
    return np.linalg.eigvals(nb_matrix(g).toarray().astype(float))


def multiset_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest pairing distance under an optimal matching of two multisets."""
    a, b = np.asarray(a), np.asarray(b)
    if len(a) != len(b):
        return math.inf
    cost = np.abs(a[:, None] - b[None, :])
    ri, ci = linear_sum_assignment(cost)
    return float(cost[ri, ci].max()) if len(a) else 0.0


def char_poly_coeffs(roots: np.ndarray) -> np.ndarray:
    """Coefficients of prod (1 - z u), lowest degree first."""
    c = np.array([1.0 + 0j])
    for z in roots:
        c = np.concatenate([c, [0]]) - z * np.concatenate([[0], c])
    return c


def product_form_coeffs(report: SpectrumReport) -> np.ndarray:
    """det(I - uB) assembled from the block decomposition, lowest degree first."""
    K, k = report.K, report.k
    poly = np.polynomial.polynomial
    c = np.array([1.0])
    for _ in range(report.chi):
        c = poly.polymul(c, [1, 0, -1])
    c = poly.polymul(c, [1, 0, -K * k])
    for _ in range(report.E):
        c = poly.polymul(c, [1, 0, K])
    for _ in range(report.N_X):
        c = poly.polymul(c, [1, 0, k])
    c = c.astype(complex)
    for lam in report.nontrivial:
        mp, mm = mu_of_lambda(float(lam), K, k)
        c = poly.polymul(c, [1, 0, -mp * mp])
        c = poly.polymul(c, [1, 0, -mm * mm])
    return c


# ---------------------------------------------------------------------------
# eigenvectors


def vertex_eigenfunction(g: Bigraph, f_left: np.ndarray, lam: float) -> np.ndarray:
    """Extend a left eigenvector of A^2|_L to L and R with A f = lam f."""
    C = g.count_matrix().astype(np.float64)
    f_right = (C.T @ f_left) / (g.weights * lam)
    return np.concatenate([f_left, f_right])


def adjacency_apply(g: Bigraph, f: np.ndarray) -> np.ndarray:
    C = g.count_matrix().astype(np.float64)
    fl, fr = f[: g.n_left], f[g.n_left:]
    return np.concatenate([C @ fr, (C.T @ fl) / g.weights])


def edge_parts(g: Bigraph, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values f(l) and f(r) at the ends of every edge."""
    return f[g.edge_left], f[g.n_left + g.edge_right]


def F_vector(g: Bigraph, f: np.ndarray, lam: float, mu: complex) -> np.ndarray:
    fl, fr = edge_parts(g, f)
    K = g.K
    out_ = lam * fl - (mu * mu + K) * fr
    in_ = -mu * lam * fl + (mu + K / mu) * fr
    return np.concatenate([out_, in_])


def G_vector(g: Bigraph, f: np.ndarray, lam: float, mu: complex) -> np.ndarray:
    fl, fr = edge_parts(g, f)
    k = g.k
    out_ = (mu + k / mu) * fl - mu * lam * fr
    in_ = -(mu * mu + k) * fl + lam * fr
    return np.concatenate([out_, in_])


def tilde(F: np.ndarray) -> np.ndarray:
    N = len(F) // 2
    return np.concatenate([F[:N], -F[N:]])


def build_F_G_vectors(g: Bigraph, f: np.ndarray, lam: float) -> dict[str, np.ndarray]:
    """F^+-, G^+- and their tilde partners for an A-eigenfunction f on L and R."""
    resid = np.linalg.norm(adjacency_apply(g, f) - lam * f)
    if resid > 1e-10 * max(1.0, np.linalg.norm(f)) * max(1.0, lam):
        raise ValueError(f"f is not a {lam}-eigenfunction (residual {resid:.2e})")
    mp, mm = mu_of_lambda(lam, g.K, g.k)
    out = {}
    for sign, mu in (("+", mp), ("-", mm)):
        out["F" + sign] = F_vector(g, f, lam, mu)
        out["G" + sign] = G_vector(g, f, lam, mu)
        out["F~" + sign] = tilde(out["F" + sign])
        out["G~" + sign] = tilde(out["G" + sign])
    out["mu+"], out["mu-"] = mp, mm
    return out


def fundamental_cycle(g: Bigraph, edge: int) -> list[int]:
    """Edges of the cycle closed by ``edge`` over a BFS tree from left vertex 0.

    The result alternates [a_1, b_1, a_2, b_2, ...] where a_i joins l_i to
    r_i and b_i joins l_{i+1} to r_i.
    """
    nL = g.n_left
    adj: list[list[tuple[int, int]]] = [[] for _ in range(nL + g.n_right)]
    for e, (a, b) in enumerate(zip(g.edge_left.tolist(), g.edge_right.tolist())):
        adj[a].append((nL + b, e))
        adj[nL + b].append((a, e))
    parent = {0: (None, None)}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w, e in adj[u]:
            if w not in parent:
                parent[w] = (u, e)
                queue.append(w)
    if any(parent[v][1] == edge for v in parent):
        raise ValueError("edge belongs to the spanning tree")

    def path_to_root(v):
        out = [v]
        while parent[v][0] is not None:
            v = parent[v][0]
            out.append(v)
        return out

    l, r = int(g.edge_left[edge]), nL + int(g.edge_right[edge])
    pl, pr = path_to_root(l), path_to_root(r)
    common = set(pl) & set(pr)
    top = next(v for v in pl if v in common)
    # walk l -> ... -> top -> ... -> r, then close with the edge r -> l
    edges = [parent[v][1] for v in pl[: pl.index(top)]]
    edges += [parent[v][1] for v in pr[: pr.index(top)]][::-1]
    return edges + [edge]


def cycle_vectors(g: Bigraph, cycle: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """The +1 and -1 eigenvectors p_gamma, n_gamma of a closed cycle."""
    N = g.N
    p = np.zeros(2 * N)
    n = np.zeros(2 * N)
    for i in range(0, len(cycle), 2):
        a, b = cycle[i], cycle[i + 1]
        p[a], p[b + N], p[a + N], p[b] = 1, 1, -1, -1
        n[a], n[a + N], n[b + N], n[b] = 1, 1, -1, -1
    return p, n


# ---------------------------------------------------------------------------
# full spectra


def adjacency_spectrum(report: SpectrumReport) -> np.ndarray:
    """All |V| adjacency eigenvalues, descending."""
    lam = report.lambdas
    vals = np.concatenate([lam, -lam, np.zeros(report.E + report.N_X)])
    return np.sort(vals)[::-1]


def laplace_spectrum(report: SpectrumReport) -> np.ndarray:
    """Spectrum of D - A on the |V| vertices, ascending."""
    K, k = report.K, report.k
    lam = report.nontrivial
    root = np.sqrt((K - k) ** 2 + 4 * lam**2)
    vals = np.concatenate([
        [0.0, K + k + 2.0],
        (K + k + 2 - root) / 2,
        (K + k + 2 + root) / 2,
        np.full(report.N_X, k + 1.0),
        np.full(report.E, K + 1.0),
    ])
    return np.sort(vals)
