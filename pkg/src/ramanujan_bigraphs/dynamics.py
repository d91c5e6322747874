"""Random walks, clash counts, sparsification and prime counting."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .bigraph import Bigraph, continuations, incidence_bigraph, nb_matrix
from .errors import BadParams, ShapeMismatch, SpectralIntegerMismatch
from .spectral import SpectrumReport, gram_matrix

try:
    from ._kernels import closed_walk_counts as _closed_walk_counts_ext
except ImportError:  # extension not built
    _closed_walk_counts_ext = None

HAVE_KERNELS = _closed_walk_counts_ext is not None
DFS_MAX_LENGTH = 14


# ---------------------------------------------------------------------------
# walks


@dataclass
class WalkProfile:
    kind: str
    start: int
    times: list[int]
    tv: list[float]
    t_mix: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        rows = ["t,tv"] + [f"{t},{v:.17g}" for t, v in zip(self.times, self.tv)]
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return asdict(self)


def _mixing_times(times, tv, eps_list) -> dict:
    out = {}
    for eps in eps_list:
        hit = [t for t, v in zip(times, tv) if v < eps]
        out[str(eps)] = hit[0] if hit else None
    return out


def _profile(M: sp.csr_matrix, start: int, steps: int, eps_list, kind: str) -> WalkProfile:
    n = M.shape[0]
    p = np.zeros(n)
    p[start] = 1.0
    times, tv = [], []
    for t in range(steps + 1):
        times.append(2 * t)
        tv.append(0.5 * float(np.abs(p - 1.0 / n).sum()))
        if t < steps:
            p = M @ p
    return WalkProfile(kind, start, times, tv, _mixing_times(times, tv, eps_list))


def nbrw_operator(g: Bigraph) -> sp.csr_matrix:
    """B^2 / Kk on left-to-right edges."""
    B = nb_matrix(g).astype(np.float64)
    N = g.N
    B2 = (B[:N, N:] @ B[N:, :N]).tocsr()
    return B2 / (g.K * g.k)


def nbrw_tv_profile(g: Bigraph, e0: int, t_max: int, eps_list=(0.5, 0.25),
                    M: sp.csr_matrix | None = None) -> WalkProfile:
    """TV distance of (B^2/Kk)^t 1_{e0} from uniform at even times up to t_max."""
    if not 0 <= e0 < g.N:
        raise BadParams("e0 must be a left-to-right edge")
    M = nbrw_operator(g) if M is None else M
    return _profile(M, e0, t_max // 2, eps_list, "nbrw")


def srw_operator(g: Bigraph) -> sp.csr_matrix:
    """Two SRW steps, restricted to the left side."""
    C = g.count_matrix().astype(np.float64)
    P = C @ sp.diags(1.0 / g.class_size) @ C.T / (g.K + 1)
    return P.tocsr()


def srw_full_operator(g: Bigraph) -> sp.csr_matrix:
    """One SRW step on L then R, as a column-stochastic matrix."""
    C = g.count_matrix().astype(np.float64)
    to_right = (C.T / (g.K + 1)).tocsr()  # left -> right
    to_left = (C @ sp.diags(1.0 / g.class_size)).tocsr()  # right -> left
    return sp.bmat([[None, to_left], [to_right, None]], format="csr")


def srw_tv_profile(g: Bigraph, v0: int, t_max: int, eps_list=(0.25,)) -> WalkProfile:
    return _profile(srw_operator(g), v0, t_max // 2, eps_list, "srw")


def srw_cutoff_time(K: int, k: int, n: int) -> float:
    return (K + 1) * (k + 1) / (K * k - 1) * math.log(n) / math.log(math.sqrt(K * k))


def mixing_bounds(N: int, K: int, k: int, eps: float) -> tuple[float, float]:
    """(lower bound on t_mix(1 - eps), upper window for t_mix(eps))."""
    b = math.sqrt(K * k)
    log = lambda x: math.log(x) / math.log(b)  # noqa: E731
    return log(N) - log(1 / eps), log(N) + 4 * log(1 / eps) + 3


# ---------------------------------------------------------------------------
# clash counting and mixing


@dataclass
class ClashReport:
    size_S: int
    size_T: int
    size_ST: int
    count: int
    main: float
    bound: float
    eps: float
    seed: int | None = None

    @property
    def slack(self) -> float:
        return self.bound - abs(self.count - self.main)

    def holds(self, rtol: float = 1e-9) -> bool:
        return self.slack >= -rtol * max(1.0, abs(self.main))


def clash_count(g: Bigraph, S: np.ndarray, T: np.ndarray, eps: float, seed: int | None = None) -> ClashReport:
    """Clashes Cl(S, T), counted as NB paths of length two from S to T."""
    n, K, k = g.n_left, g.K, g.k
    inS = np.zeros(n, dtype=bool)
    inT = np.zeros(n, dtype=bool)
    inS[S] = True
    inT[T] = True
    cont = continuations(g)
    from_S = inS[g.edge_left]
    count = int(inT[g.edge_left[cont[from_S]]].sum())
    s, t, st = int(inS.sum()), int(inT.sum()), int((inS & inT).sum())
    main = (K * k + k + 1 - eps**2) / n * s * t + (eps**2 - 1) * st
    bound = 2 * math.sqrt(K) * eps * math.sqrt(max(s * (1 - s / n) * t * (1 - t / n), 0.0))
    return ClashReport(s, t, st, count, main, bound, eps, seed)


@dataclass
class EMLReport:
    size_S: int
    weight_T: float
    count: int
    main: float
    bound: float
    seed: int | None = None

    @property
    def slack(self) -> float:
        return self.bound - abs(self.count - self.main)

    def holds(self, rtol: float = 1e-9) -> bool:
        return self.slack >= -rtol * max(1.0, abs(self.main))


def eml_check(g: Bigraph, S: np.ndarray, T: np.ndarray, eps: float, seed: int | None = None) -> EMLReport:
    """|E(S, T)| against (k+1)/|L| |S| w(T); on orbigraphs |T| becomes its weight."""
    n = g.n_left
    inS = np.zeros(n, dtype=bool)
    inT = np.zeros(g.n_right, dtype=bool)
    inS[S] = True
    inT[T] = True
    count = int((inS[g.edge_left] & inT[g.edge_right]).sum())
    w = g.weights
    s, wt, wR = int(inS.sum()), float(w[inT].sum()), float(w.sum())
    main = (g.k + 1) / n * s * wt
    bound = eps * math.sqrt(max(s * (1 - s / n) * wt * (1 - wt / wR), 0.0))
    return EMLReport(s, wt, count, main, bound, seed)


def random_subset(n: int, density: float, rng: np.random.Generator) -> np.ndarray:
    size = max(1, int(round(density * n)))
    return np.sort(rng.choice(n, size=size, replace=False))


# ---------------------------------------------------------------------------
# sparsification


def sparsify_norm(x: Bigraph, d: int, k: int, identification: np.ndarray | None = None) -> float:
    """|| n/(k(K+1)) A_x^2|_L - A_P^2|_L || for the line-plane bigraph P = P^{d,k}."""
    n = (k ** (d + 1) - 1) // (k - 1)
    if x.n_left != n or x.k != k:
        raise ShapeMismatch(f"|L| = {x.n_left}, k = {x.k} do not match P^({d},{k}) with n = {n}")
    P = incidence_bigraph(d, k)
    perm = np.arange(n) if identification is None else np.asarray(identification)
    AP = gram_matrix(P)[np.ix_(perm, perm)]
    T = n / (k * (x.K + 1)) * gram_matrix(x) - AP
    return float(np.max(np.abs(np.linalg.eigvalsh(T))))


def sparsify_bound(n: int, K: int, k: int, eps: float) -> float:
    return (k + 1) / k + (abs(eps**2 - 1) + 2 * math.sqrt(K) * eps) / ((K + 1) * k) * n


# ---------------------------------------------------------------------------
# closed walks, primes and zeta


def _expanded_csr(B: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """CSR with each successor repeated according to its multiplicity."""
    B = B.tocsr()
    B.sort_indices()
    data = B.data.astype(np.int64)
    indices = np.repeat(B.indices.astype(np.int64), data)
    row_tot = np.add.reduceat(data, B.indptr[:-1]) if len(data) else np.zeros(B.shape[0], np.int64)
    row_tot[np.diff(B.indptr) == 0] = 0
    indptr = np.concatenate([[0], np.cumsum(row_tot)]).astype(np.int64)
    return indptr, indices


def _closed_walk_counts_py(B: sp.csr_matrix, starts: np.ndarray, m_max: int, block: int = 256) -> np.ndarray:
    """Same split as the compiled kernel, for blocks of starts at once.

    Row r of F[a] holds walks of length a out of starts[r]; row r of R[b]
    holds walks of length b into it. tr(B^m) over the block is sum(F[a] * R[b]).
    """
    B = B.tocsr().astype(np.int64)
    BT = B.T.tocsr()
    la, lb = m_max // 2, m_max - m_max // 2
    counts = np.zeros(m_max + 1, dtype=np.int64)
    for lo in range(0, len(starts), block):
        idx = starts[lo:lo + block]
        E = sp.csr_matrix((np.ones(len(idx), dtype=np.int64), (np.arange(len(idx)), idx)),
                          shape=(len(idx), B.shape[0]))
        F, R = [E], [E]
        for _ in range(la):
            F.append(F[-1] @ B)
        for _ in range(lb):
            R.append(R[-1] @ BT)
        for m in range(1, m_max + 1):
            counts[m] += int(F[m // 2].multiply(R[m - m // 2]).sum())
    return counts


def nb_closed_walks_dfs(g: Bigraph, m_max: int, use_kernel: bool | None = None) -> np.ndarray:
    """N_m = tr(B^m) for m <= m_max, counted combinatorially (no eigenvalues).

    Only left-to-right starts are enumerated; each closed walk of even length
    has as many right-to-left positions, so the total is doubled.
    """
    if m_max > DFS_MAX_LENGTH:
        raise BadParams(f"brute-force walk counts are limited to m <= {DFS_MAX_LENGTH}")
    if 2 * g.N * float(g.K * g.k) ** ((m_max + 1) // 2) >= 2.0**63:
        raise BadParams(f"walk counts up to m = {m_max} would overflow 64-bit integers")
    B = nb_matrix(g)
    starts = np.arange(g.N, dtype=np.int64)
    use_kernel = HAVE_KERNELS if use_kernel is None else use_kernel
    if use_kernel:
        if not HAVE_KERNELS:
            raise RuntimeError("compiled kernels are not available")
        indptr, indices = _expanded_csr(B)
        rptr, rind = _expanded_csr(B.T.tocsr())
        half = np.asarray(_closed_walk_counts_ext(indptr, indices, rptr, rind, starts, m_max))
    else:
        half = _closed_walk_counts_py(B, starts, m_max)
    out = 2 * half
    out[0] = 0
    return out


def nb_closed_walks_spectral(bvals: np.ndarray, m_max: int) -> tuple[np.ndarray, float]:
    """Rounded power sums of the B-spectrum and the worst rounding error."""
    out = np.zeros(m_max + 1, dtype=np.int64)
    worst = 0.0
    pw = np.ones_like(bvals, dtype=complex)
    for m in range(1, m_max + 1):
        pw = pw * bvals
        s = pw.sum()
        r = round(s.real)
        worst = max(worst, abs(s - r))
        out[m] = r
    if worst >= 0.4:
        raise SpectralIntegerMismatch(f"spectral walk counts are {worst:.3f} away from integers")
    return out, worst


def _mobius(m: int) -> int:
    out, x, p = 1, m, 2
    while p * p <= x:
        if x % p == 0:
            x //= p
            if x % p == 0:
                return 0
            out = -out
        p += 1
    return -out if x > 1 else out


def prime_counts(N: np.ndarray) -> np.ndarray:
    """pi(m) from N_m = sum_{d | m} d pi(d)."""
    m_max = len(N) - 1
    pi = np.zeros(m_max + 1, dtype=np.int64)
    for m in range(1, m_max + 1):
        total = sum(_mobius(m // d) * int(N[d]) for d in range(1, m + 1) if m % d == 0)
        if total % m:
            raise SpectralIntegerMismatch(f"Mobius inversion at m={m} is not integral")
        pi[m] = total // m
    return pi


def walks_from_primes(pi: np.ndarray) -> np.ndarray:
    m_max = len(pi) - 1
    return np.array([0] + [sum(d * int(pi[d]) for d in range(1, m + 1) if m % d == 0)
                           for m in range(1, m_max + 1)], dtype=np.int64)


def pnt_check(pi: np.ndarray, m: int, K: int, k: int, N: int, E: int) -> tuple[float, float]:
    """(residual, bound) for primes of length 2m."""
    resid = abs(pi[2 * m] - (K * k) ** m / m - E * (-K) ** m / (2 * m))
    return float(resid), 2 * N * (K * k) ** (m / 2)


@dataclass
class ZetaReport:
    m_max: int
    N_dfs: list[int]
    N_spectral: list[int]
    rounding_error: float
    primes: list[int]
    pnt: dict
    kernel: str

    def to_dict(self) -> dict:
        return asdict(self)


def zeta_report(g: Bigraph, report: SpectrumReport, bvals: np.ndarray, m_max: int,
                girth_value: int, adj_ramanujan: bool) -> ZetaReport:
    dfs = nb_closed_walks_dfs(g, m_max)
    spec, err = nb_closed_walks_spectral(bvals, m_max)
    if not np.array_equal(dfs, spec):
        raise SpectralIntegerMismatch(f"DFS counts {dfs.tolist()} != spectral {spec.tolist()}")
    pi = prime_counts(dfs)
    pnt = {}
    for two_m in range(girth_value, m_max + 1, 2):
        resid, bound = pnt_check(pi, two_m // 2, g.K, g.k, g.N, report.E)
        pnt[str(two_m)] = {"residual": resid, "bound": bound,
                           "holds": bool(resid <= bound) if adj_ramanujan else None}
    return ZetaReport(m_max, dfs.tolist(), spec.tolist(), err, pi.tolist(), pnt,
                      "compiled" if HAVE_KERNELS else "numpy")


def ihara_denominator(bvals: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Integer coefficients of det(I - uB) = prod (1 - mu u), lowest degree first."""
    c = np.array([1.0 + 0j])
    for z in bvals:
        c = np.concatenate([c, [0]]) - z * np.concatenate([[0], c])
    r = np.round(c.real)
    err = float(np.max(np.abs(c - r)))
    if err >= tol * max(1.0, float(np.max(np.abs(r)))):
        raise SpectralIntegerMismatch(f"det(I - uB) coefficients are {err:.2e} from integers")
    return r.astype(np.int64)


def walks_from_denominator(coeffs: np.ndarray, m_max: int) -> np.ndarray:
    """N_m from -u d/du log det(I - uB), exactly in rationals."""
    c = [Fraction(int(x)) for x in coeffs] + [Fraction(0)] * (m_max + 1)
    # log-derivative: sum_m N_m u^m = -u c'(u) / c(u)
    num = [Fraction(0)] + [-(i) * c[i] for i in range(1, m_max + 1)]
    out = [Fraction(0)] * (m_max + 1)
    for m in range(1, m_max + 1):
        out[m] = num[m] - sum(c[j] * out[m - j] for j in range(1, m))
    return np.array([int(x) for x in out], dtype=np.int64)


TRIAL_DENSITIES = (0.1, 0.3, 0.5)


def pseudorandom_trials(g: Bigraph, eps: float, trials: int, seed: int) -> list[tuple[ClashReport, EMLReport]]:
    """Seeded clash and mixing-lemma checks; densities cycle through TRIAL_DENSITIES."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(trials):
        ds = TRIAL_DENSITIES[i % len(TRIAL_DENSITIES)]
        dt = TRIAL_DENSITIES[(i // len(TRIAL_DENSITIES)) % len(TRIAL_DENSITIES)]
        S = random_subset(g.n_left, ds, rng)
        T = random_subset(g.n_left, dt, rng)
        TR = random_subset(g.n_right, dt, rng)
        out.append((clash_count(g, S, T, eps, seed), eml_check(g, S, TR, eps, seed)))
    return out
