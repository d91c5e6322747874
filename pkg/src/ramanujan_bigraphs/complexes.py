"""Colored Hecke operators on split-prime quotient complexes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bigraph import FiniteGroup, close_group, reduce_generators
from .errors import BadParams, BudgetExceeded
from .lattice import EISENSTEIN_LATTICE, enumerate_generators, lattice_spec, split_color

DENSE_BUDGET = 8192
TORUS_GRID = 512
CIRCLE_GRID = 65536
REFINE_GRID = 64
REFINE_CANDIDATES = 6


def tempered_point(a, b, p: int):
    alpha, beta = np.exp(1j * a), np.exp(1j * b)
    return p * (alpha + beta + np.conj(alpha * beta))


def endoscopic_point(t, p: int):
    z = np.exp(1j * t)
    return z * p**1.5 + p / z**2 + z * math.sqrt(p)


def _torus_distance(z: complex, p: int) -> tuple[float, float]:
    h = 2 * math.pi / TORUS_GRID
    grid = np.arange(TORUS_GRID) * h
    d = np.abs(tempered_point(grid[:, None], grid[None, :], p) - z)
    flat = np.argsort(d, axis=None)[:REFINE_CANDIDATES]
    best = float(d.flat[flat[0]])
    for idx in flat:
        a0, b0 = grid[idx // TORUS_GRID], grid[idx % TORUS_GRID]
        width = h
        for _ in range(2):
            offs = np.linspace(-width, width, REFINE_GRID)
            A, Bv = a0 + offs[:, None], b0 + offs[None, :]
            dd = np.abs(tempered_point(A, Bv, p) - z)
            k = int(np.argmin(dd))
            a0, b0 = A[k // REFINE_GRID, 0], Bv[0, k % REFINE_GRID]
            best = min(best, float(dd.flat[k]))
            width = 2 * width / (REFINE_GRID - 1)
    # the map has Lipschitz constant at most 2p per coordinate
    res = 2 * p * math.sqrt(2) * width
    return best, res


def _curve_distance(z: complex, p: int) -> tuple[float, float]:
    h = 2 * math.pi / CIRCLE_GRID
    t = np.arange(CIRCLE_GRID) * h
    d = np.abs(endoscopic_point(t, p) - z)
    k = int(np.argmin(d))
    t0, best, width = t[k], float(d[k]), h
    for _ in range(2):
        tt = t0 + np.linspace(-width, width, REFINE_GRID)
        dd = np.abs(endoscopic_point(tt, p) - z)
        k = int(np.argmin(dd))
        t0, best = tt[k], min(best, float(dd[k]))
        width = 2 * width / (REFINE_GRID - 1)
    lip = p**1.5 + 2 * p + math.sqrt(p)
    return best, lip * width


def region_distance(z: complex, p: int) -> tuple[float, float, float]:
    """(distance to T_p, distance to the endoscopic curve, grid resolution)."""
    dt, rt = _torus_distance(complex(z), p)
    de, re_ = _curve_distance(complex(z), p)
    return dt, de, max(rt, re_)


def in_tempered_region(w: complex, p: int, tol: float = 1e-7) -> bool:
    """Root test: w/p = a + b + conj(ab) with |a| = |b| = 1.

    That holds iff x^3 - u x^2 + conj(u) x - 1 has all roots on the unit circle.
    The cubic is self-inversive, so by Cohn's theorem this is equivalent to the
    derivative having its roots in the closed unit disk, which avoids the poor
    conditioning of triple roots.
    """
    u = w / p
    crit = np.roots([3, -2 * u, np.conj(u)])
    return bool(np.all(np.abs(crit) <= 1 + tol))


@dataclass
class ComplexSpectrum:
    p: int
    q: int
    eigenvalues: list
    normality_residual: float
    trace: int
    injective: bool
    perron: int
    distances: list = field(default_factory=list)
    trivial: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def split_generators(p: int, kind: str = "eisenstein"):
    spec = lattice_spec(kind)
    gs = enumerate_generators(spec, p, mode="split")
    colors = np.array([split_color(t, p, spec) for t in gs.scaled])
    return gs, colors


def hecke_a1(G: FiniteGroup, color1: np.ndarray) -> np.ndarray:
    """(A_1 f)(g) = sum over color-1 generators s of f(g s)."""
    n = len(G)
    if n > DENSE_BUDGET:
        raise BudgetExceeded(f"|G| = {n} exceeds the dense budget {DENSE_BUDGET}")
    A = np.zeros((n, n))
    rows = np.repeat(np.arange(n), len(color1))
    np.add.at(A, (rows, G.rmul[:, color1].ravel()), 1.0)
    return A


def complex_spectrum(p: int, q: int, kind: str = "eisenstein", distances: bool = True) -> ComplexSpectrum:
    spec = lattice_spec(kind)
    if spec is not EISENSTEIN_LATTICE:
        raise BadParams("split complexes are implemented for the Eisenstein lattice")
    gs, colors = split_generators(p, kind)
    red, codes = reduce_generators(gs, q)
    G = close_group(codes, red.field)
    color1 = np.flatnonzero(colors == 1)
    perron = p * p + p + 1
    if len(color1) != perron:
        raise BadParams(f"{len(color1)} color-1 generators, expected {perron}")
    keys = {tuple(r) for r in codes[color1]}
    A = hecke_a1(G, color1)
    ev = np.linalg.eigvals(A)
    order = np.lexsort((np.angle(ev), -np.abs(ev)))
    ev = ev[order]
    resid = float(np.abs(A @ A.T - A.T @ A).max())
    trace = int(round(np.trace(A)))
    out = ComplexSpectrum(p, q, [[z.real, z.imag] for z in ev], resid, trace,
                          len(keys) == perron, perron)
    cube = perron * np.exp(2j * math.pi * np.arange(3) / 3)
    out.trivial = [bool(np.min(np.abs(cube - z)) < 1e-9 * perron) for z in ev]
    if distances:
        for z in ev:
            dt, de, res = region_distance(z, p)
            out.distances.append({"tempered": dt, "endoscopic": de, "resolution": res,
                                  "trivial": float(np.min(np.abs(cube - z)))})
    return out


def containment(cs: ComplexSpectrum) -> list[bool]:
    """Each eigenvalue near T_p, the endoscopic curve, or a trivial value."""
    slack = 1e-6 * cs.p**1.5
    return [min(d["tempered"], d["endoscopic"], d["trivial"]) <= d["resolution"] + slack
            for d in cs.distances]


def reference_curves(p: int, samples: int = 720) -> dict:
    """Boundary of T_p (a deltoid) and the endoscopic curve as polylines."""
    t = np.linspace(0, 2 * math.pi, samples)
    deltoid = tempered_point(t, t, p)  # alpha = beta traces the boundary
    curve = endoscopic_point(t, p)
    return {"tempered_boundary": [[z.real, z.imag] for z in deltoid],
            "endoscopic": [[z.real, z.imag] for z in curve]}
