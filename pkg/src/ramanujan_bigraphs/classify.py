"""Ramanujan taxonomy, biexpander constants and Satake labels."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NotUnitaryShape
from .spectral import SpectrumReport, block_structure_counts, mu_of_lambda


@dataclass
class RamanujanVerdict:
    weakly: bool
    adj: bool
    fully: bool
    tol: float
    offending: dict = field(default_factory=dict)
    borderline: list = field(default_factory=list)
    biexpander_eps: float | None = None
    satake_histogram: dict | None = None
    density_exponent: float | None = None
    density_ok: bool | None = None

    @property
    def label(self) -> str:
        if self.fully:
            return "fully Ramanujan"
        if self.adj:
            return "adj-Ramanujan"
        if self.weakly:
            return "weakly Ramanujan"
        return "not Ramanujan"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["label"] = self.label
        return d


def default_tol(K: int, k: int) -> float:
    return 1e-8 * math.sqrt(K * k)


def _is_prime(m: int) -> bool:
    return m >= 2 and all(m % d for d in range(2, int(math.isqrt(m)) + 1))


def classify(report: SpectrumReport, tol: float | None = None, extras: bool = True) -> RamanujanVerdict:
    K, k = report.K, report.k
    tol = default_tol(K, k) if tol is None else tol
    s = math.sqrt(K * k)
    rho = math.sqrt(K) + math.sqrt(k)
    lam = report.nontrivial
    weak_margin = lam - rho
    adj_margin = np.abs(lam**2 - K - k) - 2 * s
    weak_bad = weak_margin > tol
    adj_bad = adj_margin > tol
    offending = {
        "weakly": [[float(x), float(m)] for x, m in zip(lam[weak_bad], weak_margin[weak_bad])],
        "adj": [[float(x), float(m)] for x, m in zip(lam[adj_bad], adj_margin[adj_bad])],
        "excessive": report.E,
    }
    near = (np.abs(weak_margin) <= 10 * tol) | (np.abs(adj_margin) <= 10 * tol)
    borderline = [float(x) for x in lam[near]]
    weakly = not weak_bad.any()
    adj = not adj_bad.any()
    verdict = RamanujanVerdict(weakly, adj, adj and report.E == 0, tol, offending, borderline)
    if extras:
        verdict.biexpander_eps = biexpander_eps(report)
        exponent, ok = density_check(report)
        verdict.density_exponent, verdict.density_ok = exponent, ok
        try:
            verdict.satake_histogram = satake_histogram(report, tol)
        except NotUnitaryShape:
            verdict.satake_histogram = None
    return verdict


def biexpander_eps(report: SpectrumReport) -> float | None:
    """Smallest eps with the nontrivial nonzero spectrum in +-[sqrt K - eps, sqrt K + eps]."""
    if report.E > 0:
        return None
    lam = report.nontrivial
    sK = math.sqrt(report.K)
    eps = float(np.max(np.abs(lam - sK))) if len(lam) else 0.0
    return eps if eps < sK else None


def satake_parameter(lam: float, q: int) -> complex:
    mu, _ = mu_of_lambda(lam, q**3, q)
    return mu * mu / (q * q)


def satake_histogram(report: SpectrumReport, tol: float | None = None) -> dict:
    K, k = report.K, report.k
    if K != k**3 or not _is_prime(k):
        raise NotUnitaryShape(f"(K, k) = ({K}, {k}) is not of the form (q^3, q) with q prime")
    tol = default_tol(K, k) if tol is None else tol
    counts = block_structure_counts(report, tol / math.sqrt(K * k))
    z = [satake_parameter(float(x), k) for x in report.nontrivial]
    return {
        "trivial": 1,
        "Steinberg": report.chi,
        "principal": counts["type_2a"],
        "complementary": counts["type_2b"],
        "A-type": report.E,
        "B-type": report.N_X,
        "z": [[c.real, c.imag] for c in z],
    }


def density_check(report: SpectrumReport, slack: float = 0.05) -> tuple[float, bool]:
    """Exponent log E / log |V| against 3/8 + slack; -inf when E = 0."""
    if report.E == 0:
        return -math.inf, True
    exponent = math.log(report.E) / math.log(report.n + report.n_right)
    return exponent, exponent <= 3 / 8 + slack
