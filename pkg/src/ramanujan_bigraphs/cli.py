"""Command-line interface.

Every command writes schema-versioned JSON (to ``--out`` or stdout) and,
where it makes sense, a CSV companion file. Exit codes: 0 ok, 2 bad
configuration, 3 exceeded budget, 4 failed invariant guard.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bigraph import (DEFAULT_CLOSURE_CAP, Bigraph, arithmetic_cayley, arithmetic_schreier,
                      girth, nb_diameter)
from .classify import classify
from .complexes import complex_spectrum, containment, reference_curves
from .dynamics import (DFS_MAX_LENGTH, nbrw_tv_profile, pseudorandom_trials, srw_tv_profile,
                       zeta_report)
from .errors import BadParams, BigraphError, InvalidPrime
from .lattice import generator_system, lattice_spec
from .spectral import (DIRECT_BUDGET, GRAM_BUDGET, SCHEMA_VERSION, SpectrumReport,
                       b_spectrum_from_a, gram_spectrum, with_exact_kernel)


# ---------------------------------------------------------------------------
# serialization


def _plain(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, complex):
        return [_plain(obj.real), _plain(obj.imag)]
    return obj


def dumps(payload: dict) -> str:
    body = {"schema_version": SCHEMA_VERSION, "version": __version__, **payload}
    return json.dumps(_plain(body), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_text(text: str, path: str | None) -> None:
    if path is None:
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text)


def eigen_csv(values: np.ndarray) -> str:
    """re,im,abs,arg rows ordered by |value| descending, then by argument."""
    z = np.asarray(values, dtype=complex)
    mod = np.round(np.abs(z), 12)
    arg = np.round(np.angle(z), 12)
    order = np.lexsort((arg, -mod))
    rows = ["re,im,abs,arg"]
    rows += [f"{z[i].real:.17g},{z[i].imag:.17g},{abs(z[i]):.17g},{np.angle(z[i]):.17g}" for i in order]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# configuration


def _is_prime(m: int) -> bool:
    return m >= 2 and all(m % d for d in range(2, math.isqrt(m) + 1))


def validate_q(kind: str, p: int, q: int) -> None:
    spec = lattice_spec(kind)
    if not _is_prime(q):
        raise InvalidPrime(f"q={q} is not prime")
    if q == p:
        raise InvalidPrime(f"q must differ from p={p}")
    if q in spec.excluded_primes:
        raise InvalidPrime(f"q={q} is excluded for the {kind} lattice")


def build_graph(kind: str, p: int, q: int, schreier: str | None, cap: int) -> Bigraph:
    validate_q(kind, p, q)
    gs = generator_system(kind, p, "inert")
    if schreier:
        return arithmetic_schreier(gs, q, schreier)
    return arithmetic_cayley(gs, q, cap=cap)[0]


def lattice_options(f):
    opts = [
        click.option("--lattice", "kind", type=click.Choice(["eisenstein", "gauss", "mumford"]),
                     default="eisenstein", show_default=True),
        click.option("--p", "p", type=int, help="Lattice prime."),
        click.option("--q", "q", type=int, help="Reduction prime."),
        click.option("--schreier", type=click.Choice(["projective-plane", "isotropic"]), default=None,
                     help="Build the Schreier bigraph for this point action."),
        click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="Load a bigraph JSON instead of constructing one."),
        click.option("--closure-cap", type=int, default=DEFAULT_CLOSURE_CAP, show_default=True),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON output path."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def load_graph(kind, p, q, schreier, input_path, closure_cap) -> Bigraph:
    if input_path:
        return Bigraph.from_json(Path(input_path).read_text())
    if p is None or q is None:
        raise BadParams("--p and --q are required unless --input is given")
    return build_graph(kind, p, q, schreier, closure_cap)


def spectrum_for(g: Bigraph, budget: int, exact: bool) -> SpectrumReport:
    report = gram_spectrum(g, budget=budget)
    return with_exact_kernel(g, report) if exact else report


class Guarded(click.Group):
    """Maps library errors to exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except BigraphError as exc:
            click.echo(f"error ({type(exc).__name__}): {exc}", err=True)
            sys.exit(exc.exit_code)


@click.group(cls=Guarded)
@click.version_option(__version__)
def main():
    """Construct and analyse arithmetic biregular bigraphs."""


@main.command()
@lattice_options
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Edge list CSV.")
def construct(kind, p, q, schreier, input_path, closure_cap, out, csv_path):
    """Build a Cayley or Schreier bigraph."""
    g = load_graph(kind, p, q, schreier, input_path, closure_cap)
    g.check()
    write_text(g.to_json(), out)
    if csv_path:
        Path(csv_path).write_text(g.to_csv())


@main.command()
@lattice_options
@click.option("--gram-budget", type=int, default=GRAM_BUDGET, show_default=True)
@click.option("--exact/--no-exact", default=True, show_default=True, help="Modular-rank kernel check.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Non-backtracking eigenvalues as CSV.")
def spectrum(kind, p, q, schreier, input_path, closure_cap, out, gram_budget, exact, csv_path):
    """Adjacency spectrum and excessiveness."""
    g = load_graph(kind, p, q, schreier, input_path, closure_cap)
    report = spectrum_for(g, gram_budget, exact)
    write_text(dumps({"command": "spectrum", "graph": g.header(), "spectrum": report.to_dict()}), out)
    if csv_path:
        Path(csv_path).write_text(eigen_csv(b_spectrum_from_a(report)))


@main.command(name="classify")
@lattice_options
@click.option("--gram-budget", type=int, default=GRAM_BUDGET, show_default=True)
@click.option("--tol", type=float, default=None, help="Classification tolerance.")
def classify_cmd(kind, p, q, schreier, input_path, closure_cap, out, gram_budget, tol):
    """Ramanujan verdict."""
    g = load_graph(kind, p, q, schreier, input_path, closure_cap)
    report = spectrum_for(g, gram_budget, True)
    verdict = classify(report, tol)
    write_text(dumps({"command": "classify", "graph": g.header(), "verdict": verdict.to_dict()}), out)


@main.command()
@lattice_options
@click.option("--kind", "walk_kind", type=click.Choice(["nbrw", "srw"]), default="nbrw", show_default=True)
@click.option("--start", type=int, default=0, show_default=True, help="Start edge (nbrw) or vertex (srw).")
@click.option("--t-max", type=int, default=20, show_default=True, help="Even horizon.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
def walk(kind, p, q, schreier, input_path, closure_cap, out, walk_kind, start, t_max, csv_path):
    """Total-variation profile of a random walk at even times."""
    if t_max < 0 or t_max % 2:
        raise BadParams("--t-max must be a non-negative even integer")
    g = load_graph(kind, p, q, schreier, input_path, closure_cap)
    prof = nbrw_tv_profile(g, start, t_max) if walk_kind == "nbrw" else srw_tv_profile(g, start, t_max)
    write_text(dumps({"command": "walk", "graph": g.header(), "profile": prof.to_dict()}), out)
    if csv_path:
        Path(csv_path).write_text(prof.to_csv())


@main.command()
@lattice_options
@click.option("--m-max", type=int, default=12, show_default=True)
@click.option("--gram-budget", type=int, default=GRAM_BUDGET, show_default=True)
def zeta(kind, p, q, schreier, input_path, closure_cap, out, m_max, gram_budget):
    """Closed non-backtracking walks, prime counts and the prime number theorem check."""
    if m_max > DFS_MAX_LENGTH:
        raise BadParams(f"--m-max is capped at {DFS_MAX_LENGTH}")
    g = load_graph(kind, p, q, schreier, input_path, closure_cap)
    report = spectrum_for(g, gram_budget, True)
    verdict = classify(report, extras=False)
    z = zeta_report(g, report, b_spectrum_from_a(report), m_max, girth(g), verdict.adj)
    write_text(dumps({"command": "zeta", "graph": g.header(), "zeta": z.to_dict()}), out)


@main.command()
@lattice_options
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gram-budget", type=int, default=GRAM_BUDGET, show_default=True)
def clash(kind, p, q, schreier, input_path, closure_cap, out, trials, seed, gram_budget):
    """Seeded clash-counting and mixing-lemma trials."""
    g = load_graph(kind, p, q, schreier, input_path, closure_cap)
    report = spectrum_for(g, gram_budget, True)
    verdict = classify(report)
    eps = verdict.biexpander_eps
    if eps is None:
        raise BadParams("graph is not a biexpander; clash bounds need biexpander_eps")
    rows = []
    for trial, (c, e) in enumerate(pseudorandom_trials(g, eps, trials, seed)):
        rows.append({"trial": trial, "size_S": c.size_S, "size_T": c.size_T,
                     "clash_count": c.count, "clash_main": c.main, "clash_bound": c.bound,
                     "clash_ok": c.holds(), "eml_count": e.count, "eml_main": e.main,
                     "eml_bound": e.bound, "eml_ok": e.holds()})
    violations = sum(not (r["clash_ok"] and r["eml_ok"]) for r in rows)
    write_text(dumps({"command": "clash", "graph": g.header(), "eps": eps, "seed": seed,
                      "violations": violations, "trials": rows}), out)


@main.command(name="complex")
@click.option("--lattice", "kind", type=click.Choice(["eisenstein"]), default="eisenstein", show_default=True)
@click.option("--p", "p", type=int, required=True, help="Split lattice prime.")
@click.option("--q", "q", type=int, required=True, help="Reduction prime.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Eigenvalues plus sampled reference curves.")
def complex_cmd(kind, p, q, out, csv_path):
    """Hecke A1 spectrum of a split-prime quotient complex."""
    validate_q(kind, p, q)
    cs = complex_spectrum(p, q, kind)
    inside = containment(cs)
    write_text(dumps({"command": "complex", "complex": cs.to_dict(), "contained": inside,
                      "all_contained": all(inside)}), out)
    if csv_path:
        rows = ["series,re,im"] + [f"eigenvalue,{re:.17g},{im:.17g}" for re, im in cs.eigenvalues]
        for name, pts in reference_curves(p).items():
            rows += [f"{name},{re:.17g},{im:.17g}" for re, im in pts]
        Path(csv_path).write_text("\n".join(rows) + "\n")


@main.command()
@lattice_options
@click.option("--gram-budget", type=int, default=GRAM_BUDGET, show_default=True)
@click.option("--direct-budget", type=int, default=DIRECT_BUDGET, show_default=True,
              help="Largest 2N for which structural extras (girth, NB diameter) are computed.")
@click.option("--tol", type=float, default=None)
def pipeline(kind, p, q, schreier, input_path, closure_cap, out, gram_budget, direct_budget, tol):
    """construct, spectrum and classify in one combined report."""
    g = load_graph(kind, p, q, schreier, input_path, closure_cap)
    g.check()
    report = spectrum_for(g, gram_budget, True)
    verdict = classify(report, tol)
    payload = {"command": "pipeline", "graph": g.header(), "spectrum": report.to_dict(),
               "verdict": verdict.to_dict()}
    if 2 * g.N <= direct_budget:
        payload["structure"] = {"girth": girth(g), "nb_diameter": nb_diameter(g)}
    write_text(dumps(payload), out)


if __name__ == "__main__":
    main()
