import pytest

from ramanujan_bigraphs.bigraph import (arithmetic_cayley, arithmetic_schreier, cayley_bigraph,
                                        complete_bigraph, incidence_bigraph, sym3_toy)
from ramanujan_bigraphs.lattice import generator_system
from ramanujan_bigraphs.spectral import gram_spectrum, with_exact_kernel


@pytest.fixture(scope="session")
def sym3():
    G, classes, inverse = sym3_toy()
    return cayley_bigraph(G, classes, inverse, {"kind": "sym3"})


@pytest.fixture(scope="session")
def k36():
    # complete (6,3)-biregular bigraph with three left vertices
    return complete_bigraph(3, 6)


@pytest.fixture(scope="session")
def p32():
    return incidence_bigraph(3, 2)


@pytest.fixture(scope="session")
def y27():
    return arithmetic_schreier(generator_system("eisenstein", 2), 7, "projective-plane")


@pytest.fixture(scope="session")
def y25():
    return arithmetic_schreier(generator_system("eisenstein", 2), 5, "isotropic")


@pytest.fixture(scope="session")
def x52_pair():
    return arithmetic_cayley(generator_system("eisenstein", 5), 2)


@pytest.fixture(scope="session")
def x52(x52_pair):
    return x52_pair[0]


def _exact_report(g):
    return with_exact_kernel(g, gram_spectrum(g))


@pytest.fixture(scope="session")
def y27_report(y27):
    return _exact_report(y27)


@pytest.fixture(scope="session")
def y25_report(y25):
    return _exact_report(y25)


@pytest.fixture(scope="session")
def x52_report(x52):
    return _exact_report(x52)


ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    import time

    def start(number, title):
        state = {"number": number, "title": title, "t0": time.perf_counter()}
        request.node._criterion = state
        return state

    yield start
    state = getattr(request.node, "_criterion", None)
    if state is None:
        return
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    elapsed = time.perf_counter() - state["t0"]
    line = f"criterion {state['number']:>2}: {'PASS' if ok else 'FAIL'}  {state['title']} ({elapsed:.1f} s)"
    ACCEPTANCE_LINES[(state["number"], request.node.nodeid)] = line
    print("\n" + line)


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    if rep.when == "call":
        item.rep_call = rep
    return rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
