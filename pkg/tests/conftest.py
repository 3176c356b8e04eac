import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mimostab import Polynomial, RationalFunction, TransferMatrix  # noqa: E402
from mimostab.suite import load_corpus_system  # noqa: E402


def rf(num, den=(1.0,)):
    """Rational function from ascending coefficient lists."""
    return RationalFunction(Polynomial(list(num)), Polynomial(list(den)))


def siso(num, den=(1.0,)):
    return TransferMatrix([[rf(num, den)]])


@pytest.fixture(scope="session")
def corpus():
    def load(name, **params):
        return load_corpus_system(name, **params).matrix

    return load


@pytest.fixture(scope="session")
def p1(corpus):
    return corpus("example1_p1")


@pytest.fixture(scope="session")
def p2(corpus):
    return corpus("example1_p2")


@pytest.fixture(scope="session")
def ex3(corpus):
    return corpus("example3")


@pytest.fixture(scope="session")
def ex4(corpus):
    return corpus("example4")


@pytest.fixture(scope="session")
def ex5(corpus):
    return corpus("example5")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
