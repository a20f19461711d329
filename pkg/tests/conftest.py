import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from autcstar import AlgebraElement, load_fixture  # noqa: E402

ALL_FIXTURES = ("swap", "odo", "subfix", "t3fix", "aleshin", "odo_tilde", "trivial")


@pytest.fixture(scope="session")
def fx():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_fixture(name)
        return cache[name]

    return get


def random_word(A, rng: random.Random, max_len: int):
    letters = A.letters()
    return tuple(rng.choice(letters) for _ in range(rng.randint(0, max_len)))


def random_element(A, rng: random.Random, terms: int = 3, max_len: int = 3, gaussian: bool = False):
    x = AlgebraElement.zero(A)
    for _ in range(terms):
        c = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        if gaussian:
            from autcstar.coeffs import Gaussian

            c = Gaussian(c, Fraction(rng.randint(-3, 3), rng.randint(1, 3)))
        x = x + AlgebraElement.from_word(A, random_word(A, rng, max_len), c)
    return x


def random_self_adjoint(A, rng: random.Random, terms: int = 2, max_len: int = 3):
    y = random_element(A, rng, terms, max_len, gaussian=True)
    return y + y.star()


# -- one summary line per acceptance criterion -------------------------------

_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, text): acceptance criterion number and summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    k, text = mark.args
    entry = _CRITERIA.setdefault(k, [text, True])
    if rep.failed:
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        text, ok = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {text}")
