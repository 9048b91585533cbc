import functools
import time

import pytest

CRITERIA = {}


def criterion(number, title, budget_s=None):
    """Record a pass/fail line for an acceptance criterion; also enforce its time budget."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                fn(*args, **kwargs)
                elapsed = time.perf_counter() - t0
                if budget_s is not None:
                    assert elapsed < budget_s, f"took {elapsed:.1f} s, budget {budget_s} s"
            except BaseException as exc:
                line = f"criterion {number:>2} FAIL  {title}  ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
                CRITERIA[number] = line
                print(line)
                raise
            line = f"criterion {number:>2} PASS  {title}  ({time.perf_counter() - t0:.2f} s)"
            CRITERIA[number] = line
            print(line)

        return run

    return wrap


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240601)
