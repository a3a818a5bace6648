import numpy as np
import pytest

from projlift import conventions, gallery


@pytest.fixture(scope="session")
def conv():
    return conventions.active()


@pytest.fixture(scope="session")
def sl2_example():
    return gallery.get_example("sl2")


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    duration = terminalreporter._sessionstarttime
    import time

    terminalreporter.write_line(
        f"total suite wall time: {time.time() - duration:.1f} s (budget 60 s)"
    )
