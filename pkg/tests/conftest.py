import numpy as np
import pytest

from prodnls.grid import BoxGrid, ProductGrid, TorusSpectrum

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def record():
    def _record(number: int, title: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.append((number, title, bool(ok), detail))
        print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title} -- {detail}")


@pytest.fixture
def small_grid():
    return ProductGrid(BoxGrid(1, 8.0, 32), TorusSpectrum(1, (1.0,), 8))


@pytest.fixture
def grid_2x2():
    return ProductGrid(BoxGrid(2, 6.0, 16), TorusSpectrum(2, (1.0, 0.5), 8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
