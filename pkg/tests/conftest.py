import numpy as np
import pytest


def random_convex_polygon(rng: np.random.Generator, n: int) -> np.ndarray:
    """Counter-clockwise convex n-gon with jittered vertices on a circle."""
    # jittered equal spacing keeps every angular gap below pi (strictly convex)
    base = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False) + rng.uniform(-0.25, 0.25, n) * (2 * np.pi / n)
    r = rng.uniform(0.5, 2.0)
    c = rng.uniform(-3.0, 3.0, 2)
    return c + r * np.column_stack([np.cos(base), np.sin(base)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config._acceptance_lines = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])


@pytest.fixture
def record(request):
    """Record the one-line verdict of an acceptance criterion."""

    def _record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config._acceptance_lines[n] = line
        print(line)
        return ok

    return _record
