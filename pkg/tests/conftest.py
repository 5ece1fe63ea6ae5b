import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def blobs(seed, n_classes=2, per_class=20, dim=3, spread=3.0, sizes=None):
    """Gaussian blobs with random centres; returns ``(X, labels)``."""
    rng = np.random.default_rng(seed)
    sizes = sizes or [per_class] * n_classes
    centres = rng.normal(scale=spread, size=(len(sizes), dim))
    X = np.vstack([rng.normal(size=(s, dim)) + centres[i] for i, s in enumerate(sizes)])
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return X, labels


@st.composite
def labeled_data(draw, min_classes=2, max_classes=4, min_size=2, max_size=12, max_dim=4,
                 scales=(1e-3, 1.0, 1e3)):
    seed = draw(st.integers(0, 2**32 - 1))
    k = draw(st.integers(min_classes, max_classes))
    sizes = [draw(st.integers(min_size, max_size)) for _ in range(k)]
    dim = draw(st.integers(1, max_dim))
    spread = draw(st.sampled_from([0.0, 0.5, 2.0, 10.0]))
    scale = draw(st.sampled_from(scales))
    X, labels = blobs(seed, dim=dim, spread=spread, sizes=sizes)
    return X * scale, labels


@pytest.fixture
def toy():
    return np.array([[0.0], [1.0], [10.0], [11.0]]), np.array([0, 0, 1, 1])


ACCEPTANCE = {}


def record(criterion, passed, detail):
    """Log one acceptance verdict; printed in the terminal summary."""
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[criterion]
        terminalreporter.write_line(f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
