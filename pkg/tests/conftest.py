import numpy as np
import pytest

from qisdp.instance import GeneratorConfig, QipInstance, generate_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def neg_one_instance():
    """n=1, Qhat=[-1], ternary: SDP optimum -1 (certified by hand)."""
    return QipInstance(qhat=np.array([[-1.0]]), lhat=np.zeros(1), chat=0.0, domains=[(-1, 1)])


@pytest.fixture
def identity_instance():
    """n=2, Qhat=I, ternary: SDP optimum 0 (certified by hand)."""
    return QipInstance(qhat=np.eye(2), lhat=np.zeros(2), chat=0.0, domains=[(-1, 1)] * 2)


def random_instance(rng, n, max_width=2, p=None):
    """Generated spectrum plus random integer ranges of width 1..max_width."""
    p = int(rng.integers(0, 101)) if p is None else p
    base = generate_instance(GeneratorConfig(n=n, p=p, seed=int(rng.integers(2**32))))
    domains = []
    for _ in range(n):
        lo = int(rng.integers(-5, 5))
        domains.append((lo, lo + int(rng.integers(1, max_width + 1))))
    return QipInstance(qhat=base.qhat, lhat=base.lhat, chat=float(rng.uniform(-1, 1)), domains=domains)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        ok, detail = RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
