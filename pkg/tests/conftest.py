import numpy as np
import pytest

from lwmcmc import SamplerConfig, run_lwmcmc


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_rw_chain():
    cfg = SamplerConfig(n=400, M=3, kernel="rw", lam=1.0, propagation="weighted_draw", nu=1, seed=11)
    return run_lwmcmc(cfg)


@pytest.fixture(scope="session")
def small_hmc_chain():
    cfg = SamplerConfig(n=300, M=8, kernel="hmc", delta=0.1, propagation="hmc_endpoint", nu=1, seed=3)
    return run_lwmcmc(cfg)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one "CRITERION k: PASS/FAIL - detail" line for the run summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(label, passed, detail=""):
        line = f"CRITERION {label}: {'PASS' if passed else 'FAIL'} - {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
