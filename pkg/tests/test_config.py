import numpy as np
import pytest

from lwmcmc import ConfigError, SamplerConfig, load_config
from lwmcmc.config import parse_config_text
from lwmcmc.weights import INF, ONE_HOT


def _cfg(text):
    return SamplerConfig.from_mapping(parse_config_text(text))


def test_full_text_config():
    cfg = _cfg("""
        # table-1 style run
        n = 500
        kernel = hmc
        steps = 30        # alias for M
        delta = 0.05
        mass = identity
        propagation = hmc_endpoint
        nu = inf
        target = indirect_obs
        y = 1
        sigma = 0.1
        seed = 7
        init = ridge
    """)
    assert cfg.M == 30 and cfg.kernel == "hmc" and cfg.nu == INF and cfg.seed == 7
    assert np.array_equal(cfg.initial_state(), [1.0, 1.0])


def test_lambda_and_origin():
    cfg = _cfg("lambda = 0.45\ntarget = indirect_obs\ninit = origin\nnu = onehot")
    assert cfg.lam == 0.45 and cfg.nu == ONE_HOT
    assert np.array_equal(cfg.initial_state(), [0.0, 0.0])


def test_explicit_init():
    assert np.array_equal(_cfg("init = 0.5, -1").initial_state(), [0.5, -1.0])
    with pytest.raises(ConfigError) as e:
        _cfg("init = 1,2,3")
    assert e.value.key == "init"


@pytest.mark.parametrize("text,key", [
    ("lambda = -1", "lambda"),
    ("lambda = abc", "lambda"),
    ("n = 0", "n"),
    ("M = 0", "M"),
    ("N = 0", "N"),
    ("delta = 0", "delta"),
    ("kernel = nuts", "kernel"),
    ("propagation = mtm", "propagation"),
    ("target = banana", "target"),
    ("nu = 0", "nu"),
    ("nu = 3\nM = 2", "nu"),
    ("propagate_nu = 4", "propagate_nu"),
    ("propagation = hmc_endpoint", "propagation"),
    ("kernel = hmc\npropagation = mh", "propagation"),
    ("mass = diag", "mass"),
    ("sigma = 0\ntarget = indirect_obs", "sigma"),
    ("bogus = 1", "bogus"),
    ("no equals sign", "line 1"),
    ("steps = 4\nM = 5", "steps"),
])
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as e:
        _cfg(text)
    assert e.value.key == key
    assert key in str(e.value)


def test_mass_matrix_validation():
    with pytest.raises(ConfigError):
        SamplerConfig(kernel="hmc", propagation="hmc_endpoint", mass=np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ConfigError):
        SamplerConfig(kernel="hmc", propagation="hmc_endpoint", mass=np.array([[1.0, 0.5], [0.0, 1.0]]))
    ok = SamplerConfig(kernel="hmc", propagation="hmc_endpoint", mass=np.diag([2.0, 1.0]))
    assert np.array_equal(ok.mass_matrix, np.diag([2.0, 1.0]))


def test_items_round_trip():
    cfg = SamplerConfig(n=20, M=3, propagation="weighted_draw", nu=1, propagate_nu=INF, seed=4, burnin=5,
                        init=(0.1, 0.2))
    back = SamplerConfig.from_mapping(cfg.to_items())
    assert back == cfg


def test_load_config(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("n = 10\nM = 2\npropagation = weighted_draw\n")
    assert load_config(p).M == 2
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.cfg")


def test_draw_nu_default():
    assert SamplerConfig(nu=1).draw_nu == 1
    assert SamplerConfig(nu=ONE_HOT).draw_nu == INF
    assert SamplerConfig(nu=ONE_HOT, propagate_nu=1).draw_nu == 1
