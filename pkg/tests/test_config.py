import pytest

from pdcgm.colgen.models import DriverMode
from pdcgm.config import Config
from pdcgm.constants import DEFAULT_EPS_MAX, DEFAULT_GAMMA, DEFAULT_MAX_OUTER

ENV_VARS = (
    "PDCGM_LOG_LEVEL",
    "PDCGM_GAMMA",
    "PDCGM_EPS_MAX",
    "PDCGM_MAX_OUTER",
    "PDCGM_WORKERS",
    "PDCGM_IPM_MAX_ITER",
    "PDCGM_DELTA",
    "PDCGM_DEGREE",
)


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    return Config(env_file=tmp_path / "missing.env")


def test_defaults(clean_env):
    assert clean_env.log_level == "INFO"
    assert clean_env.gamma == DEFAULT_GAMMA
    assert clean_env.eps_max == DEFAULT_EPS_MAX
    assert clean_env.max_outer == DEFAULT_MAX_OUTER
    assert clean_env.workers == 1


@pytest.mark.parametrize("application,delta,degree", [
    ("mcnf", 1e-5, 10.0),
    ("tssp", 1e-5, 5.0),
    ("quadratic", 1e-6, 10.0),
])
def test_application_defaults(clean_env, application, delta, degree):
    cfg = clean_env.driver_config(application)
    assert cfg.delta == delta
    assert cfg.degree == degree
    assert cfg.mode is DriverMode.PDCGM


def test_environment_values(clean_env, monkeypatch):
    monkeypatch.setenv("PDCGM_GAMMA", "0.2")
    monkeypatch.setenv("PDCGM_WORKERS", "4")
    monkeypatch.setenv("PDCGM_DELTA", "1e-7")
    cfg = clean_env.driver_config("mcnf")
    assert cfg.gamma == 0.2
    assert cfg.workers == 4
    assert cfg.delta == 1e-7


def test_malformed_values_fall_back(clean_env, monkeypatch):
    monkeypatch.setenv("PDCGM_GAMMA", "wide")
    monkeypatch.setenv("PDCGM_MAX_OUTER", "2.5")
    monkeypatch.setenv("PDCGM_WORKERS", "-3")
    assert clean_env.gamma == DEFAULT_GAMMA
    assert clean_env.max_outer == DEFAULT_MAX_OUTER
    assert clean_env.workers == 1


def test_overrides_win(clean_env, monkeypatch):
    monkeypatch.setenv("PDCGM_DEGREE", "20")
    cfg = clean_env.driver_config("tssp", degree=3.0, mode="standard", max_outer=None)
    assert cfg.degree == 3.0
    assert cfg.mode is DriverMode.STANDARD
    assert cfg.max_outer == DEFAULT_MAX_OUTER


def test_dotenv_file(clean_env, monkeypatch, tmp_path):
    env_file = tmp_path / ".env"
    env_file.write_text("PDCGM_EPS_MAX=0.25\nPDCGM_LOG_LEVEL=DEBUG\n")
    # register the names with monkeypatch so the values load_dotenv sets are undone
    monkeypatch.setenv("PDCGM_EPS_MAX", "")
    monkeypatch.setenv("PDCGM_LOG_LEVEL", "")
    monkeypatch.delenv("PDCGM_EPS_MAX")
    monkeypatch.delenv("PDCGM_LOG_LEVEL")
    loaded = Config(env_file=env_file)
    assert loaded.eps_max == 0.25
    assert loaded.log_level == "DEBUG"


def test_invalid_values_are_rejected(clean_env):
    with pytest.raises(ValueError):
        clean_env.driver_config("routing")
    with pytest.raises(ValueError):
        clean_env.driver_config("mcnf", gamma=1.5)
    with pytest.raises(ValueError):
        clean_env.driver_config("mcnf", mode="fast")
