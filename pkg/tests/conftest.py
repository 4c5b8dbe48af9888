import pytest
import numpy as np
from code_catalog import builtin, stack2d, stack3d
from config import ConfigurationManager
from phase_algebra import PhaseRing
from wall_search import classify

SEED = 20240611

@pytest.fixture(scope="session")
def ring2():
    """Qubit ring with eighth roots of unity"""
    return PhaseRing(2, 3)

@pytest.fixture(scope="session")
def ring3():
    """Qutrit ring"""
    return PhaseRing(3, 1)

@pytest.fixture(scope="session")
def sc2d():
    """2D surface code catalog entry"""
    return builtin("sc2d")

@pytest.fixture(scope="session")
def sc2d_result(sc2d):
    """Classification of the 2D surface code"""
    return classify(sc2d.spec)

@pytest.fixture(scope="session")
def stack2d_result():
    """Classification of two stacked 2D surface codes"""
    return classify(stack2d(2).spec)

@pytest.fixture(scope="session")
def stack3d_result():
    """Classification of three stacked 3D surface codes"""
    return classify(stack3d(3).spec)

@pytest.fixture(scope="session")
def levinwen_odd():
    """Levin-Wen entry for odd L"""
    return builtin("levinwen_odd")

@pytest.fixture(scope="session")
def levinwen_result(levinwen_odd):
    """Bulk classification of two Levin-Wen codes"""
    return classify(levinwen_odd.spec)

@pytest.fixture(scope="function")
def rng():
    """Seeded random generator for sampled property checks"""
    return np.random.default_rng(SEED)

@pytest.fixture(scope="function")
def config_dir(tmp_path):
    """Temporary configuration directory with base and test layers"""
    (tmp_path / "base_config.yml").write_text(
        "search:\n  parallelism: 3\n  group_element_cap: 500\n"
        "logging:\n  level: INFO\n"
    )
    (tmp_path / "test_config.yml").write_text(
        "search:\n  group_element_cap: 700\n"
    )
    return tmp_path

@pytest.fixture(scope="function")
def test_config(config_dir, monkeypatch):
    """ConfigurationManager reading the temporary directory in the test environment"""
    monkeypatch.setenv("WALLS_ENV", "test")
    for var in ("WALLS_PARALLELISM", "WALLS_LOG_LEVEL", "WALLS_GROUP_CAP"):
        monkeypatch.delenv(var, raising=False)
    return ConfigurationManager(config_dir=str(config_dir))
