import pytest
import tempfile
from fractions import Fraction
from pathlib import Path
import json

from qwhittaker_torus import config
from qwhittaker_torus.enumeration import enumerate_sector
from qwhittaker_torus.gibbs import GibbsParams
from qwhittaker_torus.lattice import Configuration, Sector

# --- Fixtures ---

@pytest.fixture(autouse=True)
def temp_config_dir(monkeypatch):
    """Creates a temporary directory for config files and points the config module at it."""
    with tempfile.TemporaryDirectory() as tmpdir:
        tmp_path = Path(tmpdir)
        config_file_path = tmp_path / "config.json"

        monkeypatch.setattr(config, 'CONFIG_DIR', tmp_path)
        monkeypatch.setattr(config, 'CONFIG_FILE', config_file_path)
        monkeypatch.delenv(config.ENUMERATION_CAP_ENV, raising=False)

        with open(config_file_path, 'w') as f:
            json.dump(config.DEFAULT_CONFIG, f)

        yield tmp_path


@pytest.fixture
def small_sector():
    """L=5, N=2, m1=2, m2=1: the smallest sector with m1 > 1."""
    return Sector(5, 2, 2, 1)


@pytest.fixture
def tall_sector():
    return Sector(4, 3, 2, 1)


@pytest.fixture
def reference_config():
    """Row 0 at {0, 2}, row 1 at {1, 3} on the 5 x 2 torus."""
    return Configuration.from_rows(5, 2, [[0, 2], [1, 3]])


@pytest.fixture
def half_params():
    return GibbsParams(Fraction(1, 2), (Fraction(1), Fraction(2)))


@pytest.fixture(scope="session")
def small_states():
    return enumerate_sector(5, 2, 2, 1, cap=10**7)


@pytest.fixture(scope="session")
def tall_states():
    return enumerate_sector(4, 3, 2, 1, cap=10**7)

# --- Helper Functions ---

def write_configuration(path: Path, config: Configuration) -> Path:
    """Writes a configuration JSON file the CLI can read."""
    path.write_text(json.dumps(config.to_dict()))
    return path
