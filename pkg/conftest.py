# Pytest fixtures and configuration
import pytest
import yaml
from pathlib import Path

from core.ballots import BallotSpace, Profile


@pytest.fixture(scope="session")
def config():
    """Load configuration for tests."""
    config_path = Path(__file__).parent / "config" / "settings.yaml"

    with open(config_path, 'r') as f:
        config = yaml.safe_load(f)

    return config


@pytest.fixture(scope="session")
def test_data():
    """Load reference vectors and worked profiles."""
    data_path = Path(__file__).parent / "config" / "test_data" / "reference_vectors.yaml"

    with open(data_path, 'r') as f:
        data = yaml.safe_load(f)

    return data


@pytest.fixture(scope="session")
def strict3():
    """Three candidates, strict full rankings."""
    return BallotSpace(3)


@pytest.fixture(scope="session")
def tied3():
    """Three candidates, ties and truncation allowed."""
    return BallotSpace(3, allow_ties=True, allow_truncation=True)


@pytest.fixture
def make_profile():
    """Build a profile from a {ranking text: count} mapping."""
    def _make(space, counts):
        return Profile.from_text(space, [(n, text) for text, n in counts.items()])
    return _make


# Pytest hooks
def pytest_configure(config):
    """Configure pytest."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow"
    )
    config.addinivalue_line(
        "markers", "exhaustive: exhaustive sweeps"
    )


def pytest_collection_modifyitems(config, items):
    """Modify test items during collection."""
    # Add markers automatically based on test location
    for item in items:
        if "tests_oracle" in str(item.fspath):
            item.add_marker(pytest.mark.exhaustive)
        if "test_cli" in str(item.fspath):
            item.add_marker(pytest.mark.cli)
        if "test_properties" in str(item.fspath):
            item.add_marker(pytest.mark.property)
