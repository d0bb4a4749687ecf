from importlib import resources
from pathlib import Path

import pytest


def shared_problem(name: str) -> Path:
    """Path of a problem file bundled with the LP lane (shared schema)."""
    ref = resources.files("barrierlp").joinpath("fixtures").joinpath(
        f"{name}.json")
    with resources.as_file(ref) as p:
        return Path(p)


@pytest.fixture(scope="session")
def problem_path():
    return shared_problem
