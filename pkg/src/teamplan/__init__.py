"""Multi-robot team planning: PDDL planning, dependency graphs, coalition allocation."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def data_path(*parts: str) -> Path:
    """Path to a bundled data file (domains, worlds, fixtures)."""
    return Path(str(resources.files(__name__).joinpath("data", *parts)))
