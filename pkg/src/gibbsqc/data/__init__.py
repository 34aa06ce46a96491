"""Example I/O folders shipped with the package."""

from importlib import resources
from pathlib import Path

EXAMPLES = ("2nodes", "3nodes", "4nodeFullyConnected", "Asia")


def example_folder(name: str) -> Path:
    if name not in EXAMPLES:
        raise KeyError(f"no example folder {name!r}; have {EXAMPLES}")
    return Path(str(resources.files(__name__) / name))
