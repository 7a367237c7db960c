"""Bundled example maps."""
from importlib import resources

from ..env import Environment, load_environment

NAMES = ("illustrative", "large")


def load_map(name: str) -> Environment:
    return load_environment(resources.files(__name__).joinpath(f"{name}.yaml").read_text())


def map_path(name: str):
    return resources.files(__name__).joinpath(f"{name}.yaml")
