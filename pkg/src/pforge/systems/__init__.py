"""Vector fields and the registry of named systems."""

from __future__ import annotations

from .fields import HamiltonianSystem, TwoTimeSystem, VectorField

__all__ = ["HamiltonianSystem", "TwoTimeSystem", "VectorField", "registry"]


def __getattr__(name):
    # the registry pulls in the map and symmetry modules, which import fields
    if name == "registry":
        import importlib
        return importlib.import_module(f"{__name__}.registry")
    raise AttributeError(name)
