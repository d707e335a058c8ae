"""Bipartite distance-regular graphs: polynomial families, module blueprints
for thin irreducible T-modules of endpoint at most 2, and a dense oracle that
checks them on concrete graphs."""
from .arrays import IntersectionArray, doubled_odd_array, hypercube_array, validate
from .modules import (
    ModuleBlueprint,
    blueprint_endpoint0,
    blueprint_endpoint1,
    blueprint_endpoint2,
    classify_eta,
    tilde,
)
from .spectra import Spectrum, spectrum

__all__ = [
    "IntersectionArray",
    "ModuleBlueprint",
    "Spectrum",
    "blueprint_endpoint0",
    "blueprint_endpoint1",
    "blueprint_endpoint2",
    "classify_eta",
    "doubled_odd_array",
    "hypercube_array",
    "spectrum",
    "tilde",
    "validate",
]
