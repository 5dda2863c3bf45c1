"""Energy spectra of surface-group representations: lengths, twists, harmonic maps."""
from .errors import (ConstructionError, DegenerateConfiguration, InconsistentMapError,
                     InvalidInput, PreconditionError)
from .fuchsian import GroupRep, genus2_octagon_rep, octagon_curve_pairs, perturb_rep
from .hypgeo import H2Point, H3Point, MoebiusMap, translation_length
from .surface_words import CurvePair, Word

__version__ = "0.1.0"

__all__ = [
    "ConstructionError", "CurvePair", "DegenerateConfiguration", "GroupRep", "H2Point", "H3Point",
    "InconsistentMapError", "InvalidInput", "MoebiusMap", "PreconditionError", "Word",
    "genus2_octagon_rep", "octagon_curve_pairs", "perturb_rep", "translation_length",
]
