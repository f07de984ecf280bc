"""Haar-measure integrals over loop words, thickening limits, and their Euclidean analogues."""

from .groups import SU2, U1, CompactGroup, FiniteGroup, ball_sample, cyclic_group, make_group, symmetric_group
from .integral import CylindricalFunction, consistency_check, integrate, integrate_exact, integrate_mc
from .limits import ExtrapolationError, LimitReport, limit_estimate
from .montecarlo import Estimate, derive_seed, mc_mean
from .support import TailExperiment, continuity_cylinder_measure, tail_bound_experiment
from .thickening import (Extension, ThickeningSpec, equisliceability_probe, extension_independence,
                         restricted_integral, restricted_limit)
from .words import Alphabet, Word, WordMap, compose_word_maps, parse_word

__all__ = [
    "SU2", "U1", "CompactGroup", "FiniteGroup", "ball_sample", "cyclic_group", "make_group",
    "symmetric_group", "CylindricalFunction", "consistency_check", "integrate", "integrate_exact",
    "integrate_mc", "ExtrapolationError", "LimitReport", "limit_estimate", "Estimate", "derive_seed",
    "mc_mean", "TailExperiment", "continuity_cylinder_measure", "tail_bound_experiment", "Extension",
    "ThickeningSpec", "equisliceability_probe", "extension_independence", "restricted_integral",
    "restricted_limit", "Alphabet", "Word", "WordMap", "compose_word_maps", "parse_word",
]
