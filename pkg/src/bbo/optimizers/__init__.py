from .anneal import Annealing, anneal_propose
from .base import ObservationHistory, Optimizer
from .de import DifferentialEvolution, de_step
from .gpei import GPEI
from .random_search import RandomSearch
from .tpe import TPE, tpe_propose, tpe_split
from .turbo import TrustRegionState, TurboLite, trust_region_update

OPTIMIZERS = {
    "random": RandomSearch,
    "tpe": TPE,
    "gpei": GPEI,
    "turbo": TurboLite,
    "de": DifferentialEvolution,
    "anneal": Annealing,
}

# the random baseline is never paired
SEARCHABLE = ("tpe", "gpei", "turbo", "de", "anneal")
RANDOM = "random"

__all__ = [
    "OPTIMIZERS",
    "SEARCHABLE",
    "RANDOM",
    "Optimizer",
    "ObservationHistory",
    "RandomSearch",
    "TPE",
    "GPEI",
    "TurboLite",
    "DifferentialEvolution",
    "Annealing",
    "TrustRegionState",
    "trust_region_update",
    "tpe_split",
    "tpe_propose",
    "de_step",
    "anneal_propose",
]
