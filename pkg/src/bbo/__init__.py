"""Black-box optimizers with a batch suggest/observe contract, an ensemble
combinator, and an exhaustive single/pair benchmark harness."""

from .ensemble import EnsembleOptimizer, split_batch
from .registry import OptimizerSpec, make_optimizer
from .space import ParamSpec, SearchSpace, latin_hypercube, sample_uniform

__version__ = "0.1.0"

__all__ = [
    "EnsembleOptimizer",
    "OptimizerSpec",
    "ParamSpec",
    "SearchSpace",
    "latin_hypercube",
    "make_optimizer",
    "sample_uniform",
    "split_batch",
]
