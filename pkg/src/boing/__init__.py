"""Random-forest-guided local Bayesian optimization.

A two-stage optimizer: a global random-forest surrogate proposes a promising
region of the search space, a subregion is carved out of the forest's split
structure around that proposal, and a local GP whose prior is augmented by
the points outside the subregion picks the next evaluation.  A stochastic
meta-controller can interleave this with a trust-region optimizer for
exploration on larger budgets.
"""

from .space import Box, SearchSpace, box_volume_fraction, points_in_box, sobol_init
from .data import Dataset, Observation
from .gp import GaussianProcess, KernelParams, log_marginal_likelihood, matern52_kernel
from .forest import RandomForestSurrogate, SubregionResult, TreeNode, extract_subregion
from .lgpga import AugmentedLocalGP, dense_reference_predict, inducing_count
from .acquisition import expected_improvement, log_expected_improvement, optimize_acquisition
from .boing import BoingConfig, BoingOptimizer
from .turbo import TrustRegionConfig, TrustRegionState, TurboOptimizer
from .boing_plus import BoingPlusOptimizer, switch_probability
from .objectives import get_objective

__version__ = "0.1.0"

__all__ = [
    "Box",
    "SearchSpace",
    "box_volume_fraction",
    "points_in_box",
    "sobol_init",
    "Dataset",
    "Observation",
    "GaussianProcess",
    "KernelParams",
    "log_marginal_likelihood",
    "matern52_kernel",
    "RandomForestSurrogate",
    "SubregionResult",
    "TreeNode",
    "extract_subregion",
    "AugmentedLocalGP",
    "dense_reference_predict",
    "inducing_count",
    "expected_improvement",
    "log_expected_improvement",
    "optimize_acquisition",
    "BoingConfig",
    "BoingOptimizer",
    "TrustRegionConfig",
    "TrustRegionState",
    "TurboOptimizer",
    "BoingPlusOptimizer",
    "switch_probability",
    "get_objective",
    "__version__",
]
