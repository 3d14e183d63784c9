"""Multiple hypothesis testing for point-cloud acyclicity with persistent homology."""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .complexes import PointCloud, alpha_filtration_2d, build_distance_matrix, delaunay_2d, vietoris_rips
from .metrics import (
    InvariantSpec,
    MatchingCost,
    bottleneck_distance,
    log_max_bar_length,
    max_bar_length,
    rt_loss,
    wasserstein_distance,
)
from .mht import Battery, fdr_cutoff_test, fwer_max_test, two_sample_fdr, two_sample_perm_test
from .null_model import Box, NullModelSpec, estimate_box, sample_noisy_circle, sample_uniform
from .persistence import PersistenceDiagram, PersistentBettiQuery, persistent_betti, reduce

__all__ = [
    "BACKEND",
    "PointCloud",
    "alpha_filtration_2d",
    "build_distance_matrix",
    "delaunay_2d",
    "vietoris_rips",
    "InvariantSpec",
    "MatchingCost",
    "bottleneck_distance",
    "log_max_bar_length",
    "max_bar_length",
    "rt_loss",
    "wasserstein_distance",
    "Battery",
    "fdr_cutoff_test",
    "fwer_max_test",
    "two_sample_fdr",
    "two_sample_perm_test",
    "Box",
    "NullModelSpec",
    "estimate_box",
    "sample_noisy_circle",
    "sample_uniform",
    "PersistenceDiagram",
    "PersistentBettiQuery",
    "persistent_betti",
    "reduce",
]
