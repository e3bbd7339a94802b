"""Structure-preserving H2 model reduction for linear quantum systems."""

from .model import (
    CanonicalStructure,
    PRResiduals,
    StateSpaceModel,
    canonical_matrix,
    jmat,
    pr_from_template,
    pr_residuals,
    transfer_eval,
)
from .engine import QirkaConfig, run

__all__ = [
    "CanonicalStructure",
    "PRResiduals",
    "StateSpaceModel",
    "canonical_matrix",
    "jmat",
    "pr_from_template",
    "pr_residuals",
    "transfer_eval",
    "QirkaConfig",
    "run",
]
