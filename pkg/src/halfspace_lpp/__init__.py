"""Half-space geometric last passage percolation: samplers, Gibbs resamplers,
contour-integral correlation kernels, Pfaffian correlations, and a
cross-validation harness."""

from .model import ModelParams, ScalingConstantsBulk, ScalingConstantsEdge

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "ScalingConstantsBulk",
    "ScalingConstantsEdge",
    "__version__",
]
