"""Unsupervised per-shape global features learned by hierarchical prediction
over antipodal view pairs, with linear-probe and retrieval evaluation."""

__version__ = "0.1.0"

from .autodiff import Tensor

__all__ = ["Tensor", "__version__"]
