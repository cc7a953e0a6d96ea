"""Joint-penalty estimators of sparse, well-conditioned covariance matrices."""
from ._backend import BACKEND

__version__ = "0.1.0"
