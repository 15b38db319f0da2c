"""Distortion of polygonal knots."""

import warnings

# an old system TBB only makes numba fall back to OpenMP
warnings.filterwarnings("ignore", message="The TBB threading layer")

__version__ = "0.1.0"
