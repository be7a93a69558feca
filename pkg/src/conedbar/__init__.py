"""Numerical and symbolic toolkit for dbar on rational normal cones via their blow-up."""
from .kernels import backend
from .geometry import ConeModel
from .obstruction import CurveSpec, obstruction_table, rr_dims

__version__ = "0.1.0"

__all__ = ["backend", "ConeModel", "CurveSpec", "obstruction_table", "rr_dims", "__version__"]
