"""Double-exponential Sinc-collocation eigenvalues for rational anharmonic potentials."""

from .confmap import ConformalMap, map_multi_singularity, map_plain_sinh, map_single_singularity, select_map
from .convergence import ConvergenceRecord, converge, exact_reference, random_study
from .discretize import build_system, lambert_w, mesh_size
from .eigensolve import Spectrum, eigenvector, generalized_eigs
from .polynomial import Polynomial, roots
from .potential import PotentialError, RationalPotential, load_potential, random_potential, validate

__all__ = [
    "ConformalMap", "ConvergenceRecord", "Polynomial", "PotentialError", "RationalPotential",
    "Spectrum", "build_system", "converge", "eigenvector", "exact_reference",
    "generalized_eigs", "lambert_w", "load_potential", "map_multi_singularity",
    "map_plain_sinh", "map_single_singularity", "mesh_size", "random_potential",
    "random_study", "roots", "select_map", "validate",
]
