"""Cubical homology, Smith normal form and induced index maps."""

from .cubical import (CubicalComplex, boundary, boundary_matrices, cell_dim,
                      cubical_complex, relative_complex)
from .index import ChainSelector, IndexMap, index_map, induced_map
from .relative import HomologyDim, HomologyGroups, homology_of_complex, relative_homology
from .snf import SNF, int_matrix, invariant_factors, smith_normal_form, snf

__all__ = [
    "CubicalComplex", "boundary", "boundary_matrices", "cell_dim", "cubical_complex",
    "relative_complex", "ChainSelector", "IndexMap", "index_map", "induced_map",
    "HomologyDim", "HomologyGroups", "homology_of_complex", "relative_homology",
    "SNF", "int_matrix", "invariant_factors", "smith_normal_form", "snf",
]
