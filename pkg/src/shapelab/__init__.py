"""shapelab: cubic field tabulation via binary cubic forms, lattice shapes of
rings of integers, and equidistribution statistics on the space of shapes."""

from .forms import (
    BinaryCubicForm,
    UnimodularMatrix2,
    HessianForm,
    CubicRingTable,
    EmbeddingData,
    discriminant,
    hessian,
    act,
    classify,
    ring_table,
    embeddings,
)
from .shape import (
    ShapeGram,
    UHPoint,
    EmbeddingMatrix,
    shape_gram,
    gauss_reduce,
    shape_point,
    shape_via_sublattice,
    lll_minkowski_reduce,
    gram_det_check,
)
from .measure import (
    Rank2Region,
    PartitionSpec,
    mu_measure,
    equal_measure_partition,
    locate_cell,
    sample_mu,
    marginal_cdfs,
)

__version__ = "0.1.0"
