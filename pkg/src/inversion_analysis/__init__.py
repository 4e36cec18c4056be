from .rational import rref, rank, nullspaceBasis, checkConsistency, floatRank
from .avgpool import (
    avgpoolConstraints,
    solutionSpaceDim,
    projectedDim,
    equivalentSystems,
    analysisReport,
    unknownLabel,
)
