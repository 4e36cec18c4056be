from .architectures import ZooNet, buildModel
from .zoo import (
    DEFAULT_ZOO,
    batchNormLayers,
    bnStatsFromModel,
    extractBnStats,
    makeEntry,
    sampleSubset,
    defaultZooRecipe,
    readZooRecipe,
)
from .training import evaluateAccuracy, trainModel
from .reference_data import CIFAR10_MEAN, CIFAR10_STD, loadReferenceSplits, pixelBounds
