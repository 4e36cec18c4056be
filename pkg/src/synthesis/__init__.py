from .losses import (
    BatchStatsRecorder,
    ceLoss,
    mixedCe,
    bnStatsLoss,
    bnStatsLossKl,
    totalVariation,
    priorLoss,
    linearKernelMmd2,
    channelFeatures,
)
from .mixing import sampleMixMask, mixImages, mixBatch, augmentBatch, cyclicDerangement
from .adaptive_weights import LossWeights, ConstantWeights, adaptiveObjective, updateAdaptiveWeights
from .objective import TERM_NAMES, featureMixingTerms, featureMixingObjective
from .synthesizer import singleModelConfig, synthesizeBatch, synthesize
