from .quantizers import (
    LinearTempDecay,
    ActivationQuantizer,
    AdaRoundQuantizer,
    LsqQuantizer,
    NearestQuantizer,
    fakeQuantize,
    fakeQuantizeSte,
    quantize,
    roundSte,
    gradScale,
    roundingRegularizer,
    initialWeightScale,
    makeWeightQuantizer,
)
from .quant_model import QuantModel, buildQuantizedModel, calibrateRanges, foldBatchNorm, modelUnits
from .ptq import blockReconstruction, lpLoss, ptq
from .qat import distillationLoss, qatFinetune
from .pruning import l1PruneMask, modelSparsity, prunableLayers, twoStagePrune
from .distill import distill
from .report import archiveDataProvenance, buildReport, realDataProvenance
from .tasks import runCompression
