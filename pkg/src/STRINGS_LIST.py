####################################################################################
# Copyright (c) 2026 MixDesk                                                       #
# Author: MixDesk contributors                                                     #
#                                                                                  #
# Permission is hereby granted, free of charge, to any person obtaining a copy     #
# of this software and associated documentation files (the "Software"), to deal    #
# in the Software without restriction, including without limitation the rights     #
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell        #
# copies of the Software, and to permit persons to whom the Software is            #
# furnished to do so, subject to the following conditions:                         #
#                                                                                  #
# The above copyright notice and this permission notice shall be included in       #
# all copies or substantial portions of the Software.                              #
#                                                                                  #
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR       #
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,         #
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE      #
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER           #
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,    #
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN        #
# THE SOFTWARE.                                                                    #
####################################################################################

# List of all the project's strings.

GENERAL_STRINGS = {
    "GENERAL_TrainingEpoch": "{}: epoch {}/{} - loss {:.4f} - lr {:.4f}",
    "GENERAL_TrainingDone": "{}: trained, held-out accuracy {:.2%}",
    "GENERAL_EntrySubstandard": "{}: accuracy {:.2%} is below the floor {:.2%}, entry flagged substandard",
    "GENERAL_ZooSaved": "Saved {} zoo entries to {}",
    "GENERAL_ReferenceLoaded": "Loaded CIFAR-10 from {}: {} train, {} test images",
    "GENERAL_ZooLoaded": "Loaded {} zoo entries from {}",
    "GENERAL_ZooEntryVerified": "{}: checksum ok, accuracy {}",
    "GENERAL_SynthesisBatch": "Synthesizing batch {}/{} with models {}",
    "GENERAL_SynthesisStep": "batch {} step {} res {} total {:.5f} ce {:.5f} bn {:.5f} prior {:.5f}",
    "GENERAL_SynthesisPhase": "batch {}: resolution phase {}x{} for {} iterations",
    "GENERAL_SynthesisDone": "Synthesized {} images in {} batches",
    "GENERAL_DatasetExported": "Exported {} images to {}",
    "GENERAL_PreviewWritten": "Wrote a {}x{} preview grid to {}",
    "GENERAL_CalibrationDone": "Calibrated {} activation quantizers on {} images",
    "GENERAL_BlockReconstructed": "{}: reconstruction loss {:.6f} -> {:.6f}, rounding regularizer {:.4f} -> {:.4f}",
    "GENERAL_TaskDone": "{} on {} finished, accuracy {:.2%}",
    "GENERAL_QatStep": "QAT step {}/{} - loss {:.4f}",
    "GENERAL_QatBnFrozen": "QAT step {}: BN running statistics frozen",
    "GENERAL_LayerPruned": "{}: sparsity {:.3f}, stage-2 loss {:.6f} -> {:.6f}",
    "GENERAL_DistillEpoch": "distill epoch {}/{} - loss {:.4f}",
    "GENERAL_CellSkipped": "Cell {} already completed, skipping",
    "GENERAL_CellDone": "Cell {} done: {} = {:.4f}",
    "GENERAL_PlanDone": "Plan {} finished: {} completed, {} failed",
    "GENERAL_ReportWritten": "Wrote {} tables to {}",
}

ERROR_STRINGS = {
    "ERROR_NoSettingFound": "The setting requested is not available.",
    "ERROR_InvalidSettingValue": "The value {} is not valid for this setting.",
    "ERROR_UnsupportedFamily": "Unsupported model family {}.",
    "ERROR_InvalidDepth": "The depth must be a positive integer, {} given.",
    "ERROR_InvalidWidth": "The width multiplier must be positive, {} given.",
    "ERROR_InvalidClasses": "The number of classes must be a positive integer, {} given.",
    "ERROR_InvalidResolution": "The input resolution must be a positive integer, {} given.",
    "ERROR_NoBatchNorm": "The model has no batch-normalization layer, BN statistics matching is undefined.",
    "ERROR_TrainingDiverged": "Training loss is not finite.",
    "ERROR_SubsetSize": "Subset size {} is not within [1, {}].",
    "ERROR_ChecksumMismatch": "Stored checksum {} does not match the recomputed {}.",
    "ERROR_UnreadableArtifact": "The artifact cannot be decoded: {}.",
    "ERROR_MissingProvenance": "The archive has no provenance record.",
    "ERROR_UnknownConfigKeys": "Unknown configuration keys: {}.",
    "ERROR_MissingConfigKeys": "Missing configuration keys: {}.",
    "ERROR_LabelMass": "The label distribution sums to {} instead of 1.",
    "ERROR_ClassCountMismatch": "Class counts differ: {} vs {}.",
    "ERROR_ChannelMismatch": "Layer {} has {} batch channels but {} stored channels.",
    "ERROR_LayerCountMismatch": "{} batch statistics given for {} stored layers.",
    "ERROR_SpatialExtent": "The batch needs a spatial extent of at least 2, {}x{} given.",
    "ERROR_BoxRatioRange": "The box ratio range ({}, {}) must satisfy 0 < low <= high < 1.",
    "ERROR_MaskShape": "The mask is {}x{} but the images are {}x{}.",
    "ERROR_ImageShape": "The images to mix have different shapes: {} and {}.",
    "ERROR_BetaRange": "Beta {} is not within [0, 1].",
    "ERROR_EmptySubset": "The model subset is empty.",
    "ERROR_UntrainedEntry": "Zoo entry {} has not been trained.",
    "ERROR_NegativeLossTerm": "Loss term {} is negative: {}.",
    "ERROR_SynthesisDiverged": "The synthesis objective of batch {} is not finite at step {}.",
    "ERROR_ScheduleMismatch": "The iterations ({}) do not match the resolution schedule total ({}).",
    "ERROR_BatchTooSmall": "Data Mixing needs a batch of at least 2 images.",
    "ERROR_FewerImagesThanBatch": "{} images do not fill one batch of {}.",
    "ERROR_EmptyZoo": "The zoo is empty.",
    "ERROR_EmptyDataset": "The dataset is empty.",
    "ERROR_InconsistentMixPattern": "Slot {} is assigned to more than one image in observation {}.",
    "ERROR_IncompleteMixPattern": "Observation {} does not assign every one of the {} slots.",
    "ERROR_MixPatternLength": "{} mix patterns given for {} observations.",
    "ERROR_MissingAnchor": "A mix pattern needs at least one unmixed observation of the original image.",
    "ERROR_InfeasibleSystem": "The constraint system is inconsistent.",
    "ERROR_UnknownUnknowns": "Unknowns {} are not part of the system.",
    "ERROR_BitWidth": "Bit-width {} is not within [2, 8].",
    "ERROR_NonPositiveScale": "The quantization scale must be positive.",
    "ERROR_ZeroActivations": "Activation quantizer {} saw only zeros, scale floor {} applied.",
    "ERROR_EmptyCalibration": "The calibration data is empty.",
    "ERROR_ReconstructionDiverged": "The reconstruction loss is not finite at iteration {}.",
    "ERROR_QatDiverged": "The finetuning loss is not finite at step {}.",
    "ERROR_Sparsity": "Sparsity {} is not within [0, 1).",
    "ERROR_EmptyLayer": "Structured pruning at sparsity {} would remove all {} channels.",
    "ERROR_SparsityRegression": "Achieved sparsity {} differs from the requested {}.",
    "ERROR_ResolutionMismatch": "The dataset resolution {} does not match the model resolution {}.",
    "ERROR_MissingHoldout": "The plan needs at least one holdout model excluded from synthesis.",
    "ERROR_MissingAblation": "The plan has no ablation section.",
    "ERROR_HoldoutInSynthesis": "Holdout model {} is used by data source {}.",
    "ERROR_DuplicateCell": "Cell key {} appears more than once in the plan.",
    "ERROR_UnknownTask": "Unknown task {}.",
    "ERROR_UnknownDataSource": "Unknown data source {}.",
    "ERROR_UnknownModel": "Unknown zoo model {}.",
    "ERROR_CellWritten": "The cell has already been written.",
    "ERROR_CellFailed": "Cell {} failed: {}",
    "ERROR_DanglingReference": "Provenance chain broken at {}.",
    "ERROR_UnsupportedArchitecture": "Only zoo networks with features and classifier can be quantized.",
    "ERROR_DuplicateModelNames": "Model names must be unique, {} repeated.",
    "ERROR_MigrationRequired": "Archive format {} found, {} expected; re-export the dataset with the current version.",
    "ERROR_PreviewGridSize": "A {}x{} grid needs {} images.",
    "ERROR_BnStatsShape": "Running mean and variance must be equal-length vectors.",
    "ERROR_NegativeVariance": "Running variance must be non-negative.",
    "ERROR_ConstraintRows": "The system has {} rows but {} targets.",
    "ERROR_ConstraintWidth": "Every row must have {} coefficients.",
    "ERROR_DuplicateUnknowns": "Unknown labels must be unique.",
    "ERROR_SplitShapeMismatch": "Train and held-out images must share channels and resolution.",
    "ERROR_PruneStages": "Pruning always runs two reconstruction stages, {} given.",
    "ERROR_TrainConfigRange": "Training needs epochs >= 0, batch_size >= 1 and lr > 0.",
    "ERROR_AccuracyFloor": "The accuracy floor {} is not within [0, 1].",
    "ERROR_EmptyPlan": "A plan needs at least one target and one seed.",
    "ERROR_RunFileShape": "A run file must hold one YAML mapping.",
    "ERROR_BoxOutsideImage": "Box {} does not fit a {}x{} image.",
    "ERROR_DatasetLengths": "{} images, {} label distributions and {} base labels given, the lengths must match.",
    "ERROR_LabelSupport": "Label distributions must be non-negative with at most two nonzero entries.",
    "ERROR_PhaseResolution": "Phase resolutions must lie in [2, {}].",
    "ERROR_LastPhaseResolution": "The last phase must run at the image resolution {}.",
    "ERROR_BoxRangePair": "The box ratio range must be a (low, high) pair.",
    "ERROR_NonPositiveLr": "Learning rates must be positive.",
    "ERROR_BatchCount": "Synthesis needs batch_size >= 1 and num_images >= 0.",
    "ERROR_NegativeIterations": "Iterations must be non-negative, {} given.",
    "ERROR_Unhandled": "Command failed: {}",
}


def getString(stringName: str, *args) -> str:
    if stringName.startswith("GENERAL"):
        return GENERAL_STRINGS.get(stringName).format(*args)
    else:
        return ERROR_STRINGS.get(stringName).format(*args)
