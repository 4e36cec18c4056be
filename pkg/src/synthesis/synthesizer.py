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

import logging
import math

import numpy as np
import torch
import torch.nn.functional as F
from tqdm import tqdm

from custom_exceptions import ContractViolationException, SynthesisDivergenceException
from modelzoo.reference_data import CIFAR10_MEAN, CIFAR10_STD, pixelBounds
from modelzoo.zoo import sampleSubset
from STRINGS_LIST import getString
from synthesis.adaptive_weights import ConstantWeights, LossWeights, updateAdaptiveWeights
from synthesis.mixing import augmentBatch, cyclicDerangement, mixBatch, mixImages, sampleMixMask
from synthesis.objective import TERM_NAMES, breakdownValues, featureMixingTerms
from utils.synthesis_config import SynthesisConfig
from utils.synthesized_dataset import DATASET_FORMAT_VERSION, SynthesizedDataset

logger = logging.getLogger(__name__)


def singleModelConfig(config: SynthesisConfig) -> SynthesisConfig:
    """The model-specific baseline of a config: one model per batch, no Data Mixing."""
    return config.replace(m_prime=1, data_mixing=False)


def cosineLr(baseLr: float, step: int, totalSteps: int) -> float:
    return 0.5 * baseLr * (1.0 + math.cos(math.pi * step / max(1, totalSteps)))


def __batchStreams(config: SynthesisConfig, batchIndex: int) -> tuple:
    seedSequence = np.random.SeedSequence(config.seed).spawn(max(1, config.numbatches))[batchIndex]
    rng = np.random.default_rng(seedSequence)
    torchSeed = int(seedSequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
    return rng, torch.Generator().manual_seed(torchSeed)


def __clip(pixels: torch.Tensor, low: torch.Tensor, high: torch.Tensor) -> None:
    with torch.no_grad():
        pixels.copy_(torch.maximum(torch.minimum(pixels, high), low))


def synthesizeBatch(
    zoo: list,
    config: SynthesisConfig,
    batchIndex: int,
    mean=CIFAR10_MEAN,
    std=CIFAR10_STD,
    device: str = "cpu",
) -> dict:
    """Optimizes one batch of images. Every batch owns a seed stream spawned from the
    config seed, so batches may run in any order or in parallel.

    Raises:
        SynthesisDivergenceException: the objective stopped being finite

    Returns:
        dict: images, base labels, label rows, mixed copies and the batch provenance record
    """
    rng, generator = __batchStreams(config, batchIndex)
    numClasses = zoo[0].spec.numclasses
    size = config.batchImages(batchIndex)
    channels = len(mean)

    labels = rng.integers(0, numClasses, size=size)
    subset = sampleSubset(zoo, config.mprime, rng)
    logger.info(getString("GENERAL_SynthesisBatch", batchIndex + 1, config.numbatches, [e.name for e in subset]))

    phases = [(resolution, steps) for resolution, steps in config.schedule if steps > 0]
    startResolution = phases[0][0] if phases else config.resolution
    low, high = (bound.to(device) for bound in pixelBounds(mean, std))

    pixels = torch.randn(size, channels, startResolution, startResolution, generator=generator).to(device)
    __clip(pixels, low, high)

    for entry in subset:
        entry.model.to(device)
    y1 = torch.from_numpy(labels).to(device)
    weights = (
        LossWeights(TERM_NAMES, lr=config.alphalr)
        if config.adaptiveweights
        else ConstantWeights({"ce": config.ceweight, "bn": config.bnweight, "prior": config.priorweight})
    )

    step = 0
    lastFinite = None
    for resolution, steps in phases:
        logger.info(getString("GENERAL_SynthesisPhase", batchIndex + 1, resolution, resolution, steps))
        if pixels.shape[-1] != resolution:
            pixels = F.interpolate(pixels, size=(resolution, resolution), mode="bilinear", align_corners=False)
            __clip(pixels, low, high)
        pixels = pixels.detach().requires_grad_(True)
        optimizer = torch.optim.Adam([pixels], lr=config.lr, betas=config.adambetas)

        for _ in tqdm(range(steps), desc=f"batch {batchIndex + 1} @{resolution}px", leave=False):
            for group in optimizer.param_groups:
                group["lr"] = cosineLr(config.lr, step, config.iterations)

            inputs = augmentBatch(pixels, generator) if config.augment else pixels
            y2, beta = y1, 0.0
            if config.datamixing:
                inputs, y2, mask, _ = mixBatch(inputs, y1, rng, config.boxrange)
                beta = mask.beta

            breakdown = featureMixingTerms(inputs, subset, y1, y2, beta, config.l2weight, config.bnloss)
            if config.adaptiveweights:
                weights, total = updateAdaptiveWeights(weights, breakdown["terms"])
            else:
                total = weights.combine(breakdown["terms"])

            if not torch.isfinite(total):
                raise SynthesisDivergenceException(
                    getString("ERROR_SynthesisDiverged", batchIndex, step), lastFinite
                )
            lastFinite = breakdownValues(breakdown)
            lastFinite["total"] = float(total.detach())
            lastFinite["step"] = step
            logger.debug(
                getString(
                    "GENERAL_SynthesisStep",
                    batchIndex,
                    step,
                    resolution,
                    lastFinite["total"],
                    lastFinite["ce"],
                    lastFinite["bn"],
                    lastFinite["prior"],
                )
            )

            optimizer.zero_grad(set_to_none=True)
            total.backward()
            optimizer.step()
            __clip(pixels, low, high)
            step += 1

    if pixels.shape[-1] != config.resolution:
        pixels = F.interpolate(pixels, size=(config.resolution, config.resolution), mode="bilinear", align_corners=False)
        __clip(pixels, low, high)
    images = pixels.detach().cpu()

    labelRows = np.zeros((size, numClasses), dtype=np.float64)
    labelRows[np.arange(size), labels] = 1.0
    record = {
        "index": batchIndex,
        "size": size,
        "model_ids": [entry.name for entry in subset],
        "model_checksums": [entry.checksum for entry in subset],
        "steps": step,
    }

    mixedImages, mixedRows, mixedBase = None, None, None
    if config.emitmixedcopies and size >= 2:
        mask = sampleMixMask(rng, config.resolution, config.resolution, config.boxrange)
        partner = cyclicDerangement(rng, size)
        mixedImages = mixImages(images, images[torch.from_numpy(partner)], mask)
        mixedRows = np.zeros((size, numClasses), dtype=np.float64)
        mixedRows[np.arange(size), labels] += 1.0 - mask.beta
        mixedRows[np.arange(size), labels[partner]] += mask.beta
        mixedBase = labels
        record["mixed_copies"] = {"mask": mask.toDict(), "partners": partner.tolist()}

    return {
        "images": images,
        "labels": labelRows,
        "base_labels": labels,
        "mixed_images": mixedImages,
        "mixed_labels": mixedRows,
        "mixed_base_labels": mixedBase,
        "record": record,
        "last_breakdown": lastFinite,
    }


def synthesize(
    zoo: list,
    config: SynthesisConfig,
    mean=CIFAR10_MEAN,
    std=CIFAR10_STD,
    device: str = "cpu",
) -> SynthesizedDataset:
    """Synthesizes a dataset from a zoo: Feature Mixing over a random model subset per batch,
    Data Mixing per iteration, a low-resolution phase then full resolution.

    Args:
        zoo (list): the trained ModelZooEntry to invert (holdouts already removed)
        config (SynthesisConfig): the run configuration
        mean (tuple, optional): per-channel normalization mean of the zoo's inputs
        std (tuple, optional): per-channel normalization std of the zoo's inputs
        device (str, optional): device to optimize on. Defaults to "cpu".

    Raises:
        ContractViolationException: the zoo is empty
        ConfigurationException: m' exceeds the zoo size
        SynthesisDivergenceException: the objective stopped being finite

    Returns:
        SynthesizedDataset: the images with labels and full provenance
    """
    if not zoo:
        raise ContractViolationException("synthesize", getString("ERROR_EmptyZoo"))

    batches = [
        synthesizeBatch(zoo, config, batchIndex, mean, std, device) for batchIndex in range(config.numbatches)
    ]

    numClasses = zoo[0].spec.numclasses
    imageParts = [batch["images"] for batch in batches]
    labelParts = [batch["labels"] for batch in batches]
    baseParts = [batch["base_labels"] for batch in batches]
    for batch in batches:
        if batch["mixed_images"] is not None:
            imageParts.append(batch["mixed_images"])
            labelParts.append(batch["mixed_labels"])
            baseParts.append(batch["mixed_base_labels"])

    channels = len(mean)
    images = (
        torch.cat(imageParts)
        if imageParts
        else torch.zeros(0, channels, config.resolution, config.resolution)
    )
    provenance = {
        "format_version": DATASET_FORMAT_VERSION,
        "source": "synthesized",
        "config": config.toDict(),
        "seed": config.seed,
        "zoo": [{"name": entry.name, "checksum": entry.checksum} for entry in zoo],
        "zoo_checksums": [entry.checksum for entry in zoo],
        "batches": [batch["record"] for batch in batches],
        "normalization": {"mean": list(mean), "std": list(std)},
        "num_classes": numClasses,
    }

    logger.info(getString("GENERAL_SynthesisDone", len(images), len(batches)))
    return SynthesizedDataset(
        images,
        np.concatenate(labelParts) if labelParts else np.zeros((0, numClasses)),
        np.concatenate(baseParts) if baseParts else np.zeros(0, dtype=np.int64),
        provenance,
    )
