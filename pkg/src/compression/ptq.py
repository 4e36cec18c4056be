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

import torch
from torch import nn
from tqdm import tqdm

from compression.quant_model import (
    QuantModel,
    buildQuantizedModel,
    calibrateRanges,
    foldBatchNorm,
    modelUnits,
    runUnit,
)
from compression.quantizers import AdaRoundQuantizer, LinearTempDecay
from custom_exceptions import ConfigurationException, ContractViolationException, ReconstructionDivergenceException
from STRINGS_LIST import getString
from utils.compression_config import PtqConfig
from utils.quant_spec import QuantSpec
from utils.rounding_state import RoundingState
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)

PTQ_METHODS = ("nearest", "adaround")


def lpLoss(prediction: torch.Tensor, target: torch.Tensor, p: float = 2.0, reduction: str = "sample") -> torch.Tensor:
    """|prediction - target|^p summed per sample and averaged over the batch (`sample`),
    or averaged over every element (`element`)."""
    error = (prediction - target).abs().pow(p)
    if reduction == "element":
        return error.mean()
    return error.flatten(1).sum(1).mean()


@torch.no_grad()
def __reconstructionError(forward, inputs: torch.Tensor, targets: torch.Tensor, device: str) -> float:
    total = 0.0
    for start in range(0, len(inputs), 64):
        batch = inputs[start : start + 64].to(device)
        total += float(lpLoss(forward(batch), targets[start : start + 64].to(device), reduction="element")) * len(batch)
    return total / max(1, len(inputs))


def blockReconstruction(
    unit: nn.Module,
    inputs: torch.Tensor,
    targets: torch.Tensor,
    config: PtqConfig,
    name: str = "block",
    generator: torch.Generator = None,
    device: str = "cpu",
) -> list:
    """Learns the rounding of every AdaRound quantizer of one unit.

    Minimizes the per-element mean squared error between the unit output (before its own
    activation quantizer) and the full-precision target plus
    reg_weight * sum(1 - |2h - 1|^beta), with beta annealed from the start to the end of
    `beta_range` after the warmup share of the run. Activation scales stay as calibrated.
    On return h is saturated for nearly every entry, the regularizer (at the final beta) is
    a small share of its starting value, and the quantizers are hardened.

    Args:
        unit (nn.Module): a QuantBlock or QuantHead
        inputs (torch.Tensor): cached unit inputs
        targets (torch.Tensor): cached full-precision unit outputs
        config (PtqConfig): the reconstruction recipe
        name (str, optional): unit name used in logs and rounding states
        generator (torch.Generator, optional): source of the sampled batches
        device (str, optional): Defaults to "cpu".

    Raises:
        ReconstructionDivergenceException: the loss stopped being finite

    Returns:
        list: one RoundingState per AdaRound quantizer of the unit
    """
    quantizers = [(qname, module) for qname, module in unit.named_modules() if isinstance(module, AdaRoundQuantizer)]
    if not quantizers:
        return []

    generator = generator or torch.Generator().manual_seed(config.seed)
    forward = unit.blockOutput if hasattr(unit, "blockOutput") else unit
    for _, quantizer in quantizers:
        quantizer.soft = True

    errorBefore = __reconstructionError(forward, inputs, targets, device)
    startB, endB = config.betarange
    with torch.no_grad():
        startRegularizers = [float(quantizer.regularizer(endB)) for _, quantizer in quantizers]
    optimizer = torch.optim.Adam([quantizer.v for _, quantizer in quantizers], lr=config.lr)
    decay = LinearTempDecay(config.iterations, config.warmup, startB, endB)
    warmupSteps = config.warmup * config.iterations

    beta = startB
    for iteration in tqdm(range(config.iterations), desc=f"reconstruct {name}", leave=False):
        indexes = torch.randint(len(inputs), (min(config.batchsize, len(inputs)),), generator=generator)
        output = forward(inputs[indexes].to(device))
        recLoss = lpLoss(output, targets[indexes].to(device), reduction="element")

        beta = decay(iteration)
        if iteration < warmupSteps:
            roundLoss = torch.zeros((), device=recLoss.device)
        else:
            roundLoss = config.regweight * sum(quantizer.regularizer(beta) for _, quantizer in quantizers)
        loss = recLoss + roundLoss

        if not math.isfinite(loss.item()):
            raise ReconstructionDivergenceException(
                name,
                getString("ERROR_ReconstructionDiverged", iteration),
                {
                    "iteration": iteration,
                    "reconstruction_loss": recLoss.item(),
                    "rounding_loss": roundLoss.item(),
                    "beta": beta,
                    "v_range": [
                        (qname, float(quantizer.v.min()), float(quantizer.v.max())) for qname, quantizer in quantizers
                    ],
                },
            )

        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()

    with torch.no_grad():
        regularizer = float(sum(quantizer.regularizer(endB) for _, quantizer in quantizers))
    for _, quantizer in quantizers:
        quantizer.soft = False
    errorAfter = __reconstructionError(forward, inputs, targets, device)
    logger.info(
        getString("GENERAL_BlockReconstructed", name, errorBefore, errorAfter, sum(startRegularizers), regularizer)
    )

    return [
        RoundingState(f"{name}.{qname}", quantizer.v, quantizer.scale, beta, config.regweight, start)
        for (qname, quantizer), start in zip(quantizers, startRegularizers)
    ]


def ptq(
    entry: ModelZooEntry,
    calibrationImages: torch.Tensor,
    spec: QuantSpec,
    method: str = "adaround",
    config: PtqConfig = None,
    device: str = "cpu",
) -> tuple:
    """Post-training quantization of a zoo entry.

    The BN-folded network is wrapped with quantizers, activation ranges are calibrated and,
    for the adaround method, every unit is reconstructed in forward order. A unit's inputs
    are the outputs of the already reconstructed quantized predecessors (or the
    full-precision ones, see `input_source`), its targets the full-precision outputs.

    Args:
        entry (ModelZooEntry): the trained entry, left untouched
        calibrationImages (torch.Tensor): [N, C, H, W] normalized images, the first
            `num_images` are used
        spec (QuantSpec): bit-widths
        method (str, optional): nearest or adaround. Defaults to "adaround".
        config (PtqConfig, optional): Defaults to PtqConfig().
        device (str, optional): Defaults to "cpu".

    Raises:
        ConfigurationException: unknown method
        ContractViolationException: no calibration images
        ReconstructionDivergenceException: a unit reconstruction diverged

    Returns:
        tuple: (QuantModel in eval mode with hard rounding, list of RoundingState)
    """
    config = config or PtqConfig()
    if method not in PTQ_METHODS:
        raise ConfigurationException("ptq method", getString("ERROR_InvalidSettingValue", method))
    images = calibrationImages[: config.numimages].float().cpu()
    if len(images) == 0:
        raise ContractViolationException("calibration", getString("ERROR_EmptyCalibration"))

    folded = foldBatchNorm(entry.model).to(device)
    quantModel: QuantModel = buildQuantizedModel(folded, spec, method, config.weightscale).to(device)
    quantModel.eval()
    calibrateRanges(quantModel, images, config.calibration, config.percentile, config.batchsize, device)

    states = []
    if method == "adaround":
        generator = torch.Generator().manual_seed(config.seed)
        fpInputs = images
        quantInputs = images
        for index, (fpUnit, quantUnit) in enumerate(zip(modelUnits(folded), quantModel.units())):
            targets = runUnit(fpUnit, fpInputs, device=device)
            source = quantInputs if config.inputsource == "quantized" else fpInputs
            states.extend(blockReconstruction(quantUnit, source, targets, config, f"unit{index}", generator, device))
            quantInputs = runUnit(quantUnit, quantInputs, device=device)
            fpInputs = targets

    quantModel.eval()
    return quantModel, states
