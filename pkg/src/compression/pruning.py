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

import copy
import logging
import math

import torch
import torch.nn.functional as F
from torch import nn
from torch.nn.utils import prune
from tqdm import tqdm

from custom_exceptions import ContractViolationException, InvariantViolationException, PruneRefusalException
from STRINGS_LIST import getString
from utils.compression_config import PruneConfig
from utils.prune_spec import PruneSpec
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)


class StopForwardException(Exception):
    """Raised by a DataSaverHook to stop the forward pass once the layer data is stored."""


class DataSaverHook:
    """Forward hook storing the input and/or output of one layer."""

    def __init__(self, storeInput: bool = False, storeOutput: bool = False, stopForward: bool = True) -> None:
        self.storeInput = storeInput
        self.storeOutput = storeOutput
        self.stopForward = stopForward
        self.inputStore = None
        self.outputStore = None

    def __call__(self, module: nn.Module, inputBatch: tuple, outputBatch: torch.Tensor) -> None:
        if self.storeInput:
            self.inputStore = inputBatch[0].detach()
        if self.storeOutput:
            self.outputStore = outputBatch.detach()
        if self.stopForward:
            raise StopForwardException


@torch.no_grad()
def saveLayerData(model: nn.Module, layer: nn.Module, images: torch.Tensor, storeInput: bool, batchSize: int = 64, device: str = "cpu") -> torch.Tensor:
    """Runs the model on the images and keeps the input (or output) of one layer, on the cpu."""
    saver = DataSaverHook(storeInput=storeInput, storeOutput=not storeInput)
    handle = layer.register_forward_hook(saver)
    cached = []
    try:
        for start in range(0, len(images), batchSize):
            try:
                model(images[start : start + batchSize].to(device))
            except StopForwardException:
                pass
            cached.append((saver.inputStore if storeInput else saver.outputStore).cpu())
    finally:
        handle.remove()
    return torch.cat(cached)


def l1PruneMask(weights: torch.Tensor, pruneSpec: PruneSpec, layerName: str = "weights") -> torch.Tensor:
    """Binary mask zeroing the requested share of smallest-L1 weights (or output channels).

    Exactly round(sparsity * units) units are zeroed; equal magnitudes are pruned lowest
    index first.

    Args:
        weights (torch.Tensor): the layer weight, output channels first
        pruneSpec (PruneSpec): requested sparsity and granularity
        layerName (str, optional): name used in errors

    Raises:
        PruneRefusalException: the mask would empty the layer

    Returns:
        torch.Tensor: {0, 1} mask shaped like the weight
    """
    weights = weights.detach()
    if pruneSpec.structured:
        magnitudes = weights.abs().flatten(1).sum(1)
    else:
        magnitudes = weights.abs().flatten()

    pruned = pruneSpec.prunedCount(magnitudes.numel())
    if pruned >= magnitudes.numel() and magnitudes.numel() > 0 and pruneSpec.sparsity > 0:
        raise PruneRefusalException(layerName, getString("ERROR_EmptyLayer", pruneSpec.sparsity, magnitudes.numel()))

    order = torch.argsort(magnitudes, stable=True)
    keep = torch.ones_like(magnitudes)
    keep[order[:pruned]] = 0

    if pruneSpec.structured:
        return keep.view(-1, *([1] * (weights.dim() - 1))).expand_as(weights).contiguous()
    return keep.view_as(weights)


def maskSparsity(mask: torch.Tensor) -> float:
    return float((mask == 0).sum()) / max(1, mask.numel())


def prunableLayers(model: nn.Module) -> list:
    """Conv and linear layers in forward order, without the first conv and the classifier."""
    layers = [(name, module) for name, module in model.named_modules() if isinstance(module, (nn.Conv2d, nn.Linear))]
    classifier = getattr(model, "classifier", None)
    return [(name, module) for name, module in layers[1:] if module is not classifier]


def __layerForward(layer: nn.Module, x: torch.Tensor, weight: torch.Tensor) -> torch.Tensor:
    if isinstance(layer, nn.Conv2d):
        return F.conv2d(x, weight, layer.bias, layer.stride, layer.padding, layer.dilation, layer.groups)
    return F.linear(x, weight, layer.bias)


def __hardMask(scores: torch.Tensor, pruneSpec: PruneSpec, weightShape: torch.Size) -> torch.Tensor:
    pruned = pruneSpec.prunedCount(scores.numel())
    order = torch.argsort(scores.detach().flatten(), stable=True)
    keep = torch.ones(scores.numel(), device=scores.device)
    keep[order[:pruned]] = 0
    keep = keep.view_as(scores)
    # straight-through: hard mask forward, identity gradient to the scores
    keep = keep + (scores - scores.detach())
    if pruneSpec.structured:
        return keep.view(-1, *([1] * (len(weightShape) - 1)))
    return keep


@torch.no_grad()
def __heldoutLoss(layer: nn.Module, inputs: torch.Tensor, targets: torch.Tensor, weight: torch.Tensor, device: str) -> float:
    total = 0.0
    for start in range(0, len(inputs), 64):
        output = __layerForward(layer, inputs[start : start + 64].to(device), weight)
        total += float(F.mse_loss(output, targets[start : start + 64].to(device), reduction="sum"))
    return total / max(1, len(inputs))


def __optimize(parameters: list, lossFunction, inputs: torch.Tensor, targets: torch.Tensor, config: PruneConfig, generator: torch.Generator, description: str, device: str) -> None:
    optimizer = torch.optim.Adam(parameters, lr=config.lr)
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=max(1, config.iterations))
    for iteration in tqdm(range(config.iterations), desc=description, leave=False):
        indexes = torch.randint(len(inputs), (min(config.batchsize, len(inputs)),), generator=generator)
        loss = lossFunction(inputs[indexes].to(device), targets[indexes].to(device))
        if not math.isfinite(loss.item()):
            raise InvariantViolationException(description, getString("ERROR_ReconstructionDiverged", iteration))
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()
        scheduler.step()


def twoStagePrune(
    entry: ModelZooEntry,
    images: torch.Tensor,
    pruneSpec: PruneSpec,
    config: PruneConfig = None,
    device: str = "cpu",
) -> tuple:
    """L1-magnitude pruning with layer-wise two-stage reconstruction.

    Layers are pruned in forward order. Each layer reads its inputs from the pruned-so-far
    network and its targets from the dense one. Stage 1 learns mask scores (initialized to
    |W|) jointly with the weights; the mask is then absorbed into the weights and re-derived
    by L1 ranking. Stage 2 trains the weights only, under the frozen mask, and keeps its
    starting weights when the held-out loss would rise. The final mask is attached with
    `torch.nn.utils.prune.custom_from_mask`. While no layer has changed, a layer with
    nothing to prune is left exact.

    Args:
        entry (ModelZooEntry): the dense entry, left untouched
        images (torch.Tensor): [N, C, H, W] unlabeled images, the first `num_images` are used
        pruneSpec (PruneSpec): requested sparsity
        config (PruneConfig, optional): Defaults to PruneConfig().
        device (str, optional): Defaults to "cpu".

    Raises:
        ContractViolationException: no images
        PruneRefusalException: structured pruning would empty a layer
        InvariantViolationException: a layer mask does not have the requested sparsity

    Returns:
        tuple: (pruned network with masks attached, per-layer report list)
    """
    config = config or PruneConfig()
    images = images[: config.numimages].float().cpu()
    if len(images) == 0:
        raise ContractViolationException("prune", getString("ERROR_EmptyDataset"))

    dense = copy.deepcopy(entry.model).to(device).eval()
    model = copy.deepcopy(entry.model).to(device).eval()
    for parameter in model.parameters():
        parameter.requires_grad_(False)

    heldout = max(1, int(round(config.heldoutfraction * len(images)))) if len(images) > 1 else 0
    changed = False
    generator = torch.Generator().manual_seed(config.seed)
    denseLayers = dict(prunableLayers(dense))
    report = []

    for name, layer in prunableLayers(model):
        units = layer.weight.shape[0] if pruneSpec.structured else layer.weight.numel()
        if not changed and pruneSpec.prunedCount(units) == 0:
            # inputs still match the dense network and nothing is pruned: the layer is exact
            prune.custom_from_mask(layer, "weight", torch.ones_like(layer.weight))
            logger.info(getString("GENERAL_LayerPruned", name, 0.0, 0.0, 0.0))
            report.append({"layer": name, "sparsity": 0.0, "stage2_start": 0.0, "stage2_end": 0.0})
            continue
        changed = True

        inputs = saveLayerData(model, layer, images, storeInput=True, device=device)
        targets = saveLayerData(dense, denseLayers[name], images, storeInput=False, device=device)
        trainInputs, trainTargets = inputs[: len(inputs) - heldout], targets[: len(targets) - heldout]
        heldInputs, heldTargets = inputs[len(inputs) - heldout :], targets[len(targets) - heldout :]

        weight = layer.weight.detach().clone().requires_grad_(True)
        magnitudes = weight.detach().abs().flatten(1).sum(1) if pruneSpec.structured else weight.detach().abs()
        scores = magnitudes.clone().requires_grad_(True)
        # refuses up front a layer the mask would empty
        l1PruneMask(weight, pruneSpec, name)

        def jointLoss(x, y):
            return F.mse_loss(__layerForward(layer, x, __hardMask(scores, pruneSpec, weight.shape) * weight), y)

        __optimize([weight, scores], jointLoss, trainInputs, trainTargets, config, generator, f"{name} stage 1", device)

        with torch.no_grad():
            absorbed = __hardMask(scores, pruneSpec, weight.shape).detach() * weight.detach()
        mask = l1PruneMask(absorbed, pruneSpec, name)
        weight = (absorbed * mask).requires_grad_(True)

        def maskedLoss(x, y):
            return F.mse_loss(__layerForward(layer, x, mask * weight), y)

        startLoss = __heldoutLoss(layer, heldInputs, heldTargets, mask * weight.detach(), device) if heldout else 0.0
        startWeight = weight.detach().clone()
        __optimize([weight], maskedLoss, trainInputs, trainTargets, config, generator, f"{name} stage 2", device)
        endLoss = __heldoutLoss(layer, heldInputs, heldTargets, mask * weight.detach(), device) if heldout else 0.0
        if endLoss > startLoss:
            weight, endLoss = startWeight, startLoss

        with torch.no_grad():
            layer.weight.copy_(weight.detach() * mask)
        prune.custom_from_mask(layer, "weight", mask)

        achieved = int((layer.weight_mask == 0).sum())
        expected = pruneSpec.prunedCount(mask.shape[0] if pruneSpec.structured else mask.numel())
        if pruneSpec.structured:
            achieved = int((layer.weight_mask.flatten(1).sum(1) == 0).sum())
        if achieved != expected:
            raise InvariantViolationException(name, getString("ERROR_SparsityRegression", achieved, expected))

        sparsity = maskSparsity(layer.weight_mask)
        logger.info(getString("GENERAL_LayerPruned", name, sparsity, startLoss, endLoss))
        report.append({"layer": name, "sparsity": sparsity, "stage2_start": startLoss, "stage2_end": endLoss})

    for parameter in model.parameters():
        parameter.requires_grad_(False)
    return model, report


def modelSparsity(model: nn.Module) -> float:
    """Share of zeroed weights over every layer carrying a pruning mask."""
    masks = [buffer for name, buffer in model.named_buffers() if name.endswith("weight_mask")]
    total = sum(mask.numel() for mask in masks)
    return float(sum(int((mask == 0).sum()) for mask in masks)) / max(1, total)
