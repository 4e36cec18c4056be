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

import torch
import torch.nn.functional as F
from torch import nn
from torch.nn.utils.fusion import fuse_conv_bn_eval

from compression.quantizers import (
    ActivationQuantizer,
    AdaRoundQuantizer,
    LsqQuantizer,
    NearestQuantizer,
    makeWeightQuantizer,
)
from custom_exceptions import ConfigurationException, ContractViolationException
from STRINGS_LIST import getString
from utils.quant_spec import QuantSpec

logger = logging.getLogger(__name__)

QUANT_MODES = ("nearest", "adaround", "lsq")
WEIGHT_QUANTIZERS = (NearestQuantizer, AdaRoundQuantizer, LsqQuantizer)


def __foldChildren(module: nn.Module) -> None:
    children = list(module.named_children())
    for (name, child), (nextName, nextChild) in zip(children, children[1:]):
        if isinstance(child, nn.Conv2d) and isinstance(nextChild, nn.BatchNorm2d):
            setattr(module, name, fuse_conv_bn_eval(child, nextChild))
            setattr(module, nextName, nn.Identity())
    for _, child in module.named_children():
        __foldChildren(child)


def foldBatchNorm(model: nn.Module) -> nn.Module:
    """Copy of the model with every Conv2d -> BatchNorm2d pair fused into one biased conv."""
    folded = copy.deepcopy(model).eval()
    __foldChildren(folded)
    return folded


def modelUnits(model: nn.Module) -> list:
    """The reconstruction units of a zoo network in forward order: every block of
    `features`, then a head running pooling and the classifier."""
    return list(model.features) + [nn.Sequential(model.pool, nn.Flatten(1), model.classifier)]


def unitOutputs(units: list, x: torch.Tensor) -> list:
    outputs = []
    for unit in units:
        x = unit(x)
        outputs.append(x)
    return outputs


class QuantConv2d(nn.Module):
    def __init__(self, conv: nn.Conv2d, quantizer: nn.Module) -> None:
        super().__init__()
        self.conv = conv
        self.weightQuantizer = quantizer

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        conv = self.conv
        return F.conv2d(
            x,
            self.weightQuantizer(conv.weight),
            conv.bias,
            conv.stride,
            conv.padding,
            conv.dilation,
            conv.groups,
        )


class QuantLinear(nn.Module):
    def __init__(self, linear: nn.Linear, quantizer: nn.Module) -> None:
        super().__init__()
        self.linear = linear
        self.weightQuantizer = quantizer

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.linear(x, self.weightQuantizer(self.linear.weight), self.linear.bias)


class QuantBlock(nn.Module):
    """A feature block followed by the quantizer of its output."""

    def __init__(self, block: nn.Module, actQuantizer: ActivationQuantizer) -> None:
        super().__init__()
        self.block = block
        self.actQuantizer = actQuantizer

    def blockOutput(self, x: torch.Tensor) -> torch.Tensor:
        return self.block(x)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.actQuantizer(self.block(x))


class QuantHead(nn.Module):
    def __init__(self, pool: nn.Module, classifier: nn.Module) -> None:
        super().__init__()
        self.pool = pool
        self.classifier = classifier

    def blockOutput(self, x: torch.Tensor) -> torch.Tensor:
        return self.classifier(torch.flatten(self.pool(x), 1))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.blockOutput(x)


class QuantModel(nn.Module):
    """A zoo network with fake-quantized weights and block outputs.

    Attributes
    ----------
    :attr:`spec` : ModelSpec
        architecture of the wrapped network
    :attr:`quantspec` : QuantSpec
    :attr:`mode` : str
        nearest, adaround or lsq
    """

    def __init__(self, wrapped: nn.Module, quantSpec: QuantSpec, mode: str) -> None:
        super().__init__()
        self.spec = wrapped.spec
        self.seed = wrapped.seed
        self.quantspec = quantSpec
        self.mode = mode
        self.features = nn.Sequential(
            *[QuantBlock(block, ActivationQuantizer(quantSpec.actbits, mode == "lsq")) for block in wrapped.features]
        )
        self.head = QuantHead(wrapped.pool, wrapped.classifier)

    def units(self) -> list:
        return list(self.features) + [self.head]

    def weightQuantizers(self) -> list:
        return [(name, module) for name, module in self.named_modules() if isinstance(module, WEIGHT_QUANTIZERS)]

    def activationQuantizers(self) -> list:
        return [(name, module) for name, module in self.named_modules() if isinstance(module, ActivationQuantizer)]

    def setQuantization(self, weights: bool = True, activations: bool = True) -> None:
        for _, quantizer in self.weightQuantizers():
            quantizer.enabled = weights
        for _, quantizer in self.activationQuantizers():
            quantizer.enabled = activations

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))


def __wrapLayers(module: nn.Module, spec: QuantSpec, mode: str, scaleMethod: str, edgeLayers: set) -> None:
    for name, child in module.named_children():
        if isinstance(child, nn.Conv2d):
            bits = spec.edgebits if id(child) in edgeLayers else spec.weightbits
            setattr(module, name, QuantConv2d(child, makeWeightQuantizer(child.weight, bits, spec, mode, scaleMethod)))
        elif isinstance(child, nn.Linear):
            bits = spec.edgebits if id(child) in edgeLayers else spec.weightbits
            setattr(module, name, QuantLinear(child, makeWeightQuantizer(child.weight, bits, spec, mode, scaleMethod)))
        else:
            __wrapLayers(child, spec, mode, scaleMethod, edgeLayers)


def buildQuantizedModel(
    model: nn.Module,
    spec: QuantSpec,
    mode: str = "nearest",
    scaleMethod: str = "mse",
) -> QuantModel:
    """Wraps every conv and linear layer of a zoo network with a weight quantizer and every
    block output with an unsigned activation quantizer. The first conv and the classifier
    use the spec's edge bit-width.

    The input network is copied, never modified. Pass a BN-folded network for PTQ and the
    plain network for QAT.

    Args:
        model (nn.Module): a zoo network (ZooNet layout, possibly BN-folded)
        spec (QuantSpec): bit-widths and grid shape
        mode (str, optional): nearest, adaround or lsq. Defaults to "nearest".
        scaleMethod (str, optional): minmax or mse weight step initialization. Defaults to "mse".

    Raises:
        ConfigurationException: unknown mode

    Returns:
        QuantModel: the fake-quantized network, only AdaRound or LSQ tensors are trainable
    """
    if mode not in QUANT_MODES:
        raise ConfigurationException("quantization mode", getString("ERROR_InvalidSettingValue", mode))
    if not hasattr(model, "features") or not hasattr(model, "classifier"):
        raise ContractViolationException("model", getString("ERROR_UnsupportedArchitecture"))

    wrapped = copy.deepcopy(model)
    convs = [module for module in wrapped.modules() if isinstance(module, nn.Conv2d)]
    edgeLayers = {id(convs[0]), id(wrapped.classifier)} if convs else {id(wrapped.classifier)}
    __wrapLayers(wrapped, spec, mode, scaleMethod, edgeLayers)

    quantModel = QuantModel(wrapped, spec, mode)
    for name, parameter in quantModel.named_parameters():
        trainable = mode == "lsq" or (mode == "adaround" and name.endswith("weightQuantizer.v"))
        parameter.requires_grad_(trainable)
    logger.debug("quantized %s (%s, %s)", model.spec.name, mode, spec.label)
    return quantModel


@torch.no_grad()
def runUnit(unit: nn.Module, inputs: torch.Tensor, batchSize: int = 64, device: str = "cpu") -> torch.Tensor:
    """Applies one unit to cached inputs batch by batch, results kept on the cpu."""
    outputs = [unit(inputs[start : start + batchSize].to(device)).cpu() for start in range(0, len(inputs), batchSize)]
    return torch.cat(outputs)


@torch.no_grad()
def calibrateRanges(
    quantModel: QuantModel,
    images: torch.Tensor,
    method: str = "minmax",
    percentile: float = 99.99,
    batchSize: int = 32,
    device: str = "cpu",
) -> dict:
    """Fixes the activation scales from full-precision activations of the calibration images.

    Args:
        quantModel (QuantModel): the model to calibrate
        images (torch.Tensor): [N, C, H, W] calibration images
        method (str, optional): minmax or percentile. Defaults to "minmax".
        percentile (float, optional): percentile of the percentile method. Defaults to 99.99.
        batchSize (int, optional): Defaults to 32.
        device (str, optional): Defaults to "cpu".

    Raises:
        ContractViolationException: no calibration images

    Returns:
        dict: scale of every activation quantizer by qualified name
    """
    if len(images) == 0:
        raise ContractViolationException("calibration", getString("ERROR_EmptyCalibration"))

    quantizers = quantModel.activationQuantizers()
    wasTraining = quantModel.training
    quantModel.eval().to(device)
    quantModel.setQuantization(weights=False, activations=False)
    for _, quantizer in quantizers:
        quantizer.startObserving(method)

    for start in range(0, len(images), batchSize):
        quantModel(images[start : start + batchSize].to(device))

    scales = {name: quantizer.finishObserving(name, percentile) for name, quantizer in quantizers}
    quantModel.setQuantization(weights=True, activations=True)
    quantModel.train(wasTraining)
    logger.info(getString("GENERAL_CalibrationDone", len(quantizers), len(images)))
    return scales
