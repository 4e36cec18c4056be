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

import numpy as np
import torch
from torch import nn

from custom_exceptions import ContractViolationException
from STRINGS_LIST import getString
from utils.quant_spec import Granularity, QuantSpec

logger = logging.getLogger(__name__)

SCALE_FLOOR = 1e-8
ZETA = 1.1
GAMMA = -0.1


def fakeQuantize(x: torch.Tensor, scale, zeroPoint, low: int, high: int) -> torch.Tensor:
    """s * (clip(round(x / s) + z, n, p) - z). Exactly idempotent."""
    return (torch.clamp(torch.round(x / scale) + zeroPoint, low, high) - zeroPoint) * scale


def quantize(
    tensor: torch.Tensor,
    spec: QuantSpec,
    scale,
    zeroPoint=0,
    kind: str = "weight",
) -> torch.Tensor:
    """Nearest-rounding fake quantization on the grid of a spec.

    Args:
        tensor (torch.Tensor): values to quantize
        spec (QuantSpec): bit-widths and symmetry
        scale: positive step size, a float or a tensor broadcastable to `tensor`
        zeroPoint (optional): integer offset of an asymmetric grid. Defaults to 0.
        kind (str, optional): "weight" (signed or asymmetric grid) or "activation" (unsigned grid)

    Raises:
        ContractViolationException: a scale is not positive

    Returns:
        torch.Tensor: dequantized values on the grid {s * k : k in [n, p]}
    """
    scale = torch.as_tensor(scale, dtype=tensor.dtype, device=tensor.device)
    if bool((scale <= 0).any()):
        raise ContractViolationException("scale", getString("ERROR_NonPositiveScale"))

    if kind == "activation":
        low, high = QuantSpec.activationLimits(spec.actbits)
    else:
        low, high = spec.limits()
    return fakeQuantize(tensor, scale, zeroPoint, low, high)


def roundSte(x: torch.Tensor) -> torch.Tensor:
    """Rounds in the forward pass, identity gradient in the backward pass."""
    return x + (torch.round(x) - x).detach()


def gradScale(x: torch.Tensor, scale: float) -> torch.Tensor:
    """Same value as x, gradient multiplied by `scale`."""
    scaled = x * scale
    return (x - scaled).detach() + scaled


def fakeQuantizeSte(x: torch.Tensor, scale, zeroPoint, low: int, high: int) -> torch.Tensor:
    """Fake quantization whose gradient is the identity inside the clip range and zero outside.
    Gradients reaching a tensor scale follow the LSQ estimator."""
    return (roundSte(torch.clamp(x / scale + zeroPoint, low, high)) - zeroPoint) * scale


def lsqGradScale(numel: int, high: int) -> float:
    return 1.0 / float(np.sqrt(max(1, numel) * max(1, high)))


def rectifiedSigmoid(v: torch.Tensor) -> torch.Tensor:
    return torch.clamp(torch.sigmoid(v) * (ZETA - GAMMA) + GAMMA, 0, 1)


def roundingRegularizer(soft: torch.Tensor, beta: float) -> torch.Tensor:
    """sum(1 - |2h - 1|^beta): 1 per entry at h = 0.5, 0 at h in {0, 1}."""
    return (1 - (2 * soft - 1).abs().pow(beta)).sum()


class LinearTempDecay:
    """Anneals the regularizer exponent from start_b to end_b after a warmup share of the run."""

    def __init__(self, tMax: int, relStartDecay: float = 0.2, startB: float = 20.0, endB: float = 2.0) -> None:
        self.tMax = tMax
        self.startDecay = relStartDecay * tMax
        self.startB = startB
        self.endB = endB

    def __call__(self, t: int) -> float:
        if t < self.startDecay:
            return self.startB
        relT = (t - self.startDecay) / max(1e-12, self.tMax - self.startDecay)
        return self.endB + (self.startB - self.endB) * max(0.0, 1 - relT)


def __channelReduce(values: torch.Tensor, perChannel: bool, reduce) -> torch.Tensor:
    if perChannel:
        reduced = reduce(values.flatten(1), dim=1)
        return reduced.view(-1, *([1] * (values.dim() - 1)))
    return reduce(values.flatten(), dim=0)


def initialWeightScale(
    weight: torch.Tensor,
    bits: int,
    granularity: Granularity = Granularity.PER_LAYER,
    symmetric: bool = True,
    method: str = "mse",
) -> tuple:
    """Step size and zero point of a weight grid.

    "minmax" maps the weight range onto the grid; "mse" searches shrunken ranges and keeps,
    per layer or per output channel, the one with the lowest squared quantization error.

    Returns:
        tuple: (scale, zero point) tensors broadcastable to the weight
    """
    weight = weight.detach().float()
    perChannel = granularity is Granularity.PER_CHANNEL and weight.dim() > 1
    low, high = QuantSpec.weightLimits(bits, symmetric)
    upper = __channelReduce(weight.abs() if symmetric else weight, perChannel, torch.amax)
    lower = -upper if symmetric else __channelReduce(weight, perChannel, torch.amin)
    upper = torch.clamp(upper, min=0)
    lower = torch.clamp(lower, max=0)

    def candidates(ratio: float) -> tuple:
        if symmetric:
            return torch.clamp(ratio * upper / high, min=SCALE_FLOOR), torch.zeros_like(upper)
        scale = torch.clamp(ratio * (upper - lower) / (high - low), min=SCALE_FLOOR)
        return scale, torch.round(-ratio * lower / scale)

    if method == "minmax":
        return candidates(1.0)

    bestScale, bestZero = candidates(1.0)
    bestError = None
    for ratio in torch.linspace(1.0, 0.2, 81).tolist():
        scale, zeroPoint = candidates(ratio)
        error = __channelReduce(
            (weight - fakeQuantize(weight, scale, zeroPoint, low, high)).pow(2), perChannel, torch.sum
        )
        if bestError is None:
            bestError = error
            continue
        better = error < bestError
        bestScale = torch.where(better, scale, bestScale)
        bestZero = torch.where(better, zeroPoint, bestZero)
        bestError = torch.where(better, error, bestError)
    return bestScale, bestZero


class NearestQuantizer(nn.Module):
    """Fixed-scale nearest rounding."""

    def __init__(self, scale: torch.Tensor, zeroPoint: torch.Tensor, low: int, high: int) -> None:
        super().__init__()
        self.register_buffer("scale", scale.clone())
        self.register_buffer("zeroPoint", zeroPoint.clone())
        self.low = low
        self.high = high
        self.enabled = True

    def forward(self, weight: torch.Tensor) -> torch.Tensor:
        if not self.enabled:
            return weight
        return fakeQuantizeSte(weight, self.scale, self.zeroPoint, self.low, self.high)


class AdaRoundQuantizer(nn.Module):
    """Learned up/down rounding of a frozen weight.

    The integer grid position is floor(W / s) + h(v) with h the rectified sigmoid. Entries
    already on the grid start with h = 0. In hard mode h is replaced by the indicator v >= 0.
    """

    def __init__(self, weight: torch.Tensor, scale: torch.Tensor, zeroPoint: torch.Tensor, low: int, high: int) -> None:
        super().__init__()
        scaled = weight.detach().float() / scale
        floor = torch.floor(scaled)
        rest = scaled - floor
        roundsUp = rest > 1 - 1e-6
        onGrid = (rest < 1e-6) | roundsUp
        floor = torch.where(roundsUp, floor + 1, floor)
        rest = torch.where(onGrid, torch.zeros_like(rest), rest)

        v = -torch.log((ZETA - GAMMA) / (rest - GAMMA) - 1)
        v = torch.where(onGrid, torch.full_like(v, -6.0), v)

        self.register_buffer("scale", scale.clone())
        self.register_buffer("zeroPoint", zeroPoint.clone())
        self.register_buffer("floor", floor)
        self.v = nn.Parameter(v)
        self.low = low
        self.high = high
        self.soft = False
        self.enabled = True

    def softRounding(self) -> torch.Tensor:
        return rectifiedSigmoid(self.v)

    def regularizer(self, beta: float) -> torch.Tensor:
        return roundingRegularizer(self.softRounding(), beta)

    def forward(self, weight: torch.Tensor) -> torch.Tensor:
        if not self.enabled:
            return weight
        rounding = self.softRounding() if self.soft else (self.v >= 0).float()
        position = torch.clamp(self.floor + rounding + self.zeroPoint, self.low, self.high)
        return (position - self.zeroPoint) * self.scale


class LsqQuantizer(nn.Module):
    """Learned step size quantizer for weights or unsigned activations."""

    def __init__(self, scale: torch.Tensor, zeroPoint: torch.Tensor, low: int, high: int) -> None:
        super().__init__()
        self.scale = nn.Parameter(scale.clone())
        self.register_buffer("zeroPoint", zeroPoint.clone())
        self.low = low
        self.high = high
        self.enabled = True

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if not self.enabled:
            return x
        scale = gradScale(self.scale, lsqGradScale(x.numel(), self.high))
        return fakeQuantizeSte(x, scale, self.zeroPoint, self.low, self.high)


class ActivationQuantizer(nn.Module):
    """Unsigned quantizer on a block output. Calibrated by observing, optionally learnable (LSQ).

    While observing, inputs pass through unchanged and their range is recorded.
    """

    def __init__(self, bits: int, learnable: bool = False) -> None:
        super().__init__()
        self.low, self.high = QuantSpec.activationLimits(bits)
        self.scale = nn.Parameter(torch.tensor(1.0), requires_grad=learnable)
        self.learnable = learnable
        self.enabled = True
        self.__observed = None
        self.__observing = None

    def startObserving(self, method: str = "minmax") -> None:
        self.__observing = method
        self.__observed = [] if method == "percentile" else torch.tensor(0.0)

    def finishObserving(self, name: str = "activation", percentile: float = 99.99) -> float:
        """Sets the scale from the observed range and stops observing.

        A quantizer that saw only zeros gets the scale floor and a warning.
        """
        if self.__observing == "percentile":
            values = np.concatenate(self.__observed) if self.__observed else np.zeros(1, dtype=np.float32)
            bound = float(np.percentile(values, percentile))
        else:
            bound = float(self.__observed)
        self.__observing = None
        self.__observed = None

        if bound <= 0:
            logger.warning(getString("ERROR_ZeroActivations", name, SCALE_FLOOR))
            scale = SCALE_FLOOR
        else:
            scale = bound / self.high
        with torch.no_grad():
            self.scale.fill_(scale)
        return scale

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.__observing is not None:
            if self.__observing == "percentile":
                self.__observed.append(x.detach().cpu().float().flatten().numpy())
            else:
                self.__observed = torch.maximum(self.__observed, x.detach().max().cpu().float())
            return x
        if not self.enabled:
            return x

        scale = self.scale
        if self.learnable and self.training:
            scale = gradScale(scale, lsqGradScale(x.numel(), self.high))
        return fakeQuantizeSte(x, scale, 0, self.low, self.high)


def makeWeightQuantizer(
    weight: torch.Tensor,
    bits: int,
    spec: QuantSpec,
    mode: str = "nearest",
    scaleMethod: str = "mse",
) -> nn.Module:
    """Builds the weight quantizer of one layer for the nearest, adaround or lsq mode."""
    scale, zeroPoint = initialWeightScale(weight, bits, spec.granularity, spec.symmetric, scaleMethod)
    scale = scale.to(weight.device)
    zeroPoint = zeroPoint.to(weight.device)
    low, high = QuantSpec.weightLimits(bits, spec.symmetric)

    if mode == "adaround":
        return AdaRoundQuantizer(weight, scale, zeroPoint, low, high)
    if mode == "lsq":
        return LsqQuantizer(scale, zeroPoint, low, high)
    return NearestQuantizer(scale, zeroPoint, low, high)
