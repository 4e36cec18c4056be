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

import torch
from torch import nn

from custom_exceptions import ConfigurationException
from STRINGS_LIST import getString
from utils.model_spec import Family, ModelSpec


class ConvBnAct(nn.Module):
    """Conv -> BN -> optional ReLU. The smallest reconstruction block."""

    def __init__(
        self,
        inChannels: int,
        outChannels: int,
        stride: int = 1,
        kernelSize: int = 3,
        groups: int = 1,
        activation: bool = True,
    ) -> None:
        super().__init__()
        self.conv = nn.Conv2d(
            inChannels,
            outChannels,
            kernelSize,
            stride=stride,
            padding=kernelSize // 2,
            groups=groups,
            bias=False,
        )
        self.bn = nn.BatchNorm2d(outChannels)
        self.act = nn.ReLU() if activation else nn.Identity()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.act(self.bn(self.conv(x)))


class ResidualBlock(nn.Module):
    """Basic two-conv residual block. The shortcut runs after the main branch,
    so BN layers are visited in registration order during forward."""

    def __init__(self, inChannels: int, outChannels: int, stride: int = 1) -> None:
        super().__init__()
        self.conv1 = nn.Conv2d(inChannels, outChannels, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(outChannels)
        self.relu1 = nn.ReLU()
        self.conv2 = nn.Conv2d(outChannels, outChannels, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(outChannels)
        if stride != 1 or inChannels != outChannels:
            self.shortcut = nn.Sequential(
                nn.Conv2d(inChannels, outChannels, 1, stride=stride, bias=False),
                nn.BatchNorm2d(outChannels),
            )
        else:
            self.shortcut = nn.Identity()
        self.relu2 = nn.ReLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = self.bn2(self.conv2(self.relu1(self.bn1(self.conv1(x)))))
        return self.relu2(out + self.shortcut(x))


class DepthwiseSeparableBlock(nn.Module):
    def __init__(self, inChannels: int, outChannels: int, stride: int = 1) -> None:
        super().__init__()
        self.depthwise = ConvBnAct(inChannels, inChannels, stride=stride, groups=inChannels)
        self.pointwise = ConvBnAct(inChannels, outChannels, kernelSize=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.pointwise(self.depthwise(x))


class VggBlock(nn.Module):
    """Stride-1 ConvBnAct, downsampling by max pooling."""

    def __init__(self, inChannels: int, outChannels: int, stride: int = 1) -> None:
        super().__init__()
        self.unit = ConvBnAct(inChannels, outChannels)
        self.pool = nn.MaxPool2d(2) if stride == 2 else nn.Identity()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.pool(self.unit(x))


_FAMILY_BLOCKS = {
    Family.PLAIN_CONV_BN: ConvBnAct,
    Family.RESIDUAL: ResidualBlock,
    Family.DEPTHWISE_SEPARABLE: DepthwiseSeparableBlock,
    Family.VGG_LIKE: VggBlock,
}


class ZooNet(nn.Module):
    """A zoo CNN: `features` (a stem plus depth-1 family blocks), global average pooling
    and a linear classifier.

    Attributes
    ----------
    :attr:`spec` : ModelSpec
        the architecture the network was built from
    :attr:`seed` : int
        the initialization seed
    """

    def __init__(self, spec: ModelSpec, seed: int = 0) -> None:
        super().__init__()
        self.spec = spec
        self.seed = seed

        blockType = _FAMILY_BLOCKS[spec.family]
        channels = max(4, int(round(16 * spec.width)))
        downsampleAt = {spec.depth // 3, (2 * spec.depth) // 3} - {0}

        blocks = []
        if spec.family is Family.VGG_LIKE:
            blocks.append(VggBlock(3, channels, stride=2 if 0 in downsampleAt else 1))
        else:
            blocks.append(ConvBnAct(3, channels))
        for index in range(1, spec.depth):
            stride = 2 if index in downsampleAt else 1
            outChannels = channels * 2 if stride == 2 else channels
            blocks.append(blockType(channels, outChannels, stride=stride))
            channels = outChannels

        self.features = nn.Sequential(*blocks)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.classifier = nn.Linear(channels, spec.numclasses)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.classifier(torch.flatten(self.pool(self.features(x)), 1))


def buildModel(spec: ModelSpec, seed: int) -> ZooNet:
    """Builds an untrained zoo network.

    Initialization runs on a forked RNG seeded with `seed`, so the same spec and seed
    always produce bitwise-identical parameters and the global RNG is left untouched.

    Args:
        spec (ModelSpec): architecture to build
        seed (int): initialization seed

    Raises:
        ConfigurationException: the spec is invalid or its family is not supported

    Returns:
        ZooNet: the untrained network
    """
    spec.validate()
    if spec.family not in _FAMILY_BLOCKS:
        raise ConfigurationException(spec.name, getString("ERROR_UnsupportedFamily", spec.family))

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return ZooNet(spec, seed)
