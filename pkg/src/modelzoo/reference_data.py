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
import torch.nn.functional as F
from torchvision.datasets import CIFAR10

from STRINGS_LIST import getString
from utils.image_splits import ImageSplits
from utils.settings import EnvSetting, Setting

logger = logging.getLogger(__name__)

CIFAR10_MEAN = (0.4914, 0.4822, 0.4465)
CIFAR10_STD = (0.2470, 0.2435, 0.2616)
CIFAR10_CLASSES = 10


def __toTensor(rawImages: np.ndarray, resolution: int) -> torch.Tensor:
    images = torch.from_numpy(rawImages).permute(0, 3, 1, 2).float().div_(255.0)
    if images.shape[-1] != resolution:
        images = F.interpolate(images, size=(resolution, resolution), mode="bilinear", align_corners=False)
    mean = torch.tensor(CIFAR10_MEAN).view(1, -1, 1, 1)
    std = torch.tensor(CIFAR10_STD).view(1, -1, 1, 1)
    return (images - mean) / std


def pixelBounds(mean, std) -> tuple:
    """Per-channel normalized preimage of the [0, 1] pixel range, as (low, high) [1, C, 1, 1] tensors."""
    mean = torch.as_tensor(mean, dtype=torch.float32).view(1, -1, 1, 1)
    std = torch.as_tensor(std, dtype=torch.float32).view(1, -1, 1, 1)
    return (0.0 - mean) / std, (1.0 - mean) / std


def loadReferenceSplits(root: str = None, download: bool = None, resolution: int = 32) -> ImageSplits:
    """Loads the CIFAR-10 train split and its held-out test split, normalized.

    Args:
        root (str, optional): dataset directory, MIXMIX_DATA_ROOT by default
        download (bool, optional): download when missing, MIXMIX_DOWNLOAD by default
        resolution (int, optional): side of the returned images. Defaults to 32.

    Returns:
        ImageSplits: the normalized splits
    """
    root = root or EnvSetting(Setting.DATA_ROOT).value
    download = EnvSetting(Setting.DOWNLOAD).flag if download is None else download

    trainSet = CIFAR10(root, train=True, download=download)
    testSet = CIFAR10(root, train=False, download=download)
    logger.info(getString("GENERAL_ReferenceLoaded", root, len(trainSet), len(testSet)))

    return ImageSplits(
        __toTensor(trainSet.data, resolution),
        torch.tensor(trainSet.targets),
        __toTensor(testSet.data, resolution),
        torch.tensor(testSet.targets),
        CIFAR10_MEAN,
        CIFAR10_STD,
        CIFAR10_CLASSES,
    )
