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

import numpy as np
import torch
import torch.nn.functional as F

from custom_exceptions import ConfigurationException, ContractViolationException
from STRINGS_LIST import getString
from utils.mix_mask import MixMask

BRIGHTNESS_RANGE = 0.2
CONTRAST_RANGE = 0.2


def sampleMixMask(rng: np.random.Generator, width: int, height: int, boxRatioRange) -> MixMask:
    """Samples a Data Mixing box.

    Edge lengths are fractions of the image side drawn from U(low, high), rounded to whole
    pixels (at least one); the position is uniform among the placements that fit.

    Args:
        rng (np.random.Generator): source of randomness
        width (int): image width
        height (int): image height
        boxRatioRange (tuple): (low, high) edge fraction range

    Raises:
        ConfigurationException: the range is degenerate or leaves (0, 1)

    Returns:
        MixMask: the sampled mask
    """
    low, high = boxRatioRange
    if not 0.0 < low <= high < 1.0:
        raise ConfigurationException("box_ratio_range", getString("ERROR_BoxRatioRange", low, high))

    boxWidth = max(1, int(round(rng.uniform(low, high) * width)))
    boxHeight = max(1, int(round(rng.uniform(low, high) * height)))
    xl = int(rng.integers(0, width - boxWidth + 1))
    yd = int(rng.integers(0, height - boxHeight + 1))
    return MixMask(width, height, (xl, xl + boxWidth - 1, yd, yd + boxHeight - 1))


def mixImages(x1: torch.Tensor, x2: torch.Tensor, mask: MixMask) -> torch.Tensor:
    """Pastes the whole of x2, bilinearly resized to the box, into x1.

    Works on single [C, H, W] images or on [B, C, H, W] batches; the result equals x1
    outside the box and the resized x2 inside it.

    Raises:
        ContractViolationException: the images differ in shape or do not match the mask
    """
    if x1.shape != x2.shape:
        raise ContractViolationException("mix_images", getString("ERROR_ImageShape", tuple(x1.shape), tuple(x2.shape)))
    if (x1.shape[-1], x1.shape[-2]) != (mask.width, mask.height):
        raise ContractViolationException(
            "mix_images", getString("ERROR_MaskShape", mask.width, mask.height, x1.shape[-1], x1.shape[-2])
        )
    if mask.isempty:
        return x1.clone()

    xl, xr, yd, yu = mask.box
    boxHeight, boxWidth = yu - yd + 1, xr - xl + 1
    partner = x2 if x2.dim() == 4 else x2.unsqueeze(0)
    if (boxHeight, boxWidth) != tuple(partner.shape[-2:]):
        partner = F.interpolate(partner, size=(boxHeight, boxWidth), mode="bilinear", align_corners=False)
    partner = partner if x2.dim() == 4 else partner.squeeze(0)

    mixed = x1.clone()
    mixed[..., yd : yu + 1, xl : xr + 1] = partner
    return mixed


def cyclicDerangement(rng: np.random.Generator, size: int) -> np.ndarray:
    """partner[i] != i for every i when size >= 2: a random permutation walked as one cycle."""
    order = rng.permutation(size)
    partner = np.empty(size, dtype=np.int64)
    partner[order] = np.roll(order, -1)
    return partner


def mixBatch(batch: torch.Tensor, labels: torch.Tensor, rng: np.random.Generator, boxRatioRange) -> tuple:
    """Mixes every image of the batch with a partner under one shared mask.

    Returns:
        tuple: (mixed batch, partner labels, mask, partner indices)
    """
    if batch.shape[0] < 2:
        raise ContractViolationException("mix_batch", getString("ERROR_BatchTooSmall"))

    mask = sampleMixMask(rng, batch.shape[-1], batch.shape[-2], boxRatioRange)
    partner = cyclicDerangement(rng, batch.shape[0])
    partnerIndex = torch.from_numpy(partner).to(batch.device)
    mixed = mixImages(batch, batch[partnerIndex], mask)
    return mixed, labels[partnerIndex], mask, partner


def augmentBatch(batch: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    """Random horizontal flip then brightness/contrast jitter, one draw per image.

    Jitter acts on normalized pixels: contrast scales around the image mean, brightness shifts.
    Both are differentiable in the pixels.
    """
    size = batch.shape[0]
    flips = (torch.rand(size, generator=generator) < 0.5).to(batch.device).view(-1, 1, 1, 1)
    contrast = 1.0 + (torch.rand(size, generator=generator) * 2.0 - 1.0) * CONTRAST_RANGE
    brightness = (torch.rand(size, generator=generator) * 2.0 - 1.0) * BRIGHTNESS_RANGE
    contrast = contrast.to(batch).view(-1, 1, 1, 1)
    brightness = brightness.to(batch).view(-1, 1, 1, 1)

    flipped = torch.where(flips, batch.flip(-1), batch)
    means = flipped.mean(dim=(1, 2, 3), keepdim=True)
    return (flipped - means) * contrast + means + brightness
