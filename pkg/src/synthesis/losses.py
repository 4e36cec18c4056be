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
from torch import nn

from custom_exceptions import ContractViolationException, UnsupportedModelException
from STRINGS_LIST import getString

LABEL_MASS_TOLERANCE = 1e-6
KL_VARIANCE_FLOOR = 1e-8


def ceLoss(logits: torch.Tensor, labelDistribution: torch.Tensor) -> torch.Tensor:
    """Cross-entropy between softmax(logits) and a label distribution, averaged over the batch.

    Args:
        logits (torch.Tensor): [B, K] or [K] logits
        labelDistribution (torch.Tensor): probability rows over the same K classes

    Raises:
        ContractViolationException: class counts differ or a row does not sum to 1 within 1e-6

    Returns:
        torch.Tensor: scalar loss, differentiable in the logits
    """
    logits = logits.unsqueeze(0) if logits.dim() == 1 else logits
    target = torch.as_tensor(labelDistribution, dtype=logits.dtype, device=logits.device)
    target = target.unsqueeze(0) if target.dim() == 1 else target

    if target.shape != logits.shape:
        raise ContractViolationException(
            "ce_loss", getString("ERROR_ClassCountMismatch", tuple(logits.shape), tuple(target.shape))
        )
    masses = target.detach().sum(dim=1)
    worst = torch.argmax((masses - 1.0).abs())
    if abs(float(masses[worst]) - 1.0) > LABEL_MASS_TOLERANCE:
        raise ContractViolationException("ce_loss", getString("ERROR_LabelMass", float(masses[worst])))

    return -(target * F.log_softmax(logits, dim=1)).sum(dim=1).mean()


def mixedCe(logits: torch.Tensor, y1: torch.Tensor, y2: torch.Tensor, beta) -> torch.Tensor:
    """(1 - beta) * CE(y1) + beta * CE(y2), averaged over the batch.

    `beta` is a scalar or a per-image tensor, within [0, 1].
    """
    betaTensor = torch.as_tensor(beta, dtype=logits.dtype, device=logits.device)
    if torch.any(betaTensor < 0) or torch.any(betaTensor > 1):
        raise ContractViolationException("mixed_ce", getString("ERROR_BetaRange", beta))

    first = F.cross_entropy(logits, y1, reduction="none")
    second = F.cross_entropy(logits, y2, reduction="none")
    return ((1.0 - betaTensor) * first + betaTensor * second).mean()


class BatchStatsRecorder:
    """Context manager collecting, for every BN layer, the per-channel mean and biased
    variance of its input over batch and spatial positions.

    Usage:
        with BatchStatsRecorder(model) as recorder:
            logits = model(images)
        stats = recorder.stats  # [(mean, var), ...] in forward order
    """

    def __init__(self, model: nn.Module, modelName: str = "model") -> None:
        self.__layers = [module for module in model.modules() if isinstance(module, nn.BatchNorm2d)]
        if not self.__layers:
            raise UnsupportedModelException(modelName, getString("ERROR_NoBatchNorm"))
        self.__handles = []
        self.stats = []

    def __record(self, module, inputs, output) -> None:
        features = inputs[0]
        self.stats.append(
            (features.mean(dim=(0, 2, 3)), features.var(dim=(0, 2, 3), correction=0))
        )

    def __enter__(self):
        self.stats = []
        self.__handles = [layer.register_forward_hook(self.__record) for layer in self.__layers]
        return self

    def __exit__(self, excType, excValue, traceback) -> None:
        for handle in self.__handles:
            handle.remove()
        self.__handles = []


def __storedTensor(values: np.ndarray, like: torch.Tensor) -> torch.Tensor:
    return torch.tensor(np.array(values), dtype=like.dtype, device=like.device)


def __checkLayers(batchStats: list, stored: list) -> None:
    if len(batchStats) != len(stored):
        raise ContractViolationException(
            "bn_stats_loss", getString("ERROR_LayerCountMismatch", len(batchStats), len(stored))
        )
    for (mean, _), storedStats in zip(batchStats, stored):
        if mean.shape[0] != storedStats.channels:
            raise ContractViolationException(
                "bn_stats_loss",
                getString("ERROR_ChannelMismatch", storedStats.layerid, mean.shape[0], storedStats.channels),
            )


def bnStatsLoss(batchStats: list, stored: list) -> torch.Tensor:
    """Sum over BN layers of ||mu - mu_hat||_2 + ||var - var_hat||_2.

    Args:
        batchStats (list): per-layer (mean, var) batch statistics, forward order
        stored (list): per-layer BNStats of the model

    Raises:
        ContractViolationException: layer or channel counts differ

    Returns:
        torch.Tensor: scalar loss, differentiable in the batch statistics
    """
    __checkLayers(batchStats, stored)

    total = 0.0
    for (mean, var), storedStats in zip(batchStats, stored):
        total = total + torch.linalg.vector_norm(mean - __storedTensor(storedStats.mean, mean))
        total = total + torch.linalg.vector_norm(var - __storedTensor(storedStats.var, var))
    return total


def bnStatsLossKl(batchStats: list, stored: list) -> torch.Tensor:
    """Sum over BN layers and channels of KL(N(mu_hat, var_hat) || N(mu, var))."""
    __checkLayers(batchStats, stored)

    total = 0.0
    for (mean, var), storedStats in zip(batchStats, stored):
        storedMean = __storedTensor(storedStats.mean, mean)
        storedVar = __storedTensor(storedStats.var, var).clamp_min(KL_VARIANCE_FLOOR)
        batchVar = var.clamp_min(KL_VARIANCE_FLOOR)
        divergence = 0.5 * (
            torch.log(batchVar / storedVar) + (storedVar + (storedMean - mean) ** 2) / batchVar - 1.0
        )
        total = total + divergence.sum()
    return total


def totalVariation(batch: torch.Tensor) -> torch.Tensor:
    """Anisotropic L1 total variation of every image: [B] tensor."""
    horizontal = (batch[..., :, 1:] - batch[..., :, :-1]).abs().sum(dim=(1, 2, 3))
    vertical = (batch[..., 1:, :] - batch[..., :-1, :]).abs().sum(dim=(1, 2, 3))
    return horizontal + vertical


def priorLoss(batch: torch.Tensor, l2Weight: float) -> torch.Tensor:
    """Image prior TV(x) + l2Weight * ||x||^2, averaged over the images of the batch.

    Raises:
        ContractViolationException: height or width below 2
    """
    if batch.dim() != 4 or batch.shape[-1] < 2 or batch.shape[-2] < 2:
        raise ContractViolationException(
            "prior_loss", getString("ERROR_SpatialExtent", batch.shape[-2], batch.shape[-1])
        )
    squaredNorm = batch.pow(2).sum(dim=(1, 2, 3))
    return (totalVariation(batch) + l2Weight * squaredNorm).mean()


def linearKernelMmd2(featuresX: torch.Tensor, featuresZ: torch.Tensor) -> torch.Tensor:
    """Biased squared MMD under the linear kernel k(a, b) = <a, b>.

    Equals ||mean(X) - mean(Z)||^2, the first-moment term matched by the BN loss.

    Args:
        featuresX (torch.Tensor): [n, d] samples
        featuresZ (torch.Tensor): [m, d] samples

    Returns:
        torch.Tensor: scalar squared MMD
    """
    kernelXX = (featuresX @ featuresX.T).mean()
    kernelZZ = (featuresZ @ featuresZ.T).mean()
    kernelXZ = (featuresX @ featuresZ.T).mean()
    return kernelXX + kernelZZ - 2.0 * kernelXZ


def channelFeatures(activations: torch.Tensor) -> torch.Tensor:
    """[B, C, H, W] activations as B*H*W samples of C-dimensional features."""
    return activations.permute(0, 2, 3, 1).reshape(-1, activations.shape[1])
