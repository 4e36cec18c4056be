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
import torch.nn.functional as F
from torch import nn
from torch.utils.data import DataLoader
from tqdm import tqdm

from custom_exceptions import TrainingDivergenceException
from modelzoo.zoo import makeEntry
from STRINGS_LIST import getString
from utils.image_splits import ImageSplits
from utils.train_config import TrainConfig
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)


@torch.no_grad()
def evaluateAccuracy(
    model: nn.Module,
    images: torch.Tensor,
    labels: torch.Tensor,
    batchSize: int = 256,
    device: str = "cpu",
) -> float:
    """Top-1 accuracy of the model in evaluation mode.

    Args:
        model (nn.Module): the network
        images (torch.Tensor): [N, C, H, W] normalized images
        labels (torch.Tensor): [N] class indices
        batchSize (int, optional): evaluation batch size. Defaults to 256.
        device (str, optional): device to evaluate on. Defaults to "cpu".

    Returns:
        float: fraction of correctly classified images
    """
    if len(images) == 0:
        return 0.0

    wasTraining = model.training
    model.eval()
    originalDevice = next(model.parameters()).device
    model.to(device)

    correct = 0
    for start in range(0, len(images), batchSize):
        batch = images[start : start + batchSize].to(device)
        predictions = model(batch).argmax(dim=1).cpu()
        correct += int((predictions == labels[start : start + batchSize].cpu()).sum())

    model.to(originalDevice)
    model.train(wasTraining)
    return correct / len(images)


def trainModel(
    model: nn.Module,
    dataset: ImageSplits,
    trainConfig: TrainConfig,
    name: str = None,
    device: str = "cpu",
) -> ModelZooEntry:
    """Trains a zoo network with SGD and a cosine schedule, then freezes it into an entry.

    cudnn runs in deterministic mode and the data order comes from a generator seeded with
    the config seed, so identical seed and config give the identical entry on one device.

    Args:
        model (nn.Module): a network from buildModel
        dataset (ImageSplits): labeled train and held-out splits at the model resolution
        trainConfig (TrainConfig): the training recipe
        name (str, optional): entry name, the spec name by default
        device (str, optional): device to train on. Defaults to "cpu".

    Raises:
        TrainingDivergenceException: the loss stopped being finite

    Returns:
        ModelZooEntry: the frozen entry, flagged substandard below the accuracy floor
    """
    name = name or model.spec.name
    torch.backends.cudnn.deterministic = True
    torch.backends.cudnn.benchmark = False

    model.to(device).train()
    loader = DataLoader(
        dataset.train,
        batch_size=trainConfig.batchsize,
        shuffle=True,
        generator=torch.Generator().manual_seed(trainConfig.seed),
    )
    optimizer = torch.optim.SGD(
        model.parameters(),
        lr=trainConfig.lr,
        momentum=trainConfig.momentum,
        weight_decay=trainConfig.weightdecay,
        nesterov=trainConfig.momentum > 0,
    )
    totalSteps = max(1, trainConfig.epochs * len(loader))
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=totalSteps)

    lastFiniteLoss = None
    for epoch in range(trainConfig.epochs):
        epochLoss = 0.0
        for step, (images, labels) in enumerate(tqdm(loader, desc=f"{name} epoch {epoch + 1}", leave=False)):
            images, labels = images.to(device), labels.to(device)
            loss = F.cross_entropy(model(images), labels, label_smoothing=trainConfig.labelsmoothing)

            if not math.isfinite(loss.item()):
                raise TrainingDivergenceException(
                    getString("ERROR_TrainingDiverged"),
                    {
                        "model": name,
                        "epoch": epoch,
                        "step": step,
                        "lr": scheduler.get_last_lr()[0],
                        "last_finite_loss": lastFiniteLoss,
                    },
                )
            lastFiniteLoss = loss.item()
            epochLoss += lastFiniteLoss

            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            scheduler.step()

        logger.info(
            getString(
                "GENERAL_TrainingEpoch",
                name,
                epoch + 1,
                trainConfig.epochs,
                epochLoss / max(1, len(loader)),
                scheduler.get_last_lr()[0],
            )
        )

    valImages, valLabels = dataset.val.tensors
    valAccuracy = evaluateAccuracy(model, valImages, valLabels, device=device)
    substandard = valAccuracy < trainConfig.accuracyfloor
    if substandard:
        logger.warning(getString("GENERAL_EntrySubstandard", name, valAccuracy, trainConfig.accuracyfloor))
    else:
        logger.info(getString("GENERAL_TrainingDone", name, valAccuracy))

    return makeEntry(name, model, valAccuracy, trainConfig, substandard)
