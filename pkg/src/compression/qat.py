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
import torchvision.transforms.functional as TF
from torch import nn
from torch.utils.data import DataLoader, TensorDataset
from tqdm import tqdm

from compression.quant_model import QuantModel, buildQuantizedModel, calibrateRanges, modelUnits, unitOutputs
from custom_exceptions import ContractViolationException, QatDivergenceException
from STRINGS_LIST import getString
from tools.verification import bnBufferDigest
from utils.compression_config import QatConfig
from utils.quant_spec import QuantSpec
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)


def distillationLoss(studentLogits: torch.Tensor, teacherLogits: torch.Tensor, temperature: float = 3.0) -> torch.Tensor:
    """tau^2 * KL(teacher || student) on temperature-softened distributions, batch averaged."""
    return (
        F.kl_div(
            F.log_softmax(studentLogits / temperature, dim=1),
            F.log_softmax(teacherLogits / temperature, dim=1),
            reduction="batchmean",
            log_target=True,
        )
        * temperature**2
    )


def augmentQatBatch(batch: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    """Random horizontal flip per image, Gaussian blur on half of the batches."""
    flips = (torch.rand(len(batch), generator=generator) < 0.5).view(-1, 1, 1, 1).to(batch.device)
    batch = torch.where(flips, batch.flip(-1), batch)
    blur, sigma = torch.rand(2, generator=generator).tolist()
    if blur < 0.5:
        sigma = 0.1 + 0.9 * sigma
        batch = TF.gaussian_blur(batch, kernel_size=[3, 3], sigma=[sigma, sigma])
    return batch


def freezeBatchNorm(model: nn.Module) -> None:
    """Puts every BN layer in eval mode: running statistics normalize and stay fixed."""
    for module in model.modules():
        if isinstance(module, nn.BatchNorm2d):
            module.eval()


def __cycle(loader: DataLoader):
    while True:
        for (batch,) in loader:
            yield batch


def qatFinetune(
    entry: ModelZooEntry,
    images: torch.Tensor,
    spec: QuantSpec,
    config: QatConfig = None,
    device: str = "cpu",
) -> tuple:
    """Quantization-aware finetuning of a zoo entry with the entry as teacher.

    Weights and activations use LSQ quantizers with straight-through rounding. The loss is
    the tau-softened KL to the teacher logits plus `feature_weight` times the mean squared
    error between student and teacher block outputs. SGD runs with the learning rate cut by
    `gamma` at the milestone shares of the run; BN running statistics stop updating at
    `bn_freeze_step`.

    Args:
        entry (ModelZooEntry): the full-precision teacher, left untouched
        images (torch.Tensor): [N, C, H, W] unlabeled training images
        spec (QuantSpec): bit-widths
        config (QatConfig, optional): Defaults to QatConfig().
        device (str, optional): Defaults to "cpu".

    Raises:
        ContractViolationException: no training images
        QatDivergenceException: the loss stopped being finite, carries the best checkpoint

    Returns:
        tuple: (QuantModel in eval mode, history dict)
    """
    config = config or QatConfig()
    images = images.float().cpu()
    if len(images) == 0:
        raise ContractViolationException("qat", getString("ERROR_EmptyDataset"))

    teacher = copy.deepcopy(entry.model).to(device).eval()
    teacherUnits = modelUnits(teacher)
    student: QuantModel = buildQuantizedModel(entry.model, spec, "lsq", config.weightscale).to(device)
    calibrateRanges(student, images[: config.calibrationimages], batchSize=config.batchsize, device=device)

    scales = [parameter for name, parameter in student.named_parameters() if name.endswith("scale")]
    others = [parameter for name, parameter in student.named_parameters() if not name.endswith("scale")]
    optimizer = torch.optim.SGD(
        [{"params": others, "weight_decay": config.weightdecay}, {"params": scales, "weight_decay": 0.0}],
        lr=config.lr,
        momentum=config.momentum,
    )
    milestones = [int(share * config.steps) for share in config.milestones]
    scheduler = torch.optim.lr_scheduler.MultiStepLR(optimizer, milestones=milestones, gamma=config.gamma)

    generator = torch.Generator().manual_seed(config.seed)
    loader = DataLoader(
        TensorDataset(images),
        batch_size=config.batchsize,
        shuffle=True,
        drop_last=len(images) >= config.batchsize,
        generator=torch.Generator().manual_seed(config.seed),
    )
    batches = __cycle(loader)

    history = {"losses": [], "best_step": None, "bn_frozen_at": None, "bn_digest_at_freeze": None}
    bestLoss = math.inf
    bestState = copy.deepcopy(student.state_dict())
    windowLosses = []
    window = max(1, min(50, config.steps // 10 or 1))

    student.train()
    for step in tqdm(range(config.steps), desc="qat", leave=False):
        if step == config.bnfreezestep:
            freezeBatchNorm(student)
            history["bn_frozen_at"] = step
            history["bn_digest_at_freeze"] = bnBufferDigest(student)
            logger.info(getString("GENERAL_QatBnFrozen", step))

        batch = next(batches).to(device)
        if config.augment:
            batch = augmentQatBatch(batch, generator)

        with torch.no_grad():
            teacherOutputs = unitOutputs(teacherUnits, batch)
        studentOutputs = unitOutputs(student.units(), batch)

        kdLoss = distillationLoss(studentOutputs[-1], teacherOutputs[-1], config.temperature)
        featureLoss = torch.stack(
            [F.mse_loss(studentOut, teacherOut) for studentOut, teacherOut in zip(studentOutputs[:-1], teacherOutputs[:-1])]
        ).mean()
        loss = kdLoss + config.featureweight * featureLoss

        if not math.isfinite(loss.item()):
            raise QatDivergenceException(getString("ERROR_QatDiverged", step), bestState, history["best_step"])

        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()
        scheduler.step()

        history["losses"].append(loss.item())
        windowLosses.append(loss.item())
        if len(windowLosses) == window:
            windowMean = sum(windowLosses) / window
            if windowMean < bestLoss:
                bestLoss = windowMean
                bestState = copy.deepcopy(student.state_dict())
                history["best_step"] = step
            logger.info(getString("GENERAL_QatStep", step + 1, config.steps, windowMean))
            windowLosses = []

    student.eval()
    history["bn_digest_final"] = bnBufferDigest(student)
    return student, history
