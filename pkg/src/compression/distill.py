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
from torch.utils.data import DataLoader, TensorDataset
from tqdm import tqdm

from compression.qat import distillationLoss, freezeBatchNorm
from custom_exceptions import ConfigurationException, ContractViolationException, TrainingDivergenceException
from modelzoo.architectures import buildModel
from modelzoo.training import evaluateAccuracy
from modelzoo.zoo import makeEntry
from STRINGS_LIST import getString
from utils.compression_config import DistillConfig
from utils.model_spec import ModelSpec
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)


def distill(
    teacher: ModelZooEntry,
    studentSpec: ModelSpec,
    images: torch.Tensor,
    testImages: torch.Tensor,
    testLabels: torch.Tensor,
    config: DistillConfig = None,
    initialWeights: dict = None,
    name: str = None,
    device: str = "cpu",
) -> ModelZooEntry:
    """Trains a student on unlabeled images against the teacher's softened logits.

    Args:
        teacher (ModelZooEntry): the frozen teacher
        studentSpec (ModelSpec): architecture of the student
        images (torch.Tensor): [N, C, H, W] transfer images, synthesized or real
        testImages (torch.Tensor): real held-out images the student is measured on
        testLabels (torch.Tensor): their class indices
        config (DistillConfig, optional): Defaults to DistillConfig().
        initialWeights (dict, optional): state dict the student starts from. Its BN running
            statistics are kept: BN layers stay in eval mode while training
        name (str, optional): entry name, "<student>-from-<teacher>" by default
        device (str, optional): Defaults to "cpu".

    Raises:
        ConfigurationException: class counts or resolutions of teacher, student and data differ
        ContractViolationException: no transfer images
        TrainingDivergenceException: the loss stopped being finite

    Returns:
        ModelZooEntry: the student, with its accuracy on the real test split
    """
    config = config or DistillConfig()
    if studentSpec.numclasses != teacher.spec.numclasses:
        raise ConfigurationException(
            studentSpec.name, getString("ERROR_ClassCountMismatch", studentSpec.numclasses, teacher.spec.numclasses)
        )
    for resolution in (images.shape[-1], teacher.spec.resolution):
        if resolution != studentSpec.resolution:
            raise ConfigurationException(
                studentSpec.name, getString("ERROR_ResolutionMismatch", resolution, studentSpec.resolution)
            )
    if len(images) == 0:
        raise ContractViolationException("distill", getString("ERROR_EmptyDataset"))

    name = name or f"{studentSpec.name}-from-{teacher.name}"
    student = buildModel(studentSpec, config.seed)
    if initialWeights is not None:
        student.load_state_dict(initialWeights)
    student.to(device)
    teacherModel = teacher.model.to(device)

    loader = DataLoader(
        TensorDataset(images.float().cpu()),
        batch_size=config.batchsize,
        shuffle=True,
        generator=torch.Generator().manual_seed(config.seed),
    )
    optimizer = torch.optim.SGD(
        student.parameters(),
        lr=config.lr,
        momentum=config.momentum,
        weight_decay=config.weightdecay,
        nesterov=config.momentum > 0,
    )
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=max(1, config.epochs * len(loader)))

    student.train()
    if initialWeights is not None:
        freezeBatchNorm(student)
    for epoch in range(config.epochs):
        epochLoss = 0.0
        for (batch,) in tqdm(loader, desc=f"distill epoch {epoch + 1}", leave=False):
            batch = batch.to(device)
            with torch.no_grad():
                teacherLogits = teacherModel(batch)
            loss = distillationLoss(student(batch), teacherLogits, config.temperature)
            if not math.isfinite(loss.item()):
                raise TrainingDivergenceException(
                    getString("ERROR_TrainingDiverged"), {"model": name, "epoch": epoch, "lr": scheduler.get_last_lr()[0]}
                )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            scheduler.step()
            epochLoss += loss.item()
        logger.info(getString("GENERAL_DistillEpoch", epoch + 1, config.epochs, epochLoss / max(1, len(loader))))

    teacherModel.cpu()
    accuracy = evaluateAccuracy(student, testImages, testLabels, device=device)
    return makeEntry(name, student, accuracy)
