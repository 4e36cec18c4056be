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

from custom_exceptions import ContractViolationException
from modelzoo.training import evaluateAccuracy
from STRINGS_LIST import getString
from synthesis.losses import BatchStatsRecorder, bnStatsLoss
from utils.results_table import ResultsTable
from utils.synthesized_dataset import SynthesizedDataset

logger = logging.getLogger(__name__)


def zooAverageAccuracy(dataset: SynthesizedDataset, zoo: list, batchSize: int = 256, device: str = "cpu") -> tuple:
    """Top-1 accuracy of every zoo model on the images against their dominant labels.

    Args:
        dataset (SynthesizedDataset): images with label distributions
        zoo (list): the models to evaluate
        batchSize (int, optional): Defaults to 256.
        device (str, optional): Defaults to "cpu".

    Raises:
        ContractViolationException: the dataset or the zoo is empty

    Returns:
        tuple: (mean, sample stdev or 0.0 for a single model, {model name: accuracy})
    """
    if len(dataset) == 0:
        raise ContractViolationException("dataset", getString("ERROR_EmptyDataset"))
    if not zoo:
        raise ContractViolationException("zoo", getString("ERROR_EmptyZoo"))

    labels = torch.from_numpy(dataset.dominantLabels()).long()
    perModel = {entry.name: evaluateAccuracy(entry.model, dataset.images, labels, batchSize, device) for entry in zoo}
    accuracies = np.array(list(perModel.values()))
    stdev = float(accuracies.std(ddof=1)) if len(accuracies) > 1 else 0.0
    return float(accuracies.mean()), stdev, perModel


@torch.no_grad()
def datasetBnLoss(images: torch.Tensor, entry, batchSize: int, device: str = "cpu") -> float:
    """Mean BN statistics loss of the images on one model, over full batches of `batchSize`.

    Raises:
        ContractViolationException: fewer images than one batch
    """
    numBatches = len(images) // batchSize
    if numBatches == 0:
        raise ContractViolationException("bn loss", getString("ERROR_FewerImagesThanBatch", len(images), batchSize))

    model = entry.model.to(device)
    total = 0.0
    for index in range(numBatches):
        batch = images[index * batchSize : (index + 1) * batchSize].to(device)
        with BatchStatsRecorder(model, entry.name) as recorder:
            model(batch)
        total += float(bnStatsLoss(recorder.stats, entry.bnstats))
    model.cpu()
    return total / numBatches


def bnLossTable(datasets: dict, zoo: list, batchSize: int = 64, name: str = "bn_loss", device: str = "cpu") -> ResultsTable:
    """BN statistics loss of every dataset on every zoo model.

    Args:
        datasets (dict): {row name: images tensor, SynthesizedDataset or a list of them, one per seed}
        zoo (list): the models, one column each
        batchSize (int, optional): the common batch size. Defaults to 64.
        name (str, optional): table name. Defaults to "bn_loss".
        device (str, optional): Defaults to "cpu".

    Returns:
        ResultsTable: rows are datasets, columns are models
    """
    table = ResultsTable(name, "bn_loss")
    for rowName, variants in datasets.items():
        variants = variants if isinstance(variants, (list, tuple)) else [variants]
        imageSets = [variant.images if isinstance(variant, SynthesizedDataset) else variant for variant in variants]
        for entry in zoo:
            table.setCell(rowName, entry.name, [datasetBnLoss(images, entry, batchSize, device) for images in imageSets])
    return table
