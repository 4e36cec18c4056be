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

import torch

from compression.distill import distill
from compression.ptq import ptq
from compression.pruning import modelSparsity, twoStagePrune
from compression.qat import qatFinetune
from compression.report import buildReport
from custom_exceptions import ConfigurationException
from modelzoo.training import evaluateAccuracy
from STRINGS_LIST import getString
from utils.compression_config import TASK_CONFIGS
from utils.compression_report import TASKS, CompressionReport
from utils.model_spec import ModelSpec
from utils.prune_spec import PruneSpec
from utils.quant_spec import QuantSpec
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)


def runCompression(
    task: str,
    entry: ModelZooEntry,
    images: torch.Tensor,
    specDocument: dict,
    testImages: torch.Tensor,
    testLabels: torch.Tensor,
    dataProvenance: dict,
    seed: int = 0,
    configDocument: dict = None,
    device: str = "cpu",
) -> tuple:
    """Runs one downstream task on one entry and measures it on the real test split.

    The spec document is a quant spec for ptq and qat (ptq also reads `method`), a prune
    spec for prune and a student model spec for distill. The seed overrides the config seed.

    Args:
        task (str): ptq, qat, prune or distill
        entry (ModelZooEntry): the target model
        images (torch.Tensor): the task data, synthesized or real
        specDocument (dict): the task spec
        testImages (torch.Tensor): real held-out images
        testLabels (torch.Tensor): their labels
        dataProvenance (dict): where the task data came from
        seed (int, optional): Defaults to 0.
        configDocument (dict, optional): overrides of the task config
        device (str, optional): Defaults to "cpu".

    Raises:
        ConfigurationException: unknown task or invalid spec

    Returns:
        tuple: (CompressionReport, compressed model)
    """
    if task not in TASKS:
        raise ConfigurationException("task", getString("ERROR_UnknownTask", task))
    config = TASK_CONFIGS[task].fromDict(configDocument).replace(seed=seed)
    specDocument = dict(specDocument or {})

    if task == "ptq":
        method = specDocument.pop("method", "adaround")
        spec = QuantSpec.fromDict(specDocument)
        model, states = ptq(entry, images, spec, method, config, device)
        extras = {
            "method": method,
            "rounding": [state.toDict() for state in states],
            "min_saturation": min((state.saturatedFraction() for state in states), default=1.0),
        }
        specDocument = {**spec.toDict(), "method": method}
    elif task == "qat":
        spec = QuantSpec.fromDict(specDocument)
        model, history = qatFinetune(entry, images, spec, config, device)
        extras = {
            "best_step": history["best_step"],
            "bn_frozen_at": history["bn_frozen_at"],
            "final_loss": history["losses"][-1] if history["losses"] else None,
        }
        specDocument = spec.toDict()
    elif task == "prune":
        spec = PruneSpec.fromDict(specDocument)
        model, layers = twoStagePrune(entry, images, spec, config, device)
        extras = {"layers": layers, "achieved_sparsity": modelSparsity(model)}
        specDocument = spec.toDict()
    else:
        spec = ModelSpec.fromDict(specDocument)
        student = distill(entry, spec, images, testImages, testLabels, config, device=device)
        model = student.model
        extras = {"student": student.name, "student_checksum": student.checksum, "teacher_accuracy": entry.valaccuracy}
        specDocument = spec.toDict()

    accuracy = evaluateAccuracy(model, testImages, testLabels, device=device)
    report: CompressionReport = buildReport(task, entry, dataProvenance, specDocument, accuracy, seed, extras)
    logger.info(getString("GENERAL_TaskDone", task, entry.name, accuracy))
    return report, model
