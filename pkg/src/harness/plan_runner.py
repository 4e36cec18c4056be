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
import os

import torch
from tqdm import tqdm

from compression.report import METRIC_NAME, archiveDataProvenance, realDataProvenance
from compression.tasks import runCompression
from custom_exceptions import PlanValidationException
from data import (
    datasetChecksum,
    exportDataset,
    fetchArchiveRecord,
    fetchCompletedKeys,
    importDataset,
    insertArchiveRecord,
    insertCellResult,
    loadZoo,
    setupTables,
)
from modelzoo.reference_data import loadReferenceSplits
from STRINGS_LIST import getString
from synthesis.synthesizer import synthesize
from utils.experiment_plan import ExperimentPlan
from utils.image_splits import ImageSplits
from utils.settings import EnvSetting, Setting, resolveDevice
from utils.synthesis_config import SynthesisConfig

logger = logging.getLogger(__name__)

DEFAULT_REAL_IMAGES = 1024


def resultsDbPath(plan: ExperimentPlan) -> str:
    return os.path.join(plan.outputdir, EnvSetting(Setting.RESULTS_DB).value)


def sampleRealImages(splits: ImageSplits, count: int, seed: int) -> torch.Tensor:
    """A seeded subset of `count` train images."""
    images, _ = splits.train.tensors
    generator = torch.Generator().manual_seed(seed)
    order = torch.randperm(len(images), generator=generator)
    return images[order[: min(count, len(images))]].clone()


def __synthesizedArchive(plan: ExperimentPlan, source: str, seed: int, zoo: list, splits: ImageSplits) -> tuple:
    """Path and checksum of the archive of a synthesize source, synthesized on first use."""
    dbPath = resultsDbPath(plan)
    record = fetchArchiveRecord(dbPath, source, seed)
    if record is not None and os.path.isdir(record[0]):
        return record

    document = plan.datasources[source]
    config = SynthesisConfig.fromDict(dict(document.get("config") or {})).replace(seed=seed)
    byName = {entry.name: entry for entry in zoo}
    names = plan.synthesisZoo(source, list(byName))
    unknown = [name for name in names if name not in byName]
    if unknown:
        raise PlanValidationException(plan.name, getString("ERROR_UnknownModel", unknown[0]))

    dataset = synthesize(
        [byName[name] for name in names],
        config,
        splits.mean.tolist(),
        splits.std.tolist(),
        resolveDevice(),
    )
    path = os.path.abspath(os.path.join(plan.outputdir, "archives", f"{source}-seed{seed}"))
    checksum = exportDataset(dataset, path)
    insertArchiveRecord(dbPath, path, source, seed, checksum)
    return path, checksum


def prepareCellData(plan: ExperimentPlan, source: str, seed: int, zoo: list, splits: ImageSplits) -> tuple:
    """Task images of one (source, seed) pair and their provenance record.

    Real sources draw a seeded subset of the train split (`config.num_images`, 1024 by
    default). Archive sources are imported. Synthesize sources are synthesized once, archived
    under `<output_dir>/archives` and reused by every target.

    Returns:
        tuple: (images, data provenance dict)
    """
    document = plan.datasources[source]
    if document["kind"] == "real":
        count = int((document.get("config") or {}).get("num_images", DEFAULT_REAL_IMAGES))
        return sampleRealImages(splits, count, seed), realDataProvenance()

    if document["kind"] == "archive":
        path = document["path"]
        dataset = importDataset(path)
        return dataset.images, archiveDataProvenance(os.path.abspath(path), datasetChecksum(dataset))

    path, checksum = __synthesizedArchive(plan, source, seed, zoo, splits)
    return importDataset(path).images, archiveDataProvenance(os.path.abspath(path), checksum)


def runPlan(plan: ExperimentPlan, device: str = None, zoo: list = None, splits: ImageSplits = None) -> tuple:
    """Executes every cell of a plan and stores one result per cell key.

    Completed keys are skipped when the plan resumes. A failing cell is logged and counted,
    the remaining cells still run.

    Args:
        plan (ExperimentPlan): the grid
        device (str, optional): MIXMIX_DEVICE or auto by default
        zoo (list, optional): the zoo, loaded from the plan's zoo directory by default
        splits (ImageSplits, optional): the reference splits, loaded by default

    Raises:
        PlanValidationException: a target is not part of the zoo

    Returns:
        tuple: (completed cell keys, failed cell keys)
    """
    device = device or resolveDevice()
    os.makedirs(os.path.join(plan.outputdir, "reports"), exist_ok=True)
    dbPath = resultsDbPath(plan)
    setupTables(dbPath)

    zoo = zoo if zoo is not None else loadZoo(plan.zoodir or EnvSetting(Setting.ZOO_DIR).value)
    byName = {entry.name: entry for entry in zoo}
    for target in plan.targets:
        if target not in byName:
            raise PlanValidationException(plan.name, getString("ERROR_UnknownModel", target))
    if splits is None:
        splits = loadReferenceSplits(resolution=byName[plan.targets[0]].spec.resolution)
    testImages, testLabels = splits.val.tensors

    completedKeys = fetchCompletedKeys(dbPath) if plan.resume else set()
    completed, failed = [], []
    prepared = {}

    for cell in tqdm(plan.cells(), desc=plan.name):
        key = cell["key"]
        if key in completedKeys:
            logger.info(getString("GENERAL_CellSkipped", key[:12]))
            completed.append(key)
            continue

        try:
            dataKey = (cell["source"], cell["seed"])
            if dataKey not in prepared:
                prepared[dataKey] = prepareCellData(plan, cell["source"], cell["seed"], zoo, splits)
            images, provenance = prepared[dataKey]

            report, _ = runCompression(
                plan.task,
                byName[cell["target"]],
                images,
                cell["spec"],
                testImages,
                testLabels,
                provenance,
                cell["seed"],
                plan.config,
                device,
            )
            reportPath = os.path.join(plan.outputdir, "reports", f"{key}.json")
            if provenance.get("kind") == "archive":
                relative = os.path.relpath(provenance["path"], os.path.dirname(reportPath))
                report = report.withDataProvenance({**provenance, "path": relative})
            report.save(reportPath)
            insertCellResult(
                dbPath, key, cell["source"], cell["target"], plan.task, cell["seed"], METRIC_NAME, report.value, reportPath
            )
            logger.info(getString("GENERAL_CellDone", key[:12], METRIC_NAME, report.value))
            completed.append(key)
        except Exception as error:
            logger.error(getString("ERROR_CellFailed", key[:12], error), exc_info=True)
            failed.append(key)

    logger.info(getString("GENERAL_PlanDone", plan.name, len(completed), len(failed)))
    return completed, failed


def missingCells(plan: ExperimentPlan) -> list:
    """Keys of the plan cells with no stored result."""
    dbPath = resultsDbPath(plan)
    if not os.path.exists(dbPath):
        return [cell["key"] for cell in plan.cells()]
    stored = fetchCompletedKeys(dbPath)
    return [cell["key"] for cell in plan.cells() if cell["key"] not in stored]
