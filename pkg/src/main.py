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

import argparse
import json
import logging
import os
import sys
import traceback

import custom_exceptions
from compression import realDataProvenance, archiveDataProvenance, runCompression
from data import datasetChecksum, exportDataset, importDataset, loadEntry, loadZoo, readZooManifest, saveZoo, writePreviewGrid
from harness import (
    ablationMprime,
    ablationPlan,
    bnLossTable,
    crossValidate,
    missingCells,
    renderReport,
    resultsDbPath,
    runPlan,
    sampleRealImages,
    tablesFromStore,
    zooAverageAccuracy,
)
from inversion_analysis import analysisReport, avgpoolConstraints
from modelzoo import CIFAR10_MEAN, CIFAR10_STD, buildModel, loadReferenceSplits, readZooRecipe, trainModel
from STRINGS_LIST import getString
from synthesis import synthesize
from tools import verifyZoo
from utils import EnvSetting, ExperimentPlan, ResultsTable, Setting, SynthesisConfig, loadYamlDocument, resolveDevice

logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    level=getattr(logging, str(EnvSetting(Setting.LOG_LEVEL).value).upper(), logging.INFO),
)
logger = logging.getLogger(__name__)

DOMAIN_ERRORS = tuple(
    error
    for error in vars(custom_exceptions).values()
    if isinstance(error, type) and issubclass(error, Exception) and error.__module__ == custom_exceptions.__name__
)


def error_handler(error: Exception) -> int:
    """Log the error with its traceback and return the exit status."""
    logger.error(getString("ERROR_Unhandled", error))
    logger.debug("".join(traceback.format_exception(None, error, error.__traceback__)))
    return 2


def __zooDir(arguments) -> str:
    return getattr(arguments, "zoo", None) or EnvSetting(Setting.ZOO_DIR).value


def __printJson(document) -> None:
    print(json.dumps(document, indent=2, sort_keys=True, default=str))


# zoo


def zooTrain(arguments) -> int:
    recipe = readZooRecipe(loadYamlDocument(arguments.config) if arguments.config else {"models": []})
    outDir = arguments.out or recipe.get("out_dir") or __zooDir(arguments)
    device = resolveDevice()

    resolution = recipe["models"][0]["spec"].resolution
    splits = loadReferenceSplits(resolution=resolution)
    zoo = [
        trainModel(buildModel(model["spec"], model["seed"]), splits, recipe["train"], model["name"], device)
        for model in recipe["models"]
    ]
    saveZoo(zoo, outDir, recipe["holdouts"])
    return 0


def zooList(arguments) -> int:
    zooDir = __zooDir(arguments)
    holdouts = set(readZooManifest(zooDir).get("holdouts", []))
    for entry in loadZoo(zooDir):
        print(
            f"{entry.name:<32} {entry.spec.family.value:<20} "
            f"acc {entry.valaccuracy:.4f} {'holdout ' if entry.name in holdouts else ''}{entry.checksum[:16]}"
        )
    return 0


def zooVerify(arguments) -> int:
    zooDir = __zooDir(arguments)
    splits = None
    if arguments.evaluate:
        firstEntry = readZooManifest(zooDir)["entries"][0]
        splits = loadReferenceSplits(resolution=loadEntry(os.path.join(zooDir, firstEntry)).spec.resolution)
    verdicts = verifyZoo(zooDir, splits)
    __printJson(verdicts)
    failed = [verdict for verdict in verdicts if not verdict["checksum_ok"] or verdict["accuracy_ok"] is False]
    return 1 if failed else 0


# synth


def __synthesisZoo(zooDir: str, names: list = None) -> list:
    holdouts = set(readZooManifest(zooDir).get("holdouts", []))
    zoo = loadZoo(zooDir)
    if names:
        return [entry for entry in zoo if entry.name in names]
    return [entry for entry in zoo if entry.name not in holdouts]


def synthRun(arguments) -> int:
    config = SynthesisConfig.fromDict(loadYamlDocument(arguments.config))
    zoo = __synthesisZoo(__zooDir(arguments), arguments.models)
    dataset = synthesize(zoo, config, CIFAR10_MEAN, CIFAR10_STD, resolveDevice())
    exportDataset(dataset, arguments.out)
    return 0


def synthPreview(arguments) -> int:
    rows, columns = (int(side) for side in arguments.grid.lower().split("x"))
    writePreviewGrid(importDataset(arguments.archive), arguments.png, rows, columns)
    return 0


# analyze


def analyzeAvgpool(arguments) -> int:
    outputs = loadYamlDocument(arguments.observations)["outputs"]
    mixPattern = loadYamlDocument(arguments.mix_pattern)["patterns"] if arguments.mix_pattern else None
    report = analysisReport(avgpoolConstraints(arguments.pool, outputs, mixPattern))
    if arguments.out:
        with open(arguments.out, "w", encoding="utf-8") as reportFile:
            json.dump(report, reportFile, indent=2, sort_keys=True, default=str)
    __printJson(report)
    return 0


# compress


def compress(arguments) -> int:
    entry = loadEntry(arguments.model)
    splits = loadReferenceSplits(resolution=entry.spec.resolution)
    testImages, testLabels = splits.val.tensors
    configDocument = loadYamlDocument(arguments.config) if arguments.config else None

    if arguments.data == "real":
        count = int((configDocument or {}).get("num_images", 1024))
        images, provenance = sampleRealImages(splits, count, arguments.seed), realDataProvenance()
    else:
        dataset = importDataset(arguments.data)
        images = dataset.images
        provenance = archiveDataProvenance(os.path.abspath(arguments.data), datasetChecksum(dataset))

    report, _ = runCompression(
        arguments.task,
        entry,
        images,
        loadYamlDocument(arguments.spec),
        testImages,
        testLabels,
        provenance,
        arguments.seed,
        configDocument,
        resolveDevice(),
    )
    report.save(arguments.report)
    __printJson(report.toDict())
    return 0


# bench


def benchRun(arguments) -> int:
    plan = ExperimentPlan.load(arguments.plan)
    device = resolveDevice()
    reportDir = os.path.join(plan.outputdir, "report")

    if arguments.mode == "cross-validate":
        renderReport([crossValidate(plan, device)], reportDir)
    elif arguments.mode == "ablation":
        zoo = loadZoo(plan.zoodir or EnvSetting(Setting.ZOO_DIR).value)
        renderReport([ablationMprime(plan, device, zoo)], reportDir)
        plan = ablationPlan(plan, zoo)
    else:
        runPlan(plan, device)
        renderReport(tablesFromStore(resultsDbPath(plan)), reportDir)

    # nonzero when any cell failed
    return 1 if missingCells(plan) else 0


def benchReport(arguments) -> int:
    databasePath = os.path.join(arguments.dir, EnvSetting(Setting.RESULTS_DB).value)
    tables = tablesFromStore(databasePath) if os.path.exists(databasePath) else []
    renderReport(tables, arguments.out or os.path.join(arguments.dir, "report"))
    return 0


def benchEvaluate(arguments) -> int:
    zooDir = __zooDir(arguments)
    zoo = loadZoo(zooDir)
    datasets = {os.path.basename(os.path.normpath(path)): importDataset(path) for path in arguments.archive}

    accuracy = ResultsTable("zoo_average_accuracy", "top1_accuracy")
    for name, dataset in datasets.items():
        _, _, perModel = zooAverageAccuracy(dataset, zoo, device=resolveDevice())
        for model, value in perModel.items():
            accuracy.setCell(name, model, [value])

    bnInputs = dict(datasets)
    if arguments.real:
        splits = loadReferenceSplits(resolution=zoo[0].spec.resolution)
        bnInputs["real"] = sampleRealImages(splits, arguments.real, 0)
    bnTable = bnLossTable(bnInputs, zoo, arguments.batch_size, device=resolveDevice())

    for table in (accuracy, bnTable):
        for holdout in readZooManifest(zooDir).get("holdouts", []):
            table.flagColumn(holdout)
    renderReport([accuracy, bnTable], arguments.out)
    return 0


def buildParser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixdesk", description="Data-free compression with a model zoo")
    groups = parser.add_subparsers(dest="group", required=True)

    zoo = groups.add_parser("zoo", help="train, list and verify the model zoo").add_subparsers(dest="command", required=True)
    command = zoo.add_parser("train")
    command.add_argument("--config", help="zoo recipe, the default 6-model zoo when omitted")
    command.add_argument("--out")
    command.set_defaults(handler=zooTrain)
    command = zoo.add_parser("list")
    command.add_argument("--zoo")
    command.set_defaults(handler=zooList)
    command = zoo.add_parser("verify")
    command.add_argument("--zoo")
    command.add_argument("--evaluate", action="store_true", help="re-measure the held-out accuracy")
    command.set_defaults(handler=zooVerify)

    synth = groups.add_parser("synth", help="synthesize datasets").add_subparsers(dest="command", required=True)
    command = synth.add_parser("run")
    command.add_argument("--config", required=True)
    command.add_argument("--zoo")
    command.add_argument("--models", nargs="+", help="synthesize from these models only")
    command.add_argument("--out", required=True)
    command.set_defaults(handler=synthRun)
    command = synth.add_parser("preview")
    command.add_argument("--archive", required=True)
    command.add_argument("--grid", default="4x4")
    command.add_argument("--png", required=True)
    command.set_defaults(handler=synthPreview)

    analyze = groups.add_parser("analyze", help="inversion analysis").add_subparsers(dest="command", required=True)
    command = analyze.add_parser("avgpool")
    command.add_argument("--pool", type=int, default=2)
    command.add_argument("--observations", required=True, help="YAML mapping with an `outputs` list")
    command.add_argument("--mix-pattern", help="YAML mapping with a `patterns` list")
    command.add_argument("--out")
    command.set_defaults(handler=analyzeAvgpool)

    compressGroup = groups.add_parser("compress", help="compress one zoo entry").add_subparsers(dest="task", required=True)
    for task in ("ptq", "qat", "prune", "distill"):
        command = compressGroup.add_parser(task)
        command.add_argument("--model", required=True, help="zoo entry directory")
        command.add_argument("--data", required=True, help="dataset archive or `real`")
        command.add_argument("--spec", required=True)
        command.add_argument("--config")
        command.add_argument("--seed", type=int, default=0)
        command.add_argument("--report", required=True)
        command.set_defaults(handler=compress)

    bench = groups.add_parser("bench", help="experiment plans and reports").add_subparsers(dest="command", required=True)
    command = bench.add_parser("run")
    command.add_argument("--plan", required=True)
    command.add_argument("--mode", choices=("grid", "cross-validate", "ablation"), default="grid")
    command.set_defaults(handler=benchRun)
    command = bench.add_parser("report")
    command.add_argument("--dir", required=True)
    command.add_argument("--out")
    command.set_defaults(handler=benchReport)
    command = bench.add_parser("evaluate")
    command.add_argument("--archive", nargs="+", required=True)
    command.add_argument("--zoo")
    command.add_argument("--real", type=int, default=0, help="add a row of this many real images to the BN table")
    command.add_argument("--batch-size", type=int, default=64)
    command.add_argument("--out", required=True)
    command.set_defaults(handler=benchEvaluate)

    return parser


def main(argv: list = None) -> int:
    arguments = buildParser().parse_args(argv)
    try:
        return arguments.handler(arguments)
    except (*DOMAIN_ERRORS, OSError) as error:
        return error_handler(error)


if __name__ == "__main__":
    sys.exit(main())
