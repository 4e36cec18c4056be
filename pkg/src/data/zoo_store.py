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

import json
import logging
import os

import torch

from custom_exceptions import CorruptedArtifactException
from data.tensor_codec import decodeTensors, encodeTensors, entryChecksum
from modelzoo.architectures import buildModel
from STRINGS_LIST import getString
from utils.bn_stats import BNStats
from utils.model_spec import ModelSpec
from utils.train_config import TrainConfig
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)

ZOO_FORMAT_VERSION = 1


def __writeJson(path: str, document) -> None:
    with open(path, "w", encoding="utf-8") as jsonFile:
        json.dump(document, jsonFile, indent=2, sort_keys=True)
        jsonFile.write("\n")


def __readJson(path: str):
    try:
        with open(path, "r", encoding="utf-8") as jsonFile:
            return json.load(jsonFile)
    except FileNotFoundError:
        raise CorruptedArtifactException(path, getString("ERROR_UnreadableArtifact", "file missing"))
    except (json.JSONDecodeError, UnicodeDecodeError) as error:
        raise CorruptedArtifactException(path, getString("ERROR_UnreadableArtifact", error))


def __readBytes(path: str) -> bytes:
    try:
        with open(path, "rb") as binaryFile:
            return binaryFile.read()
    except FileNotFoundError:
        raise CorruptedArtifactException(path, getString("ERROR_UnreadableArtifact", "file missing"))


def saveZoo(zoo: list, path: str, holdouts: list = ()) -> None:
    """Writes a zoo checkpoint directory.

    One subdirectory per entry holding `spec.json`, `weights.bin`, `bnstats.json` and
    `meta.json`, plus a top-level `zoo.json` listing the entries and the holdout names.

    Args:
        zoo (list): the entries to save
        path (str): the checkpoint directory, created when missing
        holdouts (list, optional): names of the entries excluded from synthesis
    """
    os.makedirs(path, exist_ok=True)
    for entry in zoo:
        entryDir = os.path.join(path, entry.name)
        os.makedirs(entryDir, exist_ok=True)

        __writeJson(os.path.join(entryDir, "spec.json"), entry.spec.toDict())
        with open(os.path.join(entryDir, "weights.bin"), "wb") as weightsFile:
            weightsFile.write(encodeTensors(entry.model.state_dict()))
        __writeJson(os.path.join(entryDir, "bnstats.json"), [stats.toDict() for stats in entry.bnstats])
        __writeJson(os.path.join(entryDir, "meta.json"), entry.meta())

    __writeJson(
        os.path.join(path, "zoo.json"),
        {
            "format_version": ZOO_FORMAT_VERSION,
            "entries": [entry.name for entry in zoo],
            "holdouts": list(holdouts),
        },
    )
    logger.info(getString("GENERAL_ZooSaved", len(zoo), path))


def readZooManifest(path: str) -> dict:
    return __readJson(os.path.join(path, "zoo.json"))


def loadEntry(entryDir: str) -> ModelZooEntry:
    """Loads one entry directory and checks its checksum.

    Raises:
        CorruptedArtifactException: a file is missing, truncated or the checksum differs
    """
    specDocument = __readJson(os.path.join(entryDir, "spec.json"))
    weightsBlob = __readBytes(os.path.join(entryDir, "weights.bin"))
    bnStatsDocument = __readJson(os.path.join(entryDir, "bnstats.json"))
    meta = __readJson(os.path.join(entryDir, "meta.json"))

    checksum = entryChecksum(specDocument, weightsBlob, bnStatsDocument)
    if checksum != meta.get("checksum"):
        raise CorruptedArtifactException(
            entryDir, getString("ERROR_ChecksumMismatch", meta.get("checksum"), checksum)
        )

    tensors = decodeTensors(weightsBlob, os.path.join(entryDir, "weights.bin"))
    spec = ModelSpec.fromDict(specDocument)
    model = buildModel(spec, meta["seed"])
    try:
        model.load_state_dict({name: torch.from_numpy(array) for name, array in tensors.items()})
    except RuntimeError as error:
        raise CorruptedArtifactException(entryDir, getString("ERROR_UnreadableArtifact", error))

    trainConfig = meta.get("train_config")
    return ModelZooEntry(
        meta["name"],
        spec,
        model,
        [BNStats.fromDict(stats) for stats in bnStatsDocument],
        meta["val_accuracy"],
        checksum,
        meta["seed"],
        TrainConfig.fromDict(trainConfig) if trainConfig else None,
        meta.get("substandard", False),
        meta.get("dtype", "float32"),
    )


def loadZoo(path: str) -> list:
    """Loads a zoo checkpoint directory written by saveZoo.

    Args:
        path (str): the checkpoint directory

    Raises:
        CorruptedArtifactException: any entry fails to decode or its checksum differs

    Returns:
        list: the entries, in saved order
    """
    manifest = readZooManifest(path)
    zoo = [loadEntry(os.path.join(path, name)) for name in manifest.get("entries", [])]
    logger.info(getString("GENERAL_ZooLoaded", len(zoo), path))
    return zoo
