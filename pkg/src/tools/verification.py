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

import hashlib
import logging
import os

import numpy as np
from torch import nn

from custom_exceptions import CorruptedArtifactException, MissingProvenanceException
from data.archive_store import datasetChecksum, importDataset
from data.zoo_store import loadEntry, readZooManifest
from modelzoo.training import evaluateAccuracy
from STRINGS_LIST import getString
from utils.compression_report import CompressionReport
from utils.image_splits import ImageSplits
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)


def bnBufferDigest(model: nn.Module) -> str:
    """sha256 over the running mean and variance of every BN layer, in registration order."""
    digest = hashlib.sha256()
    for name, module in model.named_modules():
        if isinstance(module, nn.modules.batchnorm._BatchNorm):
            digest.update(name.encode("utf-8"))
            for buffer in (module.running_mean, module.running_var):
                digest.update(np.ascontiguousarray(buffer.detach().cpu().numpy(), dtype="<f4").tobytes())
    return digest.hexdigest()


def bnStatsDigest(entry: ModelZooEntry) -> str:
    """Digest of the live BN buffers of an entry, unchanged by any synthesis run."""
    return bnBufferDigest(entry.model)


def verifyZoo(path: str, splits: ImageSplits = None, tolerance: float = 0.001) -> list:
    """Checks every entry of a zoo checkpoint directory.

    Args:
        path (str): the zoo directory
        splits (ImageSplits, optional): when given, the stored accuracy is re-measured on the
            held-out split and must match within `tolerance`
        tolerance (float, optional): accuracy tolerance. Defaults to 0.001 (0.1 pt).

    Returns:
        list: one verdict dict per entry {name, checksum_ok, accuracy_ok, stored_accuracy,
            measured_accuracy, error}
    """
    verdicts = []
    for name in readZooManifest(path).get("entries", []):
        verdict = {
            "name": name,
            "checksum_ok": False,
            "accuracy_ok": None,
            "stored_accuracy": None,
            "measured_accuracy": None,
            "error": None,
        }
        try:
            entry = loadEntry(os.path.join(path, name))
        except CorruptedArtifactException as error:
            verdict["error"] = str(error)
            logger.error(error)
            verdicts.append(verdict)
            continue

        verdict["checksum_ok"] = True
        verdict["stored_accuracy"] = entry.valaccuracy
        if splits is not None and entry.valaccuracy is not None:
            images, labels = splits.val.tensors
            measured = evaluateAccuracy(entry.model, images, labels)
            verdict["measured_accuracy"] = measured
            verdict["accuracy_ok"] = abs(measured - entry.valaccuracy) <= tolerance
        logger.info(getString("GENERAL_ZooEntryVerified", name, verdict["measured_accuracy"] or entry.valaccuracy))
        verdicts.append(verdict)
    return verdicts


def __zooChecksums(zooDir: str) -> dict:
    checksums = {}
    for name in readZooManifest(zooDir).get("entries", []):
        entry = loadEntry(os.path.join(zooDir, name))
        checksums[entry.checksum] = name
    return checksums


def resolveProvenanceChain(reportPath: str, zooDir: str) -> list:
    """Follows a report back to the zoo: report -> data -> synthesis config -> zoo checksums.

    Args:
        reportPath (str): a CompressionReport JSON file
        zooDir (str): the zoo checkpoint directory the run used

    Raises:
        MissingProvenanceException: a link of the chain does not resolve
        CorruptedArtifactException: an artifact of the chain fails its checksum

    Returns:
        list: the resolved links, (kind, reference) pairs from the report to the zoo
    """
    report = CompressionReport.load(reportPath)
    zooChecksums = __zooChecksums(zooDir)
    chain = [("report", reportPath)]

    if report.modelchecksum not in zooChecksums:
        raise MissingProvenanceException(reportPath, getString("ERROR_DanglingReference", "model_checksum"))
    chain.append(("target", zooChecksums[report.modelchecksum]))

    provenance = report.dataprovenance
    if provenance.get("kind") == "real":
        chain.append(("data", "real"))
        return chain
    if provenance.get("kind") != "archive" or not provenance.get("path"):
        raise MissingProvenanceException(reportPath, getString("ERROR_DanglingReference", "data_provenance"))

    archivePath = provenance["path"]
    if not os.path.isabs(archivePath):
        archivePath = os.path.join(os.path.dirname(reportPath), archivePath)
    dataset = importDataset(archivePath)
    if datasetChecksum(dataset) != provenance.get("checksum"):
        raise MissingProvenanceException(archivePath, getString("ERROR_DanglingReference", "archive checksum"))
    chain.append(("data", archivePath))

    if "config" not in dataset.provenance:
        raise MissingProvenanceException(archivePath, getString("ERROR_DanglingReference", "synthesis config"))
    chain.append(("synthesis_config", dataset.provenance["config"]))

    for checksum in dataset.provenance.get("zoo_checksums", []):
        if checksum not in zooChecksums:
            raise MissingProvenanceException(archivePath, getString("ERROR_DanglingReference", checksum))
        chain.append(("zoo", zooChecksums[checksum]))
    return chain
