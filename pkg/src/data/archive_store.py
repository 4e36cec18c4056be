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
from torchvision.utils import make_grid, save_image

from custom_exceptions import (
    ContractViolationException,
    CorruptedArtifactException,
    MigrationRequiredException,
    MissingProvenanceException,
)
from data.tensor_codec import blobChecksum, canonicalJson, decodeTensors, encodeTensors
from STRINGS_LIST import getString
from utils.synthesized_dataset import DATASET_FORMAT_VERSION, SynthesizedDataset

logger = logging.getLogger(__name__)


def __encodeImages(dataset: SynthesizedDataset) -> bytes:
    return encodeTensors({"images": dataset.images, "base_labels": dataset.baselabels})


def __labelsDocument(dataset: SynthesizedDataset) -> dict:
    return {
        "num_classes": dataset.numclasses,
        "labels": [[float(weight) for weight in row] for row in dataset.labels],
    }


def datasetChecksum(dataset: SynthesizedDataset) -> str:
    """sha256 over the image blob, the label table and the provenance."""
    return blobChecksum(
        __encodeImages(dataset),
        canonicalJson(__labelsDocument(dataset)),
        canonicalJson(dataset.provenance),
    )


def exportDataset(dataset: SynthesizedDataset, path: str) -> str:
    """Writes a self-describing dataset archive directory.

    Files: `archive.json` (format version, shape, dtype, checksum), `images.bin`
    (tensor codec: images and base labels), `labels.json` (label table) and `provenance.json`.

    Args:
        dataset (SynthesizedDataset): the dataset to write
        path (str): the archive directory, created when missing

    Returns:
        str: the archive checksum
    """
    os.makedirs(path, exist_ok=True)
    imagesBlob = __encodeImages(dataset)
    labelsDocument = __labelsDocument(dataset)
    checksum = blobChecksum(imagesBlob, canonicalJson(labelsDocument), canonicalJson(dataset.provenance))

    with open(os.path.join(path, "images.bin"), "wb") as imagesFile:
        imagesFile.write(imagesBlob)
    for fileName, document in (
        ("labels.json", labelsDocument),
        ("provenance.json", dataset.provenance),
        (
            "archive.json",
            {
                "format_version": DATASET_FORMAT_VERSION,
                "shape": list(dataset.images.shape),
                "dtype": "float32",
                "checksum": checksum,
            },
        ),
    ):
        with open(os.path.join(path, fileName), "w", encoding="utf-8") as jsonFile:
            json.dump(document, jsonFile, sort_keys=True)

    logger.info(getString("GENERAL_DatasetExported", len(dataset), path))
    return checksum


def importDataset(path: str) -> SynthesizedDataset:
    """Reads an archive written by exportDataset.

    Raises:
        MigrationRequiredException: the archive was written by another format version
        MissingProvenanceException: the archive has no provenance record
        CorruptedArtifactException: a file is unreadable or the checksum differs

    Returns:
        SynthesizedDataset: the dataset
    """
    try:
        with open(os.path.join(path, "archive.json"), "r", encoding="utf-8") as manifestFile:
            manifest = json.load(manifestFile)
    except (FileNotFoundError, json.JSONDecodeError) as error:
        raise CorruptedArtifactException(path, getString("ERROR_UnreadableArtifact", error))

    if manifest.get("format_version") != DATASET_FORMAT_VERSION:
        raise MigrationRequiredException(path, manifest.get("format_version"), DATASET_FORMAT_VERSION)

    provenancePath = os.path.join(path, "provenance.json")
    if not os.path.exists(provenancePath):
        raise MissingProvenanceException(path, getString("ERROR_MissingProvenance"))

    try:
        with open(provenancePath, "r", encoding="utf-8") as provenanceFile:
            provenance = json.load(provenanceFile)
        with open(os.path.join(path, "labels.json"), "r", encoding="utf-8") as labelsFile:
            labelsDocument = json.load(labelsFile)
        with open(os.path.join(path, "images.bin"), "rb") as imagesFile:
            imagesBlob = imagesFile.read()
    except (FileNotFoundError, json.JSONDecodeError) as error:
        raise CorruptedArtifactException(path, getString("ERROR_UnreadableArtifact", error))

    if not provenance:
        raise MissingProvenanceException(path, getString("ERROR_MissingProvenance"))

    checksum = blobChecksum(imagesBlob, canonicalJson(labelsDocument), canonicalJson(provenance))
    if checksum != manifest.get("checksum"):
        raise CorruptedArtifactException(
            path, getString("ERROR_ChecksumMismatch", manifest.get("checksum"), checksum)
        )

    tensors = decodeTensors(imagesBlob, os.path.join(path, "images.bin"))
    images = torch.from_numpy(tensors["images"])
    if list(images.shape) != manifest.get("shape"):
        raise CorruptedArtifactException(
            path, getString("ERROR_UnreadableArtifact", f"shape {list(images.shape)} != {manifest.get('shape')}")
        )

    return SynthesizedDataset(images, labelsDocument["labels"], tensors["base_labels"], provenance)


def writePreviewGrid(dataset: SynthesizedDataset, pngPath: str, rows: int = 4, columns: int = 4) -> None:
    """Tiles the first rows x columns images, de-normalized, into one PNG."""
    count = rows * columns
    if len(dataset) < count:
        raise ContractViolationException(pngPath, getString("ERROR_PreviewGridSize", rows, columns, count))

    normalization = dataset.provenance.get("normalization", {"mean": [0.0], "std": [1.0]})
    mean = torch.tensor(normalization["mean"]).view(1, -1, 1, 1)
    std = torch.tensor(normalization["std"]).view(1, -1, 1, 1)
    pixels = (dataset.images[:count] * std + mean).clamp(0.0, 1.0)

    os.makedirs(os.path.dirname(os.path.abspath(pngPath)), exist_ok=True)
    save_image(make_grid(pixels, nrow=columns, padding=0), pngPath)
    logger.info(getString("GENERAL_PreviewWritten", rows, columns, pngPath))
