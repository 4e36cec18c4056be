import json
import os

import numpy as np
import pytest
import torch

from custom_exceptions import (
    CellAlreadyWrittenException,
    ContractViolationException,
    CorruptedArtifactException,
    MigrationRequiredException,
    MissingProvenanceException,
)
from data import (
    datasetChecksum,
    exportDataset,
    fetchAllCells,
    fetchArchiveRecord,
    fetchCellResult,
    fetchCompletedKeys,
    importDataset,
    insertArchiveRecord,
    insertCellResult,
    setupTables,
    writePreviewGrid,
)
from utils import SynthesizedDataset

PROVENANCE = {"source": "synthesized", "seed": 0, "normalization": {"mean": [0.5] * 3, "std": [0.25] * 3}}


def smallDataset() -> SynthesizedDataset:
    images = torch.randn(6, 3, 8, 8, generator=torch.Generator().manual_seed(0))
    labels = np.zeros((6, 4))
    labels[np.arange(6), [0, 1, 2, 3, 0, 1]] = 1.0
    labels[5] = [0.0, 0.75, 0.25, 0.0]
    return SynthesizedDataset(images, labels, [0, 1, 2, 3, 0, 1], PROVENANCE)


class TestSynthesizedDataset:
    def test_label_rows_must_sum_to_one(self):
        with pytest.raises(ContractViolationException):
            SynthesizedDataset(torch.zeros(1, 3, 4, 4), [[0.5, 0.4]], [0], PROVENANCE)

    def test_at_most_two_labels_per_row(self):
        with pytest.raises(ContractViolationException, match="at most two nonzero entries"):
            SynthesizedDataset(torch.zeros(1, 3, 4, 4), [[0.5, 0.25, 0.25]], [0], PROVENANCE)

    def test_lengths_must_match(self):
        with pytest.raises(ContractViolationException, match="1 images, 2 label distributions and 1 base labels"):
            SynthesizedDataset(torch.zeros(1, 3, 4, 4), [[1.0], [1.0]], [0], PROVENANCE)

    def test_provenance_is_required(self):
        with pytest.raises(MissingProvenanceException):
            SynthesizedDataset(torch.zeros(1, 3, 4, 4), [[1.0]], [0], None)

    def test_dominant_labels_prefer_the_heavier_component(self):
        dataset = smallDataset()
        assert dataset.dominantLabels().tolist() == [0, 1, 2, 3, 0, 1]

    def test_hard_labels_become_one_hot_rows(self):
        dataset = SynthesizedDataset.fromHardLabels(torch.zeros(3, 3, 4, 4), [2, 0, 1], 3, {"source": "real"})
        assert dataset.labels.tolist() == [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
        assert len(dataset.subset(2)) == 2


class TestArchiveStore:
    def test_export_then_import_keeps_the_checksum(self, tmp_path):
        dataset = smallDataset()
        checksum = exportDataset(dataset, str(tmp_path / "archive"))
        loaded = importDataset(str(tmp_path / "archive"))

        assert checksum == datasetChecksum(dataset) == datasetChecksum(loaded)
        assert torch.equal(loaded.images, dataset.images)
        assert np.array_equal(loaded.labels, dataset.labels)
        assert loaded.provenance == PROVENANCE

    def test_missing_provenance_is_rejected(self, tmp_path):
        path = str(tmp_path / "archive")
        exportDataset(smallDataset(), path)
        os.remove(os.path.join(path, "provenance.json"))
        with pytest.raises(MissingProvenanceException):
            importDataset(path)

    def test_changed_label_table_breaks_the_checksum(self, tmp_path):
        path = str(tmp_path / "archive")
        exportDataset(smallDataset(), path)
        with open(os.path.join(path, "labels.json"), "r", encoding="utf-8") as labelsFile:
            document = json.load(labelsFile)
        document["labels"][0] = [0.0, 1.0, 0.0, 0.0]
        with open(os.path.join(path, "labels.json"), "w", encoding="utf-8") as labelsFile:
            json.dump(document, labelsFile)
        with pytest.raises(CorruptedArtifactException):
            importDataset(path)

    def test_other_format_version_needs_migration(self, tmp_path):
        path = str(tmp_path / "archive")
        exportDataset(smallDataset(), path)
        manifestPath = os.path.join(path, "archive.json")
        with open(manifestPath, "r", encoding="utf-8") as manifestFile:
            manifest = json.load(manifestFile)
        manifest["format_version"] = 99
        with open(manifestPath, "w", encoding="utf-8") as manifestFile:
            json.dump(manifest, manifestFile)
        with pytest.raises(MigrationRequiredException, match="Archive format 99 found"):
            importDataset(path)

    def test_preview_grid_is_written(self, tmp_path):
        pngPath = str(tmp_path / "preview" / "grid.png")
        writePreviewGrid(smallDataset(), pngPath, 2, 3)
        assert os.path.getsize(pngPath) > 0

    def test_preview_grid_needs_enough_images(self, tmp_path):
        with pytest.raises(ContractViolationException, match="A 4x4 grid needs 16 images"):
            writePreviewGrid(smallDataset(), str(tmp_path / "grid.png"), 4, 4)


class TestResultsStore:
    def test_cells_are_written_once(self, tmp_path):
        databasePath = str(tmp_path / "results.db")
        setupTables(databasePath)
        insertCellResult(databasePath, "k1", "real", "residual", "ptq", 0, "top1_accuracy", 0.5, "reports/k1.json")

        assert fetchCompletedKeys(databasePath) == {"k1"}
        assert fetchCellResult(databasePath, "k1")["value"] == 0.5
        assert fetchCellResult(databasePath, "missing") is None
        with pytest.raises(CellAlreadyWrittenException):
            insertCellResult(databasePath, "k1", "real", "residual", "ptq", 0, "top1_accuracy", 0.7, "reports/k1.json")
        assert fetchCellResult(databasePath, "k1")["value"] == 0.5

    def test_cells_come_back_sorted(self, tmp_path):
        databasePath = str(tmp_path / "results.db")
        setupTables(databasePath)
        for key, source, seed in (("c", "real", 1), ("a", "mixmix", 0), ("b", "real", 0)):
            insertCellResult(databasePath, key, source, "t", "ptq", seed, "top1_accuracy", 0.1, f"{key}.json")
        assert [cell["cell_key"] for cell in fetchAllCells(databasePath)] == ["a", "b", "c"]

    def test_archive_records(self, tmp_path):
        databasePath = str(tmp_path / "results.db")
        setupTables(databasePath)
        insertArchiveRecord(databasePath, "/runs/a", "mixmix", 0, "abc")
        insertArchiveRecord(databasePath, "/runs/a", "mixmix", 0, "abc")
        assert fetchArchiveRecord(databasePath, "mixmix", 0) == ("/runs/a", "abc")
        assert fetchArchiveRecord(databasePath, "mixmix", 1) is None
