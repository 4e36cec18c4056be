import os
import shutil

import pytest

from conftest import tinySynthesisConfig
from compression import archiveDataProvenance, realDataProvenance
from custom_exceptions import MissingProvenanceException
from data import exportDataset
from synthesis import synthesize
from tools import bnStatsDigest, resolveProvenanceChain, verifyZoo
from utils import CompressionReport


def writeReport(path: str, checksum: str, provenance: dict) -> str:
    CompressionReport("ptq", checksum, provenance, {"weight_bits": 4}, "top1_accuracy", 0.5, 0).save(path)
    return path


class TestVerifyZoo:
    def test_stored_checksums_verify(self, toyZoo, toyZooDir):
        verdicts = verifyZoo(toyZooDir)
        assert [verdict["name"] for verdict in verdicts] == [entry.name for entry in toyZoo]
        assert all(verdict["checksum_ok"] and verdict["accuracy_ok"] is None for verdict in verdicts)

    def test_stored_accuracy_is_remeasured(self, toyZooDir, toySplits):
        verdicts = verifyZoo(toyZooDir, toySplits)
        assert all(verdict["accuracy_ok"] for verdict in verdicts)
        for verdict in verdicts:
            assert verdict["measured_accuracy"] == pytest.approx(verdict["stored_accuracy"], abs=0.001)

    def test_corrupted_entry_gets_a_failing_verdict(self, toyZoo, toyZooDir, tmp_path):
        zooCopy = str(tmp_path / "zoo")
        shutil.copytree(toyZooDir, zooCopy)
        weightsPath = os.path.join(zooCopy, toyZoo[2].name, "weights.bin")
        with open(weightsPath, "r+b") as weightsFile:
            weightsFile.seek(-1, os.SEEK_END)
            last = weightsFile.read(1)
            weightsFile.seek(-1, os.SEEK_END)
            weightsFile.write(bytes([last[0] ^ 0xFF]))

        verdicts = {verdict["name"]: verdict for verdict in verifyZoo(zooCopy)}
        assert not verdicts[toyZoo[2].name]["checksum_ok"]
        assert verdicts[toyZoo[2].name]["error"]
        assert verdicts[toyZoo[0].name]["checksum_ok"]


class TestProvenanceChain:
    def test_real_data_chain_ends_at_the_target(self, toyZoo, toyZooDir, tmp_path):
        reportPath = writeReport(str(tmp_path / "report.json"), toyZoo[0].checksum, realDataProvenance())
        chain = resolveProvenanceChain(reportPath, toyZooDir)
        assert chain == [("report", reportPath), ("target", toyZoo[0].name), ("data", "real")]

    def test_synthesized_data_chain_reaches_the_zoo(self, synthesisZoo, toySplits, toyZoo, toyZooDir, tmp_path):
        digests = [bnStatsDigest(entry) for entry in synthesisZoo]
        dataset = synthesize(synthesisZoo, tinySynthesisConfig(), toySplits.mean.tolist(), toySplits.std.tolist())
        assert [bnStatsDigest(entry) for entry in synthesisZoo] == digests

        checksum = exportDataset(dataset, str(tmp_path / "archives" / "mixmix"))
        reportPath = writeReport(
            str(tmp_path / "reports" / "cell.json"),
            toyZoo[1].checksum,
            archiveDataProvenance(os.path.join("..", "archives", "mixmix"), checksum),
        )

        chain = resolveProvenanceChain(reportPath, toyZooDir)
        kinds = [kind for kind, _ in chain]
        assert kinds[:4] == ["report", "target", "data", "synthesis_config"]
        assert [name for kind, name in chain if kind == "zoo"] == [entry.name for entry in synthesisZoo]
        assert chain[3][1] == dataset.provenance["config"]

    def test_unknown_model_checksum_is_a_dangling_link(self, toyZooDir, tmp_path):
        reportPath = writeReport(str(tmp_path / "report.json"), "0" * 64, realDataProvenance())
        with pytest.raises(MissingProvenanceException):
            resolveProvenanceChain(reportPath, toyZooDir)

    def test_archive_checksum_mismatch_is_a_dangling_link(self, toyZoo, toyZooDir, tmp_path):
        dataset = synthesize(toyZoo[:2], tinySynthesisConfig(m_prime=1, num_images=8), [0.5] * 3, [0.25] * 3)
        exportDataset(dataset, str(tmp_path / "archive"))
        reportPath = writeReport(
            str(tmp_path / "report.json"),
            toyZoo[0].checksum,
            archiveDataProvenance(str(tmp_path / "archive"), "f" * 64),
        )
        with pytest.raises(MissingProvenanceException):
            resolveProvenanceChain(reportPath, toyZooDir)
