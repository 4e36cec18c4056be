import json
import os

import pytest
import torch

from conftest import TOY_HOLDOUTS, tinySynthesisConfig
from custom_exceptions import CellAlreadyWrittenException, ConfigurationException, PlanValidationException
from data import fetchAllCells
from harness import (
    ablationSources,
    bnLossTable,
    crossValidate,
    missingCells,
    renderReport,
    resultsDbPath,
    resultsTableFromStore,
    runPlan,
    sampleRealImages,
    zooAverageAccuracy,
)
from utils import CompressionReport, ExperimentPlan, PtqConfig, ResultsTable, SynthesizedDataset

TARGETS = ["residual-d3-w0.5", TOY_HOLDOUTS[0]]


def smallPlan(outputDir: str, zooDir: str, **changes) -> ExperimentPlan:
    document = {
        "name": "toy_ptq",
        "output_dir": outputDir,
        "zoo_dir": zooDir,
        "holdouts": list(TOY_HOLDOUTS),
        "task": "ptq",
        "spec": {"weight_bits": 4, "act_bits": 8, "method": "nearest"},
        "seeds": [0, 1],
        "targets": TARGETS,
        "config": PtqConfig(num_images=32, batch_size=16, iterations=4).toDict(),
        "data_sources": {
            "real": {"kind": "real", "config": {"num_images": 32}},
            "mixmix": {"kind": "synthesize", "config": tinySynthesisConfig().toDict()},
        },
    }
    document.update(changes)
    return ExperimentPlan.fromDict(document)


class TestResultsTable:
    def test_cells_are_written_once(self):
        table = ResultsTable("t", "top1_accuracy")
        table.setCell("real", "residual", [0.5, 0.7])
        with pytest.raises(CellAlreadyWrittenException):
            table.setCell("real", "residual", [0.1])
        assert table.mean("real", "residual") == pytest.approx(0.6)

    def test_single_seed_has_no_spread(self):
        table = ResultsTable("t", "top1_accuracy")
        table.setCell("real", "residual", [0.5])
        assert table.stdev("real", "residual") is None
        assert table.cellText("real", "residual") == "0.5000"
        assert table.cellText("real", "missing") == ""

    def test_document_round_trip_keeps_flags(self):
        table = ResultsTable("t", "top1_accuracy")
        table.setCell("real", "residual", [0.5, 0.6])
        table.setCell("mixmix", "vgg", [0.4, 0.45])
        table.flagColumn("vgg")
        assert ResultsTable.fromDict(json.loads(json.dumps(table.toDict()))) == table


class TestExperimentPlan:
    def test_cell_keys_are_unique_and_stable(self, tmp_path):
        first = smallPlan(str(tmp_path), str(tmp_path / "zoo")).cells()
        second = smallPlan(str(tmp_path), str(tmp_path / "zoo")).cells()
        assert len(first) == 2 * 2 * 2
        assert len({cell["key"] for cell in first}) == len(first)
        assert [cell["key"] for cell in first] == [cell["key"] for cell in second]

    def test_key_changes_with_the_description(self, tmp_path):
        base = smallPlan(str(tmp_path), None).cells()[0]["key"]
        changed = smallPlan(str(tmp_path), None, spec={"weight_bits": 3, "method": "nearest"}).cells()[0]["key"]
        assert base != changed

    def test_repeated_seed_is_a_duplicate_cell(self, tmp_path):
        with pytest.raises(PlanValidationException):
            smallPlan(str(tmp_path), None, seeds=[0, 0])

    @pytest.mark.parametrize(
        "changes",
        [
            {"task": "sparsify"},
            {"targets": []},
            {"seeds": []},
            {"data_sources": {"x": {"kind": "imagenet"}}},
            {"data_sources": {"x": {"kind": "archive"}}},
            {"target_specs": {"missing": {"weight_bits": 2}}},
        ],
    )
    def test_invalid_grids_are_rejected(self, tmp_path, changes):
        with pytest.raises(PlanValidationException):
            smallPlan(str(tmp_path), None, **changes)

    def test_unknown_plan_key_is_rejected(self, tmp_path):
        with pytest.raises(ConfigurationException):
            smallPlan(str(tmp_path), None, repeat=2)

    def test_target_spec_overrides_the_shared_spec(self, tmp_path):
        plan = smallPlan(str(tmp_path), None, target_specs={TARGETS[1]: {"weight_bits": 2}})
        assert plan.specFor(TARGETS[0])["weight_bits"] == 4
        assert plan.specFor(TARGETS[1])["weight_bits"] == 2

    def test_synthesis_zoo_skips_holdouts(self, tmp_path):
        plan = smallPlan(str(tmp_path), None)
        assert plan.synthesisZoo("mixmix", ["a", TOY_HOLDOUTS[0], "b"]) == ["a", "b"]


class TestRunPlan:
    def test_plan_runs_and_resumes_without_recompute(self, tmp_path, toyZoo, toySplits, toyZooDir, resultsDbName):
        plan = smallPlan(str(tmp_path), toyZooDir)
        completed, failed = runPlan(plan, "cpu", toyZoo, toySplits)

        assert failed == []
        assert len(completed) == len(plan.cells())
        assert missingCells(plan) == []
        assert os.path.exists(os.path.join(str(tmp_path), resultsDbName))
        table = resultsTableFromStore(resultsDbPath(plan), "first", "top1_accuracy", plan)
        assert table.rows == ["real", "mixmix"]
        assert all(len(table.values(row, column)) == 2 for row in table.rows for column in table.columns)

        stored = fetchAllCells(resultsDbPath(plan))
        resumed = ExperimentPlan.fromDict({**plan.toDict(), "resume": True})
        completed, failed = runPlan(resumed, "cpu", toyZoo, toySplits)
        assert failed == []
        assert len(completed) == len(plan.cells())
        assert fetchAllCells(resultsDbPath(plan)) == stored
        assert resultsTableFromStore(resultsDbPath(plan), "first", "top1_accuracy", plan) == table

    def test_reports_point_at_the_archive(self, tmp_path, toyZoo, toySplits, toyZooDir, resultsDbName):
        plan = smallPlan(str(tmp_path), toyZooDir, seeds=[0], targets=TARGETS[:1])
        runPlan(plan, "cpu", toyZoo, toySplits)

        mixmixCell = next(cell for cell in fetchAllCells(resultsDbPath(plan)) if cell["source"] == "mixmix")
        report = CompressionReport.load(mixmixCell["report_path"])
        assert report.dataprovenance["kind"] == "archive"
        assert not os.path.isabs(report.dataprovenance["path"])
        assert report.modelchecksum == toyZoo[1].checksum
        assert report.value == mixmixCell["value"]

    def test_rerun_without_resume_fails_every_cell(self, tmp_path, toyZoo, toySplits, toyZooDir, resultsDbName):
        plan = smallPlan(str(tmp_path), toyZooDir, seeds=[0], targets=TARGETS[:1], data_sources={"real": {"kind": "real"}})
        runPlan(plan, "cpu", toyZoo, toySplits)
        completed, failed = runPlan(plan, "cpu", toyZoo, toySplits)
        assert completed == []
        assert len(failed) == 1

    def test_unknown_target_is_rejected(self, tmp_path, toyZoo, toySplits, resultsDbName):
        plan = smallPlan(str(tmp_path), None, targets=["missing"])
        with pytest.raises(PlanValidationException):
            runPlan(plan, "cpu", toyZoo, toySplits)

    def test_missing_cells_of_an_unrun_plan(self, tmp_path, resultsDbName):
        plan = smallPlan(str(tmp_path), None)
        assert missingCells(plan) == [cell["key"] for cell in plan.cells()]

    def test_real_images_are_seeded(self, toySplits):
        assert torch.equal(sampleRealImages(toySplits, 16, 3), sampleRealImages(toySplits, 16, 3))
        assert not torch.equal(sampleRealImages(toySplits, 16, 3), sampleRealImages(toySplits, 16, 4))
        assert len(sampleRealImages(toySplits, 10_000, 0)) == len(toySplits.train.tensors[0])


class TestCrossValidation:
    def test_holdout_columns_are_flagged(self, tmp_path, toyZoo, toySplits, toyZooDir, resultsDbName):
        plan = smallPlan(str(tmp_path), toyZooDir, seeds=[0], holdouts=[])
        table = crossValidate(plan, "cpu", toyZoo, toySplits)
        assert table.flagged == [TOY_HOLDOUTS[0]]
        assert set(table.columns) == set(TARGETS)

    def test_plan_without_any_holdout_is_rejected(self, tmp_path, toyZoo, toySplits, resultsDbName):
        emptyZooDir = tmp_path / "zoo"
        emptyZooDir.mkdir()
        (emptyZooDir / "zoo.json").write_text(json.dumps({"entries": [], "holdouts": []}))
        plan = smallPlan(str(tmp_path), str(emptyZooDir), holdouts=[])
        with pytest.raises(PlanValidationException):
            crossValidate(plan, "cpu", toyZoo, toySplits)

    def test_synthesis_from_a_holdout_is_rejected(self, tmp_path, toyZoo, toySplits, toyZooDir, resultsDbName):
        sources = {"mixmix": {"kind": "synthesize", "zoo": [TOY_HOLDOUTS[0], "residual-d3-w0.5"]}}
        plan = smallPlan(str(tmp_path), toyZooDir, data_sources=sources)
        with pytest.raises(PlanValidationException):
            crossValidate(plan, "cpu", toyZoo, toySplits)


class TestAblation:
    def test_sweep_sources_cover_every_setting(self, tmp_path):
        plan = smallPlan(str(tmp_path), None, ablation={"base": {"iterations": 6}})
        sources = ablationSources(plan, 3)
        assert list(sources) == ["m1", "m1-dmix", "m2", "m2-dmix", "m3", "m3-dmix"]
        assert sources["m2-dmix"]["config"] == {"iterations": 6, "m_prime": 2, "data_mixing": True}

    def test_explicit_m_primes(self, tmp_path):
        plan = smallPlan(str(tmp_path), None, ablation={"m_primes": [2], "data_mixing": [True]})
        assert list(ablationSources(plan, 3)) == ["m2-dmix"]

    def test_plan_without_ablation_is_rejected(self, tmp_path):
        with pytest.raises(PlanValidationException):
            ablationSources(smallPlan(str(tmp_path), None), 3)


class TestEvaluation:
    def test_zoo_average_on_real_images_matches_stored_accuracy(self, toyZoo, toySplits):
        images, labels = toySplits.val.tensors
        dataset = SynthesizedDataset.fromHardLabels(images, labels, toySplits.numclasses, {"source": "real"})
        mean, stdev, perModel = zooAverageAccuracy(dataset, toyZoo)
        for entry in toyZoo:
            assert perModel[entry.name] == pytest.approx(entry.valaccuracy)
        assert mean == pytest.approx(sum(entry.valaccuracy for entry in toyZoo) / len(toyZoo))
        assert stdev >= 0.0

    def test_real_images_match_statistics_better_than_noise(self, toyZoo, toySplits):
        realImages = toySplits.train.tensors[0][:64]
        noise = torch.randn(64, *realImages.shape[1:], generator=torch.Generator().manual_seed(0))
        table = bnLossTable({"real": realImages, "noise": noise}, toyZoo[:2], batchSize=32)
        for entry in toyZoo[:2]:
            assert table.mean("real", entry.name) < table.mean("noise", entry.name)


class TestRenderReport:
    def test_tables_render_byte_identical(self, tmp_path):
        table = ResultsTable("ptq_top1_accuracy", "top1_accuracy")
        table.setCell("real", "residual", [0.61, 0.63, 0.62])
        table.setCell("mixmix", "residual", [0.58, 0.6, 0.59])
        table.setCell("mixmix", "vgg", [0.5])
        table.flagColumn("vgg")

        first = renderReport([table], str(tmp_path / "first"))
        second = renderReport([table], str(tmp_path / "second"))
        assert first == second
        for fileName in ("ptq_top1_accuracy.csv", "ptq_top1_accuracy.json", "manifest.json"):
            assert (tmp_path / "first" / fileName).read_bytes() == (tmp_path / "second" / fileName).read_bytes()
        assert (tmp_path / "first" / "ptq_top1_accuracy.png").exists()

        lines = (tmp_path / "first" / "ptq_top1_accuracy.csv").read_text().splitlines()
        assert lines[0] == "row,column,flagged,seeds,mean,stdev,values"
        assert "mixmix,vgg,1,1,0.500000,,0.500000" in lines

    def test_empty_report_has_an_empty_manifest(self, tmp_path):
        assert renderReport([], str(tmp_path)) == {"tables": []}
        assert json.loads((tmp_path / "manifest.json").read_text()) == {"tables": []}
