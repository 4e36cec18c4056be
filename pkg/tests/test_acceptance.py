"""Desk-scale runs of the full pipeline on CIFAR-10. Enabled with MIXMIX_RUN_ACCEPTANCE=true."""

import glob
import os

import numpy as np
import pytest
import torch

from conftest import acceptanceEnabled
from compression import distill, ptq, twoStagePrune
from data import datasetChecksum, saveZoo
from harness import ablationMprime, bnLossTable, crossValidate, sampleRealImages, zooAverageAccuracy
from modelzoo import buildModel, defaultZooRecipe, evaluateAccuracy, loadReferenceSplits, trainModel
from synthesis import singleModelConfig, synthesize
from tools import resolveProvenanceChain
from utils import (
    DistillConfig,
    ExperimentPlan,
    ModelSpec,
    PruneConfig,
    PruneSpec,
    PtqConfig,
    QuantSpec,
    SynthesisConfig,
    SynthesizedDataset,
    loadYamlDocument,
)
from utils.settings import resolveDevice

pytestmark = pytest.mark.skipif(not acceptanceEnabled(), reason="desk-scale runs are opt-in")

SEEDS = (0, 1, 2)
W4A4 = {"weight_bits": 4, "act_bits": 4, "granularity": "per-channel", "method": "adaround"}
STUDENT_SPEC = os.path.join(os.path.dirname(__file__), os.pardir, "configs", "student.yaml")


def seedAverages(table, row: str) -> np.ndarray:
    """Per-seed accuracy of a row, averaged over the table's columns."""
    return np.mean([table.values(row, column) for column in table.columns], axis=0)


@pytest.fixture(scope="module")
def device() -> str:
    return resolveDevice()


@pytest.fixture(scope="module")
def deskSplits():
    return loadReferenceSplits()


@pytest.fixture(scope="module")
def deskZoo(deskSplits, device) -> tuple:
    recipe = defaultZooRecipe()
    zoo = [
        trainModel(buildModel(model["spec"], model["seed"]), deskSplits, recipe["train"], model["name"], device)
        for model in recipe["models"]
    ]
    return zoo, recipe["holdouts"]


@pytest.fixture(scope="module")
def synthesisModels(deskZoo) -> list:
    zoo, holdouts = deskZoo
    return [entry for entry in zoo if entry.name not in holdouts]


@pytest.fixture(scope="module")
def deskZooDir(deskZoo, tmp_path_factory) -> str:
    zoo, holdouts = deskZoo
    path = str(tmp_path_factory.mktemp("desk_zoo"))
    saveZoo(zoo, path, holdouts)
    return path


@pytest.fixture(scope="module")
def mixmixDatasets(synthesisModels, deskSplits, device) -> list:
    config = SynthesisConfig()
    return [
        synthesize(synthesisModels, config.replace(seed=seed), deskSplits.mean.tolist(), deskSplits.std.tolist(), device)
        for seed in SEEDS
    ]


@pytest.fixture(scope="module")
def singleModelDatasets(synthesisModels, deskSplits, device) -> dict:
    config = singleModelConfig(SynthesisConfig())
    return {
        entry.name: [
            synthesize([entry], config.replace(seed=seed), deskSplits.mean.tolist(), deskSplits.std.tolist(), device)
            for seed in SEEDS
        ]
        for entry in synthesisModels
    }


@pytest.fixture(scope="module")
def realImages(deskSplits) -> list:
    return [sampleRealImages(deskSplits, SynthesisConfig().numimages, seed) for seed in SEEDS]


@pytest.fixture(scope="module")
def crossValidation(deskZoo, deskZooDir, deskSplits, synthesisModels, device, tmp_path_factory) -> tuple:
    zoo, holdouts = deskZoo
    sources = {
        "real": {"kind": "real"},
        "mixmix": {"kind": "synthesize", "config": SynthesisConfig().toDict()},
    }
    for entry in synthesisModels:
        sources[entry.name] = {
            "kind": "synthesize",
            "config": singleModelConfig(SynthesisConfig()).toDict(),
            "zoo": [entry.name],
        }
    plan = ExperimentPlan.fromDict(
        {
            "name": "desk_cross_validation",
            "output_dir": str(tmp_path_factory.mktemp("cross_validation")),
            "zoo_dir": deskZooDir,
            "holdouts": list(holdouts),
            "task": "ptq",
            "spec": W4A4,
            "seeds": list(SEEDS),
            "targets": [entry.name for entry in zoo],
            "data_sources": sources,
        }
    )
    return plan, crossValidate(plan, device, zoo, deskSplits)


class TestDeskAcceptance:
    def test_zoo_accuracy_is_reproducible(self, deskZoo, deskSplits, device):
        zoo, _ = deskZoo
        images, labels = deskSplits.val.tensors
        for entry in zoo:
            assert abs(evaluateAccuracy(entry.model, images, labels, device=device) - entry.valaccuracy) <= 0.001

    def test_bn_loss_is_lowest_for_real_data_and_on_the_source_model(
        self, deskZoo, realImages, mixmixDatasets, singleModelDatasets, device
    ):
        zoo, _ = deskZoo
        table = bnLossTable({"real": realImages, "mixmix": mixmixDatasets, **singleModelDatasets}, zoo, device=device)

        for column in table.columns:
            for row in table.rows:
                if row != "real":
                    assert max(table.values("real", column)) <= min(table.values(row, column)), (row, column)

        for source in singleModelDatasets:
            for seedIndex in range(len(SEEDS)):
                own = table.values(source, source)[seedIndex]
                others = [table.values(row, source)[seedIndex] for row in singleModelDatasets if row != source]
                assert own < min(others), (source, seedIndex)

    def test_mixmix_generalizes_better_than_single_model_inversion(self, deskZoo, mixmixDatasets, singleModelDatasets, device):
        zoo, _ = deskZoo
        mixmixScores = [zooAverageAccuracy(dataset, zoo, device=device) for dataset in mixmixDatasets]
        singleScores = [
            [zooAverageAccuracy(dataset, zoo, device=device) for dataset in datasets]
            for datasets in singleModelDatasets.values()
        ]
        best = max(singleScores, key=lambda perSeed: np.mean([score[0] for score in perSeed]))

        assert min(score[0] for score in mixmixScores) >= max(score[0] for score in best) + 0.05
        assert np.mean([score[1] for score in mixmixScores]) < np.mean([score[1] for score in best])

    def test_cross_validation_ranks_mixmix_above_single_model_data(self, deskZoo, crossValidation):
        _, holdouts = deskZoo
        _, table = crossValidation
        assert set(holdouts) <= set(table.flagged)

        singleRows = [row for row in table.rows if row not in ("real", "mixmix")]
        wins = [
            column
            for column in table.columns
            if all(table.mean("mixmix", column) >= table.mean(row, column) for row in singleRows)
        ]
        assert len(wins) >= 0.8 * len(table.columns), wins
        for column in table.columns:
            assert table.mean("real", column) >= table.mean("mixmix", column) - 0.01, column

    def test_w4a4_ptq_with_mixmix_images(self, deskZoo, deskSplits, mixmixDatasets, device):
        zoo, _ = deskZoo
        spec = QuantSpec(4, 4, "per-channel")
        config = PtqConfig()
        testImages, testLabels = deskSplits.val.tensors
        synthesized: SynthesizedDataset = mixmixDatasets[0]
        calibration = sampleRealImages(deskSplits, config.numimages, 0)

        for entry in zoo:
            scores = {}
            for name, images, method in (
                ("mixmix", synthesized.images, "adaround"),
                ("real", calibration, "adaround"),
                ("nearest", synthesized.images, "nearest"),
            ):
                model, _ = ptq(entry, images, spec, method, config, device)
                scores[name] = evaluateAccuracy(model, testImages, testLabels, device=device)
            assert scores["mixmix"] >= scores["real"] - 0.02, entry.name
            assert scores["mixmix"] >= scores["nearest"] + 0.01, entry.name

    def test_half_sparsity_pruning_prefers_mixmix_data(
        self, deskZoo, deskSplits, mixmixDatasets, singleModelDatasets, device
    ):
        zoo, holdouts = deskZoo
        targets = [entry for entry in zoo if entry.name in holdouts]
        spec = PruneSpec(0.5)
        testImages, testLabels = deskSplits.val.tensors

        def meanAccuracy(datasets: list) -> float:
            scores = []
            for entry in targets:
                for seed, dataset in zip(SEEDS, datasets):
                    model, _ = twoStagePrune(entry, dataset.images, spec, PruneConfig().replace(seed=seed), device)
                    scores.append(evaluateAccuracy(model, testImages, testLabels, device=device))
            return float(np.mean(scores))

        mixmix = meanAccuracy(mixmixDatasets)
        for source, datasets in singleModelDatasets.items():
            assert mixmix - meanAccuracy(datasets) > 0.0, source

    def test_distillation_on_mixmix_data_tracks_real_data(self, deskZoo, deskSplits, mixmixDatasets, realImages, device):
        zoo, _ = deskZoo
        teacher = zoo[0]
        studentSpec = ModelSpec.fromDict(
            {
                **loadYamlDocument(STUDENT_SPEC),
                "num_classes": teacher.spec.numclasses,
                "input_resolution": teacher.spec.resolution,
            }
        )
        testImages, testLabels = deskSplits.val.tensors
        config = DistillConfig()

        mixmix = distill(teacher, studentSpec, mixmixDatasets[0].images, testImages, testLabels, config, device=device)
        real = distill(teacher, studentSpec, realImages[0], testImages, testLabels, config, device=device)
        assert mixmix.valaccuracy >= real.valaccuracy - 0.05

    def test_ablation_rises_with_m_prime_and_data_mixing(self, deskZoo, deskZooDir, deskSplits, device, tmp_path_factory):
        zoo, holdouts = deskZoo
        plan = ExperimentPlan.fromDict(
            {
                "name": "desk_ablation",
                "output_dir": str(tmp_path_factory.mktemp("ablation")),
                "zoo_dir": deskZooDir,
                "holdouts": list(holdouts),
                "task": "ptq",
                "spec": W4A4,
                "seeds": list(SEEDS),
                "targets": list(holdouts),
                "ablation": {"base": {}, "m_primes": [1, 2, 3], "data_mixing": [False, True]},
            }
        )
        table = ablationMprime(plan, device, zoo, deskSplits)

        def margin(lower: str, upper: str) -> None:
            low, high = seedAverages(table, lower), seedAverages(table, upper)
            assert high.mean() - low.mean() > max(low.std(ddof=1), high.std(ddof=1)), (lower, upper)

        margin("m1", "m2")
        margin("m2", "m3")
        margin("m1", "m1-dmix")

    def test_repeated_runs_are_bit_identical(self, synthesisModels, deskZoo, deskSplits, device):
        zoo, _ = deskZoo
        config = SynthesisConfig().replace(seed=7, num_images=128)
        first, second = (
            synthesize(synthesisModels, config, deskSplits.mean.tolist(), deskSplits.std.tolist(), device)
            for _ in range(2)
        )
        assert datasetChecksum(first) == datasetChecksum(second)

        spec = QuantSpec(4, 4, "per-channel")
        states = [ptq(zoo[0], first.images, spec, "adaround", PtqConfig(seed=7), device)[0].state_dict() for _ in range(2)]
        assert states[0].keys() == states[1].keys()
        for key in states[0]:
            assert torch.equal(states[0][key], states[1][key]), key

    def test_every_report_resolves_to_the_zoo(self, deskZooDir, crossValidation):
        plan, _ = crossValidation
        reports = sorted(glob.glob(os.path.join(plan.outputdir, "reports", "*.json")))
        assert len(reports) == len(plan.cells())
        for reportPath in reports:
            chain = resolveProvenanceChain(reportPath, deskZooDir)
            assert chain[0] == ("report", reportPath)
            assert chain[1][0] == "target"
