import os
from collections import Counter

import numpy as np
import pytest
import torch
from scipy import stats

from conftest import NUM_CLASSES, RESOLUTION, TOY_HOLDOUTS
from custom_exceptions import (
    ConfigurationException,
    ContractViolationException,
    CorruptedArtifactException,
    UnsupportedModelException,
)
from data import decodeTensors, encodeTensors, loadEntry, loadZoo, readZooManifest
from modelzoo import (
    DEFAULT_ZOO,
    batchNormLayers,
    buildModel,
    bnStatsFromModel,
    defaultZooRecipe,
    evaluateAccuracy,
    extractBnStats,
    pixelBounds,
    readZooRecipe,
    sampleSubset,
)
from utils import BNStats, Family, ModelSpec


class TestArchitectures:
    @pytest.mark.parametrize("family", [family.value for family in Family])
    def test_every_family_builds_with_batch_norm(self, family):
        spec = ModelSpec(family, 4, 0.5, NUM_CLASSES, RESOLUTION)
        model = buildModel(spec, 0)
        assert len(batchNormLayers(model)) >= 4
        with torch.no_grad():
            assert model.eval()(torch.zeros(2, 3, RESOLUTION, RESOLUTION)).shape == (2, NUM_CLASSES)

    def test_same_seed_gives_identical_parameters(self):
        spec = ModelSpec("residual", 3, 0.5, NUM_CLASSES, RESOLUTION)
        first, second = buildModel(spec, 7).state_dict(), buildModel(spec, 7).state_dict()
        assert all(torch.equal(first[name], second[name]) for name in first)
        third = buildModel(spec, 8).state_dict()
        assert not all(torch.equal(first[name], third[name]) for name in first)

    def test_build_leaves_the_global_generator_alone(self):
        torch.manual_seed(11)
        expected = torch.rand(3)
        torch.manual_seed(11)
        buildModel(ModelSpec("vgg-like", 3), 0)
        assert torch.equal(torch.rand(3), expected)

    def test_spec_name(self):
        assert ModelSpec("residual", 3, 1.5).name == "residual-d3-w1.5"
        assert ModelSpec("vgg-like", 4).name == "vgg-like-d4-w1"

    @pytest.mark.parametrize("document", [{"family": "transformer", "depth": 3}, {"family": "residual", "depth": 0}])
    def test_invalid_specs_are_rejected(self, document):
        with pytest.raises(ConfigurationException):
            buildModel(ModelSpec.fromDict(document), 0)

    def test_model_without_batch_norm_is_unsupported(self):
        with pytest.raises(UnsupportedModelException):
            bnStatsFromModel(torch.nn.Sequential(torch.nn.Conv2d(3, 4, 3)), "plain")


class TestZoo:
    def test_default_zoo_has_six_models_and_two_holdouts(self):
        recipe = defaultZooRecipe()
        assert len(recipe["models"]) == len(DEFAULT_ZOO) == 6
        assert recipe["holdouts"] == ["vgg-like-d4-w1", "residual-d3-w1.5"]
        assert len({model["spec"].family for model in recipe["models"]}) == 4

    def test_recipe_with_unknown_holdout_is_rejected(self):
        with pytest.raises(ConfigurationException):
            readZooRecipe({"models": [{"family": "residual", "depth": 3}], "holdouts": ["missing"]})

    def test_recipe_with_repeated_names_is_rejected(self):
        model = {"family": "residual", "depth": 3}
        with pytest.raises(ConfigurationException, match="residual-d3-w1"):
            readZooRecipe({"models": [model, model]})

    def test_bn_stats_reject_bad_running_statistics(self):
        with pytest.raises(ContractViolationException, match="equal-length vectors"):
            BNStats(0, [0.0, 1.0], [1.0])
        with pytest.raises(ContractViolationException, match="must be non-negative"):
            BNStats(1, [0.0], [-0.5])

    def test_trained_entries_beat_chance(self, toyZoo):
        for entry in toyZoo:
            assert entry.istrained
            assert entry.valaccuracy > 1.0 / NUM_CLASSES

    def test_stored_accuracy_is_reproducible(self, toyZoo, toySplits):
        entry = toyZoo[0]
        assert evaluateAccuracy(entry.model, *toySplits.val.tensors) == entry.valaccuracy

    def test_extracted_statistics_match_the_live_buffers(self, toyZoo):
        entry = toyZoo[1]
        stored = extractBnStats(entry)
        layers = batchNormLayers(entry.model)
        assert [item.layerid for item in stored] == list(range(len(layers)))
        for item, (_, layer) in zip(stored, layers):
            assert np.allclose(item.mean, layer.running_mean.numpy())
            assert np.all(item.var >= 0)

    def test_subset_is_distinct_and_seeded(self, toyZoo):
        first = sampleSubset(toyZoo, 3, np.random.default_rng(5))
        second = sampleSubset(toyZoo, 3, np.random.default_rng(5))
        assert [entry.name for entry in first] == [entry.name for entry in second]
        assert len({entry.name for entry in first}) == 3

    def test_single_model_draws_are_uniform(self, toyZoo):
        rng = np.random.default_rng(2)
        counts = Counter(sampleSubset(toyZoo, 1, rng)[0].name for _ in range(10_000))
        assert len(counts) == len(toyZoo)
        assert stats.chisquare(list(counts.values())).pvalue > 1e-3

    @pytest.mark.parametrize("mPrime", [0, 5])
    def test_subset_size_outside_the_zoo_is_rejected(self, toyZoo, mPrime):
        with pytest.raises(ConfigurationException):
            sampleSubset(toyZoo, mPrime, np.random.default_rng(0))


class TestZooStore:
    def test_saved_zoo_loads_with_the_same_checksums(self, toyZoo, toyZooDir, toySplits):
        loaded = loadZoo(toyZooDir)
        assert [entry.checksum for entry in loaded] == [entry.checksum for entry in toyZoo]
        assert readZooManifest(toyZooDir)["holdouts"] == list(TOY_HOLDOUTS)
        images, labels = toySplits.val.tensors
        assert evaluateAccuracy(loaded[2].model, images, labels) == toyZoo[2].valaccuracy

    def test_flipped_weight_byte_is_detected(self, toyZoo, toyZooDir, tmp_path):
        entryDir = tmp_path / toyZoo[0].name
        entryDir.mkdir()
        for fileName in os.listdir(os.path.join(toyZooDir, toyZoo[0].name)):
            with open(os.path.join(toyZooDir, toyZoo[0].name, fileName), "rb") as source:
                (entryDir / fileName).write_bytes(source.read())

        weights = bytearray((entryDir / "weights.bin").read_bytes())
        weights[-1] ^= 0xFF
        (entryDir / "weights.bin").write_bytes(bytes(weights))
        with pytest.raises(CorruptedArtifactException):
            loadEntry(str(entryDir))

    def test_missing_entry_file_is_reported(self, tmp_path):
        with pytest.raises(CorruptedArtifactException):
            loadEntry(str(tmp_path))


class TestTensorCodec:
    def test_decoded_arrays_keep_dtype_shape_and_order(self):
        tensors = {"b": torch.arange(6, dtype=torch.int64).view(2, 3), "a": torch.ones(2, 2)}
        decoded = decodeTensors(encodeTensors(tensors))
        assert list(decoded) == ["b", "a"]
        assert decoded["b"].dtype == np.int64
        assert decoded["b"].tolist() == [[0, 1, 2], [3, 4, 5]]

    def test_truncated_blob_is_rejected(self):
        blob = encodeTensors({"x": torch.ones(4)})
        with pytest.raises(CorruptedArtifactException):
            decodeTensors(blob[:-2])

    def test_bad_magic_is_rejected(self):
        with pytest.raises(CorruptedArtifactException):
            decodeTensors(b"NOPE" + encodeTensors({"x": torch.ones(1)})[4:])


class TestReferenceData:
    def test_pixel_bounds_are_the_normalized_unit_range(self):
        low, high = pixelBounds((0.5, 0.25, 0.0), (0.25, 0.5, 1.0))
        assert low.flatten().tolist() == [-2.0, -0.5, 0.0]
        assert high.flatten().tolist() == [2.0, 1.5, 1.0]
        assert low.shape == (1, 3, 1, 1)
