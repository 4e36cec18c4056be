import copy
from fractions import Fraction

import numpy as np
import pytest
import torch
import torch.nn.functional as F
from scipy import stats

from conftest import NUM_CLASSES, RESOLUTION, tinySynthesisConfig
from custom_exceptions import ConfigurationException, ContractViolationException
from synthesis import (
    BatchStatsRecorder,
    ConstantWeights,
    LossWeights,
    adaptiveObjective,
    bnStatsLoss,
    bnStatsLossKl,
    ceLoss,
    channelFeatures,
    cyclicDerangement,
    featureMixingObjective,
    linearKernelMmd2,
    mixBatch,
    mixedCe,
    mixImages,
    priorLoss,
    sampleMixMask,
    synthesize,
    totalVariation,
    updateAdaptiveWeights,
)
from tools import bnStatsDigest
from utils import BNStats, MixMask, ModelZooEntry, SynthesisConfig


def doubleStats(channels: int, seed: int) -> BNStats:
    generator = np.random.default_rng(seed)
    return BNStats(0, generator.normal(size=channels), generator.uniform(0.5, 2.0, size=channels))


def doubleEntry(entry: ModelZooEntry) -> ModelZooEntry:
    model = copy.deepcopy(entry.model).double()
    return ModelZooEntry(entry.name, entry.spec, model, entry.bnstats, entry.valaccuracy, entry.checksum, entry.seed)


class TestLossGradients:
    def test_ce_loss_gradcheck(self):
        logits = torch.randn(3, 5, dtype=torch.float64, requires_grad=True)
        target = torch.softmax(torch.randn(3, 5, dtype=torch.float64), dim=1)
        assert torch.autograd.gradcheck(lambda x: ceLoss(x, target), (logits,))

    def test_mixed_ce_gradcheck(self):
        logits = torch.randn(4, 5, dtype=torch.float64, requires_grad=True)
        y1, y2 = torch.tensor([0, 1, 2, 3]), torch.tensor([4, 0, 1, 2])
        assert torch.autograd.gradcheck(lambda x: mixedCe(x, y1, y2, 0.3), (logits,))

    def test_bn_stats_loss_gradcheck(self):
        stored = [doubleStats(6, 0)]
        mean = torch.randn(6, dtype=torch.float64, requires_grad=True)
        var = torch.rand(6, dtype=torch.float64).add(0.5).requires_grad_(True)
        assert torch.autograd.gradcheck(lambda m, v: bnStatsLoss([(m, v)], stored), (mean, var))
        assert torch.autograd.gradcheck(lambda m, v: bnStatsLossKl([(m, v)], stored), (mean, var))

    def test_prior_loss_gradcheck(self):
        batch = torch.randn(2, 3, 4, 4, dtype=torch.float64, requires_grad=True)
        assert torch.autograd.gradcheck(lambda x: priorLoss(x, 0.01), (batch,))

    def test_adaptive_objective_gradcheck(self):
        terms = torch.rand(3, dtype=torch.float64).add(0.1).requires_grad_(True)
        alphas = torch.rand(3, dtype=torch.float64).add(0.5).requires_grad_(True)
        assert torch.autograd.gradcheck(adaptiveObjective, (terms, alphas))


class TestLosses:
    def test_ce_loss_rejects_bad_label_mass(self):
        with pytest.raises(ContractViolationException):
            ceLoss(torch.zeros(2, 3), torch.tensor([[0.5, 0.4, 0.0], [1.0, 0.0, 0.0]]))

    def test_ce_loss_rejects_class_count_mismatch(self):
        with pytest.raises(ContractViolationException):
            ceLoss(torch.zeros(2, 3), torch.tensor([[1.0, 0.0], [0.0, 1.0]]))

    def test_mixed_ce_is_convex_combination(self):
        logits = torch.randn(6, 4)
        y1 = torch.tensor([0, 1, 2, 3, 0, 1])
        y2 = torch.tensor([1, 2, 3, 0, 2, 3])
        beta = 0.375

        expected = (1 - beta) * ceLoss(logits, F.one_hot(y1, 4).float()) + beta * ceLoss(logits, F.one_hot(y2, 4).float())
        soft = (1 - beta) * F.one_hot(y1, 4).float() + beta * F.one_hot(y2, 4).float()
        assert torch.allclose(mixedCe(logits, y1, y2, beta), expected, atol=1e-6)
        assert torch.allclose(mixedCe(logits, y1, y2, beta), ceLoss(logits, soft), atol=1e-6)

    def test_mixed_ce_without_mixing_is_plain_ce(self):
        logits = torch.randn(4, 3)
        labels = torch.tensor([0, 2, 1, 1])
        assert torch.allclose(mixedCe(logits, labels, labels, 0.0), F.cross_entropy(logits, labels))

    def test_mixed_ce_rejects_beta_outside_unit_range(self):
        with pytest.raises(ContractViolationException):
            mixedCe(torch.zeros(2, 3), torch.tensor([0, 1]), torch.tensor([1, 0]), 1.5)

    def test_total_variation_of_checkerboard(self):
        board = (torch.arange(4).view(1, 4) + torch.arange(4).view(4, 1)) % 2
        batch = (2.0 * board.float() - 1.0).view(1, 1, 4, 4)
        assert totalVariation(batch).tolist() == [48.0]
        assert totalVariation(torch.ones(2, 3, 5, 5)).tolist() == [0.0, 0.0]

    def test_prior_loss_rejects_single_pixel_width(self):
        with pytest.raises(ContractViolationException):
            priorLoss(torch.zeros(1, 3, 4, 1), 0.0)

    def test_linear_mmd_equals_squared_mean_distance(self):
        features = torch.randn(40, 5, dtype=torch.float64)
        others = torch.randn(30, 5, dtype=torch.float64) + 0.5
        distance = (features.mean(0) - others.mean(0)).pow(2).sum()
        assert torch.allclose(linearKernelMmd2(features, others), distance)

    def test_channel_features_layout(self):
        activations = torch.arange(2 * 3 * 2 * 2, dtype=torch.float32).view(2, 3, 2, 2)
        features = channelFeatures(activations)
        assert features.shape == (8, 3)
        assert features[0].tolist() == activations[0, :, 0, 0].tolist()

    def test_bn_stats_loss_is_zero_on_stored_moments(self):
        stored = [doubleStats(4, 1)]
        batchStats = [(torch.tensor(stored[0].mean), torch.tensor(stored[0].var))]
        assert float(bnStatsLoss(batchStats, stored)) == pytest.approx(0.0, abs=1e-12)
        assert float(bnStatsLossKl(batchStats, stored)) == pytest.approx(0.0, abs=1e-9)

    def test_bn_stats_loss_rejects_channel_mismatch(self):
        with pytest.raises(ContractViolationException):
            bnStatsLoss([(torch.zeros(3), torch.ones(3))], [doubleStats(4, 2)])

    def test_batch_stats_recorder_matches_biased_moments(self, toyZoo, toySplits):
        entry = toyZoo[0]
        images = toySplits.val.tensors[0][:32]
        with BatchStatsRecorder(entry.model, entry.name) as recorder:
            entry.model(images)

        assert len(recorder.stats) == len(entry.bnstats)
        firstMean, firstVar = recorder.stats[0]
        with torch.no_grad():
            inputs = entry.model.features[0].conv(images)
        assert torch.allclose(firstMean, inputs.mean(dim=(0, 2, 3)), atol=1e-5)
        assert torch.allclose(firstVar, inputs.var(dim=(0, 2, 3), correction=0), atol=1e-4)

    def test_real_images_match_bn_statistics_better_than_noise(self, toyZoo, toySplits):
        entry = toyZoo[1]
        real = toySplits.train.tensors[0][:128]
        noise = torch.randn_like(real) * 3.0
        losses = []
        for images in (real, noise):
            with BatchStatsRecorder(entry.model) as recorder, torch.no_grad():
                entry.model(images)
            losses.append(float(bnStatsLoss(recorder.stats, entry.bnstats)))
        assert losses[0] < losses[1]


class TestMixing:
    def test_mask_beta_is_box_area_over_image_area(self):
        mask = MixMask(8, 8, (2, 5, 1, 4))
        assert mask.area == 16
        assert mask.ratio == Fraction(1, 4)
        assert mask.beta == 0.25
        assert float(mask.alpha.sum()) == 16

    def test_box_outside_the_image_is_rejected(self):
        with pytest.raises(ContractViolationException, match="does not fit a 8x8 image"):
            MixMask(8, 8, (2, 8, 1, 4))

    def test_empty_and_full_masks(self):
        assert MixMask.empty(8, 8).beta == 0.0
        assert MixMask.full(8, 8).beta == 1.0

    def test_sampled_masks_fit_the_image(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            mask = sampleMixMask(rng, 16, 12, (0.1, 0.4))
            xl, xr, yd, yu = mask.box
            assert 0 <= xl <= xr < 16
            assert 0 <= yd <= yu < 12
            assert mask.beta == pytest.approx((xr - xl + 1) * (yu - yd + 1) / (16 * 12))

    def test_box_edges_follow_the_uniform_ratio_range(self):
        rng = np.random.default_rng(1)
        masks = [sampleMixMask(rng, 1000, 1000, (0.1, 0.4)) for _ in range(10_000)]
        fractions = np.array([(mask.box[1] - mask.box[0] + 1) / 1000 for mask in masks])

        sigma = np.sqrt(0.3**2 / 12 / len(fractions))
        assert abs(fractions.mean() - 0.25) < 3 * sigma
        assert stats.kstest(fractions, stats.uniform(loc=0.1, scale=0.3).cdf).pvalue > 1e-3

    @pytest.mark.parametrize("boxRange", [(0.0, 0.3), (0.5, 0.2), (0.2, 1.0)])
    def test_sample_rejects_degenerate_ranges(self, boxRange):
        with pytest.raises(ConfigurationException):
            sampleMixMask(np.random.default_rng(0), 8, 8, boxRange)

    def test_mixed_image_keeps_first_image_outside_the_box(self):
        first = torch.randn(3, 8, 8)
        second = torch.full((3, 8, 8), 3.0)
        mask = MixMask(8, 8, (2, 5, 1, 4))
        mixed = mixImages(first, second, mask)

        inside = mask.alpha.bool()
        assert torch.equal(mixed[:, ~inside], first[:, ~inside])
        assert torch.allclose(mixed[:, inside], torch.full_like(mixed[:, inside], 3.0))

    def test_empty_mask_leaves_image_unchanged(self):
        first = torch.randn(2, 3, 8, 8)
        assert torch.equal(mixImages(first, torch.zeros_like(first), MixMask.empty(8, 8)), first)

    def test_mix_images_rejects_shape_mismatch(self):
        with pytest.raises(ContractViolationException):
            mixImages(torch.zeros(3, 8, 8), torch.zeros(3, 4, 4), MixMask(8, 8, (0, 1, 0, 1)))

    def test_cyclic_derangement_has_no_fixed_point(self):
        rng = np.random.default_rng(3)
        for size in range(2, 12):
            partner = cyclicDerangement(rng, size)
            assert sorted(partner.tolist()) == list(range(size))
            assert all(partner[index] != index for index in range(size))

    def test_mix_batch_pairs_labels_with_partners(self):
        rng = np.random.default_rng(4)
        batch = torch.randn(6, 3, 8, 8)
        labels = torch.tensor([0, 1, 2, 3, 0, 1])
        mixed, y2, mask, partner = mixBatch(batch, labels, rng, (0.2, 0.5))

        assert mixed.shape == batch.shape
        assert y2.tolist() == labels[torch.from_numpy(partner)].tolist()
        assert 0 < mask.beta < 1

    def test_mix_batch_needs_two_images(self):
        with pytest.raises(ContractViolationException):
            mixBatch(torch.zeros(1, 3, 8, 8), torch.zeros(1, dtype=torch.long), np.random.default_rng(0), (0.1, 0.4))


class TestAdaptiveWeights:
    def test_first_call_normalizes_terms_to_one(self):
        weights = LossWeights(("ce", "bn", "prior"))
        normalized = weights.normalize({"ce": torch.tensor(2.0), "bn": torch.tensor(8.0), "prior": torch.tensor(0.0)})
        assert normalized.tolist() == [1.0, 1.0, 0.0]

    def test_weights_converge_to_square_root_of_terms(self):
        weights = LossWeights(("a", "b"), lr=0.05)
        weights.normalize({"a": torch.tensor(2.0), "b": torch.tensor(8.0)})
        for _ in range(500):
            weights, _ = updateAdaptiveWeights(weights, {"a": torch.tensor(8.0), "b": torch.tensor(2.0)})
        assert weights.alphas.pow(2).tolist() == pytest.approx([2.0, 0.5], abs=1e-3)
        assert bool((weights.alphas > 0).all())

    def test_weight_of_a_falling_term_falls(self):
        weights = LossWeights(("a", "b"), lr=0.01)
        weights.normalize({"a": torch.tensor(4.0), "b": torch.tensor(4.0)})
        trajectory = [weights.alphas.clone()]
        for _ in range(5):
            weights, _ = updateAdaptiveWeights(weights, {"a": torch.tensor(1.0), "b": torch.tensor(4.0)})
            trajectory.append(weights.alphas.clone())

        assert all(float(later[0]) < float(earlier[0]) for earlier, later in zip(trajectory, trajectory[1:]))
        assert float(trajectory[-1][1]) == pytest.approx(1.0)

    def test_negative_term_is_rejected(self):
        with pytest.raises(ContractViolationException):
            LossWeights(("a",)).normalize({"a": torch.tensor(-1.0)})

    def test_constant_weights_sum(self):
        weights = ConstantWeights({"ce": 1.0, "bn": 0.5})
        assert float(weights.combine({"ce": torch.tensor(2.0), "bn": torch.tensor(4.0)})) == 4.0


class TestFeatureMixing:
    def test_objective_averages_over_the_subset(self, synthesisZoo):
        pixels = torch.randn(4, 3, RESOLUTION, RESOLUTION)
        labels = torch.tensor([0, 1, 2, 3])
        weights = ConstantWeights({"ce": 1.0, "bn": 0.0, "prior": 0.0})
        total, breakdown = featureMixingObjective(pixels, synthesisZoo[:2], weights, labels)

        perModel = [values["ce"] for values in breakdown["per_model"].values()]
        assert len(perModel) == 2
        assert float(total) == pytest.approx(sum(perModel) / 2, rel=1e-5)

    def test_objective_gradcheck_in_the_pixels(self, synthesisZoo):
        subset = [doubleEntry(entry) for entry in synthesisZoo[:2]]
        weights = ConstantWeights({"ce": 1.0, "bn": 0.1, "prior": 0.01})
        y1, y2 = torch.tensor([0, 1]), torch.tensor([1, 0])
        pixels = torch.randn(2, 3, 8, 8, dtype=torch.float64, generator=torch.Generator().manual_seed(0))

        def objective(x):
            return featureMixingObjective(x, subset, weights, y1, y2, 0.3, 0.01)[0]

        assert torch.autograd.gradcheck(objective, (pixels.requires_grad_(True),))

    def test_objective_ignores_the_subset_order(self, synthesisZoo):
        pixels = torch.randn(4, 3, RESOLUTION, RESOLUTION, generator=torch.Generator().manual_seed(1))
        labels = torch.tensor([0, 1, 2, 3])
        weights = ConstantWeights({"ce": 1.0, "bn": 0.5, "prior": 0.01})
        forward, forwardBreakdown = featureMixingObjective(pixels, synthesisZoo, weights, labels)
        backward, backwardBreakdown = featureMixingObjective(pixels, synthesisZoo[::-1], weights, labels)

        assert float(forward) == pytest.approx(float(backward), rel=1e-6)
        assert forwardBreakdown["per_model"] == backwardBreakdown["per_model"]

    def test_single_model_without_mixing_is_the_inversion_loss(self, synthesisZoo):
        entry = synthesisZoo[1]
        pixels = torch.randn(4, 3, RESOLUTION, RESOLUTION, generator=torch.Generator().manual_seed(2))
        labels = torch.tensor([3, 2, 1, 0])
        weights = ConstantWeights({"ce": 1.0, "bn": 0.2, "prior": 0.05})
        total, _ = featureMixingObjective(pixels, [entry], weights, labels, l2Weight=0.001)

        with BatchStatsRecorder(entry.model) as recorder:
            logits = entry.model(pixels)
        expected = (
            F.cross_entropy(logits, labels)
            + 0.2 * bnStatsLoss(recorder.stats, entry.bnstats)
            + 0.05 * priorLoss(pixels, 0.001)
        )
        assert float(total) == pytest.approx(float(expected), rel=1e-5)

    def test_empty_subset_is_rejected(self):
        with pytest.raises(ContractViolationException):
            featureMixingObjective(torch.zeros(2, 3, 8, 8), [], ConstantWeights({}), torch.tensor([0, 1]))


class TestSynthesize:
    def test_config_rejects_schedule_not_matching_iterations(self):
        with pytest.raises(ConfigurationException):
            tinySynthesisConfig(iterations=7)

    def test_m_prime_larger_than_zoo_is_rejected(self, synthesisZoo):
        with pytest.raises(ConfigurationException):
            synthesize(synthesisZoo, tinySynthesisConfig(m_prime=len(synthesisZoo) + 1), (0.5,) * 3, (0.25,) * 3)

    def test_same_seed_gives_same_images_and_leaves_zoo_untouched(self, synthesisZoo):
        digests = [bnStatsDigest(entry) for entry in synthesisZoo]
        weights = [entry.model.features[0].state_dict() for entry in synthesisZoo]
        weights = [{name: tensor.clone() for name, tensor in state.items()} for state in weights]

        config = tinySynthesisConfig()
        first = synthesize(synthesisZoo, config, (0.5,) * 3, (0.25,) * 3)
        second = synthesize(synthesisZoo, config, (0.5,) * 3, (0.25,) * 3)

        assert torch.equal(first.images, second.images)
        assert np.array_equal(first.labels, second.labels)
        assert [bnStatsDigest(entry) for entry in synthesisZoo] == digests
        for entry, state in zip(synthesisZoo, weights):
            for name, tensor in entry.model.features[0].state_dict().items():
                assert torch.equal(tensor, state[name])

    def test_dataset_shape_labels_and_provenance(self, synthesisZoo):
        config = tinySynthesisConfig()
        dataset = synthesize(synthesisZoo, config, (0.5,) * 3, (0.25,) * 3)

        assert len(dataset) == config.numimages
        assert tuple(dataset.images.shape[1:]) == (3, RESOLUTION, RESOLUTION)
        assert dataset.numclasses == NUM_CLASSES
        assert np.allclose(dataset.labels.sum(axis=1), 1.0)
        assert dataset.provenance["zoo_checksums"] == [entry.checksum for entry in synthesisZoo]
        assert SynthesisConfig.fromDict(dataset.provenance["config"]) == config
        for record in dataset.provenance["batches"]:
            assert len(record["model_ids"]) == config.mprime
            assert len(set(record["model_ids"])) == config.mprime
        # pixels stay inside the normalized [0, 1] range
        assert float(dataset.images.min()) >= -2.0 - 1e-5
        assert float(dataset.images.max()) <= 2.0 + 1e-5

    def test_single_leftover_image_joins_the_last_mixed_batch(self, synthesisZoo, monkeypatch):
        batchSizes = []

        def recordingMixBatch(batch, labels, rng, boxRatioRange):
            batchSizes.append(batch.shape[0])
            return mixBatch(batch, labels, rng, boxRatioRange)

        monkeypatch.setattr("synthesis.synthesizer.mixBatch", recordingMixBatch)
        config = tinySynthesisConfig(num_images=9, batch_size=8, m_prime=1)
        dataset = synthesize(synthesisZoo, config, (0.5,) * 3, (0.25,) * 3)

        assert config.numbatches == 1
        assert len(dataset) == 9
        assert [record["size"] for record in dataset.provenance["batches"]] == [9]
        assert batchSizes == [9] * config.iterations

    def test_batches_split_the_images_without_mixing(self):
        config = tinySynthesisConfig(num_images=17, batch_size=8, data_mixing=False)
        assert [config.batchImages(index) for index in range(config.numbatches)] == [8, 8, 1]
        mixing = tinySynthesisConfig(num_images=17, batch_size=8)
        assert [mixing.batchImages(index) for index in range(mixing.numbatches)] == [8, 9]

    def test_data_mixing_needs_two_images(self):
        with pytest.raises(ConfigurationException):
            tinySynthesisConfig(num_images=1)

    def test_mixed_copies_carry_two_label_mixture(self, synthesisZoo):
        config = tinySynthesisConfig(emit_mixed_copies=True, data_mixing=False)
        dataset = synthesize(synthesisZoo, config, (0.5,) * 3, (0.25,) * 3)

        assert len(dataset) == 2 * config.numimages
        mixedRows = dataset.labels[config.numimages :]
        assert np.allclose(mixedRows.sum(axis=1), 1.0)
        assert ((mixedRows > 0).sum(axis=1) <= 2).all()
