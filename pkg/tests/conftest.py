import pytest
import torch

from data import saveZoo
from modelzoo import buildModel, trainModel
from utils import EnvSetting, ImageSplits, ModelSpec, Setting, SynthesisConfig, TrainConfig

NUM_CLASSES = 4
RESOLUTION = 16
TOY_ZOO = (
    ("plain-conv-bn", 3, 0.5),
    ("residual", 3, 0.5),
    ("depthwise-separable", 3, 0.5),
    ("vgg-like", 3, 0.5),
)
TOY_HOLDOUTS = ("vgg-like-d3-w0.5",)


def toyImages(count: int, seed: int) -> tuple:
    """Class-conditional images: a fixed smooth template per class plus Gaussian noise."""
    templates = torch.nn.functional.interpolate(
        torch.randn(NUM_CLASSES, 3, 4, 4, generator=torch.Generator().manual_seed(1234)),
        size=(RESOLUTION, RESOLUTION),
        mode="bilinear",
        align_corners=False,
    )
    generator = torch.Generator().manual_seed(seed)
    labels = torch.arange(count) % NUM_CLASSES
    images = 1.5 * templates[labels] + 0.5 * torch.randn(count, 3, RESOLUTION, RESOLUTION, generator=generator)
    return images, labels


def tinySynthesisConfig(**changes) -> SynthesisConfig:
    document = {
        "m_prime": 2,
        "iterations": 6,
        "resolution_schedule": [[8, 3], [16, 3]],
        "batch_size": 8,
        "num_images": 16,
        "image_resolution": RESOLUTION,
        "lr": 0.1,
    }
    document.update(changes)
    return SynthesisConfig.fromDict(document)


@pytest.fixture(scope="session")
def toySplits() -> ImageSplits:
    trainImages, trainLabels = toyImages(320, seed=0)
    valImages, valLabels = toyImages(160, seed=1)
    return ImageSplits(trainImages, trainLabels, valImages, valLabels, (0.5, 0.5, 0.5), (0.25, 0.25, 0.25), NUM_CLASSES)


@pytest.fixture(scope="session")
def toyTrainConfig() -> TrainConfig:
    return TrainConfig(epochs=6, batchSize=32, lr=0.05, weightDecay=5e-4, accuracyFloor=0.0, seed=0)


@pytest.fixture(scope="session")
def toyZoo(toySplits, toyTrainConfig) -> list:
    zoo = []
    for seed, (family, depth, width) in enumerate(TOY_ZOO):
        spec = ModelSpec(family, depth, width, NUM_CLASSES, RESOLUTION)
        zoo.append(trainModel(buildModel(spec, seed), toySplits, toyTrainConfig, spec.name))
    return zoo


@pytest.fixture(scope="session")
def synthesisZoo(toyZoo) -> list:
    return [entry for entry in toyZoo if entry.name not in TOY_HOLDOUTS]


@pytest.fixture(scope="session")
def toyZooDir(toyZoo, tmp_path_factory) -> str:
    path = str(tmp_path_factory.mktemp("zoo"))
    saveZoo(toyZoo, path, TOY_HOLDOUTS)
    return path


@pytest.fixture
def resultsDbName(monkeypatch) -> str:
    monkeypatch.setenv("MIXMIX_RESULTS_DB", "results.db")
    return "results.db"


def acceptanceEnabled() -> bool:
    return EnvSetting(Setting.RUN_ACCEPTANCE).flag
