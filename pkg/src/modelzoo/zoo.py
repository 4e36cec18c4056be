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

import logging

import numpy as np
from torch import nn

from custom_exceptions import ConfigurationException, UnsupportedModelException
from data.tensor_codec import encodeTensors, entryChecksum
from STRINGS_LIST import getString
from utils.bn_stats import BNStats
from utils.config_file import checkKeys
from utils.model_spec import ModelSpec
from utils.train_config import TrainConfig
from utils.zoo_entry import ModelZooEntry

logger = logging.getLogger(__name__)

# (family, depth, width multiplier, holdout)
DEFAULT_ZOO = (
    ("plain-conv-bn", 4, 1.0, False),
    ("residual", 5, 1.0, False),
    ("depthwise-separable", 5, 1.0, False),
    ("plain-conv-bn", 6, 0.75, False),
    ("vgg-like", 4, 1.0, True),
    ("residual", 3, 1.5, True),
)


def batchNormLayers(model: nn.Module) -> list:
    """BN layers of the model in forward order, as (qualified name, module) pairs."""
    return [
        (name, module) for name, module in model.named_modules() if isinstance(module, nn.BatchNorm2d)
    ]


def bnStatsFromModel(model: nn.Module, modelName: str = "model") -> list:
    """Reads the stored running statistics of every BN layer.

    Raises:
        UnsupportedModelException: the model has no BN layer
    """
    layers = batchNormLayers(model)
    if not layers:
        raise UnsupportedModelException(modelName, getString("ERROR_NoBatchNorm"))

    return [
        BNStats(layerId, layer.running_mean.detach().cpu().numpy(), layer.running_var.detach().cpu().numpy())
        for layerId, (_, layer) in enumerate(layers)
    ]


def extractBnStats(entry: ModelZooEntry) -> list:
    """Stored BN statistics of a trained entry, one BNStats per BN layer in forward order.

    Args:
        entry (ModelZooEntry): a trained, frozen entry

    Raises:
        UnsupportedModelException: the entry's model has no BN layer

    Returns:
        list: the BNStats of the entry
    """
    return bnStatsFromModel(entry.model, entry.name)


def makeEntry(
    name: str,
    model: nn.Module,
    valAccuracy: float,
    trainConfig: TrainConfig = None,
    substandard: bool = False,
) -> ModelZooEntry:
    """Freezes a trained network into a checksummed zoo entry."""
    model = model.cpu().float().eval()
    bnStats = bnStatsFromModel(model, name)
    weightsBlob = encodeTensors(model.state_dict())
    checksum = entryChecksum(model.spec.toDict(), weightsBlob, [stats.toDict() for stats in bnStats])

    return ModelZooEntry(
        name,
        model.spec,
        model,
        bnStats,
        valAccuracy,
        checksum,
        model.seed,
        trainConfig,
        substandard,
    )


def sampleSubset(zoo: list, mPrime: int, rng: np.random.Generator) -> list:
    """Draws m' distinct entries uniformly without replacement.

    Args:
        zoo (list): the zoo entries
        mPrime (int): subset size
        rng (np.random.Generator): source of randomness

    Raises:
        ConfigurationException: m' is outside [1, len(zoo)]

    Returns:
        list: the sampled entries, in draw order
    """
    if not isinstance(mPrime, (int, np.integer)) or not 1 <= mPrime <= len(zoo):
        raise ConfigurationException("m_prime", getString("ERROR_SubsetSize", mPrime, len(zoo)))

    picked = rng.choice(len(zoo), size=int(mPrime), replace=False)
    return [zoo[index] for index in picked]


def defaultZooRecipe(resolution: int = 32, numClasses: int = 10) -> dict:
    """The default 6-model zoo over four families, two of them holdouts."""
    models = []
    holdouts = []
    for seed, (family, depth, width, holdout) in enumerate(DEFAULT_ZOO):
        spec = ModelSpec(family, depth, width, numClasses, resolution)
        models.append({"name": spec.name, "spec": spec, "seed": seed})
        if holdout:
            holdouts.append(spec.name)

    return {"models": models, "holdouts": holdouts, "train": TrainConfig()}


def readZooRecipe(document: dict) -> dict:
    """Parses a `zoo train` run file.

    Expected keys: `models` (list of model specs, each with an optional `name` and `seed`),
    optional `train` (TrainConfig fields), `holdouts` (names) and `out_dir`.
    An empty `models` list selects the default zoo.
    """
    checkKeys("zoo recipe", document, {"models", "train", "holdouts", "out_dir", "resolution"})
    resolution = document.get("resolution", 32)
    trainConfig = TrainConfig.fromDict(document.get("train", {}))

    if not document.get("models"):
        recipe = defaultZooRecipe(resolution)
        recipe["train"] = trainConfig
        recipe["out_dir"] = document.get("out_dir")
        return recipe

    models = []
    for seed, modelDocument in enumerate(document["models"]):
        modelDocument = dict(modelDocument)
        name = modelDocument.pop("name", None)
        modelSeed = modelDocument.pop("seed", seed)
        modelDocument.setdefault("input_resolution", resolution)
        spec = ModelSpec.fromDict(modelDocument)
        spec.validate()
        models.append({"name": name or spec.name, "spec": spec, "seed": modelSeed})

    names = [model["name"] for model in models]
    repeated = sorted({name for name in names if names.count(name) > 1})
    if repeated:
        raise ConfigurationException("zoo recipe", getString("ERROR_DuplicateModelNames", repeated))
    unknownHoldouts = set(document.get("holdouts", [])) - set(names)
    if unknownHoldouts:
        raise ConfigurationException("zoo recipe", getString("ERROR_UnknownModel", sorted(unknownHoldouts)))

    return {
        "models": models,
        "holdouts": list(document.get("holdouts", [])),
        "train": trainConfig,
        "out_dir": document.get("out_dir"),
    }
