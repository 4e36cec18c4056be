from torch import nn

from utils.model_spec import ModelSpec
from utils.train_config import TrainConfig


class ModelZooEntry:
    """A trained, frozen BN-equipped CNN of the zoo.

    Entries are immutable after training: the module is kept in eval mode with
    gradients disabled, so concurrent read-only use is safe.

    Attributes
    ----------
    :attr:`name` : str
        unique name of the entry inside its zoo
    :attr:`spec` : ModelSpec
        architecture of the model
    :attr:`model` : nn.Module
        the frozen network
    :attr:`bnstats` : list
        stored BN statistics (BNStats), one per BN layer, forward order
    :attr:`valaccuracy` : float
        held-out top-1 accuracy recorded at training time, None if untrained
    :attr:`checksum` : str
        sha256 of spec, weights and BN statistics
    :attr:`substandard` : bool
        true if the accuracy stayed below the training floor
    """

    def __init__(
        self,
        name: str,
        spec: ModelSpec,
        model: nn.Module,
        bnStats: list,
        valAccuracy: float,
        checksum: str,
        seed: int,
        trainConfig: TrainConfig = None,
        substandard: bool = False,
        dtype: str = "float32",
    ) -> None:
        self.__name = name
        self.__spec = spec
        self.__model = model
        self.__bnStats = tuple(bnStats)
        self.__valAccuracy = valAccuracy
        self.__checksum = checksum
        self.__seed = seed
        self.__trainConfig = trainConfig
        self.__substandard = substandard
        self.__dtype = dtype

        self.__model.eval()
        for parameter in self.__model.parameters():
            parameter.requires_grad_(False)

    @property
    def name(self) -> str:
        return self.__name

    @property
    def spec(self) -> ModelSpec:
        return self.__spec

    @property
    def model(self) -> nn.Module:
        return self.__model

    @property
    def bnstats(self) -> tuple:
        return self.__bnStats

    @property
    def valaccuracy(self) -> float:
        return self.__valAccuracy

    @property
    def checksum(self) -> str:
        return self.__checksum

    @property
    def seed(self) -> int:
        return self.__seed

    @property
    def trainconfig(self) -> TrainConfig:
        return self.__trainConfig

    @property
    def substandard(self) -> bool:
        return self.__substandard

    @property
    def dtype(self) -> str:
        return self.__dtype

    @property
    def istrained(self) -> bool:
        return self.__valAccuracy is not None

    def meta(self) -> dict:
        return {
            "name": self.name,
            "val_accuracy": self.valaccuracy,
            "seed": self.seed,
            "checksum": self.checksum,
            "substandard": self.substandard,
            "dtype": self.dtype,
            "train_config": self.trainconfig.toDict() if self.trainconfig else None,
        }

    def __repr__(self) -> str:
        return f"ModelZooEntry({self.name}, acc={self.valaccuracy}, {self.checksum[:12]})"
