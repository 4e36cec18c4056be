from custom_exceptions import ConfigurationException
from STRINGS_LIST import getString
from utils.config_file import checkKeys


class TrainConfig:
    """Recipe used to train one zoo model.

    The numeric dtype and cudnn determinism are fixed by the trainer and recorded
    in the entry, so the same recipe always gives the same checksum on one device.
    """

    _FIELDS = {
        "epochs",
        "batch_size",
        "lr",
        "momentum",
        "weight_decay",
        "accuracy_floor",
        "seed",
        "label_smoothing",
    }

    def __init__(
        self,
        epochs: int = 30,
        batchSize: int = 128,
        lr: float = 0.1,
        momentum: float = 0.9,
        weightDecay: float = 5e-4,
        accuracyFloor: float = 0.8,
        seed: int = 0,
        labelSmoothing: float = 0.0,
    ) -> None:
        if epochs < 0 or batchSize < 1 or lr <= 0:
            raise ConfigurationException("train config", getString("ERROR_TrainConfigRange"))
        if not 0.0 <= accuracyFloor <= 1.0:
            raise ConfigurationException("train config", getString("ERROR_AccuracyFloor", accuracyFloor))

        self.__epochs = epochs
        self.__batchSize = batchSize
        self.__lr = lr
        self.__momentum = momentum
        self.__weightDecay = weightDecay
        self.__accuracyFloor = accuracyFloor
        self.__seed = seed
        self.__labelSmoothing = labelSmoothing

    @property
    def epochs(self) -> int:
        return self.__epochs

    @property
    def batchsize(self) -> int:
        return self.__batchSize

    @property
    def lr(self) -> float:
        return self.__lr

    @property
    def momentum(self) -> float:
        return self.__momentum

    @property
    def weightdecay(self) -> float:
        return self.__weightDecay

    @property
    def accuracyfloor(self) -> float:
        return self.__accuracyFloor

    @property
    def seed(self) -> int:
        return self.__seed

    @property
    def labelsmoothing(self) -> float:
        return self.__labelSmoothing

    def toDict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batchsize,
            "lr": self.lr,
            "momentum": self.momentum,
            "weight_decay": self.weightdecay,
            "accuracy_floor": self.accuracyfloor,
            "seed": self.seed,
            "label_smoothing": self.labelsmoothing,
        }

    @staticmethod
    def fromDict(document: dict):
        checkKeys("train config", document, TrainConfig._FIELDS)
        defaults = TrainConfig().toDict()
        defaults.update(document)
        return TrainConfig(
            defaults["epochs"],
            defaults["batch_size"],
            defaults["lr"],
            defaults["momentum"],
            defaults["weight_decay"],
            defaults["accuracy_floor"],
            defaults["seed"],
            defaults["label_smoothing"],
        )
