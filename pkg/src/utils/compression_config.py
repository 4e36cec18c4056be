from custom_exceptions import ConfigurationException
from STRINGS_LIST import getString
from utils.config_file import checkKeys


class TaskConfig:
    """Recipe of one compression task, read from the `config` mapping of a run file.

    Subclasses list their snake_case keys and defaults in `_DEFAULTS`; every key is
    exposed through a read-only property.
    """

    _DEFAULTS = {}
    _SUBJECT = "task config"

    def __init__(self, **values) -> None:
        checkKeys(self._SUBJECT, values, set(self._DEFAULTS))
        self._values = {**self._DEFAULTS, **values}
        self.validate()

    def validate(self) -> None:
        for key in ("batch_size", "seed"):
            if key in self._values and (not isinstance(self._values[key], int) or self._values[key] < 0):
                raise ConfigurationException(self._SUBJECT, getString("ERROR_InvalidSettingValue", key))
        if self._values.get("batch_size", 1) < 1:
            raise ConfigurationException(self._SUBJECT, getString("ERROR_InvalidSettingValue", "batch_size"))
        if self._values.get("lr", 1.0) <= 0:
            raise ConfigurationException(self._SUBJECT, getString("ERROR_InvalidSettingValue", "lr"))

    def toDict(self) -> dict:
        return {key: list(value) if isinstance(value, tuple) else value for key, value in self._values.items()}

    @classmethod
    def fromDict(cls, document: dict):
        return cls(**(document or {}))

    def replace(self, **changes):
        return type(self)(**{**self._values, **changes})

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and self.toDict() == other.toDict()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.toDict()})"

    @property
    def batchsize(self) -> int:
        return self._values["batch_size"]

    @property
    def seed(self) -> int:
        return self._values["seed"]

    @property
    def lr(self) -> float:
        return self._values["lr"]


class PtqConfig(TaskConfig):
    """Calibration and block reconstruction. `input_source` picks whether a block is
    reconstructed from the quantized predecessors' outputs or from full-precision ones."""

    _SUBJECT = "ptq config"
    _DEFAULTS = {
        "num_images": 1024,
        "batch_size": 32,
        "iterations": 2000,
        "lr": 1e-2,
        "reg_weight": 0.01,
        "beta_range": (20.0, 2.0),
        "warmup": 0.2,
        "calibration": "minmax",
        "percentile": 99.99,
        "weight_scale": "mse",
        "input_source": "quantized",
        "seed": 0,
    }

    def validate(self) -> None:
        super().validate()
        if self._values["calibration"] not in ("minmax", "percentile"):
            raise ConfigurationException("calibration", getString("ERROR_InvalidSettingValue", self._values["calibration"]))
        if self._values["weight_scale"] not in ("minmax", "mse"):
            raise ConfigurationException("weight_scale", getString("ERROR_InvalidSettingValue", self._values["weight_scale"]))
        if self._values["input_source"] not in ("quantized", "full-precision"):
            raise ConfigurationException("input_source", getString("ERROR_InvalidSettingValue", self._values["input_source"]))
        if not 0.0 <= self._values["warmup"] < 1.0:
            raise ConfigurationException("warmup", getString("ERROR_InvalidSettingValue", self._values["warmup"]))
        start, end = self._values["beta_range"]
        if not start >= end > 0:
            raise ConfigurationException("beta_range", getString("ERROR_InvalidSettingValue", self._values["beta_range"]))
        self._values["beta_range"] = (float(start), float(end))

    @property
    def numimages(self) -> int:
        return self._values["num_images"]

    @property
    def iterations(self) -> int:
        return self._values["iterations"]

    @property
    def regweight(self) -> float:
        return self._values["reg_weight"]

    @property
    def betarange(self) -> tuple:
        return self._values["beta_range"]

    @property
    def warmup(self) -> float:
        return self._values["warmup"]

    @property
    def calibration(self) -> str:
        return self._values["calibration"]

    @property
    def percentile(self) -> float:
        return self._values["percentile"]

    @property
    def weightscale(self) -> str:
        return self._values["weight_scale"]

    @property
    def inputsource(self) -> str:
        return self._values["input_source"]


class QatConfig(TaskConfig):
    _SUBJECT = "qat config"
    _DEFAULTS = {
        "steps": 1000,
        "batch_size": 32,
        "lr": 0.04,
        "momentum": 0.9,
        "weight_decay": 0.0,
        "milestones": (0.5, 0.75),
        "gamma": 0.1,
        "temperature": 3.0,
        "feature_weight": 300.0,
        "bn_freeze_step": 300,
        "augment": True,
        "calibration_images": 256,
        "weight_scale": "mse",
        "seed": 0,
    }

    def validate(self) -> None:
        super().validate()
        if self._values["temperature"] <= 0:
            raise ConfigurationException("temperature", getString("ERROR_InvalidSettingValue", self._values["temperature"]))
        if any(not 0.0 < milestone < 1.0 for milestone in self._values["milestones"]):
            raise ConfigurationException("milestones", getString("ERROR_InvalidSettingValue", self._values["milestones"]))
        self._values["milestones"] = tuple(sorted(self._values["milestones"]))

    @property
    def steps(self) -> int:
        return self._values["steps"]

    @property
    def momentum(self) -> float:
        return self._values["momentum"]

    @property
    def weightdecay(self) -> float:
        return self._values["weight_decay"]

    @property
    def milestones(self) -> tuple:
        return self._values["milestones"]

    @property
    def gamma(self) -> float:
        return self._values["gamma"]

    @property
    def temperature(self) -> float:
        return self._values["temperature"]

    @property
    def featureweight(self) -> float:
        return self._values["feature_weight"]

    @property
    def bnfreezestep(self) -> int:
        return self._values["bn_freeze_step"]

    @property
    def augment(self) -> bool:
        return self._values["augment"]

    @property
    def calibrationimages(self) -> int:
        return self._values["calibration_images"]

    @property
    def weightscale(self) -> str:
        return self._values["weight_scale"]


class PruneConfig(TaskConfig):
    _SUBJECT = "prune config"
    _DEFAULTS = {
        "num_images": 1024,
        "iterations": 500,
        "batch_size": 32,
        "lr": 4e-5,
        "heldout_fraction": 0.125,
        "seed": 0,
    }

    def validate(self) -> None:
        super().validate()
        if not 0.0 < self._values["heldout_fraction"] < 1.0:
            raise ConfigurationException(
                "heldout_fraction", getString("ERROR_InvalidSettingValue", self._values["heldout_fraction"])
            )

    @property
    def numimages(self) -> int:
        return self._values["num_images"]

    @property
    def iterations(self) -> int:
        return self._values["iterations"]

    @property
    def heldoutfraction(self) -> float:
        return self._values["heldout_fraction"]


class DistillConfig(TaskConfig):
    _SUBJECT = "distill config"
    _DEFAULTS = {
        "epochs": 30,
        "batch_size": 64,
        "lr": 0.05,
        "momentum": 0.9,
        "weight_decay": 5e-4,
        "temperature": 3.0,
        "seed": 0,
    }

    def validate(self) -> None:
        super().validate()
        if self._values["temperature"] <= 0:
            raise ConfigurationException("temperature", getString("ERROR_InvalidSettingValue", self._values["temperature"]))

    @property
    def epochs(self) -> int:
        return self._values["epochs"]

    @property
    def momentum(self) -> float:
        return self._values["momentum"]

    @property
    def weightdecay(self) -> float:
        return self._values["weight_decay"]

    @property
    def temperature(self) -> float:
        return self._values["temperature"]


TASK_CONFIGS = {"ptq": PtqConfig, "qat": QatConfig, "prune": PruneConfig, "distill": DistillConfig}
