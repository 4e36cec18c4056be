from enum import Enum, unique

from custom_exceptions import ConfigurationException
from STRINGS_LIST import getString
from utils.config_file import checkKeys


@unique
class BnLossKind(Enum):
    MSE = "mse"
    KL = "kl"


class SynthesisConfig:
    """Every knob of the data synthesis loop.

    Attributes
    ----------
    :attr:`mprime` : int
        number of zoo models sampled per batch (Feature Mixing subset size)
    :attr:`iterations` : int
        optimization steps per batch, equal to the resolution schedule total
    :attr:`schedule` : tuple
        ((resolution, iterations), ...) phases run in order
    :attr:`boxrange` : tuple
        (low, high) range of the Data Mixing box edge fraction
    :attr:`datamixing`, :attr:`adaptiveweights` : bool
        switches of Data Mixing and of the learnable loss weights
    """

    _FIELDS = {
        "m_prime",
        "iterations",
        "lr",
        "lr_schedule",
        "resolution_schedule",
        "box_ratio_range",
        "l2_weight",
        "batch_size",
        "num_images",
        "image_resolution",
        "seed",
        "data_mixing",
        "adaptive_weights",
        "adam_betas",
        "alpha_lr",
        "bn_loss",
        "augment",
        "emit_mixed_copies",
        "ce_weight",
        "bn_weight",
        "prior_weight",
    }

    def __init__(
        self,
        mPrime: int = 3,
        iterations: int = 1000,
        lr: float = 0.25,
        lrSchedule: str = "cosine",
        resolutionSchedule=((16, 500), (32, 500)),
        boxRatioRange=(0.1, 0.4),
        l2Weight: float = 1e-5,
        batchSize: int = 64,
        numImages: int = 1024,
        imageResolution: int = 32,
        seed: int = 0,
        dataMixing: bool = True,
        adaptiveWeights: bool = True,
        adamBetas=(0.5, 0.5),
        alphaLr: float = 1e-3,
        bnLoss: str = "mse",
        augment: bool = True,
        emitMixedCopies: bool = False,
        ceWeight: float = 1.0,
        bnWeight: float = 0.01,
        priorWeight: float = 1e-4,
    ) -> None:
        self.__mPrime = mPrime
        self.__iterations = iterations
        self.__lr = lr
        self.__lrSchedule = lrSchedule
        self.__schedule = tuple((int(resolution), int(steps)) for resolution, steps in resolutionSchedule)
        self.__boxRange = tuple(float(bound) for bound in boxRatioRange)
        self.__l2Weight = l2Weight
        self.__batchSize = batchSize
        self.__numImages = numImages
        self.__imageResolution = imageResolution
        self.__seed = seed
        self.__dataMixing = dataMixing
        self.__adaptiveWeights = adaptiveWeights
        self.__adamBetas = tuple(adamBetas)
        self.__alphaLr = alphaLr
        try:
            self.__bnLoss = BnLossKind(bnLoss)
        except ValueError:
            raise ConfigurationException("bn_loss", getString("ERROR_InvalidSettingValue", bnLoss))
        self.__augment = augment
        self.__emitMixedCopies = emitMixedCopies
        self.__ceWeight = ceWeight
        self.__bnWeight = bnWeight
        self.__priorWeight = priorWeight

        self.validate()

    def validate(self) -> None:
        """Checks the config invariants.

        Raises:
            ConfigurationException: an invariant does not hold
        """
        scheduleTotal = sum(steps for _, steps in self.__schedule)
        if self.__iterations != scheduleTotal:
            raise ConfigurationException(
                "resolution_schedule", getString("ERROR_ScheduleMismatch", self.__iterations, scheduleTotal)
            )
        if any(resolution < 2 or resolution > self.__imageResolution for resolution, _ in self.__schedule):
            raise ConfigurationException(
                "resolution_schedule", getString("ERROR_PhaseResolution", self.__imageResolution)
            )
        activePhases = [resolution for resolution, steps in self.__schedule if steps > 0]
        if activePhases and activePhases[-1] != self.__imageResolution:
            raise ConfigurationException(
                "resolution_schedule", getString("ERROR_LastPhaseResolution", self.__imageResolution)
            )

        if len(self.__boxRange) != 2:
            raise ConfigurationException("box_ratio_range", getString("ERROR_BoxRangePair"))
        low, high = self.__boxRange
        if not 0.0 < low <= high < 1.0:
            raise ConfigurationException("box_ratio_range", getString("ERROR_BoxRatioRange", low, high))
        if self.__lrSchedule != "cosine":
            raise ConfigurationException("lr_schedule", getString("ERROR_InvalidSettingValue", self.__lrSchedule))
        if self.__lr <= 0 or self.__alphaLr <= 0:
            raise ConfigurationException("lr", getString("ERROR_NonPositiveLr"))
        if self.__mPrime < 1:
            raise ConfigurationException("m_prime", getString("ERROR_SubsetSize", self.__mPrime, "|zoo|"))
        if self.__batchSize < 1 or self.__numImages < 0:
            raise ConfigurationException("batch_size", getString("ERROR_BatchCount"))
        if self.__dataMixing and (self.__batchSize < 2 or self.__numImages == 1):
            raise ConfigurationException("batch_size", getString("ERROR_BatchTooSmall"))
        if self.__iterations < 0:
            raise ConfigurationException("iterations", getString("ERROR_NegativeIterations", self.__iterations))

    @property
    def mprime(self) -> int:
        return self.__mPrime

    @property
    def iterations(self) -> int:
        return self.__iterations

    @property
    def lr(self) -> float:
        return self.__lr

    @property
    def lrschedule(self) -> str:
        return self.__lrSchedule

    @property
    def schedule(self) -> tuple:
        return self.__schedule

    @property
    def boxrange(self) -> tuple:
        return self.__boxRange

    @property
    def l2weight(self) -> float:
        return self.__l2Weight

    @property
    def batchsize(self) -> int:
        return self.__batchSize

    @property
    def numimages(self) -> int:
        return self.__numImages

    @property
    def resolution(self) -> int:
        return self.__imageResolution

    @property
    def seed(self) -> int:
        return self.__seed

    @property
    def datamixing(self) -> bool:
        return self.__dataMixing

    @property
    def adaptiveweights(self) -> bool:
        return self.__adaptiveWeights

    @property
    def adambetas(self) -> tuple:
        return self.__adamBetas

    @property
    def alphalr(self) -> float:
        return self.__alphaLr

    @property
    def bnloss(self) -> BnLossKind:
        return self.__bnLoss

    @property
    def augment(self) -> bool:
        return self.__augment

    @property
    def emitmixedcopies(self) -> bool:
        return self.__emitMixedCopies

    @property
    def ceweight(self) -> float:
        return self.__ceWeight

    @property
    def bnweight(self) -> float:
        return self.__bnWeight

    @property
    def priorweight(self) -> float:
        return self.__priorWeight

    @property
    def numbatches(self) -> int:
        batches = -(-self.__numImages // self.__batchSize)
        if self.__dataMixing and batches > 1 and self.__numImages % self.__batchSize == 1:
            return batches - 1
        return batches

    def batchImages(self, batchIndex: int) -> int:
        """Number of images of one batch. Under Data Mixing a single leftover image joins the
        last batch, so every batch has a partner for each image."""
        if batchIndex == self.numbatches - 1:
            return self.__numImages - batchIndex * self.__batchSize
        return self.__batchSize

    def toDict(self) -> dict:
        return {
            "m_prime": self.mprime,
            "iterations": self.iterations,
            "lr": self.lr,
            "lr_schedule": self.lrschedule,
            "resolution_schedule": [list(phase) for phase in self.schedule],
            "box_ratio_range": list(self.boxrange),
            "l2_weight": self.l2weight,
            "batch_size": self.batchsize,
            "num_images": self.numimages,
            "image_resolution": self.resolution,
            "seed": self.seed,
            "data_mixing": self.datamixing,
            "adaptive_weights": self.adaptiveweights,
            "adam_betas": list(self.adambetas),
            "alpha_lr": self.alphalr,
            "bn_loss": self.bnloss.value,
            "augment": self.augment,
            "emit_mixed_copies": self.emitmixedcopies,
            "ce_weight": self.ceweight,
            "bn_weight": self.bnweight,
            "prior_weight": self.priorweight,
        }

    @staticmethod
    def fromDict(document: dict):
        checkKeys("synthesis config", document, SynthesisConfig._FIELDS)
        merged = SynthesisConfig._defaults()
        merged.update(document)
        if "resolution_schedule" not in document:
            # half of the budget at half resolution, the rest at full resolution
            steps = merged["iterations"]
            full = merged["image_resolution"]
            merged["resolution_schedule"] = [[full // 2, steps // 2], [full, steps - steps // 2]]

        return SynthesisConfig(
            merged["m_prime"],
            merged["iterations"],
            merged["lr"],
            merged["lr_schedule"],
            merged["resolution_schedule"],
            merged["box_ratio_range"],
            merged["l2_weight"],
            merged["batch_size"],
            merged["num_images"],
            merged["image_resolution"],
            merged["seed"],
            merged["data_mixing"],
            merged["adaptive_weights"],
            merged["adam_betas"],
            merged["alpha_lr"],
            merged["bn_loss"],
            merged["augment"],
            merged["emit_mixed_copies"],
            merged["ce_weight"],
            merged["bn_weight"],
            merged["prior_weight"],
        )

    @staticmethod
    def _defaults() -> dict:
        return {
            "m_prime": 3,
            "iterations": 1000,
            "lr": 0.25,
            "lr_schedule": "cosine",
            "resolution_schedule": [[16, 500], [32, 500]],
            "box_ratio_range": [0.1, 0.4],
            "l2_weight": 1e-5,
            "batch_size": 64,
            "num_images": 1024,
            "image_resolution": 32,
            "seed": 0,
            "data_mixing": True,
            "adaptive_weights": True,
            "adam_betas": [0.5, 0.5],
            "alpha_lr": 1e-3,
            "bn_loss": "mse",
            "augment": True,
            "emit_mixed_copies": False,
            "ce_weight": 1.0,
            "bn_weight": 0.01,
            "prior_weight": 1e-4,
        }

    def replace(self, **changes):
        """A copy of the config with some snake_case fields changed."""
        document = self.toDict()
        checkKeys("synthesis config", changes, SynthesisConfig._FIELDS)
        if {"iterations", "image_resolution"} & set(changes) and "resolution_schedule" not in changes:
            document.pop("resolution_schedule")
        document.update(changes)
        return SynthesisConfig.fromDict(document)

    def __eq__(self, other) -> bool:
        return isinstance(other, SynthesisConfig) and self.toDict() == other.toDict()

    def __repr__(self) -> str:
        return f"SynthesisConfig({self.toDict()})"
