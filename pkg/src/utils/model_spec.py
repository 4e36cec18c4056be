from enum import Enum, unique

from custom_exceptions import ConfigurationException
from STRINGS_LIST import getString
from utils.config_file import checkKeys


@unique
class Family(Enum):
    """Architecture families the zoo can build. Every conv block is followed by a BN layer."""

    PLAIN_CONV_BN = "plain-conv-bn"
    RESIDUAL = "residual"
    DEPTHWISE_SEPARABLE = "depthwise-separable"
    VGG_LIKE = "vgg-like"


class ModelSpec:
    """Architecture description of a zoo model.

    Attributes
    ----------
    :attr:`family` : Family
        the architecture family
    :attr:`depth` : int
        number of conv blocks
    :attr:`width` : float
        width multiplier applied to the base channel count
    :attr:`numclasses` : int
        number of output logits
    :attr:`resolution` : int
        side of the square input images, in pixels
    """

    def __init__(
        self,
        family,
        depth: int,
        widthMultiplier: float = 1.0,
        numClasses: int = 10,
        inputResolution: int = 32,
    ) -> None:
        try:
            self.__family = family if isinstance(family, Family) else Family(family)
        except ValueError:
            raise ConfigurationException(family, getString("ERROR_UnsupportedFamily", family))
        self.__depth = depth
        self.__width = float(widthMultiplier)
        self.__numClasses = numClasses
        self.__resolution = inputResolution

    @property
    def family(self) -> Family:
        return self.__family

    @property
    def depth(self) -> int:
        return self.__depth

    @property
    def width(self) -> float:
        return self.__width

    @property
    def numclasses(self) -> int:
        return self.__numClasses

    @property
    def resolution(self) -> int:
        return self.__resolution

    @property
    def name(self) -> str:
        return f"{self.family.value}-d{self.depth}-w{self.width:g}"

    def validate(self) -> None:
        """Checks the spec invariants.

        Raises:
            ConfigurationException: a field is out of range
        """
        if not isinstance(self.depth, int) or isinstance(self.depth, bool) or self.depth < 1:
            raise ConfigurationException(self.name, getString("ERROR_InvalidDepth", self.depth))
        if not self.width > 0:
            raise ConfigurationException(self.name, getString("ERROR_InvalidWidth", self.width))
        if not isinstance(self.numclasses, int) or self.numclasses < 1:
            raise ConfigurationException(
                self.name, getString("ERROR_InvalidClasses", self.numclasses)
            )
        if not isinstance(self.resolution, int) or self.resolution < 1:
            raise ConfigurationException(
                self.name, getString("ERROR_InvalidResolution", self.resolution)
            )

    def toDict(self) -> dict:
        return {
            "family": self.family.value,
            "depth": self.depth,
            "width_multiplier": self.width,
            "num_classes": self.numclasses,
            "input_resolution": self.resolution,
        }

    @staticmethod
    def fromDict(document: dict):
        checkKeys(
            "model spec",
            document,
            {"family", "depth", "width_multiplier", "num_classes", "input_resolution"},
            {"family", "depth"},
        )
        return ModelSpec(
            document["family"],
            document["depth"],
            document.get("width_multiplier", 1.0),
            document.get("num_classes", 10),
            document.get("input_resolution", 32),
        )

    def clone(self):
        return ModelSpec.fromDict(self.toDict())

    def __eq__(self, other) -> bool:
        return isinstance(other, ModelSpec) and self.toDict() == other.toDict()

    def __hash__(self) -> int:
        return hash(self.name)

    def __repr__(self) -> str:
        return f"ModelSpec({self.toDict()})"
