from custom_exceptions import ConfigurationException
from STRINGS_LIST import getString
from utils.config_file import checkKeys


class PruneSpec:
    """L1-magnitude pruning request.

    Attributes
    ----------
    :attr:`sparsity` : float
        fraction of elements (or output channels) zeroed, within [0, 1)
    :attr:`structured` : bool
        prune whole output channels instead of single weights
    :attr:`stages` : int
        reconstruction stages, always 2 (joint mask and weights, then weights only)
    """

    _FIELDS = {"sparsity", "structured", "stages"}

    def __init__(self, sparsity: float, structured: bool = False, stages: int = 2) -> None:
        if not 0.0 <= sparsity < 1.0:
            raise ConfigurationException("prune spec", getString("ERROR_Sparsity", sparsity))
        if stages != 2:
            raise ConfigurationException("prune spec", getString("ERROR_PruneStages", stages))

        self.__sparsity = float(sparsity)
        self.__structured = structured
        self.__stages = stages

    @property
    def sparsity(self) -> float:
        return self.__sparsity

    @property
    def structured(self) -> bool:
        return self.__structured

    @property
    def stages(self) -> int:
        return self.__stages

    def prunedCount(self, units: int) -> int:
        """Number of units (elements or channels) zeroed out of `units`."""
        return int(round(self.__sparsity * units))

    def toDict(self) -> dict:
        return {"sparsity": self.sparsity, "structured": self.structured, "stages": self.stages}

    @staticmethod
    def fromDict(document: dict):
        checkKeys("prune spec", document, PruneSpec._FIELDS, {"sparsity"})
        return PruneSpec(document["sparsity"], document.get("structured", False), document.get("stages", 2))
