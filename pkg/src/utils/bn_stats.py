import numpy as np

from custom_exceptions import ContractViolationException
from STRINGS_LIST import getString


class BNStats:
    """Stored running statistics of one batch-normalization layer.

    The arrays are read-only copies: synthesis never writes into them.

    Attributes
    ----------
    :attr:`layerid` : int
        position of the BN layer in forward order
    :attr:`mean` : np.ndarray
        per-channel running mean
    :attr:`var` : np.ndarray
        per-channel running variance, elementwise >= 0
    """

    def __init__(self, layerId: int, runningMean, runningVar) -> None:
        mean = np.array(runningMean, dtype=np.float32)
        var = np.array(runningVar, dtype=np.float32)

        if mean.ndim != 1 or mean.shape != var.shape:
            raise ContractViolationException(f"bn layer {layerId}", getString("ERROR_BnStatsShape"))
        if np.any(var < 0):
            raise ContractViolationException(f"bn layer {layerId}", getString("ERROR_NegativeVariance"))

        mean.setflags(write=False)
        var.setflags(write=False)
        self.__layerId = layerId
        self.__mean = mean
        self.__var = var

    @property
    def layerid(self) -> int:
        return self.__layerId

    @property
    def mean(self) -> np.ndarray:
        return self.__mean

    @property
    def var(self) -> np.ndarray:
        return self.__var

    @property
    def channels(self) -> int:
        return self.__mean.shape[0]

    def toDict(self) -> dict:
        # float32 -> python float is exact, so the decimal text round-trips
        return {
            "layer_id": self.layerid,
            "running_mean": [float(value) for value in self.mean],
            "running_var": [float(value) for value in self.var],
        }

    @staticmethod
    def fromDict(document: dict):
        return BNStats(document["layer_id"], document["running_mean"], document["running_var"])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BNStats)
            and self.layerid == other.layerid
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.var, other.var)
        )
