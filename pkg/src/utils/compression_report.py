import json
import os

from custom_exceptions import CorruptedArtifactException
from STRINGS_LIST import getString
from utils.config_file import checkKeys

TASKS = ("ptq", "qat", "prune", "distill")


class CompressionReport:
    """Outcome of one compression run, the leaf of the provenance chain of a results cell.

    Attributes
    ----------
    :attr:`task` : str
        one of ptq, qat, prune, distill
    :attr:`modelchecksum` : str
        checksum of the zoo entry that was compressed
    :attr:`dataprovenance` : dict
        {kind: real} or {kind: archive, path, checksum}
    :attr:`spec` : dict
        the task spec (quant spec, prune spec or student spec)
    :attr:`metricname`, :attr:`value`
        measured metric, top-1 accuracy on the real held-out split
    :attr:`seed` : int
    :attr:`extras` : dict
        task specific details, e.g. rounding saturation or per-layer pruning losses
    """

    _FIELDS = {"task", "model_checksum", "data_provenance", "spec", "metric_name", "value", "seed", "extras"}

    def __init__(
        self,
        task: str,
        modelChecksum: str,
        dataProvenance: dict,
        spec: dict,
        metricName: str,
        value: float,
        seed: int,
        extras: dict = None,
    ) -> None:
        self.__task = task
        self.__modelChecksum = modelChecksum
        self.__dataProvenance = dict(dataProvenance)
        self.__spec = dict(spec)
        self.__metricName = metricName
        self.__value = float(value)
        self.__seed = int(seed)
        self.__extras = dict(extras or {})

    @property
    def task(self) -> str:
        return self.__task

    @property
    def modelchecksum(self) -> str:
        return self.__modelChecksum

    @property
    def dataprovenance(self) -> dict:
        return self.__dataProvenance

    @property
    def spec(self) -> dict:
        return self.__spec

    @property
    def metricname(self) -> str:
        return self.__metricName

    @property
    def value(self) -> float:
        return self.__value

    @property
    def seed(self) -> int:
        return self.__seed

    @property
    def extras(self) -> dict:
        return self.__extras

    def withDataProvenance(self, dataProvenance: dict):
        """Same report with another provenance record, e.g. a path relative to the report."""
        return CompressionReport.fromDict({**self.toDict(), "data_provenance": dict(dataProvenance)})

    def toDict(self) -> dict:
        return {
            "task": self.task,
            "model_checksum": self.modelchecksum,
            "data_provenance": self.dataprovenance,
            "spec": self.spec,
            "metric_name": self.metricname,
            "value": self.value,
            "seed": self.seed,
            "extras": self.extras,
        }

    @staticmethod
    def fromDict(document: dict):
        checkKeys(
            "compression report",
            document,
            CompressionReport._FIELDS,
            {"task", "model_checksum", "data_provenance", "spec", "metric_name", "value", "seed"},
        )
        return CompressionReport(
            document["task"],
            document["model_checksum"],
            document["data_provenance"],
            document["spec"],
            document["metric_name"],
            document["value"],
            document["seed"],
            document.get("extras"),
        )

    def save(self, path: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w") as reportFile:
            json.dump(self.toDict(), reportFile, indent=2, sort_keys=True)

    @staticmethod
    def load(path: str):
        """
        Raises:
            CorruptedArtifactException: the file is missing or is not a report
        """
        try:
            with open(path) as reportFile:
                return CompressionReport.fromDict(json.load(reportFile))
        except (OSError, ValueError) as error:
            raise CorruptedArtifactException(path, getString("ERROR_UnreadableArtifact", error))
