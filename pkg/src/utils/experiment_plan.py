import hashlib
import json

from custom_exceptions import PlanValidationException
from STRINGS_LIST import getString
from utils.compression_report import TASKS
from utils.config_file import checkKeys, loadYamlDocument

SOURCE_KINDS = ("real", "archive", "synthesize")


class ExperimentPlan:
    """A declarative grid of (data source, target model, task, spec, seed) cells.

    Every cell is keyed by the sha256 of its canonical JSON description, so a resumed plan
    recognises its completed cells by key.

    Attributes
    ----------
    :attr:`name` : str
    :attr:`outputdir` : str
        directory of the results store, reports and archives
    :attr:`resume` : bool
        skip cells whose key is already stored
    :attr:`zoodir` : str
        zoo checkpoint directory, None for the configured default
    :attr:`holdouts` : list
        zoo models excluded from every synthesis run
    :attr:`seeds` : list
        seeds of every cell
    :attr:`task` : str
        ptq, qat, prune or distill
    :attr:`spec` : dict
        task spec shared by every target
    :attr:`targetspecs` : dict
        per-target spec overrides
    :attr:`datasources` : dict
        {name: {kind: real|archive|synthesize, ...}}
    :attr:`targets` : list
        target zoo models
    :attr:`config` : dict
        task config overrides
    :attr:`ablation` : dict
        optional m' / Data Mixing sweep {base, m_primes, data_mixing}
    """

    _FIELDS = {
        "name",
        "output_dir",
        "resume",
        "zoo_dir",
        "holdouts",
        "seeds",
        "task",
        "spec",
        "target_specs",
        "data_sources",
        "targets",
        "config",
        "ablation",
    }
    _SOURCE_FIELDS = {"kind", "path", "config", "zoo"}

    def __init__(
        self,
        name: str,
        outputDir: str,
        task: str,
        dataSources: dict,
        targets: list,
        spec: dict = None,
        targetSpecs: dict = None,
        seeds=3,
        resume: bool = False,
        zooDir: str = None,
        holdouts: list = (),
        config: dict = None,
        ablation: dict = None,
    ) -> None:
        self.__name = name
        self.__outputDir = outputDir
        self.__task = task
        self.__dataSources = {source: dict(document) for source, document in (dataSources or {}).items()}
        self.__targets = list(targets or [])
        self.__spec = dict(spec or {})
        self.__targetSpecs = {target: dict(document) for target, document in (targetSpecs or {}).items()}
        self.__seeds = list(range(seeds)) if isinstance(seeds, int) else [int(seed) for seed in seeds]
        self.__resume = bool(resume)
        self.__zooDir = zooDir
        self.__holdouts = list(holdouts or [])
        self.__config = dict(config or {})
        self.__ablation = dict(ablation) if ablation else None
        self.validate()

    @property
    def name(self) -> str:
        return self.__name

    @property
    def outputdir(self) -> str:
        return self.__outputDir

    @property
    def task(self) -> str:
        return self.__task

    @property
    def datasources(self) -> dict:
        return self.__dataSources

    @property
    def targets(self) -> list:
        return list(self.__targets)

    @property
    def spec(self) -> dict:
        return dict(self.__spec)

    @property
    def targetspecs(self) -> dict:
        return self.__targetSpecs

    @property
    def seeds(self) -> list:
        return list(self.__seeds)

    @property
    def resume(self) -> bool:
        return self.__resume

    @property
    def zoodir(self) -> str:
        return self.__zooDir

    @property
    def holdouts(self) -> list:
        return list(self.__holdouts)

    @property
    def config(self) -> dict:
        return dict(self.__config)

    @property
    def ablation(self) -> dict:
        return self.__ablation

    def validate(self) -> None:
        """
        Raises:
            PlanValidationException: unknown task or source kind, no target, no seed or
                two cells sharing a key
        """
        if self.__task not in TASKS:
            raise PlanValidationException(self.__name, getString("ERROR_UnknownTask", self.__task))
        if not self.__targets or not self.__seeds:
            raise PlanValidationException(self.__name, getString("ERROR_EmptyPlan"))
        for source, document in self.__dataSources.items():
            unknown = set(document) - self._SOURCE_FIELDS
            if document.get("kind") not in SOURCE_KINDS or unknown:
                raise PlanValidationException(self.__name, getString("ERROR_UnknownDataSource", source))
            if document["kind"] == "archive" and not document.get("path"):
                raise PlanValidationException(self.__name, getString("ERROR_UnknownDataSource", source))
        for target in self.__targetSpecs:
            if target not in self.__targets:
                raise PlanValidationException(self.__name, getString("ERROR_UnknownModel", target))

        keys = [cell["key"] for cell in self.cells()]
        duplicates = sorted({key for key in keys if keys.count(key) > 1})
        if duplicates:
            raise PlanValidationException(self.__name, getString("ERROR_DuplicateCell", duplicates[0]))

    def specFor(self, target: str) -> dict:
        return {**self.__spec, **self.__targetSpecs.get(target, {})}

    def synthesisZoo(self, source: str, zooNames: list) -> list:
        """Zoo models a synthesize source draws from: its `zoo` list, else every non-holdout model."""
        document = self.__dataSources[source]
        if document.get("zoo"):
            return list(document["zoo"])
        return [name for name in zooNames if name not in self.__holdouts]

    @staticmethod
    def cellKey(description: dict) -> str:
        canonical = json.dumps(description, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def cells(self) -> list:
        """Every cell of the grid, sources outermost, then targets, then seeds."""
        cells = []
        for source, document in self.__dataSources.items():
            for target in self.__targets:
                for seed in self.__seeds:
                    description = {
                        "source": source,
                        "data": document,
                        "target": target,
                        "task": self.__task,
                        "spec": self.specFor(target),
                        "config": self.__config,
                        "seed": seed,
                    }
                    cells.append(
                        {
                            "source": source,
                            "target": target,
                            "task": self.__task,
                            "spec": self.specFor(target),
                            "seed": seed,
                            "key": ExperimentPlan.cellKey(description),
                        }
                    )
        return cells

    def withDataSources(self, dataSources: dict, name: str = None):
        """Same plan over other data sources."""
        document = self.toDict()
        document["data_sources"] = dataSources
        document["name"] = name or self.__name
        document.pop("ablation", None)
        return ExperimentPlan.fromDict(document)

    def toDict(self) -> dict:
        document = {
            "name": self.__name,
            "output_dir": self.__outputDir,
            "resume": self.__resume,
            "zoo_dir": self.__zooDir,
            "holdouts": self.holdouts,
            "seeds": self.seeds,
            "task": self.__task,
            "spec": self.spec,
            "target_specs": self.__targetSpecs,
            "data_sources": self.__dataSources,
            "targets": self.targets,
            "config": self.config,
        }
        if self.__ablation:
            document["ablation"] = self.__ablation
        return document

    @staticmethod
    def fromDict(document: dict):
        """
        Raises:
            ConfigurationException: unknown or missing keys
            PlanValidationException: the grid is invalid
        """
        checkKeys("experiment plan", document, ExperimentPlan._FIELDS, {"name", "output_dir", "task", "targets"})
        return ExperimentPlan(
            document["name"],
            document["output_dir"],
            document["task"],
            document.get("data_sources", {}),
            document["targets"],
            document.get("spec"),
            document.get("target_specs"),
            document.get("seeds", 3),
            document.get("resume", False),
            document.get("zoo_dir"),
            document.get("holdouts", []),
            document.get("config"),
            document.get("ablation"),
        )

    @staticmethod
    def load(path: str):
        return ExperimentPlan.fromDict(loadYamlDocument(path))
