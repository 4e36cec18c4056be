import numpy as np
import torch

from custom_exceptions import ContractViolationException, MissingProvenanceException
from STRINGS_LIST import getString

DATASET_FORMAT_VERSION = 1


class SynthesizedDataset:
    """Optimized images with their label distributions and provenance.

    Label distributions are float64 rows summing to 1 with at most two nonzero entries:
    one-hot for plain images, (1 - beta, beta) for mixed ones.

    Attributes
    ----------
    :attr:`images` : torch.Tensor
        [N, C, H, W] normalized float32 images
    :attr:`labels` : np.ndarray
        [N, K] label distributions
    :attr:`baselabels` : np.ndarray
        [N] class index of the image each row started from
    :attr:`provenance` : dict
        everything needed to reproduce the images (config, zoo checksums, subsets, seed)
    """

    def __init__(self, images: torch.Tensor, labels, baseLabels, provenance: dict) -> None:
        labels = np.asarray(labels, dtype=np.float64)
        baseLabels = np.asarray(baseLabels, dtype=np.int64)

        if provenance is None:
            raise MissingProvenanceException("dataset", getString("ERROR_MissingProvenance"))
        if labels.ndim != 2 or len(labels) != len(images) or len(baseLabels) != len(images):
            raise ContractViolationException(
                "dataset", getString("ERROR_DatasetLengths", len(images), len(labels), len(baseLabels))
            )
        if len(labels):
            masses = labels.sum(axis=1)
            worst = int(np.argmax(np.abs(masses - 1.0)))
            if abs(masses[worst] - 1.0) > 1e-9:
                raise ContractViolationException(f"row {worst}", getString("ERROR_LabelMass", masses[worst]))
            if np.any(labels < 0) or np.any((labels > 0).sum(axis=1) > 2):
                raise ContractViolationException(
                    "dataset", getString("ERROR_LabelSupport")
                )

        labels.setflags(write=False)
        baseLabels.setflags(write=False)
        self.__images = images.detach().to(torch.float32).cpu().contiguous()
        self.__labels = labels
        self.__baseLabels = baseLabels
        self.__provenance = provenance

    @staticmethod
    def fromHardLabels(images: torch.Tensor, labels, numClasses: int, provenance: dict):
        """Builds a dataset of one-hot rows, e.g. from real images."""
        labels = np.asarray(labels, dtype=np.int64)
        distributions = np.zeros((len(labels), numClasses), dtype=np.float64)
        distributions[np.arange(len(labels)), labels] = 1.0
        return SynthesizedDataset(images, distributions, labels, provenance)

    @property
    def images(self) -> torch.Tensor:
        return self.__images

    @property
    def labels(self) -> np.ndarray:
        return self.__labels

    @property
    def baselabels(self) -> np.ndarray:
        return self.__baseLabels

    @property
    def provenance(self) -> dict:
        return self.__provenance

    @property
    def numclasses(self) -> int:
        return self.__labels.shape[1]

    @property
    def resolution(self) -> int:
        return self.__images.shape[-1]

    def __len__(self) -> int:
        return len(self.__images)

    def dominantLabels(self) -> np.ndarray:
        """Heavier component of every label distribution; ties go to the base label."""
        dominant = self.__labels.argmax(axis=1)
        baseWeight = self.__labels[np.arange(len(self)), self.__baseLabels]
        keepsBase = baseWeight >= self.__labels.max(axis=1)
        return np.where(keepsBase, self.__baseLabels, dominant)

    def subset(self, count: int):
        """The first `count` images, sharing this dataset's provenance."""
        return SynthesizedDataset(
            self.__images[:count], self.__labels[:count], self.__baseLabels[:count], self.__provenance
        )
