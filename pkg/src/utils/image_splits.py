import torch
from torch.utils.data import TensorDataset

from custom_exceptions import ContractViolationException
from STRINGS_LIST import getString


class ImageSplits:
    """Normalized labeled images: a train split and a held-out split.

    Attributes
    ----------
    :attr:`train` : TensorDataset
        (images, labels) used for training
    :attr:`val` : TensorDataset
        (images, labels) held out for accuracy measurements
    :attr:`mean`, :attr:`std` : torch.Tensor
        per-channel normalization constants applied to the [0, 1] pixels
    """

    def __init__(
        self,
        trainImages: torch.Tensor,
        trainLabels: torch.Tensor,
        valImages: torch.Tensor,
        valLabels: torch.Tensor,
        mean,
        std,
        numClasses: int,
    ) -> None:
        if trainImages.shape[1:] != valImages.shape[1:]:
            raise ContractViolationException(
                "image splits", getString("ERROR_SplitShapeMismatch")
            )
        self.__train = TensorDataset(trainImages, trainLabels.long())
        self.__val = TensorDataset(valImages, valLabels.long())
        self.__mean = torch.as_tensor(mean, dtype=torch.float32)
        self.__std = torch.as_tensor(std, dtype=torch.float32)
        self.__numClasses = numClasses

    @property
    def train(self) -> TensorDataset:
        return self.__train

    @property
    def val(self) -> TensorDataset:
        return self.__val

    @property
    def mean(self) -> torch.Tensor:
        return self.__mean

    @property
    def std(self) -> torch.Tensor:
        return self.__std

    @property
    def numclasses(self) -> int:
        return self.__numClasses

    @property
    def resolution(self) -> int:
        return self.__train.tensors[0].shape[-1]
