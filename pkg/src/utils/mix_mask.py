from fractions import Fraction

import torch

from custom_exceptions import ContractViolationException
from STRINGS_LIST import getString


class MixMask:
    """Rectangular binary mask used by Data Mixing.

    The box is inclusive on both ends: alpha[y, x] = 1 iff xl <= x <= xr and yd <= y <= yu.
    An empty mask (no box) has beta 0 and leaves the first image untouched.

    Attributes
    ----------
    :attr:`box` : tuple
        (xl, xr, yd, yu) integer pixel bounds, None for the empty mask
    :attr:`alpha` : torch.Tensor
        [height, width] float mask of zeros and ones
    :attr:`beta` : float
        box area over image area
    """

    def __init__(self, width: int, height: int, box: tuple = None) -> None:
        if box is not None:
            xl, xr, yd, yu = (int(bound) for bound in box)
            if not (0 <= xl <= xr < width and 0 <= yd <= yu < height):
                raise ContractViolationException(
                    "mix mask", getString("ERROR_BoxOutsideImage", box, width, height)
                )
            box = (xl, xr, yd, yu)

        self.__width = width
        self.__height = height
        self.__box = box

    @staticmethod
    def empty(width: int, height: int):
        return MixMask(width, height)

    @staticmethod
    def full(width: int, height: int):
        return MixMask(width, height, (0, width - 1, 0, height - 1))

    @property
    def width(self) -> int:
        return self.__width

    @property
    def height(self) -> int:
        return self.__height

    @property
    def box(self) -> tuple:
        return self.__box

    @property
    def isempty(self) -> bool:
        return self.__box is None

    @property
    def area(self) -> int:
        if self.__box is None:
            return 0
        xl, xr, yd, yu = self.__box
        return (xr - xl + 1) * (yu - yd + 1)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.area, self.__width * self.__height)

    @property
    def beta(self) -> float:
        return self.area / (self.__width * self.__height)

    @property
    def alpha(self) -> torch.Tensor:
        mask = torch.zeros(self.__height, self.__width)
        if self.__box is not None:
            xl, xr, yd, yu = self.__box
            mask[yd : yu + 1, xl : xr + 1] = 1.0
        return mask

    def toDict(self) -> dict:
        return {"width": self.width, "height": self.height, "box": list(self.box) if self.box else None}

    @staticmethod
    def fromDict(document: dict):
        return MixMask(document["width"], document["height"], document["box"])

    def __eq__(self, other) -> bool:
        return isinstance(other, MixMask) and self.toDict() == other.toDict()

    def __repr__(self) -> str:
        return f"MixMask({self.width}x{self.height}, box={self.box}, beta={self.beta:.4f})"
