import torch


class RoundingState:
    """Learned rounding of one quantized layer after block reconstruction.

    Attributes
    ----------
    :attr:`layername` : str
        qualified name of the layer inside the model
    :attr:`v` : torch.Tensor
        rounding logits shaped like the weight
    :attr:`scale` : torch.Tensor
        positive weight step size, per layer or per output channel
    :attr:`beta` : float
        anneal exponent of the rounding regularizer at the end of the run
    :attr:`regweight` : float
        weight of the rounding regularizer
    :attr:`startregularizer` : float
        regularizer value before reconstruction, at the final beta of the schedule
    """

    ZETA = 1.1
    GAMMA = -0.1

    def __init__(
        self,
        layerName: str,
        v: torch.Tensor,
        scale: torch.Tensor,
        beta: float,
        regWeight: float,
        startRegularizer: float = None,
    ) -> None:
        self.__layerName = layerName
        self.__v = v.detach().clone().cpu()
        self.__scale = scale.detach().clone().cpu()
        self.__beta = float(beta)
        self.__regWeight = float(regWeight)
        self.__startRegularizer = startRegularizer

    @property
    def layername(self) -> str:
        return self.__layerName

    @property
    def v(self) -> torch.Tensor:
        return self.__v

    @property
    def scale(self) -> torch.Tensor:
        return self.__scale

    @property
    def beta(self) -> float:
        return self.__beta

    @property
    def regweight(self) -> float:
        return self.__regWeight

    @property
    def startregularizer(self) -> float:
        return self.__startRegularizer

    def softRounding(self) -> torch.Tensor:
        """Rectified sigmoid h(v) in [0, 1]."""
        return torch.clamp(torch.sigmoid(self.__v) * (self.ZETA - self.GAMMA) + self.GAMMA, 0, 1)

    def saturatedFraction(self, margin: float = 0.01) -> float:
        """Fraction of entries whose rounding is decided, min(h, 1 - h) < margin."""
        soft = self.softRounding()
        if soft.numel() == 0:
            return 1.0
        return float((torch.minimum(soft, 1 - soft) < margin).float().mean())

    def regularizer(self, beta: float = None) -> float:
        """sum(1 - |2h - 1|^beta), at the stored beta by default."""
        beta = self.__beta if beta is None else beta
        return float((1 - (2 * self.softRounding() - 1).abs().pow(beta)).sum())

    def toDict(self) -> dict:
        return {
            "layer": self.layername,
            "beta": self.beta,
            "reg_weight": self.regweight,
            "saturated_fraction": self.saturatedFraction(),
            "start_regularizer": self.startregularizer,
            "regularizer": self.regularizer(),
            "numel": self.__v.numel(),
        }

    def __repr__(self) -> str:
        return f"RoundingState({self.toDict()})"
