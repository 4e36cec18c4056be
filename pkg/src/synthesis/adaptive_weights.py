####################################################################################
# Copyright (c) 2026 MixDesk                                                       #
# Author: MixDesk contributors                                                     #
#                                                                                  #
# Permission is hereby granted, free of charge, to any person obtaining a copy     #
# of this software and associated documentation files (the "Software"), to deal    #
# in the Software without restriction, including without limitation the rights     #
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell        #
# copies of the Software, and to permit persons to whom the Software is            #
# furnished to do so, subject to the following conditions:                         #
#                                                                                  #
# The above copyright notice and this permission notice shall be included in       #
# all copies or substantial portions of the Software.                              #
#                                                                                  #
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR       #
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,         #
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE      #
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER           #
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,    #
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN        #
# THE SOFTWARE.                                                                    #
####################################################################################

import torch

from custom_exceptions import ContractViolationException
from STRINGS_LIST import getString


def adaptiveObjective(normalizedTerms: torch.Tensor, alphas: torch.Tensor) -> torch.Tensor:
    """sum_i L_i / alpha_i^2 + alpha_i^2, differentiable in both arguments."""
    return (normalizedTerms / alphas.pow(2) + alphas.pow(2)).sum()


class LossWeights:
    """Learnable positive weights, one per loss term, plus per-term normalizers.

    alpha_i = exp(s_i), so every weight stays positive. The normalizers are the term values
    seen at the first normalization, so each normalized term equals 1 at that call
    (a first value of 0 is normalized by 1).

    Attributes
    ----------
    :attr:`names` : tuple
        the loss term names, in order
    :attr:`alphas` : torch.Tensor
        current weights
    :attr:`normalizers` : torch.Tensor
        captured first values, None before the first call
    :attr:`lr` : float
        gradient step applied to the log-weights
    """

    def __init__(self, names, lr: float = 1e-3, initialAlpha: float = 1.0) -> None:
        self.__names = tuple(names)
        self.__logAlpha = torch.full((len(self.__names),), float(initialAlpha), dtype=torch.float64).log()
        self.__normalizers = None
        self.__lr = lr

    @property
    def names(self) -> tuple:
        return self.__names

    @property
    def alphas(self) -> torch.Tensor:
        return self.__logAlpha.exp()

    @property
    def logalphas(self) -> torch.Tensor:
        return self.__logAlpha

    @property
    def normalizers(self) -> torch.Tensor:
        return self.__normalizers

    @property
    def lr(self) -> float:
        return self.__lr

    def normalize(self, terms: dict) -> torch.Tensor:
        """Stacks the terms in name order and divides them by their normalizers.

        Raises:
            ContractViolationException: a term is negative
        """
        for name in self.__names:
            if float(terms[name].detach()) < 0:
                raise ContractViolationException(name, getString("ERROR_NegativeLossTerm", name, float(terms[name])))

        stacked = torch.stack([terms[name].to(torch.float64).reshape(()) for name in self.__names])
        if self.__normalizers is None:
            firstValues = stacked.detach().clone()
            self.__normalizers = torch.where(firstValues > 0, firstValues, torch.ones_like(firstValues))
        return stacked / self.__normalizers.to(stacked.device)

    def combine(self, terms: dict) -> torch.Tensor:
        """Adaptive total with the current weights held constant."""
        normalized = self.normalize(terms)
        return adaptiveObjective(normalized, self.alphas.to(normalized.device))

    def step(self, normalizedTerms: torch.Tensor) -> None:
        """One gradient-descent step of the log-weights on the adaptive objective."""
        logAlpha = self.__logAlpha.clone().requires_grad_(True)
        objective = adaptiveObjective(normalizedTerms.detach().cpu(), logAlpha.exp())
        (gradient,) = torch.autograd.grad(objective, logAlpha)
        self.__logAlpha = (logAlpha - self.__lr * gradient).detach()


def updateAdaptiveWeights(weights: LossWeights, currentTerms: dict) -> tuple:
    """Evaluates sum_i L_i/alpha_i^2 + alpha_i^2 and steps the weights.

    Args:
        weights (LossWeights): the learnable weights, updated in place
        currentTerms (dict): term name -> scalar loss tensor

    Raises:
        ContractViolationException: a term is negative

    Returns:
        tuple: (weights, total) where total is computed with the weights before the step and
            keeps the graph of the terms
    """
    normalized = weights.normalize(currentTerms)
    total = adaptiveObjective(normalized, weights.alphas.to(normalized.device))
    weights.step(normalized)
    return weights, total


class ConstantWeights:
    """Fixed per-term weights: total = sum_i w_i * L_i."""

    def __init__(self, weights: dict) -> None:
        self.__weights = dict(weights)

    @property
    def names(self) -> tuple:
        return tuple(self.__weights)

    def combine(self, terms: dict) -> torch.Tensor:
        return sum(weight * terms[name] for name, weight in self.__weights.items())
