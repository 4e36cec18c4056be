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
from synthesis.losses import BatchStatsRecorder, bnStatsLoss, bnStatsLossKl, mixedCe, priorLoss
from utils.synthesis_config import BnLossKind

TERM_NAMES = ("ce", "bn", "prior")


def featureMixingTerms(
    pixels: torch.Tensor,
    subset: list,
    y1: torch.Tensor,
    y2: torch.Tensor = None,
    beta: float = 0.0,
    l2Weight: float = 0.0,
    bnLoss: BnLossKind = BnLossKind.MSE,
) -> dict:
    """Loss terms of the Feature Mixing objective on one (possibly mixed) batch.

    CE and BN terms are averaged over the models of the subset; the prior is counted once.

    Args:
        pixels (torch.Tensor): [B, C, H, W] images, already mixed when Data Mixing is on
        subset (list): the sampled ModelZooEntry
        y1 (torch.Tensor): [B] labels of the first images
        y2 (torch.Tensor, optional): [B] labels of the pasted partners, y1 when None
        beta (float, optional): pasted area fraction. Defaults to 0.0.
        l2Weight (float, optional): weight of the squared norm inside the prior
        bnLoss (BnLossKind, optional): moment-distance form of the BN term

    Raises:
        ContractViolationException: empty subset or untrained entry

    Returns:
        dict: {"terms": {"ce", "bn", "prior"} scalar tensors, "per_model": {name: {"ce", "bn"}} floats}
    """
    if not subset:
        raise ContractViolationException("feature_mixing_objective", getString("ERROR_EmptySubset"))
    for entry in subset:
        if not entry.istrained:
            raise ContractViolationException(entry.name, getString("ERROR_UntrainedEntry", entry.name))

    y2 = y1 if y2 is None else y2
    bnDistance = bnStatsLossKl if bnLoss is BnLossKind.KL else bnStatsLoss

    ceTotal = 0.0
    bnTotal = 0.0
    perModel = {}
    for entry in subset:
        with BatchStatsRecorder(entry.model, entry.name) as recorder:
            logits = entry.model(pixels)
        modelCe = mixedCe(logits, y1, y2, beta)
        modelBn = bnDistance(recorder.stats, entry.bnstats)
        perModel[entry.name] = {"ce": float(modelCe.detach()), "bn": float(modelBn.detach())}
        ceTotal = ceTotal + modelCe
        bnTotal = bnTotal + modelBn

    return {
        "terms": {
            "ce": ceTotal / len(subset),
            "bn": bnTotal / len(subset),
            "prior": priorLoss(pixels, l2Weight),
        },
        "per_model": perModel,
    }


def featureMixingObjective(
    pixels: torch.Tensor,
    subset: list,
    weights,
    y1: torch.Tensor,
    y2: torch.Tensor = None,
    beta: float = 0.0,
    l2Weight: float = 0.0,
    bnLoss: BnLossKind = BnLossKind.MSE,
) -> tuple:
    """Feature Mixing objective: weighted model-averaged CE and BN terms plus the image prior.

    `weights` is a LossWeights (adaptive, held constant here) or a ConstantWeights.

    Returns:
        tuple: (total, breakdown) with the breakdown of featureMixingTerms
    """
    breakdown = featureMixingTerms(pixels, subset, y1, y2, beta, l2Weight, bnLoss)
    return weights.combine(breakdown["terms"]), breakdown


def breakdownValues(breakdown: dict) -> dict:
    """Plain floats of a breakdown, for logging and error reports."""
    values = {name: float(term.detach()) for name, term in breakdown["terms"].items()}
    values["per_model"] = breakdown["per_model"]
    return values
