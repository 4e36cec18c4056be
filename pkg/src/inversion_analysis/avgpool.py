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

import logging
from fractions import Fraction

from custom_exceptions import ContractViolationException
from inversion_analysis.rational import checkConsistency, floatRank, nullspaceBasis, rank, rref
from STRINGS_LIST import getString
from utils.constraint_system import ConstraintSystem

logger = logging.getLogger(__name__)

ORIGINAL_IMAGE = 0


def unknownLabel(imageId: int, slot: int) -> str:
    """V<i> for the original image, V̂<i> for the first partner, V(<id>)_<i> for others."""
    if imageId == ORIGINAL_IMAGE:
        return f"V{slot + 1}"
    if imageId == 1:
        return f"V̂{slot + 1}"
    return f"V({imageId})_{slot + 1}"


def __normalizePattern(pattern, observation: int, numSlots: int) -> dict:
    if pattern is None:
        return {ORIGINAL_IMAGE: list(range(numSlots))}

    seen = {}
    normalized = {}
    for imageId, slots in pattern.items():
        imageId = int(imageId)
        for slot in slots:
            slot = int(slot)
            if not 0 <= slot < numSlots:
                raise ContractViolationException(
                    f"observation {observation}", getString("ERROR_IncompleteMixPattern", observation, numSlots)
                )
            if slot in seen and seen[slot] != imageId:
                raise ContractViolationException(
                    f"observation {observation}", getString("ERROR_InconsistentMixPattern", slot, observation)
                )
            seen[slot] = imageId
        normalized[imageId] = sorted({int(slot) for slot in slots})

    if len(seen) != numSlots:
        raise ContractViolationException(
            f"observation {observation}", getString("ERROR_IncompleteMixPattern", observation, numSlots)
        )
    return normalized


def avgpoolConstraints(poolSize: int, outputs: list, mixPattern: list = None) -> ConstraintSystem:
    """Linear constraints on the inputs of one average-pooling window.

    A window of poolSize x poolSize slots averaging to o gives sum(V) = poolSize^2 * o.
    With a mix pattern, every observation assigns each slot to an image id (0 is the original
    image). Unmixed observations are anchors; each mixed observation is split against the
    first anchor value: the kept slots of the original sum to the anchor response, the replaced
    slots sum to 0 and the pasted partner slots carry the rest of the mixed response.

    Args:
        poolSize (int): side of the pooling window
        outputs (list): observed pooled values, one per observation
        mixPattern (list, optional): per observation, {image id: [slot, ...]} or None when unmixed

    Raises:
        ContractViolationException: a slot belongs to two images in one observation, a slot is
            unassigned, the pattern length differs from the outputs or no anchor is present

    Returns:
        ConstraintSystem: the equations over the original and partner unknowns
    """
    numSlots = poolSize * poolSize
    outputs = [Fraction(value) for value in outputs]
    if mixPattern is None:
        mixPattern = [None] * len(outputs)
    if len(mixPattern) != len(outputs):
        raise ContractViolationException(
            "mix pattern", getString("ERROR_MixPatternLength", len(mixPattern), len(outputs))
        )

    patterns = [__normalizePattern(pattern, index, numSlots) for index, pattern in enumerate(mixPattern)]
    anchors = [index for index, pattern in enumerate(patterns) if set(pattern) == {ORIGINAL_IMAGE}]
    if len(anchors) != len(patterns) and not anchors:
        raise ContractViolationException("mix pattern", getString("ERROR_MissingAnchor"))

    keys = [(ORIGINAL_IMAGE, slot) for slot in range(numSlots)]
    partnerKeys = sorted(
        {
            (imageId, slot)
            for pattern in patterns
            for imageId, slots in pattern.items()
            if imageId != ORIGINAL_IMAGE
            for slot in slots
        }
    )
    keys.extend(partnerKeys)
    column = {key: index for index, key in enumerate(keys)}

    rows = []
    targets = []

    def addEquation(slotKeys: list, target: Fraction) -> None:
        if not slotKeys:
            return
        row = [Fraction(0)] * len(keys)
        for key in slotKeys:
            row[column[key]] = Fraction(1)
        rows.append(row)
        targets.append(target)

    anchorValue = outputs[anchors[0]] if anchors else None
    for index, (pattern, output) in enumerate(zip(patterns, outputs)):
        if index in anchors:
            addEquation([(ORIGINAL_IMAGE, slot) for slot in range(numSlots)], numSlots * output)
            continue

        kept = pattern.get(ORIGINAL_IMAGE, [])
        replaced = [slot for slot in range(numSlots) if slot not in kept]
        pasted = [(imageId, slot) for imageId, slots in pattern.items() if imageId != ORIGINAL_IMAGE for slot in slots]
        addEquation([(ORIGINAL_IMAGE, slot) for slot in kept], numSlots * anchorValue)
        addEquation([(ORIGINAL_IMAGE, slot) for slot in replaced], Fraction(0))
        addEquation(pasted, numSlots * (output - anchorValue))

    return ConstraintSystem(rows, targets, [unknownLabel(imageId, slot) for imageId, slot in keys])


def solutionSpaceDim(system: ConstraintSystem) -> int:
    """Number of unknowns minus the rank of the coefficients, in exact arithmetic.

    Raises:
        InfeasibleSystemException: the system has no solution
    """
    checkConsistency(system)
    return system.numunknowns - rank([list(row) for row in system.coefficients])


def projectedDim(system: ConstraintSystem, unknownSubset: list) -> int:
    """Dimension of the solution set projected onto some of the unknowns.

    Raises:
        ContractViolationException: a label is not an unknown of the system
        InfeasibleSystemException: the system has no solution
    """
    missing = [label for label in unknownSubset if label not in system.labels]
    if missing:
        raise ContractViolationException("projection", getString("ERROR_UnknownUnknowns", missing))

    checkConsistency(system)
    indexes = [system.labels.index(label) for label in unknownSubset]
    basis = nullspaceBasis([list(row) for row in system.coefficients], system.numunknowns)
    projected = [[vector[index] for index in indexes] for vector in basis]
    return rank(projected)


def __nonzeroRows(rows: list) -> list:
    return [row for row in rows if any(value != 0 for value in row)]


def equivalentSystems(first: ConstraintSystem, second: ConstraintSystem) -> bool:
    """True when both systems have the same unknowns and the same solution set."""
    if first.labels != second.labels:
        return False
    reducedFirst, _ = rref(first.augmented())
    reducedSecond, _ = rref(second.augmented())
    return __nonzeroRows(reducedFirst) == __nonzeroRows(reducedSecond)


def analysisReport(system: ConstraintSystem, originalOnly: bool = True) -> dict:
    """JSON report {unknowns, rank, dimension, ...} of `analyze avgpool`."""
    coefficientRank = rank([list(row) for row in system.coefficients])
    report = {
        "unknowns": system.numunknowns,
        "unknown_labels": list(system.labels),
        "rank": coefficientRank,
        "float_rank": floatRank(system),
        "dimension": solutionSpaceDim(system),
        "equations": system.equations(),
    }
    if originalOnly:
        originals = [label for label in system.labels if label.startswith("V") and label[1:].isdigit()]
        report["original_unknowns"] = originals
        report["projected_dimension"] = projectedDim(system, originals)
    logger.info("avgpool system: %s", report)
    return report
