from fractions import Fraction

import pytest

from custom_exceptions import ContractViolationException, InfeasibleSystemException
from inversion_analysis import (
    analysisReport,
    avgpoolConstraints,
    checkConsistency,
    equivalentSystems,
    floatRank,
    nullspaceBasis,
    projectedDim,
    rank,
    rref,
    solutionSpaceDim,
)
from utils import ConstraintSystem

ORIGINALS = ["V1", "V2", "V3", "V4"]
# the right half of the window is replaced by the pasted partner
HALF_MIX = [None, {0: [2, 3], 1: [0, 1]}]


class TestRational:
    def test_rref_is_exact(self):
        reduced, pivots = rref([[Fraction(1, 3), Fraction(2, 3)], [Fraction(1), Fraction(2)]])
        assert pivots == [0]
        assert reduced[0] == [Fraction(1), Fraction(2)]
        assert reduced[1] == [Fraction(0), Fraction(0)]

    def test_rank_and_nullspace(self):
        matrix = [[Fraction(1), Fraction(1), Fraction(0)], [Fraction(0), Fraction(0), Fraction(1)]]
        assert rank(matrix) == 2
        basis = nullspaceBasis(matrix, 3)
        assert len(basis) == 1
        for row in matrix:
            assert sum(a * b for a, b in zip(row, basis[0])) == 0


class TestAvgpool:
    def test_single_window_has_three_free_dimensions(self):
        system = avgpoolConstraints(2, [Fraction(1, 2)])
        assert system.numunknowns == 4
        assert solutionSpaceDim(system) == 3

    def test_repeated_unmixed_observations_add_nothing(self):
        assert solutionSpaceDim(avgpoolConstraints(2, [1, 1, 1])) == 3

    def test_half_mix_counts_partner_unknowns(self):
        system = avgpoolConstraints(2, [1, 0], HALF_MIX)
        assert system.numunknowns == 6
        assert list(system.labels) == ORIGINALS + ["V̂1", "V̂2"]
        assert solutionSpaceDim(system) == 3
        assert projectedDim(system, ORIGINALS) == 2

    def test_half_mix_reduces_to_three_plain_equations(self):
        system = avgpoolConstraints(2, [1, 0], HALF_MIX)
        expected = ConstraintSystem(
            [
                [0, 0, 1, 1, 0, 0],
                [1, 1, 0, 0, 0, 0],
                [0, 0, 0, 0, 1, 1],
            ],
            [4, 0, -4],
            ORIGINALS + ["V̂1", "V̂2"],
        )
        assert equivalentSystems(system, expected)
        assert not equivalentSystems(system, ConstraintSystem([[0, 0, 1, 1, 0, 0]], [4], expected.labels))

    def test_mixing_never_enlarges_the_original_space(self):
        plain = solutionSpaceDim(avgpoolConstraints(2, [1]))
        mixed = projectedDim(avgpoolConstraints(2, [1, 0], HALF_MIX), ORIGINALS)
        assert mixed <= plain

    def test_zero_outputs_are_consistent(self):
        system = avgpoolConstraints(2, [0, 0], HALF_MIX)
        checkConsistency(system)
        assert solutionSpaceDim(system) == 3

    def test_identity_window_is_fully_determined(self):
        system = avgpoolConstraints(1, [Fraction(3, 7)])
        assert solutionSpaceDim(system) == 0

    def test_contradicting_observations_are_infeasible(self):
        system = ConstraintSystem([[1, 1], [1, 1]], [1, 2], ["V1", "V2"])
        with pytest.raises(InfeasibleSystemException) as error:
            solutionSpaceDim(system)
        assert error.value.report["rank_augmented"] == 2

    def test_slot_claimed_by_two_images_is_rejected(self):
        with pytest.raises(ContractViolationException):
            avgpoolConstraints(2, [1, 0], [None, {0: [0, 1, 2], 1: [2, 3]}])

    def test_unassigned_slot_is_rejected(self):
        with pytest.raises(ContractViolationException):
            avgpoolConstraints(2, [1, 0], [None, {0: [0, 1], 1: [2]}])

    def test_mix_pattern_needs_an_anchor(self):
        with pytest.raises(ContractViolationException):
            avgpoolConstraints(2, [0], [{0: [2, 3], 1: [0, 1]}])

    def test_projection_on_unknown_label_is_rejected(self):
        with pytest.raises(ContractViolationException):
            projectedDim(avgpoolConstraints(2, [1]), ["V9"])

    def test_float_rank_agrees_with_exact_rank(self):
        system = avgpoolConstraints(2, [1, 0], HALF_MIX)
        assert floatRank(system) == rank([list(row) for row in system.coefficients])

    def test_report_fields(self):
        report = analysisReport(avgpoolConstraints(2, [1, 0], HALF_MIX))
        assert report["unknowns"] == 6
        assert report["rank"] == report["float_rank"] == 3
        assert report["dimension"] == 3
        assert report["original_unknowns"] == ORIGINALS
        assert report["projected_dimension"] == 2
        assert len(report["equations"]) == 4
