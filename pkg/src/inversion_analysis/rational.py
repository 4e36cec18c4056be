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

from fractions import Fraction

import numpy as np

from custom_exceptions import InfeasibleSystemException
from STRINGS_LIST import getString
from utils.constraint_system import ConstraintSystem


def rref(matrix: list) -> tuple:
    """Reduced row echelon form by exact Gauss-Jordan elimination.

    Args:
        matrix (list): rows of Fractions, not modified

    Returns:
        tuple: (reduced rows, pivot column indices)
    """
    rows = [[Fraction(value) for value in row] for row in matrix]
    if not rows:
        return rows, []

    numColumns = len(rows[0])
    pivots = []
    pivotRow = 0
    for column in range(numColumns):
        candidate = next((r for r in range(pivotRow, len(rows)) if rows[r][column] != 0), None)
        if candidate is None:
            continue
        rows[pivotRow], rows[candidate] = rows[candidate], rows[pivotRow]

        pivot = rows[pivotRow][column]
        rows[pivotRow] = [value / pivot for value in rows[pivotRow]]
        for r in range(len(rows)):
            if r != pivotRow and rows[r][column] != 0:
                factor = rows[r][column]
                rows[r] = [value - factor * pivotValue for value, pivotValue in zip(rows[r], rows[pivotRow])]

        pivots.append(column)
        pivotRow += 1
        if pivotRow == len(rows):
            break

    return rows, pivots


def rank(matrix: list) -> int:
    return len(rref(matrix)[1])


def nullspaceBasis(matrix: list, numColumns: int) -> list:
    """Basis of {v : A v = 0} as Fraction vectors."""
    reduced, pivots = rref(matrix)
    freeColumns = [column for column in range(numColumns) if column not in pivots]

    basis = []
    for free in freeColumns:
        vector = [Fraction(0)] * numColumns
        vector[free] = Fraction(1)
        for rowIndex, pivot in enumerate(pivots):
            vector[pivot] = -reduced[rowIndex][free]
        basis.append(vector)
    return basis


def checkConsistency(system: ConstraintSystem) -> None:
    """Raises InfeasibleSystemException with a report when A v = b has no solution."""
    reduced, pivots = rref(system.augmented())
    if system.numunknowns in pivots:
        raise InfeasibleSystemException(
            getString("ERROR_InfeasibleSystem"),
            {
                "rank_coefficients": rank([list(row) for row in system.coefficients]),
                "rank_augmented": len(pivots),
                "equations": system.equations(),
            },
        )


def floatRank(system: ConstraintSystem, tolerance: float = 1e-9) -> int:
    """SVD rank of the coefficient matrix in floating point."""
    if system.numconstraints == 0 or system.numunknowns == 0:
        return 0
    matrix = np.array([[float(value) for value in row] for row in system.coefficients])
    return int(np.linalg.matrix_rank(matrix, tol=tolerance))
