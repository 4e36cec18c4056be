from fractions import Fraction

from custom_exceptions import ContractViolationException
from STRINGS_LIST import getString


class ConstraintSystem:
    """A linear system A v = b over the rationals.

    Attributes
    ----------
    :attr:`coefficients` : tuple
        [num_constraints][num_unknowns] Fractions
    :attr:`targets` : tuple
        [num_constraints] Fractions
    :attr:`labels` : tuple
        names of the unknowns, e.g. V1 or V̂2
    """

    def __init__(self, coefficients, targets, unknownLabels) -> None:
        rows = tuple(tuple(Fraction(value) for value in row) for row in coefficients)
        targets = tuple(Fraction(value) for value in targets)
        labels = tuple(unknownLabels)

        if len(rows) != len(targets):
            raise ContractViolationException(
                "constraint system", getString("ERROR_ConstraintRows", len(rows), len(targets))
            )
        if any(len(row) != len(labels) for row in rows):
            raise ContractViolationException(
                "constraint system", getString("ERROR_ConstraintWidth", len(labels))
            )
        if len(set(labels)) != len(labels):
            raise ContractViolationException("constraint system", getString("ERROR_DuplicateUnknowns"))

        self.__coefficients = rows
        self.__targets = targets
        self.__labels = labels

    @property
    def coefficients(self) -> tuple:
        return self.__coefficients

    @property
    def targets(self) -> tuple:
        return self.__targets

    @property
    def labels(self) -> tuple:
        return self.__labels

    @property
    def numconstraints(self) -> int:
        return len(self.__coefficients)

    @property
    def numunknowns(self) -> int:
        return len(self.__labels)

    def augmented(self) -> list:
        """[A | b] as a mutable list of Fraction rows."""
        return [list(row) + [target] for row, target in zip(self.__coefficients, self.__targets)]

    def equations(self) -> list:
        """Human-readable equations, e.g. "V3 + V4 = 4"."""
        rendered = []
        for row, target in zip(self.__coefficients, self.__targets):
            terms = []
            for coefficient, label in zip(row, self.__labels):
                if coefficient == 0:
                    continue
                factor = "" if abs(coefficient) == 1 else f"{abs(coefficient)}*"
                sign = "-" if coefficient < 0 else "+"
                terms.append((sign, f"{factor}{label}"))
            if not terms:
                rendered.append(f"0 = {target}")
                continue
            text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
            text += "".join(f" {sign} {term}" for sign, term in terms[1:])
            rendered.append(f"{text} = {target}")
        return rendered

    def toDict(self) -> dict:
        return {
            "unknowns": list(self.__labels),
            "coefficients": [[str(value) for value in row] for row in self.__coefficients],
            "targets": [str(value) for value in self.__targets],
        }

    def __repr__(self) -> str:
        return f"ConstraintSystem({self.equations()})"
