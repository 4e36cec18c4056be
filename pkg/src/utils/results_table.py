import statistics

from custom_exceptions import CellAlreadyWrittenException
from STRINGS_LIST import getString


class ResultsTable:
    """A (source, target) table of per-seed measurements.

    Cells are written once. A cell's standard deviation exists only when it holds more
    than one seed.

    Attributes
    ----------
    :attr:`name` : str
        table name, also the stem of its rendered files
    :attr:`metric` : str
        name of the measured metric
    :attr:`rows`, :attr:`columns` : list
        row (source) and column (target) labels in insertion order
    :attr:`flagged` : list
        columns marked in the rendering, e.g. holdout models
    """

    def __init__(self, name: str, metric: str) -> None:
        self.__name = name
        self.__metric = metric
        self.__cells = {}
        self.__rows = []
        self.__columns = []
        self.__flagged = []

    @property
    def name(self) -> str:
        return self.__name

    @property
    def metric(self) -> str:
        return self.__metric

    @property
    def rows(self) -> list:
        return list(self.__rows)

    @property
    def columns(self) -> list:
        return list(self.__columns)

    @property
    def flagged(self) -> list:
        return list(self.__flagged)

    def setCell(self, row: str, column: str, values) -> None:
        """Writes the per-seed values of one cell.

        Raises:
            CellAlreadyWrittenException: the cell already holds values
        """
        if (row, column) in self.__cells:
            raise CellAlreadyWrittenException(f"{row}/{column}", getString("ERROR_CellWritten"))
        self.__cells[(row, column)] = tuple(float(value) for value in values)
        if row not in self.__rows:
            self.__rows.append(row)
        if column not in self.__columns:
            self.__columns.append(column)

    def flagColumn(self, column: str) -> None:
        if column not in self.__flagged:
            self.__flagged.append(column)

    def values(self, row: str, column: str) -> tuple:
        return self.__cells.get((row, column), ())

    def mean(self, row: str, column: str) -> float:
        values = self.values(row, column)
        return statistics.fmean(values) if values else None

    def stdev(self, row: str, column: str) -> float:
        values = self.values(row, column)
        return statistics.stdev(values) if len(values) > 1 else None

    def cellText(self, row: str, column: str) -> str:
        mean = self.mean(row, column)
        if mean is None:
            return ""
        stdev = self.stdev(row, column)
        return f"{mean:.4f}" if stdev is None else f"{mean:.4f} ± {stdev:.4f}"

    def toDict(self) -> dict:
        return {
            "name": self.name,
            "metric": self.metric,
            "rows": self.rows,
            "columns": self.columns,
            "flagged_columns": self.flagged,
            "cells": [
                {
                    "row": row,
                    "column": column,
                    "values": list(self.values(row, column)),
                    "mean": self.mean(row, column),
                    "stdev": self.stdev(row, column),
                }
                for row in self.__rows
                for column in self.__columns
                if (row, column) in self.__cells
            ],
        }

    @staticmethod
    def fromDict(document: dict):
        table = ResultsTable(document["name"], document["metric"])
        for cell in document.get("cells", []):
            table.setCell(cell["row"], cell["column"], cell["values"])
        for column in document.get("flagged_columns", []):
            table.flagColumn(column)
        return table

    def __eq__(self, other) -> bool:
        return isinstance(other, ResultsTable) and self.toDict() == other.toDict()

    def __repr__(self) -> str:
        return f"ResultsTable({self.name}, {len(self.__cells)} cells)"
