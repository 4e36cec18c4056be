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

import csv
import json
import logging
import os

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from STRINGS_LIST import getString  # noqa: E402
from utils.results_table import ResultsTable  # noqa: E402

logger = logging.getLogger(__name__)

CSV_FIELDS = ["row", "column", "flagged", "seeds", "mean", "stdev", "values"]
MANIFEST_NAME = "manifest.json"


def __writeCsv(table: ResultsTable, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as csvFile:
        writer = csv.DictWriter(csvFile, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in table.rows:
            for column in table.columns:
                values = table.values(row, column)
                if not values:
                    continue
                stdev = table.stdev(row, column)
                writer.writerow(
                    {
                        "row": row,
                        "column": column,
                        "flagged": int(column in table.flagged),
                        "seeds": len(values),
                        "mean": f"{table.mean(row, column):.6f}",
                        "stdev": "" if stdev is None else f"{stdev:.6f}",
                        "values": ";".join(f"{value:.6f}" for value in values),
                    }
                )


def __writePlot(table: ResultsTable, path: str) -> None:
    """Grouped bars: one group per column, one bar per row, seed stdev as error bars."""
    rows, columns = table.rows, table.columns
    positions = np.arange(len(columns))
    width = 0.8 / max(len(rows), 1)

    fig, axis = plt.subplots(figsize=(max(4.0, 1.2 * len(columns) + 2.0), 3.6), constrained_layout=True)
    for index, row in enumerate(rows):
        means = [table.mean(row, column) or 0.0 for column in columns]
        errors = [table.stdev(row, column) or 0.0 for column in columns]
        axis.bar(positions + index * width, means, width, yerr=errors, capsize=2, label=row)
    axis.set_xticks(positions + width * (len(rows) - 1) / 2)
    axis.set_xticklabels([f"{column}*" if column in table.flagged else column for column in columns], rotation=30)
    axis.set_ylabel(table.metric)
    axis.set_title(table.name)
    axis.grid(True, axis="y", alpha=0.3)
    if rows:
        axis.legend(loc="best", fontsize=7)
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def renderReport(tables: list, outDir: str) -> dict:
    """Writes `<name>.csv`, `<name>.json` and `<name>.png` per table, plus `manifest.json`.

    CSV and JSON outputs are byte-identical across renders of the same tables.

    Args:
        tables (list): the ResultsTable to render
        outDir (str): the report directory, created when missing

    Raises:
        OSError: the directory is not writable

    Returns:
        dict: the manifest
    """
    os.makedirs(outDir, exist_ok=True)
    manifest = {"tables": []}
    for table in sorted(tables, key=lambda table: table.name):
        files = {kind: f"{table.name}.{kind}" for kind in ("csv", "json", "png")}
        __writeCsv(table, os.path.join(outDir, files["csv"]))
        with open(os.path.join(outDir, files["json"]), "w", encoding="utf-8") as jsonFile:
            json.dump(table.toDict(), jsonFile, indent=2, sort_keys=True)
        __writePlot(table, os.path.join(outDir, files["png"]))
        manifest["tables"].append({"name": table.name, "metric": table.metric, **files})

    with open(os.path.join(outDir, MANIFEST_NAME), "w", encoding="utf-8") as manifestFile:
        json.dump(manifest, manifestFile, indent=2, sort_keys=True)
    logger.info(getString("GENERAL_ReportWritten", len(tables), outDir))
    return manifest
