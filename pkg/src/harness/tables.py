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
from collections import defaultdict

from custom_exceptions import PlanValidationException
from compression.report import METRIC_NAME
from data import fetchAllCells, loadZoo, readZooManifest
from harness.plan_runner import resultsDbPath, runPlan
from STRINGS_LIST import getString
from utils.experiment_plan import ExperimentPlan
from utils.image_splits import ImageSplits
from utils.results_table import ResultsTable
from utils.settings import EnvSetting, Setting

logger = logging.getLogger(__name__)


def resultsTableFromCells(cells: list, name: str, metric: str, rows: list = None, columns: list = None) -> ResultsTable:
    """Groups stored cells by (source, target), one value per seed.

    Args:
        cells (list): stored cell dicts, as returned by fetchAllCells
        name (str): table name
        metric (str): metric name
        rows (list, optional): row order, the sorted sources by default
        columns (list, optional): column order, the sorted targets by default

    Returns:
        ResultsTable: the table, seeds in ascending order inside each cell
    """
    grouped = defaultdict(list)
    for cell in sorted(cells, key=lambda cell: cell["seed"]):
        grouped[(cell["source"], cell["target"])].append(cell["value"])

    rows = rows or sorted({source for source, _ in grouped})
    columns = columns or sorted({target for _, target in grouped})
    table = ResultsTable(name, metric)
    for row in rows:
        for column in columns:
            if (row, column) in grouped:
                table.setCell(row, column, grouped[(row, column)])
    return table


def resultsTableFromStore(databasePath: str, name: str, metric: str, plan: ExperimentPlan = None) -> ResultsTable:
    """The table of a results store, restricted to the cells of `plan` when given."""
    cells = fetchAllCells(databasePath)
    if plan is None:
        return resultsTableFromCells(cells, name, metric)

    keys = {cell["key"] for cell in plan.cells()}
    return resultsTableFromCells(
        [cell for cell in cells if cell["cell_key"] in keys],
        name,
        metric,
        list(plan.datasources),
        plan.targets,
    )


def tablesFromStore(databasePath: str) -> list:
    """One table per (task, metric) pair found in a results store."""
    byTask = defaultdict(list)
    for cell in fetchAllCells(databasePath):
        byTask[(cell["task"], cell["metric_name"])].append(cell)
    return [
        resultsTableFromCells(cells, f"{task}_{metric}", metric)
        for (task, metric), cells in sorted(byTask.items())
    ]


def __holdoutNames(plan: ExperimentPlan) -> list:
    if plan.holdouts:
        return plan.holdouts
    zooDir = plan.zoodir or EnvSetting(Setting.ZOO_DIR).value
    return list(readZooManifest(zooDir).get("holdouts", []))


def crossValidate(plan: ExperimentPlan, device: str = None, zoo: list = None, splits: ImageSplits = None) -> ResultsTable:
    """Accuracy of every (data source, target model) pair, holdout columns flagged.

    The holdouts come from the plan, else from the zoo manifest. No synthesize source may
    draw from a holdout model.

    Raises:
        PlanValidationException: no holdout model, or a holdout used by a synthesize source

    Returns:
        ResultsTable: rows are data sources, columns are targets
    """
    holdouts = __holdoutNames(plan)
    if not holdouts:
        raise PlanValidationException(plan.name, getString("ERROR_MissingHoldout"))

    zoo = zoo if zoo is not None else loadZoo(plan.zoodir or EnvSetting(Setting.ZOO_DIR).value)
    if not plan.holdouts:
        plan = ExperimentPlan.fromDict({**plan.toDict(), "holdouts": holdouts})
    zooNames = [entry.name for entry in zoo]
    for source, document in plan.datasources.items():
        if document["kind"] != "synthesize":
            continue
        used = set(plan.synthesisZoo(source, zooNames)) & set(holdouts)
        if used:
            raise PlanValidationException(plan.name, getString("ERROR_HoldoutInSynthesis", sorted(used)[0], source))

    runPlan(plan, device, zoo, splits)
    table = resultsTableFromStore(resultsDbPath(plan), f"{plan.name}_cross_validation", METRIC_NAME, plan)
    for column in table.columns:
        if column in holdouts:
            table.flagColumn(column)
    return table


def ablationSources(plan: ExperimentPlan, zooSize: int) -> dict:
    """Synthesize sources of an m' x Data Mixing sweep, named `m<m'>` and `m<m'>-dmix`.

    `plan.ablation` holds `base` (a synthesis config document), `m_primes` (1 to the number of
    synthesis models by default) and `data_mixing` (both settings by default).
    """
    if not plan.ablation:
        raise PlanValidationException(plan.name, getString("ERROR_MissingAblation"))
    base = dict(plan.ablation.get("base") or {})
    mPrimes = plan.ablation.get("m_primes") or list(range(1, zooSize + 1))
    mixing = plan.ablation.get("data_mixing", [False, True])

    sources = {}
    for mPrime in mPrimes:
        for dataMixing in mixing:
            name = f"m{mPrime}-dmix" if dataMixing else f"m{mPrime}"
            sources[name] = {
                "kind": "synthesize",
                "config": {**base, "m_prime": int(mPrime), "data_mixing": bool(dataMixing)},
            }
    return sources


def ablationPlan(plan: ExperimentPlan, zoo: list) -> ExperimentPlan:
    """The plan of the m' x Data Mixing sweep, over the synthesis models of `zoo`."""
    synthesisModels = [entry.name for entry in zoo if entry.name not in plan.holdouts]
    return plan.withDataSources(ablationSources(plan, len(synthesisModels)), f"{plan.name}_ablation")


def ablationMprime(plan: ExperimentPlan, device: str = None, zoo: list = None, splits: ImageSplits = None) -> ResultsTable:
    """Downstream accuracy per m' and Data Mixing setting, on a fixed seed set.

    Raises:
        PlanValidationException: the plan has no ablation section

    Returns:
        ResultsTable: rows are the sweep settings, columns are targets
    """
    zoo = zoo if zoo is not None else loadZoo(plan.zoodir or EnvSetting(Setting.ZOO_DIR).value)
    sweep = ablationPlan(plan, zoo)

    runPlan(sweep, device, zoo, splits)
    return resultsTableFromStore(resultsDbPath(sweep), f"{plan.name}_ablation_mprime", METRIC_NAME, sweep)
