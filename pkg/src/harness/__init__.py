from .evaluation import zooAverageAccuracy, datasetBnLoss, bnLossTable
from .plan_runner import missingCells, prepareCellData, resultsDbPath, runPlan, sampleRealImages
from .tables import (
    ablationMprime,
    ablationPlan,
    ablationSources,
    crossValidate,
    resultsTableFromCells,
    resultsTableFromStore,
    tablesFromStore,
)
from .report import renderReport
