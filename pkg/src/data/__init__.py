from .db_utils import dbConnect
from .db_setup_tools import setupTables
from .db_fetch_infos import fetchCompletedKeys, fetchCellResult, fetchAllCells, fetchArchiveRecord
from .db_insert_infos import insertCellResult, insertArchiveRecord
from .tensor_codec import decodeTensors, encodeTensors, entryChecksum
from .zoo_store import saveZoo, loadZoo, loadEntry, readZooManifest
from .archive_store import datasetChecksum, exportDataset, importDataset, writePreviewGrid
