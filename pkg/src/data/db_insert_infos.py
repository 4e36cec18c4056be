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

from sqlite3 import IntegrityError

from custom_exceptions import CellAlreadyWrittenException
from data import dbConnect
from STRINGS_LIST import getString


def insertCellResult(
    databasePath: str,
    cellKey: str,
    source: str,
    target: str,
    task: str,
    seed: int,
    metricName: str,
    value: float,
    reportPath: str,
) -> None:
    """Stores the result of one plan cell. Cells are written once and never updated.

    Args:
        databasePath (str): the results store
        cellKey (str): the unique key of the cell
        source (str): the data source name
        target (str): the target model name
        task (str): the compression task
        seed (int): the cell seed
        metricName (str): name of the measured metric
        value (float): the measured value
        reportPath (str): the CompressionReport JSON of the cell

    Raises:
        CellAlreadyWrittenException: the cell key is already stored
    """
    connection = dbConnect(databasePath)
    cursor = connection.cursor()
    try:
        cursor.execute(
            "INSERT INTO cell_result VALUES(?, ?, ?, ?, ?, ?, ?, ?)",
            (cellKey, source, target, task, seed, metricName, value, reportPath),
        )
        connection.commit()
    except IntegrityError:
        raise CellAlreadyWrittenException(cellKey, getString("ERROR_CellWritten"))
    finally:
        connection.close()


def insertArchiveRecord(databasePath: str, archivePath: str, source: str, seed: int, checksum: str) -> None:
    """Records a synthesized archive of the plan. Already known archives are ignored."""
    connection = dbConnect(databasePath)
    cursor = connection.cursor()
    cursor.execute(
        "INSERT OR IGNORE INTO archive VALUES(?, ?, ?, ?)",
        (archivePath, source, seed, checksum),
    )
    connection.commit()
    connection.close()
