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

from data import dbConnect


def fetchCompletedKeys(databasePath: str) -> set:
    """Returns the keys of every stored cell."""
    connection = dbConnect(databasePath)
    result = connection.cursor().execute("""SELECT cell_key FROM cell_result""").fetchall()
    connection.close()

    return {row[0] for row in result}


def fetchCellResult(databasePath: str, cellKey: str) -> dict:
    """
    Given a cell key, it returns the stored cell or None.

    Args:
        databasePath (str) - the results store
        cellKey (str) - the key of the cell
    """
    connection = dbConnect(databasePath)
    row = (
        connection.cursor()
        .execute(
            """SELECT cell_key, source, target, task, seed, metric_name, value, report_path
            FROM cell_result WHERE cell_key = ?""",
            (cellKey,),
        )
        .fetchone()
    )
    connection.close()

    if row is None:
        return None
    return dict(
        zip(("cell_key", "source", "target", "task", "seed", "metric_name", "value", "report_path"), row)
    )


def fetchAllCells(databasePath: str) -> list:
    """Every stored cell, ordered by (source, target, seed)."""
    connection = dbConnect(databasePath)
    rows = (
        connection.cursor()
        .execute(
            """SELECT cell_key, source, target, task, seed, metric_name, value, report_path
            FROM cell_result ORDER BY source, target, seed"""
        )
        .fetchall()
    )
    connection.close()

    columns = ("cell_key", "source", "target", "task", "seed", "metric_name", "value", "report_path")
    return [dict(zip(columns, row)) for row in rows]


def fetchArchiveRecord(databasePath: str, source: str, seed: int) -> tuple:
    """Returns (archive_path, checksum) of the archive synthesized for a source and seed, or None."""
    connection = dbConnect(databasePath)
    result = (
        connection.cursor()
        .execute(
            """SELECT archive_path, checksum FROM archive WHERE source = ? AND seed = ?""",
            (source, seed),
        )
        .fetchone()
    )
    connection.close()

    return result
