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


def setupTables(databasePath: str) -> None:
    """
    Create the results store's tables if they haven't been created yet.
    The DB is composed by 2 tables: `cell_result` and `archive`.
    """
    connection = dbConnect(databasePath)
    cursor = connection.cursor()
    cursor.execute(
        """CREATE TABLE IF NOT EXISTS cell_result (
            cell_key TEXT PRIMARY KEY,
            source TEXT NOT NULL,
            target TEXT NOT NULL,
            task TEXT NOT NULL,
            seed INTEGER NOT NULL,
            metric_name TEXT NOT NULL,
            value REAL NOT NULL,
            report_path TEXT NOT NULL)
        """
    )
    cursor.execute(
        """CREATE TABLE IF NOT EXISTS archive (
            archive_path TEXT PRIMARY KEY,
            source TEXT NOT NULL,
            seed INTEGER NOT NULL,
            checksum TEXT NOT NULL)
        """
    )

    connection.commit()
    connection.close()
