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

from utils.compression_report import CompressionReport
from utils.zoo_entry import ModelZooEntry

METRIC_NAME = "top1_accuracy"


def realDataProvenance(split: str = "train") -> dict:
    return {"kind": "real", "split": split}


def archiveDataProvenance(path: str, checksum: str) -> dict:
    return {"kind": "archive", "path": path, "checksum": checksum}


def buildReport(
    task: str,
    entry: ModelZooEntry,
    dataProvenance: dict,
    spec: dict,
    value: float,
    seed: int,
    extras: dict = None,
) -> CompressionReport:
    """Report of one compression run on a zoo entry, measured as top-1 accuracy."""
    return CompressionReport(task, entry.checksum, dataProvenance, spec, METRIC_NAME, value, seed, extras)
