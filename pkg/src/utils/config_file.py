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

import yaml

from custom_exceptions import ConfigurationException
from STRINGS_LIST import getString


def loadYamlDocument(path: str) -> dict:
    """Reads a run file: a single YAML document holding a mapping.

    Args:
        path (str): the file to read

    Raises:
        ConfigurationException: the file is not a single mapping

    Returns:
        dict: the parsed document
    """
    with open(path, "r", encoding="utf-8") as runFile:
        document = yaml.safe_load(runFile)

    if not isinstance(document, dict):
        raise ConfigurationException(path, getString("ERROR_RunFileShape"))

    return document


def checkKeys(subject: str, document: dict, allowed: set, required: set = frozenset()) -> None:
    """Rejects unknown keys and reports missing mandatory ones."""
    unknownKeys = sorted(set(document) - set(allowed))
    if unknownKeys:
        raise ConfigurationException(subject, getString("ERROR_UnknownConfigKeys", unknownKeys))

    missingKeys = sorted(set(required) - set(document))
    if missingKeys:
        raise ConfigurationException(subject, getString("ERROR_MissingConfigKeys", missingKeys))
