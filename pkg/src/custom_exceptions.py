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

from STRINGS_LIST import getString

# Configuration and contract exceptions


class NoSettingFoundException(Exception):
    """Raised when the setting given does not match any available setting."""

    def __init__(self, settingName, message):
        self.settingName = settingName
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.settingName} -> {self.message}"


class ConfigurationException(Exception):
    """Raised when a configuration value (spec, run file, plan) is invalid."""

    def __init__(self, subject, message):
        self.subject = subject
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.subject} -> {self.message}"


class ContractViolationException(Exception):
    """Raised when the inputs of an operation break its preconditions."""

    def __init__(self, subject, message):
        self.subject = subject
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.subject} -> {self.message}"


class InvariantViolationException(Exception):
    """Raised when a postcondition that must always hold is found broken."""

    def __init__(self, subject, message):
        self.subject = subject
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.subject} -> {self.message}"


# Model zoo exceptions


class UnsupportedModelException(Exception):
    """Raised when a model cannot be used for inversion (e.g. it has no BN layer)."""

    def __init__(self, modelName, message):
        self.modelName = modelName
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.modelName} -> {self.message}"


class TrainingDivergenceException(Exception):
    """Raised when the training loss of a zoo model stops being finite."""

    def __init__(self, message, diagnostics: dict):
        self.message = message
        self.diagnostics = diagnostics
        super().__init__(self.message)

    def __str__(self):
        return f"{self.message} ({self.diagnostics})"


# Artifact exceptions


class CorruptedArtifactException(Exception):
    """Raised when a stored artifact cannot be decoded or its checksum does not match."""

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.path} -> {self.message}"


class MissingProvenanceException(Exception):
    """Raised when a dataset archive comes without its provenance record."""

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.path} -> {self.message}"


class MigrationRequiredException(Exception):
    """Raised when an archive was written by a different format version."""

    def __init__(self, path, foundVersion, expectedVersion):
        self.path = path
        self.foundVersion = foundVersion
        self.expectedVersion = expectedVersion
        self.message = getString("ERROR_MigrationRequired", foundVersion, expectedVersion)
        super().__init__(self.message)

    def __str__(self):
        return f"{self.path} -> {self.message}"


# Optimization exceptions


class SynthesisDivergenceException(Exception):
    """Raised when the synthesis objective becomes NaN or infinite."""

    def __init__(self, message, lastFiniteBreakdown: dict):
        self.message = message
        self.lastFiniteBreakdown = lastFiniteBreakdown
        super().__init__(self.message)

    def __str__(self):
        return f"{self.message} (last finite step: {self.lastFiniteBreakdown})"


class ReconstructionDivergenceException(Exception):
    """Raised when a block or layer reconstruction loss stops being finite."""

    def __init__(self, blockName, message, stateDump: dict):
        self.blockName = blockName
        self.message = message
        self.stateDump = stateDump
        super().__init__(self.message)

    def __str__(self):
        return f"{self.blockName} -> {self.message}"


class QatDivergenceException(Exception):
    """Raised when quantization-aware finetuning diverges. Carries the best state seen so far."""

    def __init__(self, message, bestState: dict, bestStep: int):
        self.message = message
        self.bestState = bestState
        self.bestStep = bestStep
        super().__init__(self.message)

    def __str__(self):
        return f"{self.message} (best checkpoint at step {self.bestStep})"


class PruneRefusalException(Exception):
    """Raised when structured pruning would remove every channel of a layer."""

    def __init__(self, layerName, message):
        self.layerName = layerName
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.layerName} -> {self.message}"


# Analysis exceptions


class InfeasibleSystemException(Exception):
    """Raised when a linear constraint system has no solution."""

    def __init__(self, message, report: dict):
        self.message = message
        self.report = report
        super().__init__(self.message)

    def __str__(self):
        return f"{self.message} ({self.report})"


# Harness exceptions


class PlanValidationException(Exception):
    """Raised when an experiment plan is malformed or violates its protocol."""

    def __init__(self, planName, message):
        self.planName = planName
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.planName} -> {self.message}"


class CellAlreadyWrittenException(Exception):
    """Raised when a results cell is written twice."""

    def __init__(self, cellKey, message):
        self.cellKey = cellKey
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return f"{self.cellKey} -> {self.message}"
