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

from dotenv import dotenv_values
from os import getenv
from enum import Enum, auto, unique

from custom_exceptions import NoSettingFoundException
from STRINGS_LIST import getString


@unique
class Setting(Enum):
    """Defines all the settings which can be set in the .env file or in the os environment.

    Usage:
        * Add the name of the setting you want to implement in this class and its default in `_DEFAULTS`.
        * Add an ENV variable to your environment or .env file with the following convention:
                MIXMIX_`<SETTING_NAME>` = `VALUE`
    """

    DATA_ROOT = auto()
    ZOO_DIR = auto()
    DEVICE = auto()
    RESULTS_DB = auto()
    LOG_LEVEL = auto()
    DOWNLOAD = auto()
    RUN_ACCEPTANCE = auto()


_DEFAULTS = {
    Setting.DATA_ROOT: "./datasets",
    Setting.ZOO_DIR: "./zoo",
    Setting.DEVICE: None,
    Setting.RESULTS_DB: "results.db",
    Setting.LOG_LEVEL: "INFO",
    Setting.DOWNLOAD: "true",
    Setting.RUN_ACCEPTANCE: "false",
}


class EnvSetting:
    """
    A class used to represent an environment setting.

    Attributes
    ----------
    setting : Setting
        the setting to read

    Methods
    -------
    @property
    `value() -> str`
        Returns the value of the setting, falling back on its default.\\
        Throws a NoSettingFoundException if the setting given is not available.
    @property
    `flag() -> bool`
        The value read as a boolean.
    """

    def __init__(self, setting: Setting) -> None:
        self.setting = setting

    @property
    def value(self) -> str:
        """The setting value

        Raises:
            NoSettingFoundException: raised when the setting given is not part of the available settings.

        Returns:
            str: the value of the current setting
        """
        if self.setting in list(Setting):
            keyToSearch = "MIXMIX_" + self.setting.name

            if getenv(keyToSearch) != None:
                return getenv(keyToSearch)
            else:
                return dotenv_values(".env").get(keyToSearch, _DEFAULTS[self.setting])
        else:
            raise NoSettingFoundException(self.setting, getString("ERROR_NoSettingFound"))

    @property
    def flag(self) -> bool:
        rawValue = str(self.value).strip().lower()
        if rawValue in ("1", "true", "yes", "on"):
            return True
        if rawValue in ("0", "false", "no", "off", "none"):
            return False
        raise NoSettingFoundException(
            self.setting, getString("ERROR_InvalidSettingValue", rawValue)
        )


def resolveDevice() -> str:
    """Device from MIXMIX_DEVICE, or cuda when available."""
    import torch

    requested = EnvSetting(Setting.DEVICE).value
    if requested:
        return requested
    return "cuda" if torch.cuda.is_available() else "cpu"
