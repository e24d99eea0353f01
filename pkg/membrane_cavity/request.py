# All Rights Reserved.
#
#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

import logging

from . import config

logger = logging.getLogger(__name__)


class Request(object):
    """One command-line invocation: what to run, on which scenario."""

    __slots__ = (
        "_config",
        "command",
        "config_path",
        "input_path",
        "out_dir",
        "threads",
    )

    def __init__(self, command, config_path, out_dir, threads=None,
                 input_path=None):
        self.command = command
        self.config_path = config_path
        self.out_dir = out_dir
        self.threads = threads
        self.input_path = input_path
        self._config = None

    def __repr__(self):
        if not self.command:
            return "<{0}>".format(self.__class__.__name__)
        return "<{0}: {1} {2}>".format(
            self.__class__.__name__, self.command, self.config_path)

    @property
    def config(self):
        """Parsed scenario, read on first access."""
        if self._config is None:
            self._config = config.load(self.config_path)
        return self._config

    def scenario(self):
        return self.config.scenario(threads=self.threads)
