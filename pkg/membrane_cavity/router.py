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


from .exceptions import CommandNotFound


from collections import namedtuple
from functools import lru_cache

ROUTER_CACHE_SIZE = 64
Route = namedtuple(
    "Route", ["handler", "blocks", "command"]
)


class Router(object):
    """Maps subcommand names to handlers and the scenario blocks they
    need."""

    def __init__(self):
        self.__router_map = {}

    def add(self, command, blocks, handler):
        self.__router_map[command] = Route(
            handler=handler, blocks=frozenset(blocks), command=command)

    def commands(self):
        return sorted(self.__router_map)

    @lru_cache(maxsize=ROUTER_CACHE_SIZE)
    def get(self, command):
        try:
            rt = self.__router_map[command]
            return rt.handler, rt.blocks
        except KeyError:
            raise CommandNotFound(
                "Command was not registered: {}".format(command))
