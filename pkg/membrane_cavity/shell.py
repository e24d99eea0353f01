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

"""``membrane-cavity`` console script.

Exit codes: 0 success, 2 scenario error, 3 numerical failure.
"""

import argparse
import logging
import sys

from . import app
from . import commands
from .exceptions import EXIT_CODES

logger = logging.getLogger(__name__)


def create_parser(commands_available):
    parser = argparse.ArgumentParser(
        prog="membrane-cavity",
        description="Membrane-in-the-middle cavity spectra and coupling "
                    "analysis.")
    parser.add_argument("--debug", action="store_true",
                        help="log at DEBUG level")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads, all cores by default; never "
                             "changes the output bytes")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name in commands_available:
        command = sub.add_parser(name)
        command.add_argument("config", help="scenario file")
        command.add_argument("--out", required=True,
                             help="output directory")
        if name == "crossing":
            command.add_argument(
                "--input", default=None,
                help="fit an external branch CSV instead of the model")
    return parser


def main(argv=None):
    router = commands.default_router()
    args = create_parser(router.commands()).parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    simulation = app.SimulationApp(name="membrane-cavity", router=router)
    simulation.debug = args.debug
    response = simulation.run(
        args.command, args.config, args.out, threads=args.threads,
        input_path=getattr(args, "input", None))
    if response.exit_code != 0:
        print("{0}: {1}".format(
            EXIT_CODES.get(response.exit_code, EXIT_CODES[1]),
            response.message), file=sys.stderr)
    for warning in response.warnings:
        logger.warning(warning)
    return response.exit_code


if __name__ == "__main__":
    sys.exit(main())
