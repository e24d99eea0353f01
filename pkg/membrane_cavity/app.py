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

from .error_handler import ErrorHandler
from .exceptions import QuadratureNotConverged, UnresolvedGap, abort
from .request import Request
from .response import failure

logger = logging.getLogger(__name__)


def quadrature_failure(request, exception):
    message = ("{0}: {1} (stopped at {2} nodes, relative change "
               "{3:.3e})".format(exception.__class__.__name__, exception,
                                 exception.nodes,
                                 exception.relative_change))
    logger.error("%s failed: %s; raise [quadrature] max_nodes or rtol",
                 request, message)
    return failure(message, exception.exit_code)


def gap_failure(request, exception):
    message = "{0}: {1}".format(exception.__class__.__name__, exception)
    if exception.residual is not None:
        message = "{0} (fit residual {1:.3e})".format(
            message, exception.residual)
    logger.error("%s failed: %s; narrow or move the crossing window",
                 request, message)
    return failure(message, exception.exit_code)


class SimulationApp(object):
    def __init__(
        self,
        name=None,
        router=None,
    ):

        self.name = name or "membrane-cavity"
        self.router = router
        self.request_class = Request
        self.error_handler = ErrorHandler()
        self.error_handler.add(QuadratureNotConverged, quadrature_failure)
        self.error_handler.add(UnresolvedGap, gap_failure)
        self.debug = False

    def handle_request(self, request):
        """Run the handler registered for the request's command and turn
        any failure into an exit-code carrying response.

        :param request: Request
        :return: Response
        """
        try:
            if request.threads is not None and request.threads < 1:
                abort(2, "--threads must be >= 1, got {0}".format(
                    request.threads))
            handler, blocks = self.router.get(request.command)
            for block in sorted(blocks):
                request.config.require(block)
            logger.info("%s: running %s", self.name, request.command)
            response = handler(request)
        except Exception as e:
            self.error_handler.debug = self.debug
            response = self.error_handler.response(request, e)
        return response

    def run(self, command, config_path, out_dir, threads=None,
            input_path=None):
        """Handle one command and write its files on success.

        :return: Response
        """
        request = self.request_class(
            command, config_path, out_dir, threads=threads,
            input_path=input_path)
        response = self.handle_request(request)
        if response.exit_code == 0:
            response.write(out_dir, request.config.echo)
        return response
