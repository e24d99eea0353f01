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

from traceback import format_exc

from .exceptions import MembraneCavityException, UnknownKey
from .response import failure

logger = logging.getLogger(__name__)


class ErrorHandler:
    handlers = None
    cached_handlers = None
    _missing = object()

    def __init__(self):
        self.handlers = []
        self.cached_handlers = {}
        self.debug = False

    def add(self, exception, handler):
        self.handlers.append((exception, handler))

    def lookup(self, exception):
        handler = self.cached_handlers.get(type(exception), self._missing)
        if handler is self._missing:
            for exception_class, handler in self.handlers:
                if isinstance(exception, exception_class):
                    self.cached_handlers[type(exception)] = handler
                    return handler
            self.cached_handlers[type(exception)] = None
            handler = None
        return handler

    def response(self, request, exception):
        """Fetches and executes an exception handler and returns a failed
        Response

        :param request: Request
        :param exception: Exception to handle
        :return: Response carrying the exit code
        """
        handler = self.lookup(exception)
        response = None
        try:
            if handler:
                response = handler(request, exception)
            if response is None:
                response = self.default(request, exception)
        except Exception:
            logger.exception(
                "Exception raised in exception handler %r for %r",
                getattr(handler, "__name__", handler), request)
            return failure("An error occurred while handling an error", 1)
        return response

    def default(self, request, exception):
        if issubclass(type(exception), MembraneCavityException):
            logger.debug(format_exc())
            message = "{0}: {1}".format(
                exception.__class__.__name__, exception)
            if isinstance(exception, UnknownKey) and exception.key:
                message = "{0} (key: {1})".format(message, exception.key)
            logger.error("%s failed: %s", request, message)
            return failure(message, getattr(exception, "exit_code", 1))

        logger.error("Exception occurred while handling %r", request,
                     exc_info=1)
        if self.debug:
            return failure("{0}\n{1}".format(exception, format_exc()), 1)
        return failure("Unexpected failure: {0}".format(exception), 1)
