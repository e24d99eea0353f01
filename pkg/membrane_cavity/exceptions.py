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

"""Defines failure modes and the process exit codes they map to."""

EXIT_CODES = {
    0: "OK",
    1: "Unexpected Failure",
    2: "Configuration Error",
    3: "Numerical Failure",
}


_excs = {}


def add_exit_code(code):
    """
    Decorator used for registering exceptions against an exit code.
    """

    def class_decorator(cls):
        cls.exit_code = code
        _excs.setdefault(code, cls)
        return cls

    return class_decorator


class MembraneCavityException(Exception):
    exit_code = 1

    def __init__(self, message, exit_code=None):
        super().__init__(message)

        if exit_code is not None:
            self.exit_code = exit_code


@add_exit_code(2)
class ConfigError(MembraneCavityException):
    pass


class UnknownKey(ConfigError):
    def __init__(self, message, section, key):
        super().__init__(message)
        self.section = section
        self.key = key


class MissingKey(ConfigError):
    def __init__(self, message, section, key):
        super().__init__(message)
        self.section = section
        self.key = key


class MissingBlock(ConfigError):
    def __init__(self, message, section):
        super().__init__(message)
        self.section = section


class InvalidValue(ConfigError):
    pass


class CommandNotFound(ConfigError):
    pass


class UnstableResonator(ConfigError):
    """Cavity length outside 0 < L < 2R, no bound Gaussian mode exists."""

    pass


class MembraneTruncation(ConfigError):
    """The membrane is too small (or too far off axis) for the modes it
    is meant to intercept."""

    pass


@add_exit_code(3)
class NumericalError(MembraneCavityException):
    pass


class QuadratureNotConverged(NumericalError):
    def __init__(self, message, nodes, relative_change):
        super().__init__(message)
        self.nodes = nodes
        self.relative_change = relative_change


class RootBracketingError(NumericalError):
    pass


class FitNotConverged(NumericalError):
    pass


class DegenerateData(NumericalError):
    pass


class UnresolvedGap(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InsufficientSpan(NumericalError):
    pass


class NonStationaryCenter(NumericalError):
    pass


class UndefinedCurvature(NumericalError):
    """Curvature of a true (gapless) crossing, which is unbounded."""

    pass


class SweepBoundaryError(NumericalError):
    pass


def abort(exit_code, message=None):
    """
    Raise an exception based on MembraneCavityException for the given
    exit code.

    :param exit_code: process exit code the failure should map to.
    :param message: failure description. Defaults to the generic
                    description of the exit code.
    """
    if message is None:
        message = EXIT_CODES.get(exit_code, EXIT_CODES[1])
    exc = _excs.get(exit_code, MembraneCavityException)
    raise exc(message=message, exit_code=exit_code)
