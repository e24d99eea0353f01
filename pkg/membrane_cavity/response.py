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

import csv
import hashlib
import io
import logging
import os

from datetime import datetime, timezone
from functools import partial
from json import dumps

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
MANIFEST_NAME = "manifest.json"
PACKAGE_NAME = "membrane-cavity"

json_dumps = partial(dumps, indent=2, sort_keys=True)


def tool_version():
    try:
        from pbr import version
        return version.VersionInfo(PACKAGE_NAME).version_string()
    except Exception:
        return "unknown"


def _cell(value):
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    if hasattr(value, "dtype") and value.dtype.kind == "f":
        return FLOAT_FORMAT % float(value)
    return str(value)


def csv_text(header, rows):
    """Comma-separated text with LF line endings and 12 significant
    digits for every float."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def report_text(title, rows):
    """Aligned ``name = value`` lines under a title."""
    width = max((len(name) for name, _ in rows), default=0)
    lines = [title, "=" * len(title)]
    for name, value in rows:
        lines.append("{0} = {1}".format(name.ljust(width), _cell(value)))
    return "\n".join(lines) + "\n"


class Response(object):
    """Files produced by one command, or the failure that stopped it."""

    __slots__ = ("files", "exit_code", "message", "warnings")

    def __init__(self, files=None, exit_code=0, message=None,
                 warnings=None):
        self.files = list(files or [])
        self.exit_code = exit_code
        self.message = message
        self.warnings = list(warnings or [])

    def __repr__(self):
        return "<{0}: exit {1}, {2} files>".format(
            self.__class__.__name__, self.exit_code, len(self.files))

    def add(self, name, body):
        self.files.append((name, body))
        return self

    def write(self, directory, config_echo=None):
        """Write every file plus a manifest with their sha256 hashes.

        :return: path of the manifest
        """
        os.makedirs(directory, exist_ok=True)
        hashes = {}
        for name, body in self.files:
            data = body.encode("utf-8")
            with open(os.path.join(directory, name), "wb") as handle:
                handle.write(data)
            hashes[name] = hashlib.sha256(data).hexdigest()
            logger.info("wrote %s", name)
        manifest = {
            "config": config_echo or {},
            "version": tool_version(),
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "files": hashes,
            "warnings": self.warnings,
        }
        path = os.path.join(directory, MANIFEST_NAME)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(json_dumps(manifest) + "\n")
        return path


def files(*named_bodies, warnings=None):
    return Response(files=named_bodies, warnings=warnings)


def failure(message, exit_code):
    return Response(exit_code=exit_code, message=message)
