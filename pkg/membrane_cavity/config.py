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

"""Scenario files: sectioned key = value text, see doc/scenario.md."""

import configparser
import dataclasses
import logging
import re

from collections import namedtuple

import numpy as np

from . import cavity
from .constants import NANOMETER, TWO_PI
from .coupling import Thresholds
from .exceptions import (
    InvalidValue,
    MissingBlock,
    MissingKey,
    UnknownKey,
)
from .feasibility import LASER_COOLED_OCCUPANCY, MechanicalParams
from .losses import BaseLosses
from .perturbation import MembraneConfig, QuadratureSettings
from .sweep import AXES, Scenario

logger = logging.getLogger(__name__)

REQUIRED = object()

_REFERENCE = re.compile(r"^TEM(\d)(\d)$")

SweepSpec = namedtuple("SweepSpec", ["axis", "grid"])

CrossingSpec = namedtuple(
    "CrossingSpec", ["crossing_id", "first", "second", "window"])


def _float(text):
    return float(text)


def _int(text):
    return int(text)


def _complex(text):
    return complex(text.replace(" ", ""))


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "yes", "true", "on"):
        return True
    if value in ("0", "no", "false", "off"):
        return False
    raise ValueError(text)


def _text(text):
    return text.strip()


SCHEMA = {
    "geometry": {
        "length": (_float, REQUIRED),
        "mirror_radius": (_float, REQUIRED),
        "wavelength": (_float, 1064.0e-9),
        "finesse": (_float, 50000.0),
    },
    "membrane": {
        "thickness": (_float, REQUIRED),
        "index": (_complex, REQUIRED),
        "position": (_float, 0.0),
        "tilt": (_float, 0.0),
        "tilt_axis": (_float, 0.0),
        "side_length": (_float, 1.0e-3),
        "offset_y": (_float, 0.0),
        "offset_z": (_float, 0.0),
    },
    "basis": {
        "reference": (_text, "TEM00"),
        "max_order": (_int, cavity.DEFAULT_MAX_ORDER),
        "window": (_float, cavity.DEFAULT_WINDOW_HZ),
        "modes": (_text, None),
    },
    "quadrature": {
        "nodes": (_int, 64),
        "rtol": (_float, 1.0e-6),
        "max_nodes": (_int, 512),
    },
    "losses": {
        "default": (_float, None),
    },
    "sweep": {
        "axis": (_text, "axial_position"),
        "start": (_float, None),
        "stop": (_float, None),
        "count": (_int, None),
        "values": (_floats, None),
    },
    "analysis": {
        "scan_points": (_int, 61),
        "refine_points": (_int, 41),
        "refine_rounds": (_int, 3),
        "coarse_positions": (_floats, None),
        "linear_threshold": (_float, 1.0e-3),
        "quartic_threshold": (_float, 1.0e-3),
        "x_scale": (_float, 1.0e-9),
        "classify_positions": (_floats, None),
        "classify_half_width": (_float, 5.0e-11),
        "classify_points": (_int, 21),
        "quartic_mode": (_text, "TEM20@-1"),
        "quartic_center": (_float, None),
        "quartic_antinode": (_bool, False),
        "quartic_half_width": (_float, 50.0e-9),
        "quartic_points": (_int, 21),
        "tilt_low": (_float, 1.0e-3),
        "tilt_high": (_float, 1.6e-3),
        "tilt_xtol": (_float, 1.0e-12),
        "quartic_tilts": (_floats, None),
        "kappa_at": (_float, None),
    },
    "feasibility": {
        "omega_m_hz": (_float, REQUIRED),
        "mass": (_float, REQUIRED),
        "quality": (_float, REQUIRED),
        "temperature": (_float, REQUIRED),
        "drive_amplitude": (_float, 0.0),
        "coupling_pp_hz_per_nm2": (_float, 0.0),
        "coupling4_hz_per_nm4": (_float, 0.0),
        "input_power": (_float, 0.0),
        "sigma0": (_float, 1.0),
        "target_shot_noise": (_float, None),
        "cooled_occupancy": (_float, LASER_COOLED_OCCUPANCY),
    },
    "asymmetry": {},
}

# sections whose extra keys are mode labels (values in Hz)
MODE_KEYED = frozenset(["losses", "asymmetry"])

CROSSING_PREFIX = "crossing."


@dataclasses.dataclass(frozen=True)
class AnalysisConfig:
    crossings: tuple = ()
    scan_points: int = 61
    refine_points: int = 41
    refine_rounds: int = 3
    coarse_positions: tuple = ()
    thresholds: Thresholds = Thresholds()
    classify_positions: tuple = ()
    classify_half_width: float = 5.0e-11
    classify_points: int = 21
    quartic_mode: object = None
    quartic_center: float = None
    quartic_antinode: bool = False
    quartic_half_width: float = 50.0e-9
    quartic_points: int = 21
    tilt_low: float = 1.0e-3
    tilt_high: float = 1.6e-3
    tilt_xtol: float = 1.0e-12
    quartic_tilts: tuple = ()
    kappa_at: float = None


@dataclasses.dataclass(frozen=True)
class FeasibilityConfig:
    params: MechanicalParams
    sigma0: float = 1.0
    target_shot_noise: float = None


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """A parsed scenario file."""

    geometry: cavity.CavityGeometry
    membrane: MembraneConfig
    reference: cavity.ModeIndex
    basis: tuple
    quadrature: QuadratureSettings
    losses: BaseLosses = None
    sweep: SweepSpec = None
    analysis: AnalysisConfig = AnalysisConfig()
    feasibility: FeasibilityConfig = None
    asymmetry: dict = None
    echo: dict = None

    def scenario(self, threads=None):
        return Scenario(
            geometry=self.geometry, membrane=self.membrane, basis=self.basis,
            reference=self.reference, asymmetry=self.asymmetry,
            quadrature=self.quadrature, threads=threads)

    def label(self, idx):
        return idx.label(self.reference.q)

    def require(self, block):
        value = getattr(self, block)
        if value is None:
            raise MissingBlock(
                "scenario has no [{0}] block".format(block), block)
        return value


def _parse_value(section, key, parser, raw):
    try:
        return parser(raw)
    except (TypeError, ValueError):
        raise InvalidValue(
            "[{0}] {1} = {2!r} is not a valid value".format(
                section, key, raw))


def _read_section(parser, section):
    """Values of one schema section, with defaults filled in; extra keys
    are returned separately for mode-keyed sections."""
    schema = SCHEMA[section]
    present = parser.has_section(section)
    raw = dict(parser.items(section)) if present else {}
    values = {}
    for key, (convert, default) in schema.items():
        if key in raw:
            values[key] = _parse_value(section, key, convert, raw.pop(key))
        elif default is REQUIRED and present:
            raise MissingKey(
                "[{0}] is missing required key {1!r}".format(section, key),
                section, key)
        else:
            values[key] = default
    extra = {}
    for key, text in raw.items():
        if section in MODE_KEYED and key.startswith("TEM"):
            extra[key] = _parse_value(section, key, _float, text)
        elif section == "analysis" and key.startswith(CROSSING_PREFIX):
            extra[key] = text
        else:
            raise UnknownKey(
                "unknown key {0!r} in [{1}]".format(key, section),
                section, key)
    return present, values, extra


def _reference(text):
    match = _REFERENCE.match(text)
    if match is None:
        raise InvalidValue(
            "[basis] reference {0!r} must look like TEM<m><n>".format(text))
    return int(match.group(1)), int(match.group(2))


def _mode(label, q_ref, section, key):
    try:
        return cavity.parse_mode_label(label, q_ref)
    except InvalidValue:
        raise InvalidValue(
            "[{0}] {1}: {2!r} is not a mode label".format(section, key, label))


def _grid(values):
    if values["values"] is not None:
        if any(values[k] is not None for k in ("start", "stop", "count")):
            raise InvalidValue(
                "[sweep] takes either values or start/stop/count")
        return np.array(values["values"], dtype=float)
    missing = [k for k in ("start", "stop", "count") if values[k] is None]
    if missing:
        raise MissingKey(
            "[sweep] is missing required key {0!r}".format(missing[0]),
            "sweep", missing[0])
    return np.linspace(values["start"], values["stop"], values["count"])


def _crossings(extra, q_ref):
    crossings = []
    for key in sorted(extra):
        fields = extra[key].split()
        if len(fields) != 4:
            raise InvalidValue(
                "[analysis] {0} needs '<mode> <mode> <low> <high>'".format(key))
        first = _mode(fields[0], q_ref, "analysis", key)
        second = _mode(fields[1], q_ref, "analysis", key)
        low = _parse_value("analysis", key, _float, fields[2])
        high = _parse_value("analysis", key, _float, fields[3])
        crossings.append(CrossingSpec(
            key[len(CROSSING_PREFIX):], first, second, (low, high)))
    return tuple(crossings)


def parse(text):
    """Build a ScenarioConfig from scenario file text.

    :raises UnknownKey: on any section or key outside the schema
    :raises MissingKey: when a required key is absent
    """
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as ex:
        raise InvalidValue("scenario file does not parse: {0}".format(ex))
    for section in parser.sections():
        if section not in SCHEMA:
            raise UnknownKey(
                "unknown section [{0}]".format(section), section, None)
    for block in ("geometry", "membrane"):
        if not parser.has_section(block):
            raise MissingBlock(
                "scenario has no [{0}] block".format(block), block)

    blocks = {section: _read_section(parser, section) for section in SCHEMA}

    _, values, _ = blocks["geometry"]
    geometry = cavity.CavityGeometry(**values)
    geometry.check()

    _, values, _ = blocks["membrane"]
    membrane = MembraneConfig(
        thickness=values["thickness"], index=values["index"],
        position=values["position"], tilt=values["tilt"],
        tilt_axis=values["tilt_axis"], side_length=values["side_length"],
        offset=(values["offset_y"], values["offset_z"]))
    membrane.check(cavity.beam_params(geometry))

    _, values, _ = blocks["basis"]
    reference, basis = cavity.enumerate_basis(
        geometry, _reference(values["reference"]), values["max_order"],
        values["window"])
    q_ref = reference.q
    if values["modes"] is not None:
        labels = values["modes"].replace(",", " ").split()
        basis = [_mode(label, q_ref, "basis", "modes") for label in labels]
        if len(set(basis)) != len(basis):
            raise InvalidValue("[basis] modes lists a mode twice")

    _, values, _ = blocks["quadrature"]
    quadrature = QuadratureSettings(**values)

    present, values, extra = blocks["losses"]
    losses = None
    if present:
        losses = BaseLosses(
            {_mode(key, q_ref, "losses", key): TWO_PI * value
             for key, value in extra.items()},
            None if values["default"] is None else TWO_PI * values["default"])

    present, values, _ = blocks["sweep"]
    sweep = None
    if present:
        if values["axis"] not in AXES:
            raise InvalidValue("[sweep] axis {0!r} is not one of {1}".format(
                values["axis"], ", ".join(sorted(AXES))))
        sweep = SweepSpec(values["axis"], _grid(values))

    _, values, extra = blocks["analysis"]
    analysis = AnalysisConfig(
        crossings=_crossings(extra, q_ref),
        scan_points=values["scan_points"],
        refine_points=values["refine_points"],
        refine_rounds=values["refine_rounds"],
        coarse_positions=tuple(values["coarse_positions"] or ()),
        thresholds=Thresholds(
            linear=values["linear_threshold"],
            quartic=values["quartic_threshold"],
            x_scale=values["x_scale"]),
        classify_positions=tuple(values["classify_positions"] or ()),
        classify_half_width=values["classify_half_width"],
        classify_points=values["classify_points"],
        quartic_mode=_mode(values["quartic_mode"], q_ref, "analysis",
                           "quartic_mode"),
        quartic_center=values["quartic_center"],
        quartic_antinode=values["quartic_antinode"],
        quartic_half_width=values["quartic_half_width"],
        quartic_points=values["quartic_points"],
        tilt_low=values["tilt_low"],
        tilt_high=values["tilt_high"],
        tilt_xtol=values["tilt_xtol"],
        quartic_tilts=tuple(values["quartic_tilts"] or ()),
        kappa_at=values["kappa_at"])

    present, values, _ = blocks["feasibility"]
    feasibility = None
    if present:
        params = MechanicalParams(
            omega_m=TWO_PI * values["omega_m_hz"],
            mass=values["mass"],
            quality=values["quality"],
            temperature=values["temperature"],
            drive_amplitude=values["drive_amplitude"],
            coupling_pp=TWO_PI * values["coupling_pp_hz_per_nm2"]
            / NANOMETER ** 2,
            coupling_4=TWO_PI * values["coupling4_hz_per_nm4"]
            / NANOMETER ** 4,
            finesse=geometry.finesse,
            input_power=values["input_power"],
            wavelength=geometry.wavelength,
            length=geometry.length,
            cooled_occupancy=values["cooled_occupancy"])
        params.check()
        feasibility = FeasibilityConfig(
            params=params, sigma0=values["sigma0"],
            target_shot_noise=values["target_shot_noise"])

    _, _, extra = blocks["asymmetry"]
    asymmetry = {_mode(key, q_ref, "asymmetry", key): value
                 for key, value in extra.items()} or None

    logger.debug("scenario: %d basis modes around %s", len(basis),
                 reference.label(q_ref))
    return ScenarioConfig(
        geometry=geometry, membrane=membrane, reference=reference,
        basis=tuple(basis), quadrature=quadrature, losses=losses,
        sweep=sweep, analysis=analysis, feasibility=feasibility,
        asymmetry=asymmetry, echo=_echo(parser))


def _echo(parser):
    return {section: dict(parser.items(section))
            for section in parser.sections()}


def load(path):
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as ex:
        raise InvalidValue("cannot read scenario {0}: {1}".format(
            path, ex.strerror))
    return parse(text)


def crossing_kwargs(analysis):
    return {"points": analysis.scan_points, "refine": analysis.refine_points,
            "rounds": analysis.refine_rounds}


def quartic_center(config):
    """Centre of the quartic scan: the configured position, else the
    standing-wave node (or antinode) of the quartic mode nearest the
    membrane."""
    analysis = config.analysis
    if analysis.quartic_center is not None:
        return analysis.quartic_center
    return cavity.standing_wave_point(
        config.geometry, analysis.quartic_mode, config.membrane.position,
        antinode=analysis.quartic_antinode)


def to_hz(value):
    return value / TWO_PI


def per_nm(value, power=1):
    return value / TWO_PI * NANOMETER ** power
