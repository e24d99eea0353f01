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

"""Empty symmetric Fabry-Perot cavity and its Hermite-Gauss eigenmodes.

The cavity axis is ``x`` with the mirrors at ``x = -L/2`` and ``x = +L/2``
and the beam waist at ``x = 0``. ``y`` and ``z`` are the transverse axes;
mode index ``m`` runs along ``y`` and ``n`` along ``z``.
"""

import logging
import math
import re

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from scipy import special

from .constants import SPEED_OF_LIGHT
from .exceptions import InvalidValue, UnstableResonator

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 4
DEFAULT_WINDOW_HZ = 2.0e9

_LABEL = re.compile(r"^TEM(\d)(\d)@([+-]?\d+)$")


@dataclass(frozen=True)
class CavityGeometry:
    length: float
    mirror_radius: float
    wavelength: float = 1064.0e-9
    finesse: float = 50000.0

    @property
    def fsr(self):
        """Free spectral range c/2L in Hz."""
        return SPEED_OF_LIGHT / (2.0 * self.length)

    @property
    def g(self):
        return 1.0 - self.length / self.mirror_radius

    @property
    def linewidth(self):
        """Empty-cavity energy decay rate in rad/s."""
        return 2.0 * math.pi * self.fsr / self.finesse

    def check(self):
        if not 0.0 < self.length < 2.0 * self.mirror_radius:
            raise UnstableResonator(
                "cavity length {0} m is outside the stable range "
                "0 < L < 2R = {1} m".format(
                    self.length, 2.0 * self.mirror_radius))
        if self.wavelength <= 0.0:
            raise InvalidValue(
                "wavelength must be positive, got {0}".format(
                    self.wavelength))
        if self.finesse <= 0.0:
            raise InvalidValue(
                "finesse must be positive, got {0}".format(self.finesse))


@dataclass(frozen=True)
class GaussianBeamParams:
    waist: float
    rayleigh_range: float
    wavelength: float

    def spot_size(self, x):
        return self.waist * np.sqrt(1.0 + (np.asarray(x) / self.rayleigh_range) ** 2)

    def gouy_phase(self, x):
        return np.arctan(np.asarray(x) / self.rayleigh_range)

    def inverse_radius(self, x):
        """Wavefront curvature 1/R(x); finite everywhere, zero at the waist."""
        x = np.asarray(x, dtype=float)
        return x / (x ** 2 + self.rayleigh_range ** 2)

    def inverse_radius_slope(self, x):
        x = np.asarray(x, dtype=float)
        zr2 = self.rayleigh_range ** 2
        return (zr2 - x ** 2) / (x ** 2 + zr2) ** 2

    def wavefront_radius(self, x):
        """Signed wavefront radius, infinite at the waist."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            radius = np.where(
                x == 0.0, np.inf, x + self.rayleigh_range ** 2 / np.where(
                    x == 0.0, 1.0, x))
        if radius.ndim == 0:
            return float(radius)
        return radius


class ModeIndex(namedtuple("ModeIndex", ["q", "m", "n"])):
    """Longitudinal index ``q`` and transverse indices ``m`` (along y),
    ``n`` (along z)."""

    __slots__ = ()

    @property
    def order(self):
        return self.m + self.n

    def label(self, q_ref):
        return "TEM{0}{1}@{2}".format(self.m, self.n, self.q - q_ref)


def parse_mode_label(label, q_ref):
    """Turn ``TEM{m}{n}@{dq}`` back into a ModeIndex."""
    match = _LABEL.match(label.strip())
    if match is None:
        raise InvalidValue(
            "mode label {0!r} does not look like TEM<m><n>@<dq>".format(label))
    m, n, dq = (int(v) for v in match.groups())
    return ModeIndex(q_ref + dq, m, n)


def beam_params(geometry):
    """Gaussian beam supported by a symmetric two-mirror resonator.

    :param geometry: CavityGeometry
    :return: GaussianBeamParams with the waist at the cavity centre
    """
    geometry.check()
    length, radius = geometry.length, geometry.mirror_radius
    rayleigh = 0.5 * math.sqrt(length * (2.0 * radius - length))
    waist = math.sqrt(geometry.wavelength * rayleigh / math.pi)
    return GaussianBeamParams(
        waist=waist, rayleigh_range=rayleigh, wavelength=geometry.wavelength)


def one_way_gouy(geometry):
    """Gouy phase accumulated between the two mirrors."""
    beam = beam_params(geometry)
    return 2.0 * math.atan(0.5 * geometry.length / beam.rayleigh_range)


def transverse_spacing(geometry):
    """Frequency step (Hz) between successive transverse orders."""
    return geometry.fsr * one_way_gouy(geometry) / math.pi


def resolve_q(geometry, m=0, n=0):
    """Longitudinal index of the (m, n) mode resonant closest to the
    nominal wavelength."""
    gouy = one_way_gouy(geometry)
    return int(round(
        2.0 * geometry.length / geometry.wavelength
        - (m + n + 1) * gouy / math.pi))


def empty_frequency(geometry, idx):
    """Angular resonance frequency of an ideal-cavity mode.

    kL = q*pi + (m + n + 1) * (one-way Gouy phase)
    """
    gouy = one_way_gouy(geometry)
    return (math.pi * SPEED_OF_LIGHT / geometry.length) * (
        idx.q + (idx.m + idx.n + 1) * gouy / math.pi)


def wavenumber(geometry, idx):
    return empty_frequency(geometry, idx) / SPEED_OF_LIGHT


def enumerate_basis(geometry, reference=(0, 0), max_order=DEFAULT_MAX_ORDER,
                    window=DEFAULT_WINDOW_HZ):
    """Modes with m + n <= max_order whose empty-cavity frequency lies
    within +/- window (Hz) of the reference (m, n) mode.

    :return: reference ModeIndex and the ordered basis list
    """
    m_ref, n_ref = reference
    q_ref = resolve_q(geometry, m_ref, n_ref)
    ref = ModeIndex(q_ref, m_ref, n_ref)
    omega_ref = empty_frequency(geometry, ref)
    half_width = 2.0 * math.pi * window
    fsr = 2.0 * math.pi * geometry.fsr
    span = int(math.ceil(half_width / fsr)) + max_order + 1

    basis = []
    for order in range(max_order + 1):
        for dq in range(-span, span + 1):
            probe = ModeIndex(q_ref + dq, order, 0)
            if abs(empty_frequency(geometry, probe) - omega_ref) > half_width:
                continue
            for m in range(order, -1, -1):
                basis.append(ModeIndex(q_ref + dq, m, order - m))
    basis.sort(key=lambda idx: (empty_frequency(geometry, idx), -idx.m))
    logger.debug("basis around %s: %d modes", ref, len(basis))
    return ref, basis


def hermite_profile(order, coord, spot):
    """Unit-normalized 1-D Hermite-Gauss profile u(coord; spot)."""
    xi = np.sqrt(2.0) * coord / spot
    norm = (2.0 / math.pi) ** 0.25 / np.sqrt(
        2.0 ** order * math.factorial(order) * spot)
    return norm * special.eval_hermite(order, xi) * np.exp(-xi ** 2 / 2.0)


def axial_phase(geometry, beam, idx, x, r2):
    """Phase of the standing wave sin(.) at axial position x and squared
    transverse radius r2.

    The constant is fixed by a node on the left mirror, which for a
    resonant mode reduces to q*pi/2.
    """
    k = wavenumber(geometry, idx)
    return (k * x + 0.5 * k * r2 * beam.inverse_radius(x)
            - (idx.order + 1) * beam.gouy_phase(x)
            + 0.5 * math.pi * (idx.q % 4))


def axial_phase_slope(geometry, beam, idx, x, r2):
    k = wavenumber(geometry, idx)
    zr = beam.rayleigh_range
    return (k + 0.5 * k * r2 * beam.inverse_radius_slope(x)
            - (idx.order + 1) * zr / (np.asarray(x) ** 2 + zr ** 2))


def mode_field(geometry, idx, point, beam=None):
    """Real standing-wave field of mode ``idx`` at ``point = (x, y, z)``.

    Normalized so that its square integrates to one over the cavity.
    """
    beam = beam or beam_params(geometry)
    x, y, z = (np.asarray(c, dtype=float) for c in point)
    spot = beam.spot_size(x)
    r2 = y ** 2 + z ** 2
    transverse = (hermite_profile(idx.m, y, spot)
                  * hermite_profile(idx.n, z, spot))
    return (math.sqrt(2.0 / geometry.length) * transverse
            * np.sin(axial_phase(geometry, beam, idx, x, r2)))


def standing_wave_point(geometry, idx, near, antinode=False, beam=None):
    """On-axis node (or antinode) of mode ``idx`` closest to ``near``."""
    beam = beam or beam_params(geometry)
    offset = 0.5 * math.pi if antinode else 0.0
    x = float(near)
    for _ in range(3):
        phase = float(axial_phase(geometry, beam, idx, x, 0.0)) - offset
        target = math.pi * round(phase / math.pi)
        x += (target - phase) / float(
            axial_phase_slope(geometry, beam, idx, x, 0.0))
    return x
