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

"""Exact planar model of a single slab between two perfect mirrors.

Used as the independent reference for the singlet detuning band.
"""

import logging
import math

from collections import namedtuple

import numpy as np

from scipy import optimize

from . import cavity
from .constants import SPEED_OF_LIGHT
from .exceptions import InvalidValue, RootBracketingError

logger = logging.getLogger(__name__)

SlabResponse = namedtuple("SlabResponse", ["reflectivity", "transmissivity"])

ShapeComparison = namedtuple(
    "ShapeComparison",
    ["shape_error", "amplitude_error", "amplitude", "reference_amplitude"])

ROOT_XTOL = 1.0e-3
EXTREMUM_SAMPLES = 64


def characteristic_matrix(thickness, index, wavelength):
    """2x2 characteristic matrix of a homogeneous layer at normal
    incidence, acting on (E, H)."""
    index = complex(index)
    delta = 2.0 * math.pi * index * thickness / wavelength
    return np.array([
        [np.cos(delta), -1j * np.sin(delta) / index],
        [-1j * index * np.sin(delta), np.cos(delta)],
    ])


def slab_response(thickness, index, wavelength):
    """Amplitude reflection and transmission of a free-standing slab.

    :param thickness: slab thickness, m
    :param index: complex refractive index
    :param wavelength: vacuum wavelength, m
    """
    if thickness < 0.0 or complex(index).real < 1.0:
        raise InvalidValue(
            "slab needs t >= 0 and Re(n) >= 1, got t={0}, n={1}".format(
                thickness, index))
    (m11, m12), (m21, m22) = characteristic_matrix(
        thickness, index, wavelength)
    denominator = m11 + m12 + m21 + m22
    return SlabResponse(
        reflectivity=complex((m11 + m12 - m21 - m22) / denominator),
        transmissivity=complex(2.0 / denominator))


def _empty_resonance(wavelength, length):
    q = int(round(2.0 * length / wavelength))
    return q, q * math.pi * SPEED_OF_LIGHT / length


def _round_trip_condition(omega, x, thickness, index, length):
    k = omega / SPEED_OF_LIGHT
    delta = index * k * thickness
    left = k * (x - 0.5 * thickness + 0.5 * length)
    right = k * (0.5 * length - x - 0.5 * thickness)
    return (math.cos(delta) * math.sin(left + right)
            + math.sin(delta) * (math.cos(left) * math.cos(right) / index
                                 - index * math.sin(left) * math.sin(right)))


def _detuning(x, thickness, index, wavelength, length):
    if thickness == 0.0:
        return 0.0
    if not abs(x) < 0.5 * length - thickness:
        raise InvalidValue(
            "membrane at {0} m does not fit inside the cavity".format(x))
    _, omega0 = _empty_resonance(wavelength, length)
    half_fsr = 0.5 * math.pi * SPEED_OF_LIGHT / length

    def condition(detuning):
        return _round_trip_condition(
            omega0 + detuning, x, thickness, index, length)

    low, high = -half_fsr, half_fsr
    if condition(low) * condition(high) > 0.0:
        raise RootBracketingError(
            "no resonance within half a free spectral range of the empty "
            "cavity for x={0}, t={1}, n={2}".format(x, thickness, index))
    return optimize.bisect(condition, low, high, xtol=ROOT_XTOL)


def resonance_detuning(x, thickness, index, wavelength, length):
    """Shift (rad/s) of the 1-D resonance nearest ``wavelength`` caused by
    a slab centred at ``x`` (m, from the cavity centre).

    Solves the two-sub-cavity round-trip condition by bisection inside
    +/- FSR/2 of the empty resonance. Uses Re(n).
    """
    index = complex(index).real
    values = [_detuning(float(v), thickness, index, wavelength, length)
              for v in np.atleast_1d(x)]
    if np.ndim(x) == 0:
        return values[0]
    return np.array(values)


def first_order_detuning(x, thickness, index, wavelength, length):
    """Analytic first-order shift of the same 1-D resonance."""
    q, omega0 = _empty_resonance(wavelength, length)
    k = q * math.pi / length
    x = np.asarray(x, dtype=float)
    intensity = 0.5 * thickness - (
        np.cos(2.0 * k * (x + 0.5 * length)) * math.sin(k * thickness)
        / (2.0 * k))
    return -omega0 * (complex(index).real ** 2 - 1.0) * intensity / length


def aligned_position(x, geometry, idx=None):
    """1-D slab position seeing the same standing-wave phase as a
    membrane at ``x`` in the 3-D mode ``idx`` (TEM00 by default).

    Removes the constant Gouy offset between the two models.
    """
    if idx is None:
        idx = cavity.ModeIndex(cavity.resolve_q(geometry), 0, 0)
    q1, _ = _empty_resonance(geometry.wavelength, geometry.length)
    k1 = q1 * math.pi / geometry.length
    k3 = cavity.wavenumber(geometry, idx)
    return (k3 * np.asarray(x, dtype=float)
            + 0.5 * math.pi * (idx.q - q1)) / k1


def second_difference(func, x, step):
    return (func(x + step) - 2.0 * func(x) + func(x - step)) / step ** 2


def richardson_curvature(func, x, step):
    """Second derivative from two central differences, Richardson
    extrapolated."""
    coarse = second_difference(func, x, step)
    fine = second_difference(func, x, 0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def parabola_curvature(func, x, half_width, points=11):
    offsets = np.linspace(-half_width, half_width, points)
    values = np.array([func(x + u) for u in offsets])
    return 2.0 * np.polyfit(offsets, values, 2)[0]


def band_extrema(func, period, samples=EXTREMUM_SAMPLES):
    """Locations of the maximum and minimum of a periodic band."""
    grid = np.arange(samples) * period / samples
    values = np.array([func(x) for x in grid])
    step = period / samples
    extrema = []
    for sign, pick in ((-1.0, np.argmax(values)), (1.0, np.argmin(values))):
        centre = grid[pick]
        result = optimize.minimize_scalar(
            lambda u: sign * func(u), bounds=(centre - step, centre + step),
            method="bounded", options={"xatol": period * 1.0e-9})
        extrema.append(result.x)
    return extrema


def curvature_1d(thickness, index, wavelength, length):
    """Largest |omega''| (rad/s/m^2) of the 1-D band, taken at whichever
    detuning extremum curves the most. Signed."""
    if thickness == 0.0:
        return 0.0

    def band(x):
        return resonance_detuning(x, thickness, index, wavelength, length)

    period = 0.5 * wavelength
    best = 0.0
    for centre in band_extrema(band, period):
        value = richardson_curvature(band, centre, period / 50.0)
        logger.debug("1-D curvature %.6g rad/s/m^2 at x=%.6g m",
                     value, centre)
        if abs(value) > abs(best):
            best = value
    return best


def modulation_shape_error(values, reference):
    """Compare two sampled bands after removing their means.

    :return: ShapeComparison with the max difference of the
             amplitude-normalized shapes and |A/A_ref - 1|
    """
    values = np.asarray(values, dtype=float)
    reference = np.asarray(reference, dtype=float)
    centred = values - values.mean()
    ref_centred = reference - reference.mean()
    amplitude = 0.5 * np.ptp(centred)
    ref_amplitude = 0.5 * np.ptp(ref_centred)
    if ref_amplitude == 0.0:
        raise InvalidValue("reference band is flat")
    return ShapeComparison(
        shape_error=float(np.max(np.abs(
            centred / amplitude - ref_centred / ref_amplitude))),
        amplitude_error=float(abs(amplitude / ref_amplitude - 1.0)),
        amplitude=float(amplitude),
        reference_amplitude=float(ref_amplitude))
