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

"""Phonon-number measurement feasibility arithmetic."""

import dataclasses
import logging
import math

from .constants import BOLTZMANN, PLANCK_REDUCED, SPEED_OF_LIGHT
from .exceptions import InvalidValue

logger = logging.getLogger(__name__)

LASER_COOLED_OCCUPANCY = 0.2


@dataclasses.dataclass(frozen=True)
class MechanicalParams:
    """Membrane resonator, its drive and the optical readout.

    omega_m in rad/s, mass in kg, temperature in K, drive_amplitude in m,
    coupling_pp in rad/s/m^2, coupling_4 in rad/s/m^4.
    """

    omega_m: float
    mass: float
    quality: float
    temperature: float
    drive_amplitude: float = 0.0
    coupling_pp: float = 0.0
    coupling_4: float = 0.0
    finesse: float = 50000.0
    input_power: float = 0.0
    wavelength: float = 1064.0e-9
    length: float = 6.313e-2
    cooled_occupancy: float = LASER_COOLED_OCCUPANCY

    def check(self):
        for name in ("omega_m", "mass", "temperature", "finesse",
                     "wavelength", "length"):
            if not getattr(self, name) > 0.0:
                raise InvalidValue("{0} must be positive, got {1}".format(
                    name, getattr(self, name)))
        if not self.quality >= 1.0:
            raise InvalidValue(
                "quality factor must be >= 1, got {0}".format(self.quality))
        for name in ("drive_amplitude", "input_power", "cooled_occupancy"):
            if getattr(self, name) < 0.0:
                raise InvalidValue("{0} must be >= 0, got {1}".format(
                    name, getattr(self, name)))


@dataclasses.dataclass(frozen=True)
class QndEstimate:
    x_zpf: float
    n_thermal: float
    n_thermal_cooled: float
    n_bar: float
    sigma0: float
    shot_noise: float
    shot_noise_cooled: float
    quartic_coefficient: float
    photons: float
    linewidth: float
    decoherence: float
    phonon_shift: float
    quartic_shift: float

    def rows(self):
        """(field, value) pairs in report order."""
        return [(field.name, getattr(self, field.name))
                for field in dataclasses.fields(self)]


def zero_point(mass, omega_m):
    """Zero-point amplitude sqrt(hbar / 2 m omega_m), m."""
    return math.sqrt(PLANCK_REDUCED / (2.0 * mass * omega_m))


def thermal_occupancy(temperature, omega_m):
    return BOLTZMANN * temperature / (PLANCK_REDUCED * omega_m)


def coherent_occupancy(amplitude, x_zpf):
    """Mean phonon number of a coherent state with peak displacement
    ``amplitude``, using amplitude = 2 x_zpf sqrt(n)."""
    if amplitude < 0.0:
        raise InvalidValue(
            "drive amplitude must be >= 0, got {0}".format(amplitude))
    return (amplitude / (2.0 * x_zpf)) ** 2


def shot_noise_ratio(n_bar, n_thermal, sigma0):
    """S = 8 n_bar n_T Sigma0."""
    if min(n_bar, n_thermal, sigma0) < 0.0:
        raise InvalidValue("occupancies and Sigma0 must be non-negative")
    return 8.0 * n_bar * n_thermal * sigma0


def required_sigma0(shot_noise, n_bar, n_thermal):
    """Sigma0 that makes S = 8 n_bar n_T Sigma0 equal ``shot_noise``."""
    if not n_bar * n_thermal > 0.0:
        raise InvalidValue("n_bar and n_T must be positive")
    return shot_noise / (8.0 * n_bar * n_thermal)


def quartic_coefficient(omega4, x_zpf):
    """omega4 x_zpf^4, the prefactor of hbar n_photon n_phonon^2."""
    return omega4 * x_zpf ** 4


def intracavity_photons(power, wavelength, decay_rate):
    """Photon number 2P / (hbar omega kappa) of a resonantly driven
    two-mirror cavity with equal mirrors."""
    omega = 2.0 * math.pi * SPEED_OF_LIGHT / wavelength
    return 2.0 * power / (PLANCK_REDUCED * omega * decay_rate)


def cavity_decay_rate(finesse, length):
    """Energy decay rate 2 pi FSR / F, rad/s."""
    return math.pi * SPEED_OF_LIGHT / (length * finesse)


def estimate(params, sigma0):
    """All feasibility figures for one configuration.

    :param sigma0: Sigma0 as a number, or a callable taking the params
    :return: QndEstimate; S uses the bath occupancy, S_cooled the
             laser-cooled one
    """
    params.check()
    if callable(sigma0):
        sigma0 = sigma0(params)
    sigma0 = float(sigma0)

    x_zpf = zero_point(params.mass, params.omega_m)
    n_thermal = thermal_occupancy(params.temperature, params.omega_m)
    n_bar = coherent_occupancy(params.drive_amplitude, x_zpf)
    photons = intracavity_photons(
        params.input_power, params.wavelength,
        cavity_decay_rate(params.finesse, params.length))
    linewidth = params.omega_m / params.quality
    quartic = quartic_coefficient(params.coupling_4, x_zpf)
    logger.debug("x_zpf=%.6g m n_T=%.6g n_bar=%.6g", x_zpf, n_thermal, n_bar)

    return QndEstimate(
        x_zpf=x_zpf,
        n_thermal=n_thermal,
        n_thermal_cooled=params.cooled_occupancy,
        n_bar=n_bar,
        sigma0=sigma0,
        shot_noise=shot_noise_ratio(n_bar, n_thermal, sigma0),
        shot_noise_cooled=shot_noise_ratio(
            n_bar, params.cooled_occupancy, sigma0),
        quartic_coefficient=quartic,
        photons=photons,
        linewidth=linewidth,
        decoherence=linewidth * n_thermal,
        phonon_shift=params.coupling_pp * x_zpf ** 2,
        quartic_shift=quartic * photons * n_bar ** 2)
