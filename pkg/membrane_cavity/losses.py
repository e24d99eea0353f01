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

"""Cavity relaxation rates of the perturbed eigenmodes."""

import dataclasses
import logging
import math

from collections import namedtuple

import numpy as np

from . import cavity
from .exceptions import InsufficientSpan, InvalidValue, SweepBoundaryError
from .perturbation import build_matrix

logger = logging.getLogger(__name__)

AbsorptionBound = namedtuple(
    "AbsorptionBound", ["imag_index", "amplitude", "phase"])


class BaseLosses(object):
    """Energy decay rate (rad/s) of each basis mode in the empty cavity."""

    def __init__(self, rates, default=None):
        self.rates = dict(rates)
        self.default = default
        for idx, rate in self.rates.items():
            if not rate > 0.0:
                raise InvalidValue(
                    "loss rate of {0} must be positive, got {1}".format(
                        idx, rate))
        if default is not None and not default > 0.0:
            raise InvalidValue(
                "default loss rate must be positive, got {0}".format(default))

    def __repr__(self):
        return "<{0}: {1} modes>".format(
            self.__class__.__name__, len(self.rates))

    def rate(self, idx):
        try:
            return self.rates[idx]
        except KeyError:
            if self.default is None:
                raise InvalidValue("no loss rate for mode {0}".format(idx))
            return self.default

    def vector(self, basis):
        return np.array([self.rate(idx) for idx in basis])


def interpolate_losses(first, second, weight):
    """Convex mix (1 - weight) * first + weight * second."""
    keys = set(first.rates) | set(second.rates)
    rates = {idx: (1.0 - weight) * first.rate(idx) + weight * second.rate(idx)
             for idx in keys}
    default = None
    if first.default is not None and second.default is not None:
        default = (1.0 - weight) * first.default + weight * second.default
    return BaseLosses(rates, default)


@dataclasses.dataclass(eq=False)
class LossProfile:
    """kappa (rad/s) per sweep point and branch label, and its gradient
    along the sweep (rad/s per sweep unit)."""

    positions: np.ndarray
    kappa: np.ndarray
    kappa_prime: np.ndarray

    def branch(self, label):
        return self.kappa[:, label]


def eigenmode_kappa(eigenvector, base, absorption=0.0, basis=None):
    """Incoherent composition sum |c_k|^2 kappa_k + absorption.

    :param base: BaseLosses, or an array of per-basis rates
    """
    eigenvector = np.asarray(eigenvector, dtype=float)
    if isinstance(base, BaseLosses):
        rates = base.vector(basis)
    else:
        rates = np.asarray(base, dtype=float)
    weights = eigenvector ** 2
    return float(np.dot(weights, rates) / np.sum(weights) + absorption)


def absorption_matrix(matrix, index):
    """Absorptive decay-rate matrix 2 omega Re(n) Im(n) <psi_i|psi_j>_slab."""
    index = complex(index)
    omega = 0.5 * (matrix.omega[:, None] + matrix.omega[None, :])
    return 2.0 * omega * index.real * index.imag * matrix.overlaps


def absorption_kappa(geometry, membrane, eigenvector, basis, matrix=None,
                     quadrature=None):
    """Decay rate (rad/s) from membrane absorption for one eigenmode."""
    if complex(membrane.index).imag == 0.0:
        return 0.0
    if matrix is None:
        matrix = build_matrix(geometry, membrane, basis,
                              quadrature=quadrature)
    eigenvector = np.asarray(eigenvector, dtype=float)
    return float(eigenvector @ absorption_matrix(matrix, membrane.index)
                 @ eigenvector)


def loss_profile(sweep, membrane, base):
    """kappa for every branch of a sweep.

    :param membrane: membrane the sweep was built from, for Im(n)
    """
    rates = base.vector(sweep.basis)
    size = len(sweep.basis)
    kappa = np.empty((sweep.positions.size, size))
    for point, matrix in enumerate(sweep.matrices):
        absorb = None
        if complex(membrane.index).imag != 0.0:
            absorb = absorption_matrix(matrix, membrane.index)
        for col in range(size):
            vector = sweep.eigenvectors[point][:, col]
            extra = 0.0 if absorb is None else float(vector @ absorb @ vector)
            kappa[point, sweep.labels[point][col]] = eigenmode_kappa(
                vector, rates, extra)
    return LossProfile(
        positions=sweep.positions, kappa=kappa,
        kappa_prime=np.gradient(kappa, sweep.positions, axis=0))


def kappa_gradient(profile, at, label=0):
    """Central difference of kappa along the sweep at the grid point
    closest to ``at``."""
    point = int(np.argmin(np.abs(profile.positions - at)))
    if point == 0 or point == profile.positions.size - 1:
        raise SweepBoundaryError(
            "kappa gradient needs a sample on either side of {0}".format(at))
    kappa = profile.kappa[:, label]
    return float((kappa[point + 1] - kappa[point - 1])
                 / (profile.positions[point + 1]
                    - profile.positions[point - 1]))


def absorption_sensitivity(geometry, membrane, mode=None, samples=16,
                           quadrature=None):
    """Amplitude of the half-wavelength harmonic of kappa_abs(x), per unit
    Im(n), for a single basis mode."""
    if mode is None:
        mode = cavity.ModeIndex(cavity.resolve_q(geometry), 0, 0)
    unit = dataclasses.replace(
        membrane, index=complex(complex(membrane.index).real, 1.0e-6))
    period = math.pi / cavity.wavenumber(geometry, mode)
    values = []
    for offset in np.arange(samples) * period / samples:
        point = dataclasses.replace(unit, position=membrane.position + offset)
        values.append(absorption_kappa(
            geometry, point, [1.0], (mode,), quadrature=quadrature))
    harmonic = np.fft.rfft(values)[1]
    return 2.0 * abs(harmonic) / samples / 1.0e-6


def fourier_absorption_bound(samples, wavelength, sensitivity):
    """Im(n) implied by the half-wavelength Fourier component of kappa(x).

    :param samples: sequence of (x, kappa) pairs, x spanning two or more
                    periods of wavelength/2
    :param sensitivity: kappa_abs modulation amplitude per unit Im(n)
    :return: AbsorptionBound(imag_index, amplitude, phase)
    """
    samples = np.asarray(samples, dtype=float)
    x, kappa = samples[:, 0], samples[:, 1]
    period = 0.5 * wavelength
    if np.ptp(x) < 2.0 * period * (1.0 - 1.0e-9):
        raise InsufficientSpan(
            "kappa(x) spans {0:.4g} m, needs at least two periods "
            "of {1:.4g} m".format(np.ptp(x), period))
    argument = 2.0 * math.pi * x / period
    design = np.column_stack(
        [np.ones_like(x), np.cos(argument), np.sin(argument)])
    (_, a, b), *_ = np.linalg.lstsq(design, kappa, rcond=None)
    amplitude = math.hypot(a, b)
    return AbsorptionBound(
        imag_index=amplitude / sensitivity, amplitude=amplitude,
        phase=math.atan2(-b, a))
