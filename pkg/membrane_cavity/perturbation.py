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

"""First-order dielectric perturbation of the empty-cavity spectrum by a
thin, tilted slab."""

import logging
import math

from dataclasses import dataclass, field

import numpy as np

from numpy.polynomial.hermite import hermgauss
from scipy.linalg import eigh
from scipy import special

from . import cavity
from .exceptions import (
    InvalidValue,
    MembraneTruncation,
    QuadratureNotConverged,
)

logger = logging.getLogger(__name__)

# Membrane half-side minus its lateral offset must exceed this many spot
# sizes at the membrane.
TRUNCATION_SPOTS = 4.0


@dataclass(frozen=True)
class MembraneConfig:
    thickness: float
    index: complex
    position: float = 0.0
    tilt: float = 0.0
    tilt_axis: float = 0.0
    side_length: float = 1.0e-3
    offset: tuple = (0.0, 0.0)

    def check(self, beam=None):
        if self.thickness < 0.0:
            raise InvalidValue(
                "membrane thickness must be >= 0, got {0}".format(
                    self.thickness))
        index = complex(self.index)
        if index.real < 1.0:
            raise InvalidValue(
                "Re(n) must be >= 1, got {0}".format(index.real))
        if not 0.0 <= index.imag < 1.0e-2 * index.real:
            raise InvalidValue(
                "Im(n) must satisfy 0 <= Im(n) << Re(n), got {0}".format(
                    index.imag))
        if self.tilt < 0.0:
            raise InvalidValue(
                "tilt magnitude must be >= 0, got {0}".format(self.tilt))
        if beam is not None:
            spot = float(beam.spot_size(self.position))
            clearance = 0.5 * self.side_length - max(
                abs(self.offset[0]), abs(self.offset[1]))
            if clearance < TRUNCATION_SPOTS * spot:
                raise MembraneTruncation(
                    "membrane edge is {0:.3g} m from the axis but the spot "
                    "size there is {1:.3g} m".format(clearance, spot))

    def axial_shift(self, y, z):
        """Local axial displacement of the slab mid-plane due to tilt."""
        slope = math.tan(self.tilt)
        return slope * ((y - self.offset[0]) * math.cos(self.tilt_axis)
                        + (z - self.offset[1]) * math.sin(self.tilt_axis))


@dataclass(frozen=True)
class QuadratureSettings:
    nodes: int = 64
    rtol: float = 1.0e-6
    max_nodes: int = 512


@dataclass(frozen=True, eq=False)
class PerturbationMatrix:
    """Frequency-shift matrix V over an ordered basis.

    ``elements`` holds V (plus any asymmetry offsets on its diagonal),
    ``empty_detunings`` the ideal-cavity detunings of the basis modes
    from the reference, ``overlaps`` the bare integrals of psi_i psi_j over
    the slab and ``omega`` the absolute basis frequencies, all rad/s.
    """

    basis: tuple
    elements: np.ndarray
    empty_detunings: np.ndarray = None
    overlaps: np.ndarray = None
    omega: np.ndarray = None
    reference: cavity.ModeIndex = None

    def total(self):
        if self.empty_detunings is None:
            return self.elements
        return np.diag(self.empty_detunings) + self.elements

    def labels(self):
        q_ref = self.reference.q if self.reference else self.basis[0].q
        return [idx.label(q_ref) for idx in self.basis]


def _overlap_on_grid(geometry, beam, membrane, basis, nodes):
    xi, weights = hermgauss(nodes)
    spot = float(beam.spot_size(membrane.position))
    scale = spot / math.sqrt(2.0)
    y = scale * xi[:, None]
    z = scale * xi[None, :]
    xi2 = xi[:, None] ** 2 + xi[None, :] ** 2

    x_local = membrane.position + membrane.axial_shift(y, z)
    spot_local = beam.spot_size(x_local)
    r2 = y ** 2 + z ** 2
    # product of two Gaussians divided by the Gauss-Hermite weight
    envelope = np.exp(-xi2 * ((spot / spot_local) ** 2 - 1.0))
    quad = (scale ** 2) * weights[:, None] * weights[None, :] * envelope

    poly = []
    phase = []
    slope = []
    for idx in basis:
        norm = (2.0 / math.pi) ** 0.5 / np.sqrt(
            2.0 ** idx.order * math.factorial(idx.m) * math.factorial(idx.n)
            * spot_local ** 2)
        poly.append(norm
                    * special.eval_hermite(idx.m, math.sqrt(2.0) * y / spot_local)
                    * special.eval_hermite(idx.n, math.sqrt(2.0) * z / spot_local))
        phase.append(cavity.axial_phase(geometry, beam, idx, x_local, r2))
        slope.append(cavity.axial_phase_slope(geometry, beam, idx, x_local, r2))
    poly = np.array(poly)
    phase = np.array(phase)
    slope = np.array(slope)

    half = 0.5 * membrane.thickness
    size = len(basis)
    overlaps = np.zeros((size, size))
    for i in range(size):
        diff = phase[i] - phase[i:]
        summ = phase[i] + phase[i:]
        # integral of sin(a_i + b_i u) sin(a_j + b_j u) for |u| < t/2
        axial = half * (
            np.cos(diff) * np.sinc((slope[i] - slope[i:]) * half / math.pi)
            - np.cos(summ) * np.sinc((slope[i] + slope[i:]) * half / math.pi))
        row = np.sum(quad * poly[i] * poly[i:] * axial, axis=(1, 2))
        overlaps[i, i:] = row
        overlaps[i:, i] = row
    return (2.0 / geometry.length) * overlaps


def overlap_matrix(geometry, membrane, basis, quadrature=None, beam=None):
    """Integrals of psi_i psi_j over the slab volume.

    Gauss-Hermite in the transverse plane, doubled until the Frobenius
    norm changes by less than ``quadrature.rtol``; closed form along the
    axis.
    """
    quadrature = quadrature or QuadratureSettings()
    beam = beam or cavity.beam_params(geometry)
    basis = tuple(basis)
    if membrane.thickness == 0.0:
        return np.zeros((len(basis), len(basis)))

    nodes = quadrature.nodes
    current = _overlap_on_grid(geometry, beam, membrane, basis, nodes)
    change = np.inf
    while nodes * 2 <= quadrature.max_nodes:
        nodes *= 2
        refined = _overlap_on_grid(geometry, beam, membrane, basis, nodes)
        scale = np.linalg.norm(refined)
        change = 0.0 if scale == 0.0 else (
            np.linalg.norm(refined - current) / scale)
        current = refined
        if change < quadrature.rtol:
            logger.debug("overlaps converged with %d nodes (%.2e)",
                         nodes, change)
            return current
    raise QuadratureNotConverged(
        "overlap quadrature did not reach rtol={0} with {1} nodes "
        "(last change {2:.3e})".format(quadrature.rtol, nodes, change),
        nodes, change)


def shift_prefactor(omega_i, omega_j, index):
    """-(omega/2)(Re(n)^2 - 1), with omega the pair mean."""
    return -0.25 * (omega_i + omega_j) * (complex(index).real ** 2 - 1.0)


def overlap_element(geometry, membrane, i, j, quadrature=None):
    """Frequency shift V_ij (rad/s) coupling modes i and j."""
    basis = (i,) if i == j else (i, j)
    overlaps = overlap_matrix(geometry, membrane, basis, quadrature)
    return shift_prefactor(
        cavity.empty_frequency(geometry, i),
        cavity.empty_frequency(geometry, j),
        membrane.index) * overlaps[0, -1]


def build_matrix(geometry, membrane, basis, reference=None, asymmetry=None,
                 quadrature=None):
    """Assemble V over ``basis`` for the given membrane.

    :param asymmetry: optional mapping ModeIndex -> diagonal offset in Hz,
                      a stand-in for unmodelled mirror asymmetry.
    :return: PerturbationMatrix
    """
    basis = tuple(basis)
    if not basis:
        raise InvalidValue("perturbation basis is empty")
    beam = cavity.beam_params(geometry)
    membrane.check(beam)
    reference = reference or basis[0]

    omega = np.array([cavity.empty_frequency(geometry, idx) for idx in basis])
    overlaps = overlap_matrix(geometry, membrane, basis, quadrature, beam)
    elements = shift_prefactor(
        omega[:, None], omega[None, :], membrane.index) * overlaps
    elements = 0.5 * (elements + elements.T)
    if asymmetry:
        offsets = np.array([asymmetry.get(idx, 0.0) for idx in basis])
        elements = elements + np.diag(2.0 * math.pi * offsets)
    detunings = omega - cavity.empty_frequency(geometry, reference)
    return PerturbationMatrix(
        basis=basis, elements=elements, empty_detunings=detunings,
        overlaps=overlaps, omega=omega, reference=reference)


def eigensolve(matrix):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Each eigenvector's largest-magnitude component is made positive so
    that repeated solves give identical output.
    """
    if isinstance(matrix, PerturbationMatrix):
        matrix = matrix.total()
    matrix = np.asarray(matrix, dtype=float)
    values, vectors = eigh(0.5 * (matrix + matrix.T))
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return values, vectors * signs
