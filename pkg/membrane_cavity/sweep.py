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

"""Parameter sweeps of the perturbed spectrum with continuous branches."""

import dataclasses
import logging

from functools import partial

import numpy as np

from .exceptions import InvalidValue
from .perturbation import build_matrix, eigensolve
from .server import serve

logger = logging.getLogger(__name__)

AMBIGUITY_TOLERANCE = 1.0e-3

AXES = {
    "axial_position": "position",
    "tilt_magnitude": "tilt",
    "tilt_axis_angle": "tilt_axis",
}


@dataclasses.dataclass(eq=False)
class SpectrumSweep:
    """Eigen-decompositions along a swept membrane parameter.

    ``eigenvalues[p]`` is ascending, ``eigenvectors[p][:, c]`` is the
    eigenvector of column ``c`` and ``labels[p][c]`` its branch id.
    """

    axis: str
    positions: np.ndarray
    basis: tuple
    reference: object
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: np.ndarray
    matrices: tuple = ()
    ambiguities: list = dataclasses.field(default_factory=list)

    @property
    def branch_ids(self):
        return list(range(len(self.basis)))

    def columns(self, label):
        return np.argmax(self.labels == label, axis=1)

    def branch(self, label):
        """Frequencies (rad/s) and eigenvectors of one tracked branch."""
        cols = self.columns(label)
        points = np.arange(len(self.positions))
        return (self.eigenvalues[points, cols],
                self.eigenvectors[points, :, cols])

    def dominant_mode(self, label):
        """Basis mode carrying the most weight of a branch, per point."""
        _, vectors = self.branch(label)
        return [self.basis[k] for k in np.argmax(vectors ** 2, axis=1)]

    def mode_labels(self):
        q_ref = self.reference.q
        return [idx.label(q_ref) for idx in self.basis]


def _overlaps(previous, current):
    return np.abs(previous.T @ current)


def ambiguous_labels(previous, current, tolerance=AMBIGUITY_TOLERANCE):
    """Labels whose best and runner-up overlaps are within ``tolerance``."""
    overlaps = _overlaps(previous, current)
    if overlaps.shape[1] < 2:
        return []
    ranked = -np.sort(-overlaps, axis=1)
    return [int(label) for label in
            np.nonzero(ranked[:, 0] - ranked[:, 1] < tolerance)[0]]


def track_branches(previous, current):
    """Assign branch labels to the current eigenvectors.

    :param previous: eigenvectors of the previous step, column ``l`` being
                     the branch labelled ``l``
    :param current: eigenvectors of this step, ascending eigenvalue order
    :return: integer array, label of each current column
    """
    overlaps = _overlaps(previous, current)
    size = overlaps.shape[0]
    order = np.argsort(-overlaps, axis=None, kind="stable")
    labels = np.full(size, -1, dtype=int)
    taken = np.zeros(size, dtype=bool)
    for flat in order:
        label, col = divmod(int(flat), size)
        if taken[label] or labels[col] >= 0:
            continue
        labels[col] = label
        taken[label] = True
    return labels


def _solve_point(geometry, membrane, attribute, value, basis, reference,
                 asymmetry, quadrature):
    point = dataclasses.replace(membrane, **{attribute: float(value)})
    matrix = build_matrix(geometry, point, basis, reference=reference,
                          asymmetry=asymmetry, quadrature=quadrature)
    values, vectors = eigensolve(matrix)
    return matrix, values, vectors


def check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InvalidValue("a sweep needs at least 2 grid points")
    steps = np.diff(grid)
    if not (np.all(steps > 0.0) or np.all(steps < 0.0)):
        raise InvalidValue("sweep grid must be strictly monotone")
    return grid


def sweep(geometry, membrane, axis, grid, basis, reference=None,
          asymmetry=None, quadrature=None, threads=None):
    """Diagonalize the perturbed spectrum at every grid value of ``axis``.

    Grid points are solved concurrently; branch labelling is a sequential
    pass over the ordered results.

    :return: SpectrumSweep
    """
    if axis not in AXES:
        raise InvalidValue(
            "unknown sweep axis {0!r}, expected one of {1}".format(
                axis, ", ".join(sorted(AXES))))
    grid = check_grid(grid)
    basis = tuple(basis)
    reference = reference or basis[0]

    jobs = [partial(_solve_point, geometry, membrane, AXES[axis], value,
                    basis, reference, asymmetry, quadrature)
            for value in grid]
    results = serve(jobs, threads=threads)

    size = len(basis)
    eigenvalues = np.empty((grid.size, size))
    eigenvectors = np.empty((grid.size, size, size))
    labels = np.empty((grid.size, size), dtype=int)
    ambiguities = []
    tracked = None
    for point, (_, values, vectors) in enumerate(results):
        if tracked is None:
            current = np.arange(size)
        else:
            for label in ambiguous_labels(tracked, vectors):
                logger.warning(
                    "branch %d is ambiguous at %s = %.12g", label, axis,
                    grid[point])
                ambiguities.append((point, label))
            current = track_branches(tracked, vectors)
            # keep each branch's sign continuous
            signs = np.sign(np.sum(tracked[:, current] * vectors, axis=0))
            signs[signs == 0.0] = 1.0
            vectors = vectors * signs
        eigenvalues[point] = values
        eigenvectors[point] = vectors
        labels[point] = current
        tracked = np.empty_like(vectors)
        tracked[:, current] = vectors

    return SpectrumSweep(
        axis=axis, positions=grid, basis=basis, reference=reference,
        eigenvalues=eigenvalues, eigenvectors=eigenvectors, labels=labels,
        matrices=tuple(result[0] for result in results),
        ambiguities=ambiguities)


@dataclasses.dataclass(frozen=True)
class Scenario(object):
    """Everything needed to re-run sweeps with a modified membrane."""

    geometry: object
    membrane: object
    basis: tuple
    reference: object = None
    asymmetry: dict = None
    quadrature: object = None
    threads: int = None

    def replace(self, **membrane_changes):
        return dataclasses.replace(
            self, membrane=dataclasses.replace(
                self.membrane, **membrane_changes))

    def matrix(self):
        return build_matrix(
            self.geometry, self.membrane, self.basis,
            reference=self.reference, asymmetry=self.asymmetry,
            quadrature=self.quadrature)

    def sweep(self, axis, grid):
        return sweep(self.geometry, self.membrane, axis, grid, self.basis,
                     reference=self.reference, asymmetry=self.asymmetry,
                     quadrature=self.quadrature, threads=self.threads)

    def positions(self, grid):
        return self.sweep("axial_position", grid)


def columns_by_weight(vectors, rows, count=1):
    """Columns carrying the most weight on the given basis rows, in
    ascending eigenvalue order."""
    weight = np.sum(vectors[list(rows), :] ** 2, axis=0)
    return np.sort(np.argsort(-weight, kind="stable")[:count])


def branch_by_mode(spectrum, mode):
    """Frequencies of the eigenmode dominated by ``mode`` at every point."""
    row = spectrum.basis.index(mode)
    return np.array([
        spectrum.eigenvalues[p][columns_by_weight(
            spectrum.eigenvectors[p], [row])[0]]
        for p in range(spectrum.positions.size)])


def pair_branches(spectrum, first, second):
    """Lower and upper frequencies of the two eigenmodes built from
    ``first`` and ``second``."""
    rows = [spectrum.basis.index(first), spectrum.basis.index(second)]
    lower = np.empty(spectrum.positions.size)
    upper = np.empty(spectrum.positions.size)
    for p in range(spectrum.positions.size):
        low, high = columns_by_weight(spectrum.eigenvectors[p], rows, 2)
        lower[p] = spectrum.eigenvalues[p][low]
        upper[p] = spectrum.eigenvalues[p][high]
    return lower, upper
