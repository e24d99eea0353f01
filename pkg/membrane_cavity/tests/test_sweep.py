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

import dataclasses
import math
import time

import numpy
import pytest

from .. import sweep
from ..exceptions import InvalidValue
from ..server import serve


def rotation(angle):
    return numpy.array([[math.cos(angle), -math.sin(angle)],
                        [math.sin(angle), math.cos(angle)]])


class TestTracking:
    @pytest.mark.parametrize("order", [[0, 1, 2, 3], [2, 0, 3, 1],
                                       [3, 2, 1, 0]])
    def test_permutation(self, order):
        current = numpy.eye(4)[:, order]
        labels = sweep.track_branches(numpy.eye(4), current)
        numpy.testing.assert_array_equal(labels, order)

    def test_small_rotation(self):
        labels = sweep.track_branches(numpy.eye(2), rotation(0.2))
        numpy.testing.assert_array_equal(labels, [0, 1])
        assert sweep.ambiguous_labels(numpy.eye(2), rotation(0.2)) == []

    def test_sign_blind(self):
        current = -numpy.eye(3)[:, [1, 0, 2]]
        labels = sweep.track_branches(numpy.eye(3), current)
        numpy.testing.assert_array_equal(labels, [1, 0, 2])

    def test_slow_rotation_through_swap(self):
        """A quarter turn in 100 steps, with the eigensolver's column
        order flipping half way, keeps every branch on its own vector."""
        labelled = numpy.eye(2)
        for step in range(1, 101):
            expected = rotation(0.5 * math.pi * step / 100)
            current = expected[:, ::-1] if step >= 50 else expected
            labels = sweep.track_branches(labelled, current)
            labelled = numpy.empty_like(current)
            labelled[:, labels] = current
            numpy.testing.assert_allclose(labelled, expected, atol=1.e-12)

    def test_ambiguous(self):
        assert sweep.ambiguous_labels(
            numpy.eye(2), rotation(0.25 * math.pi)) == [0, 1]


class TestGrid:
    @pytest.mark.parametrize("grid", [[1.0], [0.0, 1.0, 1.0], [0.0, 2.0, 1.0],
                                      [[0.0, 1.0], [2.0, 3.0]]])
    def test_invalid(self, grid):
        with pytest.raises(InvalidValue):
            sweep.check_grid(grid)

    def test_descending(self):
        grid = sweep.check_grid([3.0, 2.0, 1.0])
        numpy.testing.assert_array_equal(grid, [3.0, 2.0, 1.0])

    def test_unknown_axis(self, geometry, membrane, triplet_basis):
        _, basis = triplet_basis
        with pytest.raises(InvalidValue):
            sweep.sweep(geometry, membrane, "thickness", [0.0, 1.0], basis)


class TestSweep:
    def test_zero_thickness_is_flat(self, geometry, membrane, triplet_basis):
        ref, basis = triplet_basis
        empty = dataclasses.replace(membrane, thickness=0.0)
        spectrum = sweep.sweep(geometry, empty, "axial_position",
                               numpy.linspace(0.0, 5.e-7, 5), basis, ref)
        for point in range(5):
            numpy.testing.assert_allclose(
                spectrum.eigenvalues[point],
                numpy.sort(spectrum.matrices[point].empty_detunings))
        for label in spectrum.branch_ids:
            values, _ = spectrum.branch(label)
            assert numpy.ptp(values) == 0.0

    def test_thread_count_does_not_change_output(self, geometry, membrane,
                                                 triplet_basis):
        ref, basis = triplet_basis
        tilted = dataclasses.replace(membrane, tilt=0.45e-3)
        grid = numpy.linspace(0.0, 5.32e-7, 17)
        single = sweep.sweep(geometry, tilted, "axial_position", grid, basis,
                             ref, threads=1)
        pooled = sweep.sweep(geometry, tilted, "axial_position", grid, basis,
                             ref, threads=4)
        numpy.testing.assert_array_equal(single.eigenvalues,
                                         pooled.eigenvalues)
        numpy.testing.assert_array_equal(single.eigenvectors,
                                         pooled.eigenvectors)
        numpy.testing.assert_array_equal(single.labels, pooled.labels)

    def test_tilt_axis_sweep(self, geometry, membrane, triplet_basis):
        ref, basis = triplet_basis
        tilted = dataclasses.replace(membrane, tilt=0.45e-3, position=5.e-5)
        spectrum = sweep.sweep(geometry, tilted, "tilt_axis_angle",
                               numpy.linspace(0.0, math.pi, 9), basis, ref)
        assert spectrum.axis == "tilt_axis_angle"
        assert spectrum.mode_labels() == ["TEM00@0", "TEM20@-1", "TEM11@-1",
                                          "TEM02@-1"]
        for point in range(9):
            numpy.testing.assert_array_equal(
                numpy.sort(spectrum.labels[point]), numpy.arange(4))

    def test_branches_are_continuous(self, geometry, membrane,
                                     triplet_basis):
        ref, basis = triplet_basis
        tilted = dataclasses.replace(membrane, tilt=0.45e-3)
        grid = numpy.linspace(0.0, 5.32e-7, 81)
        spectrum = sweep.sweep(geometry, tilted, "axial_position", grid,
                               basis, ref)
        for label in spectrum.branch_ids:
            _, vectors = spectrum.branch(label)
            steps = numpy.sum(vectors[1:] * vectors[:-1], axis=1)
            assert numpy.all(steps > 0.0)


class TestScenario:
    def test_replace(self, geometry, membrane, triplet_basis):
        ref, basis = triplet_basis
        scenario = sweep.Scenario(geometry, membrane, tuple(basis), ref)
        moved = scenario.replace(position=1.e-4, tilt=1.e-3)
        assert moved.membrane.position == 1.e-4
        assert moved.membrane.tilt == 1.e-3
        assert scenario.membrane.position == 0.0
        assert moved.matrix().basis == tuple(basis)

    def test_pairs(self, geometry, membrane, triplet_basis):
        ref, basis = triplet_basis
        scenario = sweep.Scenario(
            geometry, dataclasses.replace(membrane, tilt=0.45e-3),
            tuple(basis), ref)
        spectrum = scenario.positions(numpy.linspace(0.0, 5.32e-7, 21))
        lower, upper = sweep.pair_branches(spectrum, ref, basis[3])
        assert numpy.all(lower <= upper)
        singlet = sweep.branch_by_mode(spectrum, ref)
        assert numpy.all((singlet == lower) | (singlet == upper))

    def test_columns_by_weight(self):
        vectors = numpy.eye(3)[:, [2, 0, 1]]
        numpy.testing.assert_array_equal(
            sweep.columns_by_weight(vectors, [0, 1], 2), [1, 2])
        numpy.testing.assert_array_equal(
            sweep.columns_by_weight(vectors, [2]), [0])


class TestServe:
    def test_order(self):
        def job(value):
            def run():
                time.sleep(0.001 * (5 - value))
                return value
            return run

        assert serve([job(v) for v in range(5)], threads=3) == list(range(5))

    def test_empty(self):
        assert serve([], threads=2) == []

    def test_single_thread(self):
        assert serve([lambda: 1, lambda: 2], threads=1) == [1, 2]
