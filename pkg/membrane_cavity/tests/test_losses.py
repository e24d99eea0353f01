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

import numpy
import pytest

from .. import cavity
from .. import losses
from ..exceptions import InsufficientSpan, InvalidValue, SweepBoundaryError
from ..perturbation import MembraneConfig, eigensolve
from ..sweep import SpectrumSweep

KAPPA_A = 2.0 * math.pi * 1.e5
KAPPA_B = 2.0 * math.pi * 4.e5


def two_mode_sweep(slope=1.0, coupling=0.1, points=201):
    """Adiabatic branches of [[a x, g], [g, -a x]] over -1 <= x <= 1."""
    grid = numpy.linspace(-1.0, 1.0, points)
    values, vectors = [], []
    for x in grid:
        value, vector = eigensolve(numpy.array(
            [[slope * x, coupling], [coupling, -slope * x]]))
        values.append(value)
        vectors.append(vector)
    return SpectrumSweep(
        axis="axial_position", positions=grid, basis=("A", "B"),
        reference="A", eigenvalues=numpy.array(values),
        eigenvectors=numpy.array(vectors),
        labels=numpy.tile([0, 1], (points, 1)),
        matrices=(None,) * points)


class TestBaseLosses:
    def test_rate(self):
        base = losses.BaseLosses({"A": 1.0}, default=3.0)
        assert base.rate("A") == 1.0
        assert base.rate("B") == 3.0
        numpy.testing.assert_array_equal(base.vector(["B", "A"]), [3.0, 1.0])

    @pytest.mark.parametrize("rates, default", [({"A": 0.0}, None),
                                                ({"A": 1.0}, -1.0)])
    def test_invalid(self, rates, default):
        with pytest.raises(InvalidValue):
            losses.BaseLosses(rates, default)

    def test_missing(self):
        with pytest.raises(InvalidValue):
            losses.BaseLosses({"A": 1.0}).rate("B")

    def test_interpolate(self):
        first = losses.BaseLosses({"A": 1.0}, default=2.0)
        second = losses.BaseLosses({"A": 5.0}, default=6.0)
        mixed = losses.interpolate_losses(first, second, 0.25)
        assert mixed.rate("A") == 2.0
        assert mixed.rate("C") == 3.0


class TestEigenmodeKappa:
    def test_pure_mode(self):
        assert losses.eigenmode_kappa([1.0, 0.0], [1.0, 3.0]) == 1.0

    def test_mixture(self):
        vector = numpy.array([1.0, 1.0]) / math.sqrt(2.0)
        numpy.testing.assert_allclose(
            losses.eigenmode_kappa(vector, [1.0, 3.0], absorption=0.5), 2.5)

    def test_base_losses(self):
        base = losses.BaseLosses({"A": 1.0, "B": 3.0})
        numpy.testing.assert_allclose(
            losses.eigenmode_kappa([0.0, -1.0], base, basis=["A", "B"]), 3.0)


class TestLossProfile:
    def test_swap_through_crossing(self):
        slope, coupling = 1.0, 0.1
        spectrum = two_mode_sweep(slope, coupling)
        base = losses.BaseLosses({"A": KAPPA_A, "B": KAPPA_B})
        membrane = MembraneConfig(thickness=39.e-9, index=2.0)
        profile = losses.loss_profile(spectrum, membrane, base)

        lower = profile.branch(0)
        numpy.testing.assert_allclose(lower[0], KAPPA_A, rtol=1.e-2)
        numpy.testing.assert_allclose(lower[-1], KAPPA_B, rtol=1.e-2)
        numpy.testing.assert_allclose(lower[100], 0.5 * (KAPPA_A + KAPPA_B),
                                      rtol=1.e-9)
        numpy.testing.assert_allclose(lower + profile.branch(1),
                                      KAPPA_A + KAPPA_B, rtol=1.e-12)

        expected = (KAPPA_B - KAPPA_A) * slope / (2.0 * coupling)
        numpy.testing.assert_allclose(profile.kappa_prime[100, 0], expected,
                                      rtol=2.e-2)
        numpy.testing.assert_allclose(
            losses.kappa_gradient(profile, 0.0, 0), expected, rtol=2.e-2)

    def test_swapped_losses_flip_gradient(self):
        spectrum = two_mode_sweep()
        membrane = MembraneConfig(thickness=39.e-9, index=2.0)
        forward = losses.loss_profile(
            spectrum, membrane, losses.BaseLosses({"A": KAPPA_A, "B": KAPPA_B}))
        backward = losses.loss_profile(
            spectrum, membrane, losses.BaseLosses({"A": KAPPA_B, "B": KAPPA_A}))
        numpy.testing.assert_allclose(
            losses.kappa_gradient(forward, 0.0),
            -losses.kappa_gradient(backward, 0.0), rtol=1.e-9)

    def test_interpolated_losses_cancel_gradient(self):
        """kappa' is linear in the base rates, so the mix that zeroes it
        follows from the gradients of the two end points."""
        spectrum = two_mode_sweep()
        membrane = MembraneConfig(thickness=39.e-9, index=2.0)
        first = losses.BaseLosses({"A": KAPPA_A, "B": KAPPA_B})
        second = losses.BaseLosses({"A": 3.0 * KAPPA_A,
                                    "B": 1.5 * KAPPA_A})
        start = losses.kappa_gradient(
            losses.loss_profile(spectrum, membrane, first), 0.0)
        end = losses.kappa_gradient(
            losses.loss_profile(spectrum, membrane, second), 0.0)
        weight = start / (start - end)
        numpy.testing.assert_allclose(weight, 2.0 / 3.0, rtol=1.e-9)

        mixed = losses.loss_profile(
            spectrum, membrane,
            losses.interpolate_losses(first, second, weight))
        numpy.testing.assert_allclose(
            losses.kappa_gradient(mixed, 0.0), 0.0, atol=1.e-6 * abs(start))
        numpy.testing.assert_allclose(mixed.kappa_prime, 0.0,
                                      atol=1.e-6 * abs(start))

    def test_linear_gradient(self):
        positions = numpy.linspace(0.0, 10.e-9, 11)
        slope = 2.0 * math.pi * 600.e3 / 1.e-9
        kappa = (1.e6 + slope * positions)[:, None]
        profile = losses.LossProfile(positions, kappa,
                                     numpy.gradient(kappa, positions, axis=0))
        numpy.testing.assert_allclose(
            losses.kappa_gradient(profile, 4.2e-9), slope, rtol=1.e-9)

    @pytest.mark.parametrize("at", [0.0, 10.e-9, -1.0])
    def test_boundary(self, at):
        positions = numpy.linspace(0.0, 10.e-9, 11)
        kappa = numpy.ones((11, 1))
        profile = losses.LossProfile(positions, kappa, numpy.zeros((11, 1)))
        with pytest.raises(SweepBoundaryError):
            losses.kappa_gradient(profile, at)


class TestAbsorption:
    def test_lossless_membrane(self, geometry, membrane, triplet_basis):
        ref, _ = triplet_basis
        assert losses.absorption_kappa(geometry, membrane, [1.0],
                                       (ref,)) == 0.0

    def test_absorption_scales_with_imaginary_index(self, geometry, membrane,
                                                    triplet_basis):
        ref, _ = triplet_basis
        weak = dataclasses.replace(membrane, index=complex(2.0, 1.e-6))
        strong = dataclasses.replace(membrane, index=complex(2.0, 2.e-6))
        first = losses.absorption_kappa(geometry, weak, [1.0], (ref,))
        second = losses.absorption_kappa(geometry, strong, [1.0], (ref,))
        assert first > 0.0
        numpy.testing.assert_allclose(second, 2.0 * first, rtol=1.e-12)

    def test_sensitivity(self, geometry, membrane):
        ref = cavity.ModeIndex(cavity.resolve_q(geometry), 0, 0)
        k = cavity.wavenumber(geometry, ref)
        omega = cavity.empty_frequency(geometry, ref)
        expected = (2.0 * omega * 2.0 * math.sin(k * membrane.thickness)
                    / (k * geometry.length))
        numpy.testing.assert_allclose(
            losses.absorption_sensitivity(geometry, membrane, ref), expected,
            rtol=1.e-2)

    def test_fourier_round_trip(self):
        period = 0.5 * 1064.e-9
        x = numpy.linspace(0.0, 2.0 * period, 65)
        sensitivity = 2.0 * math.pi * 1.e8
        phase = 2.0 * math.pi * x / period
        kappa = (2.0 * math.pi * 5.e4
                 + sensitivity * 1.5e-6 * numpy.cos(phase + 0.3)
                 + 0.2 * sensitivity * 1.5e-6 * numpy.cos(3.0 * phase))
        bound = losses.fourier_absorption_bound(
            numpy.column_stack([x, kappa]), 1064.e-9, sensitivity)
        numpy.testing.assert_allclose(bound.imag_index, 1.5e-6, rtol=5.e-2)

    def test_round_trip_through_model(self, geometry, membrane):
        """A lossy membrane swept over two periods, with third-harmonic
        clutter and a mirror floor, gives back its Im(n)."""
        ref = cavity.ModeIndex(cavity.resolve_q(geometry), 0, 0)
        lossy = dataclasses.replace(membrane, index=complex(2.0, 1.5e-6))
        sensitivity = losses.absorption_sensitivity(geometry, membrane, ref)
        period = 0.5 * geometry.wavelength
        x = numpy.linspace(0.0, 2.0 * period, 33)
        absorbed = numpy.array([
            losses.absorption_kappa(
                geometry, dataclasses.replace(lossy, position=u), [1.0],
                (ref,))
            for u in x])
        clutter = 0.3 * sensitivity * 1.5e-6 * numpy.cos(
            3.0 * 2.0 * math.pi * x / period)
        kappa = 2.0 * math.pi * 5.e4 + absorbed + clutter
        bound = losses.fourier_absorption_bound(
            numpy.column_stack([x, kappa]), geometry.wavelength, sensitivity)
        numpy.testing.assert_allclose(bound.imag_index, 1.5e-6, rtol=5.e-2)

    def test_insufficient_span(self):
        x = numpy.linspace(0.0, 0.5 * 1064.e-9, 33)
        with pytest.raises(InsufficientSpan):
            losses.fourier_absorption_bound(
                numpy.column_stack([x, numpy.cos(x)]), 1064.e-9, 1.0)
