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

"""Optomechanical coupling coefficients extracted from swept spectra.

Avoided crossings are fitted to the hyperbola
``omega(x) = offset + v (x - c) +/- sqrt((omega' (x - c))^2 + omega_s^2)``,
stationary points to local polynomials.
"""

import dataclasses
import logging
import math

from collections import namedtuple

import numpy as np

from numpy.polynomial import Polynomial
from scipy import optimize, stats

from . import cavity
from .exceptions import (
    DegenerateData,
    FitNotConverged,
    InvalidValue,
    NonStationaryCenter,
    RootBracketingError,
    UndefinedCurvature,
    UnresolvedGap,
)
from .sweep import branch_by_mode, pair_branches

logger = logging.getLogger(__name__)

LINEAR = "linear"
QUADRATIC = "quadratic"
QUARTIC = "quartic"
MIXED = "mixed"

RESIDUAL_LIMIT = 1.0e-3
GRADIENT_DROP = 1.0e-9
HYPERBOLA_MIN_SAMPLES = 7
QUARTIC_MIN_SAMPLES = 9
WINDOW_WIDTHS = 3.0
SHRINK_ROUNDS = 6
LSQ_TOL = 1.0e-14

CrossingSamples = namedtuple("CrossingSamples", ["x", "lower", "upper"])

GapScan = namedtuple(
    "GapScan",
    ["positions", "gaps", "fits", "slope", "intercept", "r_squared"])

QuarticScan = namedtuple(
    "QuarticScan", ["tilt", "report", "low_report", "high_report"])


@dataclasses.dataclass(frozen=True)
class Thresholds:
    """Relative sizes below which a Taylor term counts as absent.

    A linear term is absent when |omega'| < linear * |omega''| * x_scale;
    a quadratic term when |omega''| < quartic * |omega4| * x_scale^2.
    """

    linear: float = 1.0e-3
    quartic: float = 1.0e-3
    x_scale: float = 1.0e-9


@dataclasses.dataclass(frozen=True)
class CrossingFit:
    center: float
    slope: float
    half_gap: float
    offset: float = 0.0
    mean_slope: float = 0.0
    residual: float = 0.0
    branch: int = 1
    sign: float = 1.0
    gradient_ratio: float = 0.0

    @property
    def valid(self):
        return self.residual < RESIDUAL_LIMIT

    @property
    def signed_gap(self):
        return self.sign * self.half_gap

    def evaluate(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return (self.offset + self.mean_slope * d + self.branch * np.sqrt(
            (self.slope * d) ** 2 + self.half_gap ** 2))


@dataclasses.dataclass(frozen=True)
class CouplingReport:
    center: float
    omega_prime: float
    omega_pp: float
    omega4: float
    classification: str = MIXED


def _samples(samples, minimum, what):
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise InvalidValue("{0} samples must be (x, omega) pairs".format(what))
    if samples.shape[0] < minimum:
        raise DegenerateData(
            "{0} needs at least {1} samples, got {2}".format(
                what, minimum, samples.shape[0]))
    samples = samples[np.argsort(samples[:, 0], kind="stable")]
    x, y = samples[:, 0], samples[:, 1]
    if np.any(np.diff(x) == 0.0):
        raise DegenerateData("{0} samples repeat an x value".format(what))
    return x, y


def _hyperbola_terms(params, u, branch):
    c, a, s, o = params[:4]
    v = params[4] if params.size > 4 else 0.0
    d = u - c
    root = np.sqrt((a * d) ** 2 + s ** 2)
    inverse = np.divide(1.0, root, out=np.zeros_like(root), where=root > 0.0)
    return c, a, s, o, v, d, root, inverse


def fit_hyperbola(samples, initial_center=None, branch=1, mean_slope=False,
                  offset=None):
    """Least-squares hyperbola through one branch of an avoided crossing.

    Works in coordinates scaled to the sample box, with an analytic
    Jacobian and Levenberg-Marquardt.

    :param samples: sequence of (x, omega) pairs
    :param initial_center: x guess used when the asymptotes do not meet
                           inside the samples
    :param branch: +1 for the upper branch, -1 for the lower one
    :param mean_slope: also fit a common slope of both asymptotes
    :param offset: hold the offset at this value instead of fitting it
    :return: CrossingFit
    """
    x, y = _samples(samples, HYPERBOLA_MIN_SAMPLES, "hyperbola fit")
    span = np.ptp(y)
    if span == 0.0:
        raise DegenerateData("hyperbola samples are flat")
    line = np.polyval(np.polyfit(x, y, 1), x)
    if np.max(np.abs(y - line)) <= 1.0e-12 * span:
        raise DegenerateData("hyperbola samples are collinear")
    branch = 1 if branch >= 0 else -1

    x_mid, x_half = 0.5 * (x[0] + x[-1]), 0.5 * np.ptp(x)
    y_mid, y_half = 0.5 * (y.min() + y.max()), 0.5 * span
    u = (x - x_mid) / x_half
    w = (y - y_mid) / y_half

    tail = max(2, u.size // 3)
    left = np.polyfit(u[:tail], w[:tail], 1)
    right = np.polyfit(u[-tail:], w[-tail:], 1)
    centre = (0.0 if initial_center is None
              else (initial_center - x_mid) / x_half)
    if left[0] != right[0]:
        meet = (right[1] - left[1]) / (left[0] - right[0])
        if -1.0 <= meet <= 1.0:
            centre = meet
    o0 = 0.5 * (np.polyval(left, centre) + np.polyval(right, centre))
    if offset is not None:
        o0 = (offset - y_mid) / y_half
    nearest = w[np.argmin(np.abs(u - centre))]
    s0 = max(abs(nearest - o0), 1.0e-3)
    # near the vertex the branch is s + a^2 d^2 / 2s
    bend = np.polyfit(u, w, 2)[0]
    a0 = max(0.5 * abs(right[0] - left[0]),
             math.sqrt(2.0 * abs(bend) * s0), 1.0e-3)
    start = [centre, a0, s0, o0]
    if mean_slope:
        start.append(0.5 * (left[0] + right[0]))
    start = np.array(start)
    free = np.ones(start.size, dtype=bool)
    free[3] = offset is None

    def residuals(params):
        _, _, _, o, v, d, root, _ = _hyperbola_terms(params, u, branch)
        return o + v * d + branch * root - w

    def jacobian(params):
        _, a, s, _, v, d, _, inverse = _hyperbola_terms(params, u, branch)
        columns = [
            -v - branch * a ** 2 * d * inverse,
            branch * a * d ** 2 * inverse,
            branch * s * inverse,
            np.ones_like(u),
        ]
        if params.size > 4:
            columns.append(d)
        return np.column_stack(columns)

    def expand(params):
        values = start.copy()
        values[free] = params
        return values

    def free_residuals(params):
        return residuals(expand(params))

    def free_jacobian(params):
        return jacobian(expand(params))[:, free]

    initial = start[free]
    initial_gradient = np.linalg.norm(
        free_jacobian(initial).T @ free_residuals(initial))
    result = optimize.least_squares(
        free_residuals, initial, jac=free_jacobian, method="lm",
        xtol=LSQ_TOL, ftol=LSQ_TOL, gtol=LSQ_TOL,
        max_nfev=200 * (initial.size + 1))
    if not result.success:
        raise FitNotConverged(
            "hyperbola fit did not converge: {0}".format(result.message))
    ratio = (0.0 if initial_gradient == 0.0
             else float(np.linalg.norm(result.grad) / initial_gradient))
    if ratio > GRADIENT_DROP and result.cost > 1.0e-24 * u.size:
        logger.warning("hyperbola fit stopped with gradient ratio %.3e",
                       ratio)

    params = expand(result.x)
    c, a, s, o = params[:4]
    v = params[4] if mean_slope else 0.0
    rms = math.sqrt(2.0 * result.cost / u.size)
    return CrossingFit(
        center=float(x_mid + c * x_half),
        slope=float(abs(a) * y_half / x_half),
        half_gap=float(abs(s) * y_half),
        offset=float(y_mid + o * y_half),
        mean_slope=float(v * y_half / x_half),
        residual=rms * y_half / span,
        branch=branch,
        gradient_ratio=ratio)


def curvature_at_crossing(fit):
    """omega'^2 / omega_s, the curvature of either branch at the gap."""
    if not fit.half_gap > 0.0:
        raise UndefinedCurvature(
            "crossing at x={0:.6g} m has no gap, its curvature is "
            "unbounded".format(fit.center))
    return fit.slope ** 2 / fit.half_gap


def fit_crossing(x, lower, upper, initial_center=None):
    """Fit the half-splitting of two branches.

    The half-splitting is symmetric about the branch mean, so its
    hyperbola is fitted with zero offset. The returned fit reconstructs
    the upper branch: its offset and mean slope come from the branch
    mean at the centre.
    """
    x = np.asarray(x, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    fit = fit_hyperbola(np.column_stack([x, 0.5 * (upper - lower)]),
                        initial_center, offset=0.0)
    mean = np.polyfit(x - fit.center, 0.5 * (upper + lower), 1)
    return dataclasses.replace(
        fit, offset=float(mean[1] + fit.offset),
        mean_slope=float(mean[0]))


def nearest_pair(frequencies):
    """Adjacent pair of sorted branches with the smallest splitting.

    :param frequencies: array (points, branches)
    :return: (lower, upper) columns
    """
    frequencies = np.sort(np.asarray(frequencies, dtype=float), axis=1)
    if frequencies.shape[1] < 2:
        raise DegenerateData("a crossing needs at least two branches")
    gaps = np.min(np.diff(frequencies, axis=1), axis=0)
    pick = int(np.argmin(gaps))
    return frequencies[:, pick], frequencies[:, pick + 1]


def _pair_samples(scenario, first, second, grid):
    spectrum = scenario.positions(grid)
    lower, upper = pair_branches(spectrum, first, second)
    return CrossingSamples(grid, lower, upper)


def locate_crossing(scenario, first, second, window, points=61, refine=41,
                    rounds=3, widths=WINDOW_WIDTHS):
    """Sample the two branches built from ``first`` and ``second`` around
    their closest approach inside ``window``.

    The grid is narrowed around the smallest splitting until it spans
    about ``widths`` hyperbola widths (omega_s / omega') either side.

    :return: CrossingSamples
    """
    low, high = window
    if not high > low:
        raise InvalidValue("crossing window must be increasing")
    samples = _pair_samples(scenario, first, second,
                            np.linspace(low, high, points))
    for attempt in range(rounds + 1):
        grid = samples.x
        half = 0.5 * (samples.upper - samples.lower)
        pick = int(np.argmin(half))
        step = grid[1] - grid[0]
        slope = float(np.max(np.abs(np.gradient(half, grid))))
        reach = widths * half[pick] / slope if slope > 0.0 else np.inf
        if reach >= 0.5 * (grid[-1] - grid[0]):
            return samples
        if reach >= 2.0 * step or attempt == rounds:
            reach = max(reach, 2.0 * step)
            break
        logger.debug("narrowing crossing search around x=%.9g m",
                     grid[pick])
        samples = _pair_samples(scenario, first, second, np.linspace(
            grid[pick] - 2.0 * step, grid[pick] + 2.0 * step, refine))
    return _pair_samples(scenario, first, second, np.linspace(
        grid[pick] - reach, grid[pick] + reach, refine))


def coupling_sign(scenario, first, second, at):
    """Sign of the off-diagonal shift between two modes at ``at``."""
    matrix = scenario.replace(position=float(at)).matrix()
    i, j = matrix.basis.index(first), matrix.basis.index(second)
    return 1.0 if matrix.elements[i, j] >= 0.0 else -1.0


def analyse_crossing(scenario, first, second, window, shrink=SHRINK_ROUNDS,
                     **kwargs):
    """Locate and fit one avoided crossing of the model spectrum.

    The bands meeting at a model crossing are curved, so a fit over
    too wide a stretch misses the residual limit; the sampled stretch is
    halved around the fitted centre up to ``shrink`` times until it
    does not.
    """
    samples = locate_crossing(scenario, first, second, window, **kwargs)
    fit = fit_crossing(*samples)
    for _ in range(shrink):
        if fit.valid:
            break
        reach = 0.25 * np.ptp(samples.x)
        logger.debug("crossing %s/%s residual %.3e, refitting over "
                     "+/-%.3g m", first, second, fit.residual, reach)
        samples = _pair_samples(scenario, first, second, np.linspace(
            fit.center - reach, fit.center + reach, samples.x.size))
        fit = fit_crossing(*samples)
    fit = dataclasses.replace(
        fit, sign=coupling_sign(scenario, first, second, fit.center))
    if not fit.valid:
        logger.warning("crossing %s/%s near x=%.9g m fits with residual "
                       "%.3e", first, second, fit.center, fit.residual)
    return fit


def snap_position(geometry, position, mode=None):
    """Nearest multiple of the half wavelength of ``mode``."""
    if mode is None:
        mode = cavity.ModeIndex(cavity.resolve_q(geometry), 0, 0)
    period = math.pi / cavity.wavenumber(geometry, mode)
    return period * round(position / period)


def crossing_fitter(scenario, first, second, window, **kwargs):
    """Callable mapping a coarse membrane position to the CrossingFit of
    the crossing found at ``window`` (relative offsets) around it."""

    def fit_at(position):
        base = snap_position(scenario.geometry, position)
        return analyse_crossing(
            scenario, first, second,
            (base + window[0], base + window[1]), **kwargs)

    return fit_at


def gap_vs_displacement(fit_at, coarse_positions, signed=True):
    """Gap of one crossing against coarse membrane displacement.

    :param fit_at: callable, coarse position -> CrossingFit
    :param signed: regress the signed gap, which stays linear through a
                   closing gap
    :return: GapScan with the least-squares slope and its R^2
    """
    positions = np.asarray(coarse_positions, dtype=float)
    if positions.size < 2:
        raise InvalidValue("gap scan needs at least two coarse positions")
    fits = []
    for position in positions:
        fit = fit_at(position)
        if not fit.valid:
            raise UnresolvedGap(
                "crossing at coarse position {0:.6g} m is not resolved "
                "(residual {1:.3e})".format(position, fit.residual),
                fit.residual)
        fits.append(fit)
    gaps = np.array([fit.signed_gap if signed else fit.half_gap
                     for fit in fits])
    regression = stats.linregress(positions, gaps)
    return GapScan(
        positions=positions, gaps=gaps, fits=tuple(fits),
        slope=float(regression.slope), intercept=float(regression.intercept),
        r_squared=float(regression.rvalue ** 2))


def classify_coupling(report, thresholds=None):
    """Lowest-order Taylor term of omega(x) that matters at the report's
    point: linear, quadratic, quartic or mixed."""
    thresholds = thresholds or Thresholds()
    scale = thresholds.x_scale
    w1 = abs(report.omega_prime)
    w2 = abs(report.omega_pp)
    w4 = abs(report.omega4)

    no_quadratic = w2 < thresholds.quartic * w4 * scale ** 2
    if (w4 > 0.0 and no_quadratic
            and w1 < thresholds.quartic * w4 * scale ** 3):
        return QUARTIC
    if not no_quadratic and w1 < thresholds.linear * w2 * scale:
        return QUADRATIC
    if w1 * scale > 0.5 * w2 * scale ** 2 + w4 * scale ** 4 / 24.0:
        return LINEAR
    return MIXED


def _classified(report, thresholds):
    return dataclasses.replace(
        report, classification=classify_coupling(report, thresholds))


def hyperbola_report(fit, thresholds=None):
    """Coefficients of the half-splitting at the gap centre.

    The Taylor series of the hyperbola converges only within
    omega_s / omega' of the centre, so the comparison scale is capped
    there.
    """
    thresholds = thresholds or Thresholds()
    curvature = curvature_at_crossing(fit)
    radius = fit.half_gap / abs(fit.slope)
    if radius < thresholds.x_scale:
        thresholds = dataclasses.replace(thresholds, x_scale=radius)
    return _classified(CouplingReport(
        center=fit.center, omega_prime=0.0, omega_pp=curvature,
        omega4=-3.0 * curvature ** 2 / fit.half_gap), thresholds)


def _stationary_points(poly, low, high):
    roots = np.atleast_1d(poly.deriv().roots())
    if not roots.size:
        return roots.real
    real = roots[np.abs(roots.imag) <= 1.0e-6 * (high - low)].real
    return real[(real >= low) & (real <= high)]


def local_coefficients(samples, at=None, recenter=True, degree=4,
                       thresholds=None):
    """omega', omega'' and omega4 from a local polynomial fit.

    :param at: evaluation point, the sample midpoint by default
    :param recenter: move to the stationary point of the fit closest to
                     ``at`` when one lies inside the samples
    """
    x, y = _samples(samples, degree + 1, "local fit")
    poly = Polynomial.fit(x, y, degree)
    if at is None:
        at = 0.5 * (x[0] + x[-1])
    if recenter:
        stationary = _stationary_points(poly, x[0], x[-1])
        if stationary.size:
            at = float(stationary[np.argmin(np.abs(stationary - at))])
    omega4 = float(poly.deriv(4)(at)) if degree >= 4 else 0.0
    return _classified(CouplingReport(
        center=float(at), omega_prime=float(poly.deriv(1)(at)),
        omega_pp=float(poly.deriv(2)(at)), omega4=omega4), thresholds)


def quartic_fit(samples, thresholds=None, center=None):
    """Even quartic a0 + a2 d^2 + a4 d^4 about the stationary point.

    omega'' = 2 a2 and omega4 = 24 a4. The centre is the stationary
    point of a full quartic fit nearest to ``center`` (the sample
    midpoint by default), or ``center`` itself when already stationary.
    """
    thresholds = thresholds or Thresholds()
    x, y = _samples(samples, QUARTIC_MIN_SAMPLES, "quartic fit")
    full = Polynomial.fit(x, y, 4)
    half = 0.5 * (x[-1] - x[0])
    guess = 0.5 * (x[0] + x[-1]) if center is None else float(center)
    swing = np.max(np.abs(y - y.mean()))
    if abs(full.deriv()(guess)) * half <= 1.0e-12 * swing:
        centre = guess
    else:
        stationary = _stationary_points(full, x[0], x[-1])
        if not stationary.size:
            raise NonStationaryCenter(
                "no stationary point between {0:.6g} and {1:.6g} m".format(
                    x[0], x[-1]))
        centre = float(stationary[np.argmin(np.abs(stationary - guess))])

    d = (x - centre) / half
    design = np.column_stack([np.ones_like(d), d ** 2, d ** 4])
    (_, b2, b4), *_ = np.linalg.lstsq(design, y, rcond=None)
    report = CouplingReport(
        center=centre, omega_prime=float(full.deriv()(centre)),
        omega_pp=float(2.0 * b2 / half ** 2),
        omega4=float(24.0 * b4 / half ** 4))
    scale = thresholds.x_scale
    limit = thresholds.linear * max(abs(report.omega_pp) * scale,
                                    abs(report.omega4) * scale ** 3)
    if abs(report.omega_prime) > limit and abs(report.omega_prime) > 0.0:
        raise NonStationaryCenter(
            "omega' = {0:.6g} rad/s/m at x={1:.9g} m exceeds {2:.3g}".format(
                report.omega_prime, centre, limit))
    return _classified(report, thresholds)


def branch_quartic(scenario, mode, center, half_width, points=21,
                   thresholds=None):
    """quartic_fit of the branch dominated by ``mode`` around ``center``."""
    grid = center + np.linspace(-half_width, half_width, points)
    values = branch_by_mode(scenario.positions(grid), mode)
    return quartic_fit(np.column_stack([grid, values]), thresholds,
                       center=center)


def quadratic_zero_tilt(scenario, mode, tilts, center, half_width,
                        points=21, xtol=1.0e-12, thresholds=None):
    """Tilt magnitude at which the branch of ``mode`` loses its curvature.

    Bisects omega''(tilt) from quartic fits of the branch sampled over
    ``center +/- half_width``.

    :return: QuarticScan(tilt, report, low_report, high_report)
    """
    low, high = tilts

    def report(tilt):
        return branch_quartic(scenario.replace(tilt=float(tilt)), mode,
                              center, half_width, points, thresholds)

    low_report, high_report = report(low), report(high)
    if low_report.omega_pp * high_report.omega_pp > 0.0:
        raise RootBracketingError(
            "omega'' of {0} keeps its sign between tilts {1} and {2} "
            "rad".format(mode, low, high))

    def curvature(tilt):
        value = report(tilt).omega_pp
        logger.debug("tilt %.12g rad: omega'' = %.6g rad/s/m^2", tilt, value)
        return value

    zero = optimize.bisect(curvature, low, high, xtol=xtol)
    at_zero = report(zero)
    if at_zero.classification != QUARTIC:
        logger.warning("branch %s at tilt %.9g rad classifies as %s",
                       mode, zero, at_zero.classification)
    return QuarticScan(tilt=zero, report=at_zero, low_report=low_report,
                       high_report=high_report)
