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

"""Subcommand handlers. Each takes a Request and returns a Response."""

import csv
import dataclasses
import logging
import math

import numpy as np

from . import coupling
from . import feasibility
from . import losses
from . import transfer_matrix
from .config import crossing_kwargs, per_nm, quartic_center, to_hz
from .exceptions import (
    InsufficientSpan,
    InvalidValue,
    NumericalError,
    UndefinedCurvature,
    UnresolvedGap,
)
from .response import csv_text, files, report_text
from .router import Router
from .sweep import Scenario

logger = logging.getLogger(__name__)

UNRESOLVED = "unresolved"
UNDEFINED = "undefined"

COUPLING_COLUMNS = ["omega_prime_Hz_per_nm", "omega_pp_Hz_per_nm2",
                    "omega4_Hz_per_nm4", "classification"]

ORACLE_POINTS = 33


def _coefficients(report):
    return [per_nm(report.omega_prime), per_nm(report.omega_pp, 2),
            per_nm(report.omega4, 4), report.classification]


def _branch_columns(spectrum, point):
    """Column of every branch label at one sweep point."""
    return np.argsort(spectrum.labels[point], kind="stable")


def sweep_rows(spectrum):
    header = ["sweep_value", "branch_id", "frequency_Hz"]
    header += spectrum.mode_labels()
    rows = []
    for point, value in enumerate(spectrum.positions):
        for label, col in enumerate(_branch_columns(spectrum, point)):
            rows.append([float(value), label,
                         to_hz(spectrum.eigenvalues[point][col])]
                        + list(spectrum.eigenvectors[point][:, col]))
    return header, rows


def _ambiguity_warnings(spectrum):
    return ["branch {0} ambiguous at {1} = {2:.12g}".format(
        label, spectrum.axis, spectrum.positions[point])
        for point, label in spectrum.ambiguities]


def run_sweep(request):
    spec = request.config.sweep
    spectrum = request.scenario().sweep(spec.axis, spec.grid)
    return files(("sweep.csv", csv_text(*sweep_rows(spectrum))),
                 warnings=_ambiguity_warnings(spectrum))


def _absorption_rows(config, spectrum, profile):
    """Fourier estimate of Im(n) from the branch holding the reference
    mode, when the sweep spans two half-wavelength periods."""
    row = spectrum.basis.index(config.reference) \
        if config.reference in spectrum.basis else 0
    label = spectrum.labels[0][int(np.argmax(
        spectrum.eigenvectors[0][row, :] ** 2))]
    samples = np.column_stack([spectrum.positions, profile.branch(label)])
    try:
        sensitivity = losses.absorption_sensitivity(
            config.geometry, config.membrane, config.reference,
            quadrature=config.quadrature)
        bound = losses.fourier_absorption_bound(
            samples, config.geometry.wavelength, sensitivity)
    except InsufficientSpan as ex:
        logger.info("no absorption estimate: %s", ex)
        return []
    return [("absorption_branch_id", int(label)),
            ("kappa_modulation_Hz", to_hz(bound.amplitude)),
            ("kappa_modulation_phase_rad", bound.phase),
            ("sensitivity_Hz_per_unit_imag_index", to_hz(sensitivity)),
            ("imag_index_estimate", bound.imag_index)]


def run_kappa(request):
    config = request.config
    spec = config.sweep
    if spec.axis != "axial_position":
        raise InvalidValue("kappa needs an axial_position sweep")
    spectrum = request.scenario().sweep(spec.axis, spec.grid)
    profile = losses.loss_profile(spectrum, config.membrane, config.losses)

    rows = []
    for point, value in enumerate(spectrum.positions):
        for label in range(len(spectrum.basis)):
            rows.append([float(value), label,
                         to_hz(profile.kappa[point, label]),
                         per_nm(profile.kappa_prime[point, label])])
    header = ["sweep_value", "branch_id", "kappa_Hz", "kappa_prime_Hz_per_nm"]

    summary = []
    at = config.analysis.kappa_at
    if at is not None:
        for label in range(len(spectrum.basis)):
            summary.append(("kappa_prime_Hz_per_nm[{0}]".format(label),
                            per_nm(losses.kappa_gradient(profile, at, label))))
    summary += _absorption_rows(config, spectrum, profile)
    response = files(("kappa.csv", csv_text(header, rows)),
                     warnings=_ambiguity_warnings(spectrum))
    if summary:
        response.add("kappa_report.txt", report_text("kappa", summary))
    return response


def read_branches(path):
    """(x, frequencies) from a branch CSV, frequencies in rad/s.

    Accepts the sweep output layout (sweep_value, branch_id,
    frequency_Hz, ...) or a wide layout (x, one Hz column per branch).
    """
    with open(path, newline="", encoding="utf-8") as handle:
        table = list(csv.reader(handle))
    if len(table) < 2:
        raise InvalidValue("{0} holds no data rows".format(path))
    header, body = table[0], table[1:]
    try:
        if header[:3] == ["sweep_value", "branch_id", "frequency_Hz"]:
            values = np.array([[float(r[0]), float(r[1]), float(r[2])]
                               for r in body])
            x = np.unique(values[:, 0])
            count = int(values[:, 1].max()) + 1
            frequencies = np.full((x.size, count), np.nan)
            rows = np.searchsorted(x, values[:, 0])
            frequencies[rows, values[:, 1].astype(int)] = values[:, 2]
        else:
            values = np.array([[float(v) for v in r] for r in body])
            x, frequencies = values[:, 0], values[:, 1:]
    except (ValueError, IndexError):
        raise InvalidValue("{0} is not a numeric branch table".format(path))
    if np.isnan(frequencies).any():
        raise InvalidValue("{0} has missing branch values".format(path))
    order = np.argsort(x, kind="stable")
    return x[order], 2.0 * math.pi * frequencies[order]


def _crossing_row(crossing_id, fit, thresholds):
    if not fit.valid:
        logger.warning("crossing %s is unresolved (residual %.3e)",
                       crossing_id, fit.residual)
        return [crossing_id, fit.center, per_nm(fit.slope),
                to_hz(fit.half_gap), math.nan, math.nan, UNRESOLVED]
    try:
        report = coupling.hyperbola_report(fit, thresholds)
    except UndefinedCurvature:
        return [crossing_id, fit.center, per_nm(fit.slope), 0.0,
                math.inf, math.nan, UNDEFINED]
    return ([crossing_id, fit.center, per_nm(fit.slope),
             to_hz(fit.half_gap)] + _coefficients(report)[1:])


def _failed_row(crossing_id, ex):
    logger.warning("crossing %s failed: %s", crossing_id, ex)
    return [crossing_id, math.nan, math.nan, math.nan, math.nan, math.nan,
            UNRESOLVED]


def _fit_external(request, analysis):
    x, frequencies = read_branches(request.input_path)
    rows = []
    for spec in analysis.crossings:
        low, high = spec.window
        mask = (x >= low) & (x <= high)
        try:
            lower, upper = coupling.nearest_pair(frequencies[mask])
            fit = coupling.fit_crossing(x[mask], lower, upper)
            rows.append(_crossing_row(spec.crossing_id, fit,
                                      analysis.thresholds))
        except NumericalError as ex:
            rows.append(_failed_row(spec.crossing_id, ex))
    return rows


def _gap_scans(scenario, analysis):
    gap_rows, slope_rows, warnings = [], [], []
    for spec in analysis.crossings:
        fit_at = coupling.crossing_fitter(
            scenario, spec.first, spec.second, spec.window,
            **crossing_kwargs(analysis))
        try:
            scan = coupling.gap_vs_displacement(
                fit_at, analysis.coarse_positions)
        except UnresolvedGap as ex:
            warnings.append("gap scan {0}: {1}".format(spec.crossing_id, ex))
            logger.warning(warnings[-1])
            slope_rows.append([spec.crossing_id, math.nan, math.nan,
                               math.nan])
            continue
        for position, gap, fit in zip(scan.positions, scan.gaps, scan.fits):
            gap_rows.append([spec.crossing_id, float(position), to_hz(gap),
                             fit.center])
        slope_rows.append([spec.crossing_id, to_hz(scan.slope) * 1.0e-3,
                           to_hz(scan.intercept), scan.r_squared])
    return gap_rows, slope_rows, warnings


def branch_forms(scenario, position, half_width, points, thresholds):
    """Local coupling form of every branch around ``position``."""
    grid = position + np.linspace(-half_width, half_width, points)
    spectrum = scenario.positions(grid)
    rows = []
    for label in spectrum.branch_ids:
        values, _ = spectrum.branch(label)
        report = coupling.local_coefficients(
            np.column_stack([grid, values]), at=position,
            thresholds=thresholds)
        mode = spectrum.dominant_mode(label)[points // 2]
        rows.append([position, label, mode.label(spectrum.reference.q),
                     report.center] + _coefficients(report))
    return rows


def run_crossing(request):
    config = request.config
    analysis = config.analysis
    if not analysis.crossings:
        raise InvalidValue("[analysis] defines no crossing.<id> windows")
    header = ["crossing_id", "center_x_m", "omega_prime_Hz_per_nm",
              "omega_s_Hz", "omega_pp_Hz_per_nm2", "omega4_Hz_per_nm4",
              "classification"]
    if request.input_path:
        return files(("crossings.csv", csv_text(
            header, _fit_external(request, analysis))))

    scenario = request.scenario()
    rows = []
    for spec in analysis.crossings:
        try:
            fit = coupling.analyse_crossing(
                scenario, spec.first, spec.second, spec.window,
                **crossing_kwargs(analysis))
            rows.append(_crossing_row(spec.crossing_id, fit,
                                      analysis.thresholds))
        except NumericalError as ex:
            rows.append(_failed_row(spec.crossing_id, ex))
    response = files(("crossings.csv", csv_text(header, rows)))
    response.warnings.extend(
        "crossing {0} {1}".format(row[0], row[-1]) for row in rows
        if row[-1] == UNRESOLVED)

    if analysis.coarse_positions:
        gap_rows, slope_rows, warnings = _gap_scans(scenario, analysis)
        response.add("gaps.csv", csv_text(
            ["crossing_id", "coarse_x_m", "omega_s_Hz", "center_x_m"],
            gap_rows))
        response.add("gap_slopes.csv", csv_text(
            ["crossing_id", "slope_Hz_per_mm", "intercept_Hz", "r_squared"],
            slope_rows))
        response.warnings.extend(warnings)

    if analysis.classify_positions:
        form_rows = []
        for position in analysis.classify_positions:
            form_rows += branch_forms(
                scenario, position, analysis.classify_half_width,
                analysis.classify_points, analysis.thresholds)
        response.add("branch_forms.csv", csv_text(
            ["point_x_m", "branch_id", "dominant_mode", "center_x_m"]
            + COUPLING_COLUMNS, form_rows))
    return response


def run_quartic(request):
    config = request.config
    analysis = config.analysis
    scenario = request.scenario()
    mode = analysis.quartic_mode
    if mode not in scenario.basis:
        raise InvalidValue("[analysis] quartic_mode {0} is not in the "
                           "basis".format(config.label(mode)))
    center = quartic_center(config)
    rows = []
    for tilt in analysis.quartic_tilts:
        report = coupling.branch_quartic(
            scenario.replace(tilt=tilt), mode, center,
            analysis.quartic_half_width, analysis.quartic_points,
            analysis.thresholds)
        rows.append([tilt, report.center] + _coefficients(report))
    scan = coupling.quadratic_zero_tilt(
        scenario, mode, (analysis.tilt_low, analysis.tilt_high), center,
        analysis.quartic_half_width, analysis.quartic_points,
        xtol=analysis.tilt_xtol, thresholds=analysis.thresholds)
    rows.append([scan.tilt, scan.report.center]
                + _coefficients(scan.report))
    header = ["tilt_rad", "center_x_m"] + COUPLING_COLUMNS
    summary = [("mode", config.label(mode)),
               ("zero_curvature_tilt_rad", scan.tilt),
               ("omega4_Hz_per_nm4", per_nm(scan.report.omega4, 4)),
               ("classification", scan.report.classification)]
    return files(("quartic.csv", csv_text(header, rows)),
                 ("quartic_report.txt", report_text("quartic", summary)))


FEASIBILITY_UNITS = {
    "x_zpf": "m",
    "n_thermal": "",
    "n_thermal_cooled": "",
    "n_bar": "",
    "sigma0": "",
    "shot_noise": "",
    "shot_noise_cooled": "",
    "quartic_coefficient": "rad/s",
    "photons": "",
    "linewidth": "rad/s",
    "decoherence": "rad/s",
    "phonon_shift": "rad/s",
    "quartic_shift": "rad/s",
}


def run_feasibility(request):
    settings = request.config.feasibility
    result = feasibility.estimate(settings.params, settings.sigma0)
    rows = [[name, value, FEASIBILITY_UNITS[name]]
            for name, value in result.rows()]
    if settings.target_shot_noise is not None:
        for name, n_thermal in (("required_sigma0", result.n_thermal),
                                ("required_sigma0_cooled",
                                 result.n_thermal_cooled)):
            rows.append([name, feasibility.required_sigma0(
                settings.target_shot_noise, result.n_bar, n_thermal), ""])
    report = report_text("feasibility", [
        (name if not unit else "{0} [{1}]".format(name, unit), value)
        for name, value, unit in rows])
    return files(
        ("feasibility.csv", csv_text(["quantity", "value", "unit"], rows)),
        ("feasibility_report.txt", report))


def run_oracle1d(request):
    config = request.config
    geometry = config.geometry
    membrane = config.membrane
    if membrane.tilt != 0.0:
        logger.info("oracle1d compares untilted membranes, ignoring tilt")
        membrane = dataclasses.replace(membrane, tilt=0.0)
    if config.sweep is not None and config.sweep.axis == "axial_position":
        grid = config.sweep.grid
    else:
        grid = membrane.position + np.linspace(
            0.0, 0.5 * geometry.wavelength, ORACLE_POINTS)

    reference = config.reference
    single = Scenario(geometry=geometry, membrane=membrane,
                      basis=(reference,), reference=reference,
                      quadrature=config.quadrature, threads=request.threads)
    perturbative = single.positions(grid).eigenvalues[:, 0]
    aligned = transfer_matrix.aligned_position(grid, geometry, reference)
    args = (membrane.thickness, membrane.index, geometry.wavelength,
            geometry.length)
    exact = transfer_matrix.resonance_detuning(aligned, *args)
    first = transfer_matrix.first_order_detuning(aligned, *args)

    rows = [[float(x), to_hz(e), to_hz(f), to_hz(p)]
            for x, e, f, p in zip(grid, exact, first, perturbative)]
    header = ["x_m", "exact_Hz", "first_order_Hz", "perturbative_Hz"]
    summary = [("curvature_1d_Hz_per_nm2",
                per_nm(transfer_matrix.curvature_1d(*args), 2))]
    if np.ptp(exact) > 0.0:
        comparison = transfer_matrix.modulation_shape_error(
            perturbative, exact)
        summary += [("shape_error", comparison.shape_error),
                    ("amplitude_error", comparison.amplitude_error),
                    ("amplitude_Hz", to_hz(comparison.amplitude)),
                    ("exact_amplitude_Hz",
                     to_hz(comparison.reference_amplitude))]
    return files(("oracle1d.csv", csv_text(header, rows)),
                 ("oracle1d_report.txt", report_text("oracle1d", summary)))


def default_router():
    rtr = Router()
    rtr.add("sweep", {"sweep"}, run_sweep)
    rtr.add("crossing", (), run_crossing)
    rtr.add("kappa", {"sweep", "losses"}, run_kappa)
    rtr.add("quartic", (), run_quartic)
    rtr.add("feasibility", {"feasibility"}, run_feasibility)
    rtr.add("oracle1d", (), run_oracle1d)
    return rtr
