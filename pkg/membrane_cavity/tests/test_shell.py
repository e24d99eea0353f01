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

import csv
import hashlib
import json
import os

import numpy
import pytest

from .. import app
from .. import router
from .. import shell
from ..exceptions import (
    CommandNotFound,
    ConfigError,
    FitNotConverged,
    QuadratureNotConverged,
    UnresolvedGap,
    abort,
)
from ..request import Request
from ..response import csv_text

GEOMETRY = """
[geometry]
length = 6.313e-2
mirror_radius = 5e-2
"""

SINGLET = GEOMETRY + """
[membrane]
thickness = 39e-9
index = {index}

[basis]
modes = TEM00@0
"""

TRIPLET = GEOMETRY + """
[membrane]
thickness = 39e-9
index = 2.0
tilt = 0.45e-3

[basis]
max_order = 2
window = 0.5e9

[sweep]
start = 0
stop = 5.32e-7
count = 9
"""


def write(tmp_path, text, name="scenario.ini"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def run(*argv):
    return shell.main(list(argv))


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    return rows[0], rows[1:]


def read_report(path):
    values = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if " = " in line:
                name, value = line.split(" = ", 1)
                values[name.strip()] = value.strip()
    return values


class TestSweepCommand:
    def test_singlet_band(self, tmp_path):
        config = write(tmp_path, SINGLET.format(index="2.0")
                       + "[sweep]\nstart = 0\nstop = 1064e-9\ncount = 65\n")
        out = str(tmp_path / "out")
        assert run("sweep", config, "--out", out) == 0

        header, rows = read_csv(os.path.join(out, "sweep.csv"))
        assert header == ["sweep_value", "branch_id", "frequency_Hz",
                          "TEM00@0"]
        frequency = numpy.array([float(row[2]) for row in rows])
        assert frequency.size == 65
        numpy.testing.assert_allclose(frequency[:33], frequency[32:],
                                      atol=1.e-3 * numpy.ptp(frequency))
        assert numpy.all(frequency <= 0.0)

        with open(os.path.join(out, "manifest.json"), encoding="utf-8") as f:
            manifest = json.load(f)
        with open(os.path.join(out, "sweep.csv"), "rb") as f:
            digest = hashlib.sha256(f.read()).hexdigest()
        assert manifest["files"] == {"sweep.csv": digest}
        assert manifest["config"]["membrane"]["thickness"] == "39e-9"

    def test_thread_count_keeps_bytes(self, tmp_path):
        config = write(tmp_path, TRIPLET)
        outputs = []
        for threads in ("1", "4"):
            out = str(tmp_path / "out{0}".format(threads))
            assert run("--threads", threads, "sweep", config,
                       "--out", out) == 0
            with open(os.path.join(out, "sweep.csv"), "rb") as f:
                outputs.append(f.read())
        assert outputs[0] == outputs[1]

    def test_misspelled_key(self, tmp_path, capsys):
        config = write(tmp_path, TRIPLET.replace("tilt =", "tiltt ="))
        out = str(tmp_path / "out")
        assert run("sweep", config, "--out", out) == 2
        assert "tiltt" in capsys.readouterr().err
        assert not os.path.exists(os.path.join(out, "manifest.json"))

    def test_missing_sweep_block(self, tmp_path):
        config = write(tmp_path, SINGLET.format(index="2.0"))
        assert run("sweep", config, "--out", str(tmp_path / "out")) == 2

    def test_invalid_threads(self, tmp_path):
        config = write(tmp_path, TRIPLET)
        assert run("--threads", "0", "sweep", config,
                   "--out", str(tmp_path / "out")) == 2


class TestFeasibilityCommand:
    def test_reference_row(self, tmp_path):
        config = write(tmp_path, SINGLET.format(index="2.0") + """
[feasibility]
omega_m_hz = 1e6
mass = 40e-12
quality = 1e7
temperature = 0.3
drive_amplitude = 2e-9
target_shot_noise = 1.0
""")
        out = str(tmp_path / "out")
        assert run("feasibility", config, "--out", out) == 0
        header, rows = read_csv(os.path.join(out, "feasibility.csv"))
        assert header == ["quantity", "value", "unit"]
        values = {row[0]: float(row[1]) for row in rows}
        numpy.testing.assert_allclose(values["x_zpf"], 4.5804e-16,
                                      rtol=1.e-3)
        numpy.testing.assert_allclose(values["n_thermal"], 6250.9,
                                      rtol=1.e-3)
        numpy.testing.assert_allclose(values["n_bar"], 4.766e12, rtol=1.e-3)
        assert "required_sigma0_cooled" in values
        assert os.path.exists(os.path.join(out, "feasibility_report.txt"))


class TestCrossingCommand:
    def test_external_branches(self, tmp_path):
        slope, half_gap = 1.e15, 1.e6
        x = numpy.linspace(-5.e-9, 5.e-9, 41)
        split = numpy.sqrt((slope * x) ** 2 + half_gap ** 2)
        lines = ["x,lower_Hz,upper_Hz"]
        lines += ["{0!r},{1!r},{2!r}".format(float(u), float(3.e6 - s),
                                             float(3.e6 + s))
                  for u, s in zip(x, split)]
        branches = write(tmp_path, "\n".join(lines) + "\n", "branches.csv")
        config = write(tmp_path, SINGLET.format(index="2.0") + """
[analysis]
crossing.a = TEM00@0 TEM02@-1 -5e-9 5e-9
""")
        out = str(tmp_path / "out")
        assert run("crossing", config, "--out", out,
                   "--input", branches) == 0
        header, rows = read_csv(os.path.join(out, "crossings.csv"))
        row = dict(zip(header, rows[0]))
        assert row["crossing_id"] == "a"
        numpy.testing.assert_allclose(float(row["omega_s_Hz"]), half_gap,
                                      rtol=1.e-4)
        numpy.testing.assert_allclose(float(row["omega_pp_Hz_per_nm2"]),
                                      slope ** 2 / half_gap * 1.e-18,
                                      rtol=1.e-3)
        assert row["classification"] == "quadratic"

    def test_no_windows(self, tmp_path):
        config = write(tmp_path, SINGLET.format(index="2.0"))
        assert run("crossing", config, "--out", str(tmp_path / "out")) == 2


class TestOracleCommand:
    def test_shape(self, tmp_path):
        config = write(tmp_path, SINGLET.format(index="2.0"))
        out = str(tmp_path / "out")
        assert run("oracle1d", config, "--out", out) == 0
        report = read_report(os.path.join(out, "oracle1d_report.txt"))
        assert float(report["shape_error"]) < 0.1
        assert 15.e3 < abs(float(report["curvature_1d_Hz_per_nm2"])) < 75.e3
        header, rows = read_csv(os.path.join(out, "oracle1d.csv"))
        assert header == ["x_m", "exact_Hz", "first_order_Hz",
                          "perturbative_Hz"]
        assert len(rows) == 33


class TestKappaCommand:
    def test_absorption_estimate(self, tmp_path):
        config = write(tmp_path, SINGLET.format(index="2.0+1e-6j") + """
[losses]
default = 1e5

[sweep]
start = 0
stop = 1064e-9
count = 65
""")
        out = str(tmp_path / "out")
        assert run("kappa", config, "--out", out) == 0
        report = read_report(os.path.join(out, "kappa_report.txt"))
        numpy.testing.assert_allclose(float(report["imag_index_estimate"]),
                                      1.e-6, rtol=1.e-2)
        header, rows = read_csv(os.path.join(out, "kappa.csv"))
        kappa = numpy.array([float(row[2]) for row in rows])
        assert numpy.all(kappa >= 1.e5)

    def test_needs_losses(self, tmp_path):
        config = write(tmp_path, SINGLET.format(index="2.0")
                       + "[sweep]\nvalues = 0 1e-7 2e-7\n")
        assert run("kappa", config, "--out", str(tmp_path / "out")) == 2


class TestDispatch:
    def test_unknown_command(self):
        with pytest.raises(CommandNotFound):
            router.Router().get("missing")

    def test_numerical_failure_exit_code(self, tmp_path):
        def handler(request):
            raise FitNotConverged("no convergence")

        rtr = router.Router()
        rtr.add("fit", (), handler)
        simulation = app.SimulationApp(name="test", router=rtr)
        response = simulation.handle_request(
            Request("fit", "unused.ini", str(tmp_path)))
        assert response.exit_code == 3
        assert "FitNotConverged" in response.message

    def test_quadrature_failure_names_nodes(self, tmp_path):
        def handler(request):
            raise QuadratureNotConverged("overlaps did not settle", 512,
                                         2.5e-4)

        rtr = router.Router()
        rtr.add("sweep", (), handler)
        response = app.SimulationApp(router=rtr).handle_request(
            Request("sweep", "unused.ini", str(tmp_path)))
        assert response.exit_code == 3
        assert "512 nodes" in response.message
        assert "2.500e-04" in response.message

    def test_unresolved_gap_reports_residual(self, tmp_path):
        def handler(request):
            raise UnresolvedGap("crossing a is not resolved", 0.02)

        rtr = router.Router()
        rtr.add("crossing", (), handler)
        response = app.SimulationApp(router=rtr).handle_request(
            Request("crossing", "unused.ini", str(tmp_path)))
        assert response.exit_code == 3
        assert "residual 2.000e-02" in response.message

    def test_threads_checked_before_config(self, tmp_path):
        rtr = router.Router()
        rtr.add("sweep", {"sweep"}, lambda request: None)
        response = app.SimulationApp(router=rtr).handle_request(
            Request("sweep", str(tmp_path / "absent.ini"), str(tmp_path),
                    threads=0))
        assert response.exit_code == 2
        assert "--threads" in response.message

    def test_unexpected_failure(self, tmp_path):
        def handler(request):
            raise RuntimeError("boom")

        rtr = router.Router()
        rtr.add("boom", (), handler)
        response = app.SimulationApp(router=rtr).handle_request(
            Request("boom", "unused.ini", str(tmp_path)))
        assert response.exit_code == 1

    def test_csv_text(self):
        assert csv_text(["a", "b"], [[0.3, 1]]) == "a,b\n0.3,1\n"

    def test_abort(self):
        with pytest.raises(ConfigError) as info:
            abort(2)
        assert info.value.exit_code == 2
        assert str(info.value) == "Configuration Error"
