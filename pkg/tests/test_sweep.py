import csv
import io
import json
import math

import numpy as np
import pytest

from ponderomotive.errors import ConfigError
from ponderomotive.model import CarrierConfig, SimConfig
from ponderomotive.sweep import (
    CSV_COLUMNS,
    SweepAxis,
    SweepResult,
    apply_parameter,
    cavity_length_profile,
    evaluate_point,
    find_peak,
    parse_axis,
    run_sweep,
)

FREQ = SweepAxis("frequency", "log", 1e3, 1e5, 24)


class TestAxis:
    def test_parse(self):
        ax = parse_axis("temperature:log:1:295:64")
        assert (ax.parameter, ax.scale, ax.start, ax.stop, ax.points) == ("temperature", "log", 1.0, 295.0, 64)
        assert ax.values[0] == 1.0 and ax.values[-1] == pytest.approx(295.0)

    def test_aliases(self):
        assert parse_axis("loss:linear:10:100:4").parameter == "loss_ppm"
        assert parse_axis("length:log:1e-3:0.1:4").parameter == "cavity_length"

    @pytest.mark.parametrize(
        "text",
        ["speed:log:1:2:3", "frequency:cubic:1:2:3", "frequency:log:0:2:3", "frequency:log:2:1:3",
         "frequency:log:1:2:0", "frequency:log:1:2", "frequency:log:a:2:3", "frequency:log:1:2:2.5",
         "frequency:log:1:2:1"],
    )
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_axis(text)

    def test_single_point(self):
        ax = parse_axis("temperature:linear:4:4:1")
        assert ax.values.tolist() == [4.0]

    def test_axis_text_round_trip(self):
        ax = SweepAxis("power2", "linear", 0.0, 0.5, 6)
        assert parse_axis(ax.spec()) == ax


class TestApply:
    def test_each_parameter(self):
        base = SimConfig()
        assert apply_parameter(base, "temperature", 4).temperature == 4
        assert apply_parameter(base, "loss_ppm", 10).round_trip_loss == 10
        assert apply_parameter(base, "power1", 0.1).carrier == CarrierConfig(0.1, 0.3)
        assert apply_parameter(base, "detuning2", -1.0).subcarrier == CarrierConfig(0.2238, -1.0)
        assert all(m.quality_factor == 5e3 for m in apply_parameter(base, "q", 5e3).modes)

    def test_frequency_not_applicable(self):
        with pytest.raises(ConfigError):
            apply_parameter(SimConfig(), "frequency", 1e4)


class TestRun:
    def test_point_matches_single_cell(self):
        res = run_sweep(SimConfig(), [SweepAxis("frequency", "log", 2e4, 2e4, 1)])
        pt = evaluate_point(SimConfig(), 2e4)
        assert res.E_N.shape == (1,)
        assert res.E_N[0] == pt.E_N
        assert res.duan_R[0] == pt.duan_R
        assert res.qt_ratio[0] == pt.qt_ratio
        assert bool(res.stable[0]) == pt.stability.stable

    def test_fixed_frequency_axis(self):
        res = run_sweep(SimConfig(), [SweepAxis("temperature", "linear", 295, 295, 1)], frequency_hz=2e4)
        assert res.E_N[0] == evaluate_point(SimConfig(), 2e4).E_N
        assert res.frequency_hz == 2e4

    def test_deterministic_and_worker_independent(self):
        axes = [SweepAxis("temperature", "log", 1, 295, 5), FREQ]
        a = run_sweep(SimConfig(), axes, workers=1)
        b = run_sweep(SimConfig(), axes, workers=1)
        c = run_sweep(SimConfig(), axes, workers=3)
        assert a.to_csv() == b.to_csv() == c.to_csv()
        assert a.to_json() == c.to_json()

    def test_axis_order(self):
        a = run_sweep(SimConfig(), [SweepAxis("temperature", "log", 1, 295, 3), FREQ])
        b = run_sweep(SimConfig(), [FREQ, SweepAxis("temperature", "log", 1, 295, 3)])
        assert np.array_equal(a.E_N, b.E_N.T)

    def test_temperature_monotone(self):
        res = run_sweep(SimConfig(), [SweepAxis("temperature", "log", 1, 295, 8), FREQ])
        assert np.all(np.diff(res.E_N, axis=0) <= 1e-12)
        assert res.physical.all()

    def test_loss_monotone(self):
        res = run_sweep(SimConfig(), [SweepAxis("loss_ppm", "log", 10, 1e4, 8), FREQ])
        assert np.all(np.diff(res.E_N, axis=0) <= 1e-12)

    def test_rejects_bad_axes(self):
        with pytest.raises(ConfigError):
            run_sweep(SimConfig(), [FREQ, FREQ])
        with pytest.raises(ConfigError):
            run_sweep(SimConfig(), [])

    def test_unstable_cells_flagged(self):
        res = run_sweep(SimConfig(), [SweepAxis("power2", "linear", 0.0, 0.2238, 2)])
        assert res.stable.tolist() == [False, True]


class TestOutput:
    @pytest.fixture(scope="class")
    @staticmethod
    def res():
        return run_sweep(SimConfig(), [SweepAxis("temperature", "log", 4, 295, 3), FREQ])

    def test_csv(self, res, tmp_path):
        text = res.to_csv(tmp_path / "s.csv")
        assert (tmp_path / "s.csv").read_text() == text
        body = [l for l in text.splitlines() if not l.startswith("#")]
        rows = list(csv.reader(io.StringIO("\n".join(body))))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 1 + 3 * 24
        first = rows[1]
        assert float(first[0]) == 4.0 and float(first[1]) == 1e3
        assert float(first[2]) == res.E_N[0, 0]

    def test_json(self, res):
        data = json.loads(res.to_json())
        assert data["shape"] == [3, 24]
        assert np.array_equal(np.array(data["E_N"]), res.E_N)
        assert data["axes"][0]["parameter"] == "temperature"
        assert data["base_config"]["temperature"] == 295.0


class TestPeak:
    def _flat(self, values):
        n = len(values)
        ax = SweepAxis("frequency", "log", 1e3, 1e5, n)
        z = np.zeros(n)
        return SweepResult((ax,), SimConfig(), None, np.array(values, float), z, z, z.astype(bool),
                           z.astype(bool), z.astype(bool), np.zeros((n, 4, 4)))

    def test_tie_break_first(self):
        pk = find_peak(self._flat([0.2] * 5))
        assert pk.index == (0,) and pk.value == 0.2

    def test_all_zero(self):
        assert find_peak(self._flat([0.0] * 4)).all_zero

    def test_refined_parabola(self):
        ax = SweepAxis("frequency", "linear", 0, 4, 5)
        x = ax.values
        y = 1 - (x - 2.3) ** 2
        z = np.zeros(5)
        res = SweepResult((ax,), SimConfig(), None, y, z, z, z.astype(bool), z.astype(bool), z.astype(bool),
                          np.zeros((5, 4, 4)))
        pk = find_peak(res)
        assert pk.index == (2,)
        assert pk.refined_location == pytest.approx(2.3, abs=1e-12)
        assert pk.refined_value == pytest.approx(1.0, abs=1e-12)

    def test_room_temperature_peak_band(self):
        res = run_sweep(SimConfig(), [SweepAxis("frequency", "log", 1e3, 1e5, 64)])
        pk = find_peak(res)
        assert 10e3 <= pk.location["frequency"] <= 40e3

    def test_cold_peak_value(self):
        res = run_sweep(SimConfig(temperature=4.0), [SweepAxis("frequency", "log", 4.3e3, 1e5, 64)])
        pk = find_peak(res)
        assert 0.1 <= pk.value <= 0.3

    def test_slice(self):
        res = run_sweep(SimConfig(), [SweepAxis("temperature", "log", 4, 295, 3), FREQ])
        pk = find_peak(res, along="frequency", at=2)
        assert pk.index[0] == 2
        assert pk.value == res.E_N[2].max()


class TestLengthProfile:
    def test_single_cell_matches_point(self):
        prof = cavity_length_profile(SimConfig(), [0.01], [295.0], 2e4)
        assert prof.E_N[0, 0] == evaluate_point(SimConfig(), 2e4).E_N

    def test_cooling_saturates(self):
        prof = cavity_length_profile(SimConfig(), np.geomspace(1e-3, 0.1, 12), [1.0, 4.0, 295.0])
        assert prof.saturation_4k < 0.05
        assert np.all(prof.profile(4.0) >= prof.profile(295.0))

    def test_missing_temperature(self):
        prof = cavity_length_profile(SimConfig(), [0.01], [4.0])
        with pytest.raises(KeyError):
            prof.profile(1.0)
        assert prof.saturation_4k is None

    def test_rejects_bad_length(self):
        with pytest.raises(ConfigError):
            cavity_length_profile(SimConfig(), [0.0], [4.0])
        assert math.isfinite(cavity_length_profile(SimConfig(), [0.05], [4.0]).E_N[0, 0])
