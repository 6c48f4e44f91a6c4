import math

import numpy as np
import pytest

from steerlab import criteria as cr
from steerlab import solvers as sv
from steerlab.errors import BracketError, ParameterError
from steerlab.states import StateFamilySpec

GHZ = StateFamilySpec("ghz_theta", theta=0.0)
THETAS = sv.AxisSpec("theta", 0.0, math.pi / 2, 400)


class TestBisect:
    def test_linear(self):
        res = sv.bisect_threshold(lambda p: p - 0.5, 0.0, 1.0, 1e-6)
        assert abs(res.critical - 0.5) <= 1e-6
        assert res.bracket[1] - res.bracket[0] <= 1e-6
        assert res.bracket[0] <= 0.5 <= res.bracket[1]

    @pytest.mark.parametrize("lo, hi, tol", [(0.0, 1.0, 1e-6), (-3.0, 5.0, 1e-3), (0.2, 0.9, 1e-9)])
    def test_evaluation_budget_and_domain(self, lo, hi, tol):
        calls = []

        def f(x):
            calls.append(x)
            return 0.3 - x

        res = sv.bisect_threshold(f, lo, hi, tol)
        assert len(calls) == res.evaluations
        assert res.evaluations <= math.ceil(math.log2((hi - lo) / tol)) + 2
        assert all(lo <= x <= hi for x in calls)

    def test_decreasing_function(self):
        res = sv.bisect_threshold(lambda x: 1 - x * x, 0.0, 3.0, 1e-8)
        assert res.critical == pytest.approx(1.0, abs=1e-8)

    def test_zero_counts_as_nonpositive(self):
        res = sv.bisect_threshold(lambda x: max(x - 0.5, 0.0), 0.0, 1.0, 1e-6)
        assert res.bracket[0] <= 0.5 + 1e-6

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            sv.bisect_threshold(lambda x: x + 1, 0.0, 1.0, 1e-3)

    def test_bad_tol(self):
        with pytest.raises(ParameterError):
            sv.bisect_threshold(lambda x: x, -1.0, 1.0, 0.0)

    def test_deterministic(self):
        a = sv.p_threshold(cr.A_TO_B, 1e-6, 1e-6)
        b = sv.p_threshold(cr.A_TO_B, 1e-6, 1e-6)
        assert a == b


class TestPThreshold:
    def test_ideal_values(self):
        assert sv.p_threshold(cr.A_TO_B, 0.0, 1e-6).critical == pytest.approx(0.577, abs=0.005)
        assert sv.p_threshold(cr.B_TO_A, 0.0, 1e-6).critical == pytest.approx(0.565, abs=0.005)

    def test_paired_bound_agrees_at_zero(self):
        for direction in (cr.A_TO_B, cr.B_TO_A):
            a = sv.p_threshold(direction, 0.0, 1e-7, "loo").critical
            b = sv.p_threshold(direction, 0.0, 1e-7, "paired").critical
            assert a == pytest.approx(b, abs=2e-7)

    def test_nondecreasing_in_xi(self):
        rows = list(sv.figure1_rows(np.linspace(0, 1e-4, 21), tol=1e-6))
        for col in range(1, 5):
            vals = np.array([r[col] for r in rows])
            finite = vals[~np.isnan(vals)]
            assert np.all(np.diff(finite) >= -1e-6)
            # once the family stops being certifiable it stays that way
            if np.isnan(vals).any():
                first = np.argmax(np.isnan(vals))
                assert np.isnan(vals[first:]).all()

    def test_unknown_inequality(self):
        with pytest.raises(ParameterError):
            sv.p_threshold(cr.A_TO_B, 0.0, 1e-3, "nope")


class TestCriticalXi:
    def test_width_contract(self):
        res = sv.critical_xi(GHZ, THETAS, (0.0, 1e-3), 1e-7)
        assert res.bracket[1] - res.bracket[0] <= 1e-7
        assert res.parameter == "xi"

    def test_best_gap_changes_sign(self):
        res = sv.critical_xi(GHZ, THETAS, (0.0, 1e-3), 1e-10)
        terms = [cr.scenario_terms(GHZ.with_params(theta=float(t)).build(), cr.A_TO_BC) for t in THETAS.values]
        assert max(t.at(res.bracket[0]).gap for t in terms) > 0
        assert max(t.at(res.bracket[1]).gap for t in terms) <= 0

    def test_unsteerable_family_brackets_fail(self):
        with pytest.raises(BracketError):
            sv.critical_xi(GHZ, np.zeros(200), (0.0, 1e-3), 1e-7)

    def test_grid_too_small(self):
        with pytest.raises(ParameterError):
            sv.critical_xi(GHZ, np.linspace(0, 1, 50), (0.0, 1e-3), 1e-7)


class TestSweep:
    def test_shape_and_values(self):
        scen = sv.Scenario(cr.A_TO_BC, GHZ)
        axes = [sv.AxisSpec("theta", 0.0, math.pi / 2, 7), sv.AxisSpec("xi", 0.0, 1e-4, 5)]
        grid = sv.sweep(scen, axes, threads=1)
        assert grid.reports.shape == (7, 5)
        gap = grid.column("gap")
        theta = axes[0].values[3]
        expected = cr.tripartite_gap_A_to_BC(GHZ.with_params(theta=theta).build(), 1e-4 / 4 * 2).gap
        assert gap[3, 2] == pytest.approx(expected, abs=1e-15)

    def test_parallel_is_bit_identical(self, tmp_path):
        scen = sv.Scenario(cr.BC_TO_A, GHZ)
        axes = [sv.AxisSpec("theta", 0.0, math.pi / 2, 13), sv.AxisSpec("xi", 0.0, 1e-4, 9)]
        sv.sweep(scen, axes, threads=1).write_csv(tmp_path / "a.csv")
        sv.sweep(scen, axes, threads=4).write_csv(tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_one_axis_and_csv(self, tmp_path):
        scen = sv.Scenario(cr.A_TO_B, StateFamilySpec("asymmetric_p", p=0.5))
        grid = sv.sweep(scen, [sv.AxisSpec("p", 0.0, 1.0, 11)])
        grid.write_csv(tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "axis1,axis2,lhs,penalty,rhs,gap,steerable"
        assert len(lines) == 12
        assert lines[-1].split(",")[-1] == "1"

    def test_dimension_axis(self):
        scen = sv.Scenario(cr.A_TO_B, StateFamilySpec("max_entangled_d", d=2))
        grid = sv.sweep(scen, [sv.AxisSpec("d", 2, 4, 3), sv.AxisSpec("xi", 0.0, 1e-4, 3)])
        assert np.all(grid.column("gap")[:, 0] > 0)

    def test_rejects_foreign_axis(self):
        scen = sv.Scenario(cr.A_TO_B, StateFamilySpec("asymmetric_p", p=0.5))
        with pytest.raises(ParameterError):
            sv.sweep(scen, [sv.AxisSpec("theta", 0.0, 1.0, 3)])

    def test_scenario_family_mismatch(self):
        with pytest.raises(ParameterError):
            sv.Scenario(cr.A_TO_BC, StateFamilySpec("singlet"))

    def test_axis_validation(self):
        with pytest.raises(ParameterError):
            sv.AxisSpec("xi", 1.0, 0.0, 5)
        with pytest.raises(ParameterError):
            sv.AxisSpec("xi", 0.0, 1.0, 1)
        assert sv.parse_grid("theta:0:1:5,xi:0:1e-4:3")[1] == sv.AxisSpec("xi", 0.0, 1e-4, 3)


class TestVerifyCoeffBound:
    def test_zero_xi(self):
        s = sv.verify_coeff_bound(3, 0.0, 50, seed=1)
        assert s.max_deviation == 0 and s.violations == 0

    def test_reported_bound(self):
        s = sv.verify_coeff_bound(2, 1e-5, 10, seed=0)
        assert s.bound == pytest.approx(0.0126592, abs=1e-7)
        assert s.violations == 0

    def test_no_samples(self):
        s = sv.verify_coeff_bound(2, 1e-5, 0)
        assert s.samples == 0 and list(s.rows()) == [] and s.violations == 0

    def test_sample_independent_of_count(self):
        a = sv.verify_coeff_bound(2, 1e-4, 5, seed=3)
        b = sv.verify_coeff_bound(2, 1e-4, 20, seed=3)
        assert np.array_equal(a.per_sample, b.per_sample[:5])
