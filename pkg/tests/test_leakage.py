import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privleak.alarms import Alarm, RuleAlarmSet
from privleak.entropy import Algorithm, EntropyConfig, Symbol
from privleak.leakage import (
    aggregate_sigma,
    alarm_leakage,
    build_report,
    mean_entropy,
    median_entropy,
    privacy_leakage,
    rule_leakage,
    series_from_alarms,
    sigma_laplace,
    sigma_normal,
    total_leakage,
    whatif,
)
from privleak.table1 import table1_entries

finite_series = st.lists(
    st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=2, max_size=60
)


class TestMeanAndLeakage:
    def test_constant_series(self):
        assert mean_entropy([0.5, 0.5, 0.5]) == 0.5
        assert mean_entropy([0.81] * 7) == 0.81

    def test_two_values(self):
        assert mean_entropy([1.0, 3.0]) == 2.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mean_entropy([])

    def test_alarm_leakage_examples(self):
        assert alarm_leakage([1.0, 3.0], 2) == 1.0
        assert alarm_leakage([1.0, 3.0], 1) == -1.0
        assert alarm_leakage([0.7, 0.7, 0.7], 2) == 0.0

    def test_position_is_one_based(self):
        with pytest.raises(IndexError):
            alarm_leakage([1.0, 2.0], 0)
        with pytest.raises(IndexError):
            alarm_leakage([1.0, 2.0], 3)

    @given(finite_series)
    @settings(max_examples=200)
    def test_leakage_sums_to_zero(self, values):
        total = sum(alarm_leakage(values, j) for j in range(1, len(values) + 1))
        scale = max(1.0, max(abs(v) for v in values))
        assert total == pytest.approx(0.0, abs=1e-9 * scale * len(values))


class TestSigmas:
    def test_constant_series_exactly_zero(self):
        values = [0.8112781244591328] * 9
        assert sigma_normal(values) == 0.0
        assert sigma_laplace(values) == 0.0

    def test_normal_examples(self):
        assert sigma_normal([1.0, 3.0]) == pytest.approx(math.sqrt(2))
        assert sigma_normal([0.0, 0.0, 0.0, 4.0]) == pytest.approx(2.0)

    def test_laplace_examples(self):
        assert sigma_laplace([1.0, 3.0]) == pytest.approx(math.sqrt(2))

    def test_laplace_monte_carlo_recovers_scale(self):
        # E|X - mu| equals the scale for a Laplace distribution
        rng = np.random.default_rng(123)
        sample = rng.laplace(loc=3.0, scale=1.0, size=100_000)
        assert sigma_laplace(sample) == pytest.approx(math.sqrt(2), rel=0.02)

    def test_insufficient_samples(self):
        with pytest.raises(ValueError):
            sigma_normal([1.0])
        with pytest.raises(ValueError):
            sigma_laplace([])

    def test_outlier_robustness(self):
        values = [0.5] * 50 + [25.0]
        assert sigma_laplace(values) < sigma_normal(values)

    @given(
        finite_series,
        st.floats(min_value=-20, max_value=20, allow_nan=False),
        st.floats(min_value=-5, max_value=5, allow_nan=False),
    )
    @settings(max_examples=200)
    def test_affine_equivariance(self, values, shift, scale):
        arr = np.asarray(values)
        base_n = sigma_normal(arr)
        base_l = sigma_laplace(arr)
        mapped = scale * arr + shift
        tol = 1e-8 * max(1.0, abs(scale)) * max(1.0, base_n + base_l)
        assert sigma_normal(mapped) == pytest.approx(abs(scale) * base_n, abs=tol + 1e-12)
        assert sigma_laplace(mapped) == pytest.approx(abs(scale) * base_l, abs=tol + 1e-12)


class TestAggregation:
    def test_equal_sigmas_pass_through(self):
        assert aggregate_sigma([(10, 0.3), (99, 0.3), (1, 0.3)]) == pytest.approx(0.3)

    def test_alarm_weighting(self):
        assert aggregate_sigma([(10, 0.5), (30, 0.9)]) == pytest.approx(0.8)

    def test_table1_aggregate(self):
        entries = [(n, s) for _, n, s in table1_entries()]
        assert aggregate_sigma(entries) == pytest.approx(0.31, abs=0.01)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_sigma([])

    @given(st.lists(st.tuples(
        st.integers(min_value=1, max_value=10_000),
        st.floats(min_value=0, max_value=10, allow_nan=False)), min_size=1, max_size=30))
    def test_bounded_by_extremes(self, entries):
        agg = aggregate_sigma(entries)
        sigmas = [s for _, s in entries]
        assert min(sigmas) - 1e-12 <= agg <= max(sigmas) + 1e-12


class TestWhatIf:
    def test_remove_test_rule(self):
        old, new = whatif(table1_entries(), remove=["1:1394000"])
        assert old == pytest.approx(0.31, abs=0.01)
        assert new == pytest.approx(0.16, abs=0.01)

    def test_anonymise_host_unreachable(self):
        _, base = whatif(table1_entries(), remove=["1:1394000"])
        _, new = whatif(table1_entries(), remove=["1:1394000"], zero=["1:399"])
        assert new == pytest.approx(0.07, abs=0.01)
        assert base - new == pytest.approx(0.09, abs=0.01)

    def test_zero_a_zero_sigma_rule_changes_nothing(self):
        old, new = whatif(table1_entries(), zero=["1:2003"])
        assert old == new

    def test_unknown_rule(self):
        with pytest.raises(KeyError):
            whatif(table1_entries(), remove=["9:9999"])

    def test_no_actions_is_identity(self):
        old, new = whatif(table1_entries())
        assert old == new


class TestPrivacyLeakage:
    def _rl(self, sigma_l, sigma_n=1.0):
        from privleak.leakage import RuleLeakage

        return RuleLeakage(
            rule_id="1:1", count=10, mean=0.0, median=0.0,
            sigma_normal=sigma_n, sigma_laplace=sigma_l,
            leakage_min=-1.0, leakage_max=1.0,
        )

    def test_zero_impact(self):
        assert privacy_leakage(self._rl(0.9), 0.0) == 0.0

    def test_unit_impact(self):
        assert privacy_leakage(self._rl(0.58), 1.0) == pytest.approx(0.58)

    def test_linearity(self):
        assert privacy_leakage(self._rl(0.5), 2.0) == pytest.approx(1.0)

    def test_negative_impact_rejected(self):
        with pytest.raises(ValueError):
            privacy_leakage(self._rl(0.5), -1.0)

    def test_total_leakage(self):
        assert total_leakage(631840, 0.58) == pytest.approx(366467.2)
        assert total_leakage(12345, 0.0) == 0.0
        assert total_leakage(0, 3.0) == 0.0


def _rule_set(rule_id, payloads):
    rs = RuleAlarmSet(rule_id)
    for i, p in enumerate(payloads):
        rs.append(Alarm(rule_id=rule_id, ts=float(i), payload=p))
    return rs


class TestSeries:
    CFG = EntropyConfig(Algorithm.SHANNON, Symbol.OCTET, normalized=True, length_corrected=True)

    def test_identical_payloads_give_zero_sigma(self):
        rs = _rule_set("1:2003", [b"0x I SELECT" * 4] * 20)
        series = series_from_alarms(rs, self.CFG)
        assert series.count == 20
        rl = rule_leakage(series)
        assert rl.sigma_normal == 0.0
        assert rl.sigma_laplace == 0.0
        assert rl.leakage_min == 0.0 and rl.leakage_max == 0.0

    def test_zero_length_payloads_flagged_not_counted(self):
        rs = _rule_set("1:1", [b"", b"abcdef", b"", b"zyxwvu"])
        series = series_from_alarms(rs, self.CFG)
        assert series.count == 2
        assert series.skipped_empty == 2

    def test_one_octet_payload_excluded_under_octet_correction(self):
        rs = _rule_set("1:1", [b"a", b"abcdef", b"fedcba"])
        series = series_from_alarms(rs, self.CFG)
        assert series.count == 2
        assert series.skipped_degenerate == 1

    def test_below_floor_flagged(self):
        rs = _rule_set("1:1", [b"ab", b"abcd", b"abcdefgh"])
        series = series_from_alarms(rs, self.CFG)
        assert series.below_floor == 2

    def test_leakage_extremes_bracket_zero(self):
        rs = _rule_set("1:1", [b"aaaabbbb", b"abcdefgh", b"aabbccdd"])
        rl = rule_leakage(series_from_alarms(rs, self.CFG))
        assert rl.leakage_min <= 0.0 <= rl.leakage_max

    def test_median_even_interpolation(self):
        assert median_entropy([1.0, 2.0, 10.0, 20.0]) == 6.0


class TestReport:
    def test_report_sorted_and_aggregated(self):
        from privleak.alarms import AlarmStore

        store = AlarmStore()
        for alarm in _rule_set("1:10", [b"constant!" * 3] * 10).alarms:
            store.add(alarm)
        rng = np.random.default_rng(5)
        noisy = [rng.bytes(40) for _ in range(10)]
        for alarm in _rule_set("1:20", noisy).alarms:
            store.add(alarm)
        report = build_report(store, TestSeries.CFG)
        assert [r.rule_id for r in report.rows] == ["1:20", "1:10"]
        assert report.sigma_all == pytest.approx(
            aggregate_sigma([(r.count, r.sigma_laplace) for r in report.rows])
        )

    def test_impact_zero_zeroes_pi(self):
        from privleak.alarms import AlarmStore

        store = AlarmStore()
        rng = np.random.default_rng(6)
        for alarm in _rule_set("1:30", [rng.bytes(64) for _ in range(8)]).alarms:
            store.add(alarm)
        report = build_report(store, TestSeries.CFG, impacts={"1:30": 0.0})
        assert report.rows[0].pi == 0.0
        assert report.rows[0].sigma_laplace > 0.0

    def test_json_and_table_render(self):
        from privleak.alarms import AlarmStore

        store = AlarmStore()
        rng = np.random.default_rng(7)
        for alarm in _rule_set("1:40", [rng.bytes(32) for _ in range(6)]).alarms:
            store.add(alarm)
        report = build_report(store, TestSeries.CFG)
        assert '"sigma_all"' in report.to_json()
        table = report.to_table()
        assert "1:40" in table and "sigma_all" in table
