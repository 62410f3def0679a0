"""Tests for the shifted bank placement and its conflict-freedom."""

import json

import pytest

from nttsim.layout import (
    ConflictReport,
    LayoutMap,
    coefficient_at,
    make_layout,
    place,
    verify_conflict_free,
)


class TestPlace:
    def test_origin(self):
        assert place(0, 4) == (0, 0)

    def test_shift_separates_colliding_pair(self):
        # under sequential placement a[0] and a[8] share bank 0 (N=16);
        # the shifted placement puts a[8] in bank 2
        assert place(8, 4) == (2, 2)
        assert place(0, 4)[1] != place(8, 4)[1]
        seq = make_layout(16, kind="sequential")
        assert seq.place(0)[1] == seq.place(8)[1] == 0

    def test_formula(self):
        for n in (4, 8, 16):
            for i in range(n * n):
                addr, bank = place(i, n)
                assert addr == i // n
                assert bank == (i % n + i // n) % n

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            place(16, 4)
        with pytest.raises(ValueError):
            place(-1, 4)


class TestInverse:
    def test_origin(self):
        assert coefficient_at(0, 0, 4) == 0

    def test_known_cell(self):
        # derived by enumerating the forward map for n=4
        assert coefficient_at(2, 2, 4) == 8

    def test_roundtrip_all_cells(self):
        for n in (4, 8, 16, 32):
            for addr in range(n):
                for bank in range(n):
                    i = coefficient_at(addr, bank, n)
                    assert place(i, n) == (addr, bank)

    def test_bijective_against_enumeration(self):
        n = 16  # N = 256
        cells = {place(i, n) for i in range(n * n)}
        assert len(cells) == n * n
        back = {coefficient_at(a, b, n) for a, b in cells}
        assert back == set(range(n * n))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            coefficient_at(4, 0, 4)
        with pytest.raises(ValueError):
            coefficient_at(0, 4, 4)


class TestLayoutMap:
    def test_rejects_odd_log2(self):
        with pytest.raises(ValueError):
            make_layout(2048)

    def test_rejects_n4(self):
        # the conflict-freedom argument needs more than two banks
        with pytest.raises(ValueError):
            make_layout(4)

    def test_accepts_n16(self):
        lm = make_layout(16)
        assert lm.n == 4
        assert lm.N == 16

    def test_rejects_non_power(self):
        with pytest.raises(ValueError):
            make_layout(100)


class TestConflictFreedom:
    @pytest.mark.parametrize("n_total", [16, 64, 256, 1024, 4096])
    def test_shifted_has_no_violations(self, n_total):
        report = verify_conflict_free(n_total)
        assert report.violations == []
        assert report.pairs_checked > 0

    def test_sequential_counterexample(self):
        report = verify_conflict_free(16, kind="sequential")
        assert len(report.violations) > 0
        assert any(v["i"] == 0 and v["j"] == 8 for v in report.violations)

    def test_exhaustive_pair_oracle(self):
        # brute-force re-check of the N=64 report against plain loops
        n_total, n = 64, 8
        bank = lambda i: (i % n + i // n) % n  # noqa: E731
        for i in range(n_total):
            t = 1
            while t <= n_total // 2:
                for j in (i + t, i - t):
                    if 0 <= j < n_total:
                        assert bank(i) != bank(j)
                t *= 2

    def test_report_json_lines(self):
        report = verify_conflict_free(16, kind="sequential")
        lines = report.to_json_lines().strip().split("\n")
        summary = json.loads(lines[-1])
        assert summary["N"] == 16
        assert summary["layout"] == "sequential"
        assert summary["violations"] == len(report.violations)
        first = json.loads(lines[0])
        assert {"i", "j", "bank", "t"} <= set(first)

    def test_clean_report_single_summary_line(self):
        report = verify_conflict_free(16)
        lines = report.to_json_lines().strip().split("\n")
        assert len(lines) == 1
        assert json.loads(lines[0])["violations"] == 0
