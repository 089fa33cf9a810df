import math

import numpy as np
import pytest

from intellipred.metrics import (
    EvalReport,
    evaluate,
    format_report_table,
    kendall_tau,
    ncc,
    read_eval_rows,
    rmse,
    write_report_csv,
)


def kendall_tau_oracle(pred, truth):
    """Pure-Python pair enumeration: the O(n^2) reference the implementation
    must match exactly (identical integer counts, identical final formula)."""
    n = len(pred)
    concordant = discordant = tied_pred_only = tied_truth_only = 0
    for i in range(n):
        for j in range(i + 1, n):
            dp = int(pred[i] > pred[j]) - int(pred[i] < pred[j])
            dt = int(truth[i] > truth[j]) - int(truth[i] < truth[j])
            if dp == 0 and dt == 0:
                continue
            if dp == 0:
                tied_pred_only += 1
            elif dt == 0:
                tied_truth_only += 1
            elif dp == dt:
                concordant += 1
            else:
                discordant += 1
    denom_p = concordant + discordant + tied_pred_only
    denom_t = concordant + discordant + tied_truth_only
    return (concordant - discordant) / math.sqrt(denom_p * denom_t)


class TestRmse:
    def test_identical_zero(self):
        assert rmse([0.1, 0.5, 0.9], [0.1, 0.5, 0.9]) == 0.0

    def test_unit_case(self):
        assert rmse([0.0, 1.0], [1.0, 0.0]) == 1.0

    def test_hand_arithmetic(self):
        # sqrt((0.04 + 0.16) / 2) = sqrt(0.1)
        got = rmse([0.2, 0.4], [0.0, 0.0])
        assert abs(got - math.sqrt(0.1)) < 1e-12

    def test_symmetry_and_translation(self, rng):
        for _ in range(20):
            p = rng.normal(size=10)
            t = rng.normal(size=10)
            assert rmse(p, t) == rmse(t, p)
            c = float(rng.normal())
            assert abs(rmse(p + c, t + c) - rmse(p, t)) < 1e-12

    def test_errors(self):
        with pytest.raises(ValueError, match="length"):
            rmse([1.0], [1.0, 2.0])
        with pytest.raises(ValueError, match="empty"):
            rmse([], [])


class TestNcc:
    def test_affine_increasing_one(self, rng):
        p = rng.normal(size=20)
        assert abs(ncc(p, 2.0 * p + 1.0) - 1.0) < 1e-12

    def test_negation_minus_one(self, rng):
        p = rng.normal(size=20)
        assert abs(ncc(p, -p) + 1.0) < 1e-12

    def test_hand_case(self):
        assert abs(ncc([1.0, 2.0, 3.0], [1.0, 3.0, 2.0]) - 0.5) < 1e-12

    def test_affine_invariance(self, rng):
        for _ in range(20):
            p = rng.normal(size=15)
            t = rng.normal(size=15)
            base = ncc(p, t)
            assert abs(ncc(3.0 * p + 2.0, t) - base) < 1e-12
            assert abs(ncc(p, 0.5 * t - 4.0) - base) < 1e-12

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError, match="zero variance"):
            ncc([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_needs_two(self):
        with pytest.raises(ValueError, match="at least 2"):
            ncc([1.0], [1.0])


class TestKendallTau:
    def test_identical_orderings(self):
        assert kendall_tau([1, 2, 3], [10, 20, 30]) == 1.0

    def test_reversed(self):
        assert kendall_tau([1, 2, 3], [30, 20, 10]) == -1.0

    def test_hand_enumeration(self):
        # pairs of ([1,2,3,4], [2,1,3,4]): 5 concordant, 1 discordant
        got = kendall_tau([1, 2, 3, 4], [2, 1, 3, 4])
        assert got == (5 - 1) / math.sqrt(6 * 6)
        assert abs(got - 4.0 / 6.0) < 1e-15

    def test_matches_oracle_with_ties(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 30))
            pred = rng.integers(0, 6, size=n).astype(float)
            truth = rng.integers(0, 6, size=n).astype(float)
            if np.unique(pred).size < 2 or np.unique(truth).size < 2:
                continue
            assert kendall_tau(pred, truth) == kendall_tau_oracle(list(pred), list(truth))

    def test_increasing_transform_invariance(self, rng):
        for _ in range(10):
            p = rng.normal(size=12)
            t = rng.normal(size=12)
            base = kendall_tau(p, t)
            assert kendall_tau(np.exp(p), t) == base
            assert kendall_tau(p, t ** 3) == base

    def test_all_tied_rejected(self):
        with pytest.raises(ValueError, match="tied in pred"):
            kendall_tau([1.0, 1.0], [1.0, 2.0])
        with pytest.raises(ValueError, match="tied in truth"):
            kendall_tau([1.0, 2.0], [3.0, 3.0])


class TestEvaluate:
    def test_perfect_predictions(self):
        rows = [("1", f"u{k}", v, v) for k, v in enumerate((0.1, 0.4, 0.9))]
        reports = evaluate(rows)
        assert len(reports) == 1
        r = reports[0]
        assert (r.rmse, r.ncc, r.kt, r.n) == (0.0, 1.0, 1.0, 3)

    def test_subset_order(self):
        rows = [
            ("2", "a", 0.1, 0.2), ("2", "b", 0.5, 0.6),
            ("1", "c", 0.2, 0.1), ("1", "d", 0.9, 0.8),
        ]
        reports = evaluate(rows)
        assert [r.subset_id for r in reports] == ["1", "2"]

    def test_error_annotated_with_subset(self):
        rows = [("7", "a", 1.0, 0.5), ("7", "b", 1.0, 0.6)]
        with pytest.raises(ValueError, match="subset 7"):
            evaluate(rows)

    def test_csv_layout(self, tmp_path):
        reports = [EvalReport("1", 0.25, 0.79, 0.579, 100)]
        p = tmp_path / "report.csv"
        write_report_csv(reports, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "subset,rmse,ncc,kt,n"
        assert lines[1] == "1,0.250,0.790,0.579,100"

    def test_eval_rows_round_trip(self, tmp_path):
        p = tmp_path / "rows.csv"
        p.write_text("subset,utterance_id,pred,truth\n1,u1,0.5,0.75\n")
        assert read_eval_rows(p) == [("1", "u1", 0.5, 0.75)]
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n")
        with pytest.raises(ValueError, match="expected header"):
            read_eval_rows(bad)

    def test_table_grouping(self):
        reports_a = [EvalReport("1", 0.25, 0.79, 0.579, 10),
                     EvalReport("2", 0.277, 0.713, 0.543, 12)]
        reports_b = [EvalReport("1", 0.303, 0.66, 0.5, 10)]
        table = format_report_table([("Intrusive", reports_a),
                                     ("Non-intrusive", reports_b)])
        lines = table.splitlines()
        assert lines[0].split() == ["Subset", "RMSE", "NCC", "KT", "n"]
        assert any("Intrusive" in line for line in lines)
        assert any("Non-intrusive" in line for line in lines)
        body = [line for line in lines if line and line[0].isdigit()]
        assert len(body) == 3
        assert body[0].split() == ["1", "0.250", "0.790", "0.579", "10"]
