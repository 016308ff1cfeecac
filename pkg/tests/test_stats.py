import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import friedman_textbook, wilcoxon_enumeration
from rrcml.stats import (ResultMatrix, average_ranks, format_p, format_rank_tables,
                         friedman_test, holm_adjust, rank_matrix, rank_tables_csv,
                         two_step_pipeline, wilcoxon_exact_p, wilcoxon_normal_p,
                         wilcoxon_signed_rank)
from rrcml.stats import _signed_ranks


class TestRanks:
    def test_sorted(self):
        np.testing.assert_array_equal(average_ranks(ResultMatrix([[0.1, 0.2, 0.3]])), [1, 2, 3])

    def test_ties(self):
        np.testing.assert_array_equal(average_ranks(ResultMatrix([[0.1, 0.1, 0.3]])),
                                      [1.5, 1.5, 3])

    def test_higher_better(self):
        np.testing.assert_array_equal(
            average_ranks(ResultMatrix([[0.1, 0.2, 0.3]], direction="higher")), [3, 2, 1])

    def test_rows_sum(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            A = int(rng.integers(2, 7))
            m = ResultMatrix(rng.integers(0, 4, (int(rng.integers(2, 9)), A)) / 4)
            np.testing.assert_allclose(rank_matrix(m).sum(axis=1), A * (A + 1) / 2)

    def test_missing_entry(self):
        with pytest.raises(ValueError):
            ResultMatrix([[0.1, np.nan], [0.2, 0.3]])

    def test_relabel(self):
        rng = np.random.default_rng(1)
        v = rng.uniform(size=(6, 4))
        perm = [2, 0, 3, 1]
        a, b = ResultMatrix(v), ResultMatrix(v[:, perm])
        np.testing.assert_allclose(average_ranks(b), average_ranks(a)[perm])
        assert friedman_test(a)[1] == pytest.approx(friedman_test(b)[1], abs=1e-15)


class TestFriedman:
    def test_identical_columns(self):
        assert friedman_test(ResultMatrix(np.ones((5, 3)))) == (0.0, 1.0)

    def test_tied_example(self):
        stat, p = friedman_test(ResultMatrix([[0.1, 0.5, 0.5]] * 4))
        assert stat == pytest.approx(8.0, abs=1e-12)
        assert p == pytest.approx(0.018315638888734182, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_matches_textbook(self, seed):
        rng = np.random.default_rng(seed)
        m = ResultMatrix(rng.integers(0, 3, (int(rng.integers(2, 8)), int(rng.integers(2, 5)))))
        ranks = rank_matrix(m)
        if np.all(ranks == ranks[:, :1]):
            return
        assert friedman_test(m)[0] == pytest.approx(friedman_textbook(ranks.tolist()), abs=1e-9)

    def test_p_monotone(self):
        rng = np.random.default_rng(2)
        res = sorted(friedman_test(ResultMatrix(rng.uniform(size=(8, 3)))) for _ in range(30))
        ps = [p for _, p in res]
        assert all(a >= b for a, b in zip(ps, ps[1:]))


class TestWilcoxon:
    def test_equal(self):
        assert wilcoxon_signed_rank([1, 2, 3], [1, 2, 3]) == 1.0

    def test_all_positive(self):
        assert wilcoxon_signed_rank([1, 2, 3, 4, 5], [0] * 5) == pytest.approx(0.0625, abs=1e-15)

    def test_mixed_six(self):
        assert wilcoxon_signed_rank([1, -2, 3, -4, 5, 6], [0] * 6) == pytest.approx(0.4375,
                                                                                  abs=1e-15)

    def test_zero_differences_dropped(self):
        assert wilcoxon_signed_rank([1, 2, 3, 4, 5, 7], [0, 0, 0, 0, 0, 7]) == \
            pytest.approx(0.0625)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_matches_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 13))
        a = rng.integers(-3, 4, n) / 2
        b = rng.integers(-3, 4, n) / 2
        assert wilcoxon_signed_rank(a, b) == pytest.approx(wilcoxon_enumeration(a, b),
                                                           abs=1e-10)

    def test_exact_vs_normal_at_twenty(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            d, r = _signed_ranks(rng.normal(0.3, 1, 20), np.zeros(20))
            assert abs(wilcoxon_exact_p(d, r) - wilcoxon_normal_p(d, r)) < 0.02

    def test_large_n_uses_normal(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=40)
        d, r = _signed_ranks(a, np.zeros(40))
        assert wilcoxon_signed_rank(a, np.zeros(40)) == wilcoxon_normal_p(d, r)


class TestHolm:
    def test_example(self):
        np.testing.assert_allclose(holm_adjust([0.01, 0.04, 0.03]), [0.03, 0.06, 0.06])

    def test_single(self):
        np.testing.assert_array_equal(holm_adjust([0.2]), [0.2])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
    def test_properties(self, p):
        adj = holm_adjust(p)
        assert np.all(adj >= np.asarray(p) - 1e-15) and np.all(adj <= 1)
        s = adj[np.argsort(p, kind="stable")]
        assert np.all(np.diff(s) >= 0)


class TestPipeline:
    def test_gate_closed(self):
        ms = [ResultMatrix(np.ones((6, 3)), criterion=c) for c in ("hamming", "ma_f1")]
        for t in two_step_pipeline(ms):
            assert not t.significant.any()
            assert t.friedman_p_adjusted == 1.0

    def test_two_algorithms(self):
        rng = np.random.default_rng(5)
        v = rng.uniform(size=(10, 2))
        (t,) = two_step_pipeline([ResultMatrix(v, criterion="hamming")])
        assert t.holm_adjusted[0, 1] == t.pairwise_p[0, 1]
        assert t.friedman_p_adjusted == t.friedman_p

    def test_strong_difference_flagged(self):
        v = np.column_stack([np.linspace(0.1, 0.2, 12), np.linspace(0.3, 0.4, 12),
                             np.linspace(0.5, 0.6, 12)])
        (t,) = two_step_pipeline([ResultMatrix(v, criterion="hamming")])
        assert t.significant[0, 1] and t.significant[0, 2] and t.significant[1, 2]

    def test_all_pairs_reported(self):
        rng = np.random.default_rng(6)
        (t,) = two_step_pipeline([ResultMatrix(rng.uniform(size=(5, 4)), criterion="hamming")])
        iu = np.triu_indices(4, 1)
        assert np.all(np.isfinite(t.pairwise_p[iu]))
        assert np.all((t.pairwise_p[iu] >= 0) & (t.pairwise_p[iu] <= 1))


class TestFormatting:
    def test_format_p(self):
        assert format_p(5e-4) == "0.000"
        assert format_p(0.9995) == "1.000"
        assert format_p(0.0625) == "0.062"

    def test_table_layout(self):
        v = np.array([[0.1, 0.2, 0.2], [0.3, 0.1, 0.1]])
        ms = [ResultMatrix(v, algorithms=("none", "scm", "bmc"), criterion=c)
              for c in ("hamming", "zero_one", "ex_fdr", "ex_fnr", "ex_f1")]
        lines = format_rank_tables(two_step_pipeline(ms)).splitlines()
        names = [[h.strip() for h in l[4:].split("|")] for l in lines if l.startswith("Nam.")]
        assert names == [["Hamming", "Zero-One", "ExFDR", "ExFNR"], ["ExF1"]]
        rank_rows = [l[4:].split("|") for l in lines if l.startswith("Rank")]
        for block in rank_rows[0] + rank_rows[1]:
            assert sum(float(x) for x in block.split()) == pytest.approx(6.0)
        assert sum(l.startswith(("1 ", "2 ")) for l in lines) == 4

    def test_csv_has_every_pair(self):
        ms = [ResultMatrix(np.eye(3) + 0.1, criterion="ma_f1", direction="higher")]
        csv_text = rank_tables_csv(two_step_pipeline(ms))
        assert csv_text.count("wilcoxon_p_holm") == 3
