import json

import numpy as np
import pydot
import pytest

from plcbounds.bounds import AlphaAssumption, FlipDag, compute_bounds
from plcbounds.core import RankingDataset
from plcbounds.dataio import (
    BoundsReport,
    BoundsRow,
    RatingsTable,
    dag_to_dot,
    emit_bounds_report,
    empirical_top_l_stats,
    generate_synthetic,
    parse_bounds_report_json,
    parse_rankings_csv,
    ratings_to_rankings,
    read_ratings_csv,
    read_stats_csv,
    read_utilities_csv,
    write_rankings_csv,
    write_stats_csv,
    write_synthetic,
    write_utilities_csv,
)
from plcbounds.errors import (
    DuplicateItem,
    EmptyDataset,
    IoError,
    NonUniformK,
    PlcError,
    TooFewRatings,
    UnknownSeparator,
)
from plcbounds.plc import plc_top_l_matrix


@pytest.fixture
def write(tmp_path):
    def _write(text, name="in.csv"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write


class TestRankingsCsv:
    def test_basic(self, write):
        d = parse_rankings_csv(write("MA,VA,NY\nVA,MA,PA\n"))
        assert len(d) == 2 and d.k == 3
        assert d.labels == ("MA", "VA", "NY", "PA")
        assert d.rankings[1] == (1, 0, 3)

    def test_duplicate(self, write):
        with pytest.raises(DuplicateItem) as exc:
            parse_rankings_csv(write("MA,MA,NY"))
        assert exc.value.index == 1

    def test_non_uniform(self, write):
        with pytest.raises(NonUniformK) as exc:
            parse_rankings_csv(write("MA,VA\nMA,VA,NY"))
        assert exc.value.line == 2

    def test_separator(self, write):
        with pytest.raises(UnknownSeparator):
            parse_rankings_csv(write("MA;VA;NY\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError):
            parse_rankings_csv(tmp_path / "absent.csv")

    def test_consideration_sets(self, write):
        d = parse_rankings_csv(write("A,B|A,B,C\n#considered\nC,A|A,C,D\n"))
        assert d.considered[0] == frozenset({0, 1, 2})
        assert d.considered[1] == frozenset({0, 2, 3})
        assert d.labels == ("A", "B", "C", "D")

    def test_sentinel_requires_sets(self, write):
        with pytest.raises(PlcError):
            parse_rankings_csv(write("#considered\nA,B\n"))

    def test_round_trip(self, write, tmp_path):
        d = parse_rankings_csv(write("A,B|A,B,C\nC,A|A,C\n"))
        out = tmp_path / "out.csv"
        write_rankings_csv(out, d)
        again = parse_rankings_csv(out)
        assert again.rankings == d.rankings and again.considered == d.considered


class TestRatings:
    def test_sort(self):
        d, tied = ratings_to_rankings(RatingsTable([("r", "A", 30), ("r", "B", 20), ("r", "C", 10)]))
        assert d.rankings == [(0, 1, 2)] and d.considered == [frozenset({0, 1, 2})]
        assert tied == []

    def test_truncate(self):
        d, _ = ratings_to_rankings(RatingsTable([("r", "A", 30), ("r", "B", 20), ("r", "C", 10)]), k=2)
        assert d.rankings == [(0, 1)] and d.considered == [frozenset({0, 1, 2})]

    def test_stable_tie(self):
        d, tied = ratings_to_rankings(RatingsTable([("r", "A", 20), ("r", "B", 20)]))
        assert d.rankings == [(0, 1)] and tied == ["r"]

    def test_random_tie_is_seeded(self):
        t = RatingsTable([(f"r{i}", x, 1.0) for i in range(30) for x in "AB"])
        a, _ = ratings_to_rankings(t, tie_policy="random:4")
        b, _ = ratings_to_rankings(t, tie_policy="random:4")
        assert a.rankings == b.rankings
        assert len(set(a.rankings)) == 2

    def test_too_few(self):
        with pytest.raises(TooFewRatings):
            ratings_to_rankings(RatingsTable([("r", "A", 1.0)]))

    def test_read(self, write):
        t = read_ratings_csv(write("respondent,item,score\n1,A,5\n1,B,7\n"))
        assert t.rows == [("1", "A", 5.0), ("1", "B", 7.0)]


class TestEmpiricalStats:
    def test_counts(self):
        s = empirical_top_l_stats(RankingDataset(3, [(0, 1), (1, 0)]))
        assert s.prob(0, 1) == 0.5 and s.prob(0, 2) == 1.0
        np.testing.assert_array_equal(s.pr_top[2], [0, 0])
        assert s.source == "empirical" and s.samples == 2

    def test_column_sums(self, rng):
        d = RankingDataset(7, [tuple(rng.permutation(7)[:3].tolist()) for _ in range(123)])
        np.testing.assert_allclose(empirical_top_l_stats(d).pr_top.sum(axis=0), [1, 2, 3])

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            empirical_top_l_stats(RankingDataset(3))


class TestSynthetic:
    def test_empty_with_sidecar(self, tmp_path):
        d = generate_synthetic(3, 1, [0, 0, 0], [0.5] * 3, 0, 1)
        paths = write_synthetic(tmp_path / "s.csv", d, [0, 0, 0], [0.5] * 3, 1, 1)
        assert paths["rankings"].read_text() == ""
        truth = json.loads(paths["truth"].read_text())
        assert truth["alpha_true"] == pytest.approx(1.5)

    def test_byte_identical(self, tmp_path):
        u, p = [0.3, 0.1, -0.2, 0.5], [0.5, 0.7, 0.9, 0.4]
        for name in ("a.csv", "b.csv"):
            write_synthetic(tmp_path / name, generate_synthetic(4, 2, u, p, 500, 11), u, p, 2, 11)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_matches_exact_within_three_se(self):
        u, p = np.array([0.8, 0.0, -0.4, 0.3]), np.array([0.5, 0.8, 0.7, 0.35])
        m = 100_000
        emp = empirical_top_l_stats(generate_synthetic(4, 2, u, p, m, 5)).pr_top
        exact = plc_top_l_matrix(u, p, 2).pr_top
        se = np.sqrt(exact * (1 - exact) / m)
        assert np.all(np.abs(emp - exact) <= 3 * se + 1e-12)


class TestTables:
    def test_utilities_round_trip(self, tmp_path):
        write_utilities_csv(tmp_path / "u.csv", ["A", "B"], [0.0, 1.25])
        labels, u = read_utilities_csv(tmp_path / "u.csv")
        assert labels == ("A", "B") and u.tolist() == [0.0, 1.25]

    def test_stats_round_trip_with_unseen_item(self, tmp_path):
        s = empirical_top_l_stats(RankingDataset(2, [(0, 1), (1, 0)], labels=("A", "B")))
        write_stats_csv(tmp_path / "s.csv", s, ["A", "B"])
        back = read_stats_csv(tmp_path / "s.csv", ["A", "B", "C"])
        np.testing.assert_array_equal(back.pr_top, [[0.5, 1], [0.5, 1], [0, 0]])
        assert back.source == "exact"
        assert read_stats_csv(tmp_path / "s.csv", ["A", "B"], samples=2).source == "empirical"


class TestReport:
    def test_single_row(self, tmp_path):
        rep = BoundsReport([BoundsRow("MA", 0.59, 0.59, 1.0, 1.0, 2.5)])
        emit_bounds_report(rep, tmp_path / "r.csv", "csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines == [
            "item,lower_initial,lower,upper_initial,upper,utility",
            "MA,0.590000,0.590000,1.000000,1.000000,2.500000",
        ]

    def test_header_only(self, tmp_path):
        emit_bounds_report(BoundsReport([]), tmp_path / "r.csv", "csv")
        assert (tmp_path / "r.csv").read_text() == "item,lower_initial,lower,upper_initial,upper,utility\n"

    def test_row_order(self, tmp_path):
        rep = BoundsReport([BoundsRow("low", 0, 0, 1, 1, -1.0), BoundsRow("high", 0, 0, 1, 1, 3.0)])
        emit_bounds_report(rep, tmp_path / "r.csv", "csv")
        assert (tmp_path / "r.csv").read_text().splitlines()[1].startswith("high,")

    def test_json_round_trip(self, tmp_path):
        rep = BoundsReport(
            [BoundsRow("A", 0.25, 0.3, 0.9, 0.8, 1.5), BoundsRow("B", 0.0, 0.1, 1.0, 1.0, 0.5)],
            {"alpha": 5.0, "k": 3},
        )
        emit_bounds_report(rep, tmp_path / "r.json", "json")
        assert parse_bounds_report_json(tmp_path / "r.json") == rep

    def test_from_result(self):
        u = np.array([1.0, 0.0])
        res = compute_bounds(plc_top_l_matrix(u, [0.6, 0.9], 1), u, AlphaAssumption(1.2, 1))
        rep = BoundsReport.from_result(res, ["A", "B"], u, {})
        assert [r.item for r in rep.sorted_rows()] == ["A", "B"]
        assert all(0 <= r.lower <= r.upper <= 1 for r in rep.rows)


class TestDot:
    def test_empty(self):
        graph = pydot.graph_from_dot_data(dag_to_dot(FlipDag(3), ["A", "B", "C"]))[0]
        assert graph.get_edges() == []

    def test_reduced_triangle(self):
        dag = FlipDag(3, {(0, 1): [], (1, 2): [], (0, 2): []})
        text = dag_to_dot(dag, ["MA", "VA", "NY"])
        graph = pydot.graph_from_dot_data(text)[0]
        edges = sorted((e.get_source().strip('"'), e.get_destination().strip('"')) for e in graph.get_edges())
        assert edges == [("MA", "VA"), ("VA", "NY")]
        assert text == dag_to_dot(dag, ["MA", "VA", "NY"])

    def test_awkward_labels(self):
        text = dag_to_dot(FlipDag(2, {(0, 1): []}), ['New "York"', "a b"])
        graph = pydot.graph_from_dot_data(text)[0]
        assert len(graph.get_edges()) == 1
