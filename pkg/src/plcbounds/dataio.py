"""Readers and writers for every on-disk format.

All floats are written with six decimals.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bounds import BoundsResult, FlipDag, transitive_reduction
from .core import RankingDataset, TopLStats
from .errors import (
    DuplicateItem,
    EmptyDataset,
    IoError,
    NonUniformK,
    PlcError,
    TooFewRatings,
    UnknownSeparator,
)
from .plc import sample_plc_rankings

CONSIDERED_SENTINEL = "#considered"
_FOREIGN_SEPARATORS = (";", "\t")


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _fmt(x: float) -> str:
    return f"{x:.6f}"


class _Interner:
    def __init__(self, labels: Sequence[str] = ()):
        self.labels: list[str] = list(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}

    def __call__(self, label: str) -> int:
        if label not in self.index:
            self.index[label] = len(self.labels)
            self.labels.append(label)
        return self.index[label]


def _split_labels(text: str, line_no: int) -> list[str]:
    if "," not in text and any(sep in text for sep in _FOREIGN_SEPARATORS):
        raise UnknownSeparator(f"line {line_no}: items must be separated by commas")
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def parse_rankings_csv(path, labels: Sequence[str] = ()) -> RankingDataset:
    """Read one ranking per line, best item first.

    A row may carry its consideration set after a ``|``; after a line reading
    ``#considered`` every row must. ``labels`` pre-seeds the item universe.
    """
    intern = _Interner(labels)
    rankings, considered = [], []
    need_sets = False
    k = None
    for line_no, raw in enumerate(_read_text(path).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == CONSIDERED_SENTINEL:
            need_sets = True
            continue
        if line.startswith("#"):
            continue
        head, bar, tail = line.partition("|")
        names = _split_labels(head, line_no)
        if len(set(names)) != len(names):
            raise DuplicateItem(line_no, f" on line {line_no}")
        if k is None:
            k = len(names)
        elif len(names) != k:
            raise NonUniformK(line_no, k, len(names))
        if need_sets and not bar:
            raise PlcError(f"line {line_no}: consideration set missing after {CONSIDERED_SENTINEL}")
        ranking = tuple(intern(x) for x in names)
        cset = None
        if bar:
            cset = frozenset(intern(x) for x in _split_labels(tail, line_no)) | set(ranking)
        rankings.append(ranking)
        considered.append(cset)
    return RankingDataset(len(intern.labels), rankings, considered, tuple(intern.labels))


def write_rankings_csv(path, dataset: RankingDataset) -> None:
    lab = dataset.universe.label
    lines = []
    for r, c in zip(dataset.rankings, dataset.considered):
        row = ",".join(lab(i) for i in r)
        if c is not None:
            row += "|" + ",".join(lab(i) for i in sorted(c))
        lines.append(row)
    _write_text(path, "".join(line + "\n" for line in lines))


@dataclass
class RatingsTable:
    rows: list[tuple[str, str, float]] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for who, item, _ in self.rows:
            if (who, item) in seen:
                raise DuplicateItem(item, f" rated twice by {who!r}")
            seen.add((who, item))


def read_ratings_csv(path) -> RatingsTable:
    """Read ``respondent,item,score`` rows (header required)."""
    rows = []
    reader = csv.DictReader(_read_text(path).splitlines())
    missing = {"respondent", "item", "score"} - set(reader.fieldnames or ())
    if missing:
        raise PlcError(f"{path}: missing columns {sorted(missing)}")
    for rec in reader:
        try:
            score = float(rec["score"])
        except ValueError as exc:
            raise PlcError(f"{path}: bad score {rec['score']!r}") from exc
        rows.append((rec["respondent"].strip(), rec["item"].strip(), score))
    return RatingsTable(rows)


def ratings_to_rankings(
    t: RatingsTable,
    k: Optional[int] = None,
    tie_policy: str = "stable",
    labels: Sequence[str] = (),
) -> tuple[RankingDataset, list[str]]:
    """Sort each respondent's ratings into a ranking with a known consideration set.

    Returns the dataset and the respondents whose scores contained ties.
    ``tie_policy`` is ``"stable"`` (order of appearance) or ``"random:<seed>"``.
    """
    rng = None
    if tie_policy.startswith("random:"):
        rng = np.random.default_rng(int(tie_policy.split(":", 1)[1]))
    elif tie_policy != "stable":
        raise PlcError(f"unknown tie policy {tie_policy!r}")

    by_person: dict[str, list[tuple[str, float]]] = {}
    for who, item, score in t.rows:
        by_person.setdefault(who, []).append((item, score))

    intern = _Interner(labels)
    for who, entries in by_person.items():
        for item, _ in entries:
            intern(item)

    rankings, considered, tied = [], [], []
    for who, entries in by_person.items():
        if len(entries) < 2:
            raise TooFewRatings(who)
        if rng is not None:
            entries = [entries[i] for i in rng.permutation(len(entries))]
        scores = [s for _, s in entries]
        if len(set(scores)) != len(scores):
            tied.append(who)
        ordered = sorted(entries, key=lambda e: -e[1])
        cut = len(ordered) if k is None else k
        if cut > len(ordered):
            raise TooFewRatings(who)
        rankings.append(tuple(intern(item) for item, _ in ordered[:cut]))
        considered.append(frozenset(intern(item) for item, _ in entries))

    lengths = {len(r) for r in rankings}
    if len(lengths) > 1:
        raise PlcError(
            "respondents rated different numbers of items; pass k to truncate"
        )
    return RankingDataset(len(intern.labels), rankings, considered, tuple(intern.labels)), tied


def empirical_top_l_stats(d: RankingDataset) -> TopLStats:
    """Share of rankings that place each item within the first ``l`` positions."""
    if len(d) == 0:
        raise EmptyDataset("no rankings to count")
    counts = np.zeros((d.n, d.k))
    R = np.asarray(d.rankings, dtype=np.int64)
    for pos in range(d.k):
        counts[:, pos] = np.bincount(R[:, pos], minlength=d.n)
    pr = np.cumsum(counts, axis=1) / len(d)
    return TopLStats(pr, source="empirical", samples=len(d), labels=d.labels)


def generate_synthetic(
    n: int,
    k: int,
    u,
    p,
    m: int,
    seed: int,
    labels: Optional[Sequence[str]] = None,
) -> RankingDataset:
    rng = np.random.default_rng(seed)
    labels = tuple(labels) if labels is not None else tuple(f"I{i}" for i in range(n))
    R = sample_plc_rankings(u, p, k, m, rng)
    return RankingDataset(n, [tuple(row) for row in R.tolist()], labels=labels)


def write_synthetic(path, dataset: RankingDataset, u, p, k: int, seed: int) -> dict[str, Path]:
    """Write rankings plus ground-truth sidecars; returns the written paths."""
    path = Path(path)
    write_rankings_csv(path, dataset)
    labels = dataset.universe.labels or tuple(str(i) for i in range(dataset.n))
    truth = {
        "items": list(labels),
        "k": k,
        "seed": seed,
        "m": len(dataset),
        "utilities": [float(x) for x in u],
        "probs": [float(x) for x in p],
        "alpha_true": float(np.sum(p) / k),
    }
    truth_path = path.with_name(path.name + ".truth.json")
    util_path = path.with_name(path.name + ".utilities.csv")
    _write_text(truth_path, json.dumps(truth, indent=2) + "\n")
    write_utilities_csv(util_path, labels, u)
    return {"rankings": path, "truth": truth_path, "utilities": util_path}


def write_utilities_csv(path, labels: Sequence[str], u) -> None:
    lines = ["item,utility"] + [f"{lab},{_fmt(x)}" for lab, x in zip(labels, u)]
    _write_text(path, "\n".join(lines) + "\n")


def read_utilities_csv(path) -> tuple[tuple[str, ...], np.ndarray]:
    reader = csv.DictReader(_read_text(path).splitlines())
    if set(reader.fieldnames or ()) < {"item", "utility"}:
        raise PlcError(f"{path}: expected columns item,utility")
    labels, values = [], []
    for rec in reader:
        labels.append(rec["item"].strip())
        values.append(float(rec["utility"]))
    if len(set(labels)) != len(labels):
        raise PlcError(f"{path}: duplicate item")
    return tuple(labels), np.asarray(values)


def write_stats_csv(path, stats: TopLStats, labels: Sequence[str]) -> None:
    lines = ["item,l,prob"]
    for i, lab in enumerate(labels):
        for ell in range(1, stats.k + 1):
            lines.append(f"{lab},{ell},{_fmt(stats.pr_top[i, ell - 1])}")
    _write_text(path, "\n".join(lines) + "\n")


def read_stats_csv(path, labels: Sequence[str], samples: Optional[int] = None) -> TopLStats:
    """Read long-format statistics onto the universe ``labels``; absent items get 0."""
    index = {lab: i for i, lab in enumerate(labels)}
    reader = csv.DictReader(_read_text(path).splitlines())
    if set(reader.fieldnames or ()) < {"item", "l", "prob"}:
        raise PlcError(f"{path}: expected columns item,l,prob")
    entries = []
    for rec in reader:
        lab = rec["item"].strip()
        if lab not in index:
            raise PlcError(f"{path}: item {lab!r} has no utility")
        entries.append((index[lab], int(rec["l"]), float(rec["prob"])))
    if not entries:
        raise EmptyDataset(f"{path}: no statistics")
    k = max(ell for _, ell, _ in entries)
    pr = np.zeros((len(labels), k))
    for i, ell, prob in entries:
        pr[i, ell - 1] = prob
    source = "empirical" if samples else "exact"
    return TopLStats(pr, source=source, samples=samples, labels=tuple(labels))


def align_stats(stats: TopLStats, labels: Sequence[str]) -> TopLStats:
    """Re-index statistics onto another universe; items missing from ``stats`` get 0."""
    own = stats.labels or tuple(str(i) for i in range(stats.n))
    pos = {lab: i for i, lab in enumerate(own)}
    extra = [lab for lab in own if lab not in set(labels) and stats.pr_top[pos[lab]].any()]
    if extra:
        raise PlcError(f"items without utilities: {extra}")
    pr = np.zeros((len(labels), stats.k))
    for i, lab in enumerate(labels):
        if lab in pos:
            pr[i] = stats.pr_top[pos[lab]]
    return TopLStats(pr, stats.source, stats.samples, tuple(labels))


@dataclass
class BoundsRow:
    item: str
    lower_initial: float
    lower: float
    upper_initial: float
    upper: float
    utility: float


@dataclass
class BoundsReport:
    rows: list[BoundsRow]
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_result(cls, result: BoundsResult, labels: Sequence[str], u, meta: dict) -> "BoundsReport":
        rows = [
            BoundsRow(
                lab,
                float(result.initial.lower[i]),
                float(result.tightened.lower[i]),
                float(result.initial.upper[i]),
                float(result.tightened.upper[i]),
                float(u[i]),
            )
            for i, lab in enumerate(labels)
        ]
        meta = dict(meta)
        meta["inconsistent"] = [labels[i] for i in np.flatnonzero(result.tightened.inconsistent)]
        return cls(rows, meta)

    def sorted_rows(self) -> list[BoundsRow]:
        return sorted(self.rows, key=lambda r: (-r.utility, r.item))


REPORT_COLUMNS = ("item", "lower_initial", "lower", "upper_initial", "upper", "utility")


def emit_bounds_report(b: BoundsReport, path, format: str = "csv") -> None:
    if format == "csv":
        lines = [",".join(REPORT_COLUMNS)]
        for row in b.sorted_rows():
            vals = asdict(row)
            lines.append(",".join([row.item] + [_fmt(vals[c]) for c in REPORT_COLUMNS[1:]]))
        _write_text(path, "\n".join(lines) + "\n")
    elif format == "json":
        payload = {
            "meta": b.meta,
            "rows": [
                {"item": r.item, **{c: round(getattr(r, c), 6) for c in REPORT_COLUMNS[1:]}}
                for r in b.sorted_rows()
            ],
        }
        _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        raise PlcError(f"unknown report format {format!r}")


def parse_bounds_report_json(path) -> BoundsReport:
    payload = json.loads(_read_text(path))
    rows = [BoundsRow(**rec) for rec in payload["rows"]]
    return BoundsReport(rows, payload.get("meta", {}))


def _dot_id(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dag_to_dot(dag: FlipDag, labels: Sequence[str], name: str = "flips") -> str:
    reduced = transitive_reduction(dag)
    nodes = sorted({i for e in reduced.edges for i in e})
    lines = [f"digraph {name} {{"]
    lines += [f"  {_dot_id(labels[i])};" for i in nodes]
    lines += [f"  {_dot_id(labels[i])} -> {_dot_id(labels[j])};" for i, j in reduced.edge_list()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_dag_dot(dag: FlipDag, labels: Sequence[str], path) -> None:
    _write_text(path, dag_to_dot(dag, labels))


def read_params_json(path) -> tuple[tuple[str, ...], np.ndarray, np.ndarray, Optional[int]]:
    """Read ``{"items": [...], "utilities": [...], "probs": [...], "k": int}``."""
    try:
        payload = json.loads(_read_text(path))
        labels = tuple(str(x) for x in payload["items"])
        u = np.asarray(payload["utilities"], dtype=float)
        p = np.asarray(payload["probs"], dtype=float)
    except (KeyError, ValueError, TypeError) as exc:
        raise PlcError(f"{path}: malformed parameter file ({exc})") from exc
    if not (len(labels) == u.size == p.size):
        raise PlcError(f"{path}: items, utilities and probs differ in length")
    k = payload.get("k")
    return labels, u, p, (int(k) if k is not None else None)
