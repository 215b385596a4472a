"""CSV ingestion, study orchestration and report emission."""

import csv
import io
import json
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .clubs import ClusterConfig, OrderingRule, cluster_all, merge_clubs, transition_test
from .exceptions import (
    ClubConvergenceError,
    DuplicateCell,
    InputError,
    ParseError,
    RaggedPanel,
)
from .logt import LogTConfig, compute_transition_paths
from .panel import (
    DEFAULT_EPSILON,
    Scale,
    build_panel,
    check_analysable,
    hp_smooth,
    rebase,
    screen_degenerate_periods,
    to_log,
)

LONG_HEADER = ["unit", "period", "value"]


def _period_label(text):
    try:
        return int(text)
    except ValueError:
        return text


def _parse_float(text, line, column):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"line {line}, column {column}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise ParseError(f"line {line}, column {column}: non-finite value {text!r}")
    return value


def _sort_periods(periods):
    labels = [_period_label(p) for p in periods]
    if all(isinstance(p, int) for p in labels):
        return sorted(labels)
    return sorted(str(p) for p in labels)


def read_panel_csv(path, layout="wide"):
    """Read a raw-index panel from a ``long`` or ``wide`` CSV file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [(n, r) for n, r in enumerate(rows, start=1) if any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    if layout == "long":
        cells = _read_long(rows)
    elif layout == "wide":
        cells = _read_wide(rows)
    else:
        raise InputError(f"unknown layout {layout!r}")

    units = sorted({u for u, _ in cells})
    periods = _sort_periods({str(p) for _, p in cells})
    values = np.empty((len(units), len(periods)))
    for i, u in enumerate(units):
        for j, p in enumerate(periods):
            try:
                values[i, j] = cells[(u, str(p))]
            except KeyError:
                raise RaggedPanel(f"unit {u} has no value for period {p}") from None
    return build_panel(units, periods, values)


def _read_long(rows):
    line, header = rows[0]
    if [h.strip() for h in header] != LONG_HEADER:
        raise ParseError(f"line {line}: expected header {','.join(LONG_HEADER)}, got {','.join(header)}")
    cells = {}
    for line, row in rows[1:]:
        if len(row) != 3:
            raise ParseError(f"line {line}, column {min(len(row) + 1, 4)}: expected 3 fields, got {len(row)}")
        unit, period = row[0].strip(), str(_period_label(row[1].strip()))
        if not unit:
            raise ParseError(f"line {line}, column 1: empty unit")
        if not period:
            raise ParseError(f"line {line}, column 2: empty period")
        key = (unit, period)
        if key in cells:
            raise DuplicateCell(f"line {line}: duplicate cell for unit {unit}, period {period}")
        cells[key] = _parse_float(row[2].strip(), line, 3)
    return cells


def _read_wide(rows):
    line, header = rows[0]
    header = [h.strip() for h in header]
    if not header or header[0] != "unit":
        raise ParseError(f"line {line}, column 1: first header must be 'unit'")
    periods = [str(_period_label(h)) for h in header[1:]]
    if len(set(periods)) != len(periods):
        raise ParseError(f"line {line}: duplicate period column")
    cells = {}
    seen = set()
    for line, row in rows[1:]:
        unit = row[0].strip()
        if not unit:
            raise ParseError(f"line {line}, column 1: empty unit")
        if unit in seen:
            raise DuplicateCell(f"line {line}: unit {unit} appears twice")
        seen.add(unit)
        if len(row) > len(header):
            raise ParseError(f"line {line}, column {len(header) + 1}: more fields than header")
        for col, period in enumerate(periods, start=2):
            text = row[col - 1].strip() if col - 1 < len(row) else ""
            if not text:
                raise RaggedPanel(f"unit {unit} has no value for period {period}")
            cells[(unit, period)] = _parse_float(text, line, col)
    return cells


def write_panel_csv(panel, path, layout="wide"):
    values = panel.values
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if layout == "long":
            w.writerow(LONG_HEADER)
            for i, u in enumerate(panel.unit_ids):
                for j, p in enumerate(panel.period_labels):
                    w.writerow([u, p, repr(float(values[i, j]))])
        else:
            w.writerow(["unit", *panel.period_labels])
            for i, u in enumerate(panel.unit_ids):
                w.writerow([u, *(repr(float(v)) for v in values[i])])


@dataclass
class StudySpec:
    input: object = None
    layout: str = "wide"
    base_period: object = None
    window: tuple = (None, None)
    category: str = ""
    trim: float = 0.3
    trim_convention: str = "floor_rT_plus_1"
    hac_lag: object = "auto"
    ordering: str = "mean_last_half"
    c_star: float = 0.0
    critical: float = -1.65
    merge: bool = True
    transitions: list = field(default_factory=list)
    smooth_hp: object = None
    epsilon: float = DEFAULT_EPSILON
    format: str = "text"

    def cluster_config(self):
        return ClusterConfig(
            ordering=OrderingRule(self.ordering),
            c_star=self.c_star,
            logt=LogTConfig(
                trim_fraction=self.trim,
                trim_convention=self.trim_convention,
                hac_lag=self.hac_lag,
                critical=self.critical,
            ),
        )


@dataclass
class AnalysisReport:
    """Plain-data analysis result; every field survives a JSON round trip."""

    meta: dict
    full_panel: dict
    clubs: list
    merged_clubs: list
    merge_tests: list
    transitions: list
    divergent: list
    paths: dict


@contextmanager
def _stage(name):
    try:
        yield
    except ClubConvergenceError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def _float(x):
    return float(x)


def logt_to_dict(res):
    return {
        "t_stat": _float(res.t_stat),
        "b_hat": _float(res.b_hat),
        "alpha_hat": _float(res.alpha_hat),
        "a_hat": _float(res.a_hat),
        "hac_se": _float(res.hac_se),
        "lag": int(res.lag),
        "n_units": int(res.n_units),
        "window": list(res.window),
        "classification": res.classification.value,
        "residuals": [_float(r) for r in res.residuals],
    }


def _club_dict(club):
    return {
        "rank": club.rank,
        "label": club.label,
        "members": list(club.members),
        "weak": bool(club.weak),
        "mean_final_level": _float(club.mean_final_level),
        "logt": logt_to_dict(club.logt),
    }


def club_paths(panel, clubs):
    """Average relative transition path of each club against the full-panel mean."""
    h = compute_transition_paths(panel).h
    out = {}
    for club in clubs:
        rows = [panel.unit_index(u) for u in club.members]
        out[club.label] = [_float(v) for v in h[rows].mean(axis=0)]
    return out


def analyse_panel(panel, spec, screen_report=None, meta=None):
    """Clustering, merging and transition tests on a screened log panel."""
    config = spec.cluster_config()
    with _stage("analyse"):
        check_analysable(panel)
        partition = cluster_all(panel, config)
    with _stage("merge"):
        if spec.merge:
            merged, tests = merge_clubs(partition, panel, config)
        else:
            merged, tests = partition, []
    transitions = []
    with _stage("transition"):
        for a, b in spec.transitions:
            res = transition_test(panel, a, b, config)
            transitions.append({"subset_a": list(a), "subset_b": list(b), "logt": logt_to_dict(res)})
    meta = dict(meta or {})
    meta.update(
        {
            "category": spec.category,
            "n_units": panel.n_units,
            "periods": list(panel.period_labels),
            "dropped_periods": [] if screen_report is None else list(screen_report.dropped_periods),
            "drop_reasons": [] if screen_report is None else [r.value for r in screen_report.reasons],
            "config": {
                "trim": spec.trim,
                "trim_convention": config.logt.trim_convention.value,
                "hac_lag": config.logt.hac_lag,
                "ordering": config.ordering.value,
                "c_star": config.c_star,
                "critical": config.critical,
                "merge": spec.merge,
                "smooth_hp": spec.smooth_hp,
            },
        }
    )
    return AnalysisReport(
        meta=meta,
        full_panel=logt_to_dict(partition.full_panel),
        clubs=[_club_dict(c) for c in partition.clubs],
        merged_clubs=[_club_dict(c) for c in merged.clubs],
        merge_tests=[
            {
                "round": t.round,
                "label": t.label,
                "ranks": list(t.ranks),
                "members": list(t.members),
                "merged": t.merged,
                "logt": None if t.result is None else logt_to_dict(t.result),
            }
            for t in tests
        ],
        transitions=transitions,
        divergent=list(partition.divergent),
        paths={"periods": list(panel.period_labels), "clubs": club_paths(panel, partition.clubs)},
    )


def prepare_panel(raw, spec):
    """Rebase, window, log, screen and optionally smooth a raw-index panel."""
    start, end = spec.window
    with _stage("window"):
        if spec.base_period is not None:
            j = raw.period_index(spec.base_period)
            lo = 0 if start is None else raw.period_index(start)
            hi = raw.n_periods - 1 if end is None else raw.period_index(end)
            if not lo - 1 <= j <= hi:
                raise InputError(
                    f"base period {spec.base_period} must lie in the window or just before it"
                )
    with _stage("rebase"):
        panel = raw if spec.base_period is None else rebase(raw, spec.base_period)
    with _stage("window"):
        panel = panel.slice_periods(start, end)
    with _stage("log"):
        panel = to_log(panel)
    with _stage("screen"):
        panel, report = screen_degenerate_periods(panel, spec.epsilon)
    if spec.smooth_hp is not None:
        with _stage("smooth"):
            panel = hp_smooth(panel, float(spec.smooth_hp))
    return panel, report


def run_study(spec):
    with _stage("read"):
        raw = read_panel_csv(spec.input, spec.layout)
    panel, screen = prepare_panel(raw, spec)
    meta = {
        "input": str(Path(spec.input).name),
        "base_period": spec.base_period,
        "window": [raw.period_labels[0] if spec.window[0] is None else _period_label(str(spec.window[0])),
                   raw.period_labels[-1] if spec.window[1] is None else _period_label(str(spec.window[1]))],
    }
    return analyse_panel(panel, spec, screen, meta)


# -- emission ---------------------------------------------------------------


def _fmt(x):
    if x is None:
        return ""
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


def _fmt_t(logt, critical):
    s = _fmt(logt["t_stat"])
    return s + "*" if logt["classification"] == "reject_convergence" else s


def _table(rows, align):
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for r in rows:
        cells = [c.ljust(w) if a == "l" else c.rjust(w) for c, w, a in zip(r, widths, align)]
        out.append("  ".join(cells).rstrip())
    return out


def _club_rows(clubs, critical):
    rows = []
    for c in clubs:
        lt = c["logt"]
        rows.append([c["label"], ", ".join(c["members"]), _fmt_t(lt, critical),
                     _fmt(lt["b_hat"]), _fmt(lt["alpha_hat"]), lt["classification"]])
    return rows


def emit_text(report):
    crit = report.meta.get("config", {}).get("critical", -1.65)
    m = report.meta
    lines = []
    head = []
    if m.get("category"):
        head.append(f"Category: {m['category']}")
    if m.get("base_period") is not None:
        head.append(f"Base period: {m['base_period']}")
    if m.get("window"):
        head.append(f"Window: {m['window'][0]}-{m['window'][1]}")
    if head:
        lines.append("   ".join(head))
    fp = report.full_panel
    lines.append(f"Units: {m.get('n_units')}   Regression window: {fp['window'][0]}-{fp['window'][1]}   HAC lag: {fp['lag']}")
    if m.get("dropped_periods"):
        dropped = ", ".join(f"{p} ({r})" for p, r in zip(m["dropped_periods"], m["drop_reasons"]))
        lines.append(f"Dropped periods: {dropped}")
    lines.append("")
    lines.append("Initial classification")
    rows = [["", "Members", "t_b", "b_hat", "alpha_hat", "Classification"]]
    rows.append(["Full panel", "", _fmt_t(fp, crit), _fmt(fp["b_hat"]), _fmt(fp["alpha_hat"]), fp["classification"]])
    rows += _club_rows(report.clubs, crit)
    if report.divergent:
        rows.append(["Diverge", ", ".join(report.divergent), "", "", "", ""])
    lines += _table(rows, "llrrrl")

    if report.merge_tests:
        lines.append("")
        lines.append("Test of club merger")
        rows = [["Round", "Clubs", "t_b", "b_hat", "Merged"]]
        for t in report.merge_tests:
            lt = t["logt"]
            rows.append([str(t["round"]), t["label"],
                         "" if lt is None else _fmt_t(lt, crit),
                         "" if lt is None else _fmt(lt["b_hat"]),
                         "yes" if t["merged"] else "no"])
        lines += _table(rows, "rlrrl")
        if report.merged_clubs != report.clubs:
            lines.append("")
            lines.append("Clubs after merging")
            rows = [["", "Members", "t_b", "b_hat", "alpha_hat", "Classification"]]
            rows += _club_rows(report.merged_clubs, crit)
            lines += _table(rows, "llrrrl")

    if report.transitions:
        lines.append("")
        lines.append("Transition")
        rows = [["Subsets", "t_b", "b_hat"]]
        for tr in report.transitions:
            label = f"{', '.join(tr['subset_a'])} plus {', '.join(tr['subset_b'])}"
            rows.append([label, _fmt_t(tr["logt"], crit), _fmt(tr["logt"]["b_hat"])])
        lines += _table(rows, "lrr")
    lines.append("")
    lines.append("* Rejection of the null of convergence.")
    return "\n".join(lines) + "\n"


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def emit_json(report):
    return json.dumps(asdict(report), indent=2, sort_keys=True, default=_json_default) + "\n"


def report_from_json(data):
    payload = json.loads(data)
    names = {f.name for f in fields(AnalysisReport)}
    return AnalysisReport(**{k: v for k, v in payload.items() if k in names})


def _csv_bytes(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue().encode("utf-8")


def emit_csv_tables(report):
    """One CSV document per table, keyed by file name."""
    stat_cols = ["t_stat", "b_hat", "alpha_hat", "a_hat", "hac_se", "classification"]

    def stats(lt):
        return [lt[c] if c == "classification" else repr(lt[c]) for c in stat_cols]

    tables = {}
    tables["full_panel.csv"] = _csv_bytes([stat_cols, stats(report.full_panel)])
    for name, clubs in (("clubs.csv", report.clubs), ("merged_clubs.csv", report.merged_clubs)):
        rows = [["rank", "members", "weak", *stat_cols]]
        rows += [[c["rank"], " ".join(c["members"]), c["weak"], *stats(c["logt"])] for c in clubs]
        tables[name] = _csv_bytes(rows)
    rows = [["round", "label", "members", "merged", *stat_cols]]
    for t in report.merge_tests:
        lt = t["logt"]
        rows.append([t["round"], t["label"], " ".join(t["members"]), t["merged"],
                     *(stats(lt) if lt else [""] * len(stat_cols))])
    tables["merge_tests.csv"] = _csv_bytes(rows)
    rows = [["subset_a", "subset_b", *stat_cols]]
    rows += [[" ".join(t["subset_a"]), " ".join(t["subset_b"]), *stats(t["logt"])] for t in report.transitions]
    tables["transitions.csv"] = _csv_bytes(rows)
    tables["divergent.csv"] = _csv_bytes([["unit"], *([u] for u in report.divergent)])
    labels = list(report.paths["clubs"])
    rows = [["period", *labels]]
    for j, p in enumerate(report.paths["periods"]):
        rows.append([p, *(repr(report.paths["clubs"][k][j]) for k in labels)])
    tables["paths.csv"] = _csv_bytes(rows)
    return tables


def emit_report(report, format="text"):
    if format == "text":
        return emit_text(report).encode("utf-8")
    if format == "json":
        return emit_json(report).encode("utf-8")
    if format == "csv":
        parts = []
        for name, data in emit_csv_tables(report).items():
            parts.append(f"# {name}\n".encode("utf-8") + data)
        return b"\n".join(parts)
    raise InputError(f"unknown output format {format!r}")


# -- config files -----------------------------------------------------------


def read_config(path):
    """Parse a flat ``key=value`` file. Repeated keys collect into lists."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}: line {n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key in out:
                if not isinstance(out[key], list):
                    out[key] = [out[key]]
                out[key].append(value)
            else:
                out[key] = value
    return out
