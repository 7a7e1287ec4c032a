"""
Reporting System for Fair Top-k
Text tables for the terminal and the CSV/SVG files written by the CLI
"""

from __future__ import annotations

import logging
from pathlib import Path

import pandas as pd

from topk.charts import class_rate_chart, tracks_summary_chart, tradeoff_chart

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"
SWEEP_COLUMNS = [
    "lambda", "k", "total_utility", "avg_utility", "avg_utility_decrease",
    "mean_discrepancy", "parity_reached", "discrepancy",
]
CLASS_COLUMNS = ["lambda", "class_label", "rate", "discrepancy", "admitted"]
STATS_COLUMNS = ["label", "size", "mean", "min", "q1", "median", "q3", "max"]


def _to_csv(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return Path(path)


def _table(headers, rows):
    """Right-aligned plain text table"""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(cell.rjust(width) for cell, width in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines)


def format_breakdown(instance, params, selection, breakdown, solver=None) -> str:
    """J, B, D summary followed by the per-class table"""
    head = [
        f"solver: {solver}" if solver else None,
        f"k = {params.quota}  p = {params.selection_rate:.6g}  lambda = {params.tradeoff:.6g}",
        f"J = {breakdown.total:.6f}",
        f"B = {breakdown.utility:.6f}",
        f"D = {breakdown.discrepancy:.6f}  (mean {breakdown.mean_discrepancy:.6f})",
        "",
    ]
    rows = []
    for cls, count, utility, discrepancy in zip(instance.classes, selection.counts,
                                                breakdown.per_class_utility,
                                                breakdown.per_class_discrepancy):
        rows.append([cls.label, cls.size, count, f"{count / cls.size:.4f}",
                     f"{utility:.2f}", f"{discrepancy:.4f}"])
    table = _table(["class", "size", "admitted", "rate", "utility", "discrepancy"], rows)
    return "\n".join(line for line in head if line is not None) + "\n" + table + "\n"


def format_stats(stats) -> str:
    rows = [[s.label, s.size, f"{s.mean:.2f}", f"{s.min:.2f}", f"{s.q1:.2f}",
             f"{s.median:.2f}", f"{s.q3:.2f}", f"{s.max:.2f}"] for s in stats]
    return _table(STATS_COLUMNS, rows) + "\n"


def stats_frame(stats) -> pd.DataFrame:
    return pd.DataFrame([[s.label, s.size, s.mean, s.min, s.q1, s.median, s.q3, s.max] for s in stats],
                        columns=STATS_COLUMNS)


def write_stats(stats, path) -> Path:
    return _to_csv(stats_frame(stats), path)


def selection_frame(instance, selection) -> pd.DataFrame:
    """Admitted candidates in rank order with their class labels"""
    rows = []
    for cls, count in zip(instance.classes, selection.counts):
        for member in cls.members[:count]:
            rows.append([member.id, member.score, cls.label])
    frame = pd.DataFrame(rows, columns=["id", "score", "class_label"])
    return frame.sort_values(["score", "id"], ascending=[False, True], kind="mergesort",
                             ignore_index=True)


def format_selection(instance, selection, fmt="ids") -> str:
    frame = selection_frame(instance, selection)
    if fmt == "ids":
        return "".join(f"{candidate_id}\n" for candidate_id in frame["id"])
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def sweep_frame(run) -> pd.DataFrame:
    rows = [[r.tradeoff, r.k, r.total_utility, r.avg_utility, r.avg_utility_decrease,
             r.mean_discrepancy, r.parity_reached, r.discrepancy] for r in run.results]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def class_frame(run) -> pd.DataFrame:
    """Long format: one row per (lambda, class)"""
    rows = []
    for r in run.results:
        for label, rate, discrepancy, admitted in zip(run.labels, r.per_class_rate,
                                                      r.per_class_discrepancy, r.counts):
            rows.append([r.tradeoff, label, rate, discrepancy, admitted])
    return pd.DataFrame(rows, columns=CLASS_COLUMNS)


def _write_svg(text, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info("wrote %s", path)
    return Path(path)


def write_run(run, out_dir, tag) -> list[Path]:
    """sweep_<tag>.csv, classes_<tag>.csv, tradeoff_<tag>.svg, classes_<tag>.svg"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        _to_csv(sweep_frame(run), out_dir / f"sweep_{tag}.csv"),
        _to_csv(class_frame(run), out_dir / f"classes_{tag}.csv"),
        _write_svg(tradeoff_chart(run), out_dir / f"tradeoff_{tag}.svg"),
        _write_svg(class_rate_chart(run), out_dir / f"classes_{tag}.svg"),
    ]


def rate_tag(rate) -> str:
    return f"p{rate:.2f}"


def write_single_track(runs, out_dir) -> list[Path]:
    paths = []
    for rate, run in runs.items():
        paths.extend(write_run(run, out_dir, rate_tag(rate)))
    return paths


def tracks_frame(runs) -> pd.DataFrame:
    rows = []
    for program_id, run in runs.items():
        last = run.results[-1] if run.results else None
        rows.append([
            program_id,
            run.rate,
            sum(run.sizes),
            len(run.labels),
            " ".join(run.removed_classes),
            len(run.results),
            last.tradeoff if last else None,
            last.mean_discrepancy if last else None,
            last.avg_utility_decrease if last else None,
            run.parity_reached,
            run.skipped_reason or "",
        ])
    return pd.DataFrame(rows, columns=[
        "program_id", "rate", "n", "classes", "removed_classes", "points", "final_lambda",
        "final_mean_discrepancy", "final_avg_utility_decrease", "parity_reached", "skipped",
    ])


def write_separate_tracks(runs, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for program_id, run in runs.items():
        if not run.skipped:
            paths.extend(write_run(run, out_dir, program_id))
    paths.append(_to_csv(tracks_frame(runs), out_dir / "tracks.csv"))
    paths.append(_write_svg(tracks_summary_chart(runs), out_dir / "tracks_summary.svg"))
    return paths


def efficiency_frame(records) -> pd.DataFrame:
    return pd.DataFrame([list(r) for r in records],
                        columns=["n", "k", "solver", "seconds", "op_count", "objective"])


def format_efficiency(records) -> str:
    rows = [[r.n, r.k, r.solver, f"{r.seconds:.4f}", r.op_count, f"{r.objective:.4f}"] for r in records]
    return _table(["n", "k", "solver", "seconds", "op_count", "objective"], rows) + "\n"


def write_efficiency(records, path) -> Path:
    return _to_csv(efficiency_frame(records), path)
