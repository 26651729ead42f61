"""Benchmark result tables: CSV serialization, merging, and rendering.

The delimited format is fixed:

    method,strategy,filter,channel,best_param,bdm_mean,bdm_std,n_sims

Scores carry two decimals, parameters four.  A missing value (no swept
parameter, or no single channel) is written as "-".  Merged tables are sorted
by (method, strategy, filter, channel) and deduplicated row-wise.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

CSV_HEADER = ("method", "strategy", "filter", "channel", "best_param", "bdm_mean", "bdm_std", "n_sims")

_MISSING = "-"


class ReportFormatError(ValueError):
    """Raised when a result file does not match the expected schema."""


@dataclass(frozen=True)
class ReportRow:
    method: str
    strategy: str
    filter: str
    channel: str
    best_param: float | None
    bdm_mean: float
    bdm_std: float
    n_sims: int

    def sort_key(self) -> tuple:
        return (
            self.method,
            self.strategy,
            self.filter,
            self.channel,
            self.best_param if self.best_param is not None else float("-inf"),
            self.bdm_mean,
            self.bdm_std,
            self.n_sims,
        )

    def to_fields(self) -> tuple[str, ...]:
        param = _MISSING if self.best_param is None else f"{self.best_param:.4f}"
        return (
            self.method,
            self.strategy,
            self.filter,
            self.channel,
            param,
            f"{self.bdm_mean:.2f}",
            f"{self.bdm_std:.2f}",
            str(self.n_sims),
        )


def render_csv(rows: list[ReportRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.to_fields())
    return buffer.getvalue()


def write_report(rows: list[ReportRow], path: str | Path) -> None:
    Path(path).write_text(render_csv(rows), encoding="utf-8")


def _parse_field(name: str, raw: str, path: Path, lineno: int):
    try:
        if name == "best_param":
            return None if raw == _MISSING else float(raw)
        if name in ("bdm_mean", "bdm_std"):
            return float(raw)
        if name == "n_sims":
            return int(raw)
    except ValueError:
        raise ReportFormatError(f"{path}:{lineno}: bad {name} value {raw!r}") from None
    return raw


def read_report(path: str | Path) -> list[ReportRow]:
    p = Path(path)
    with p.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise ReportFormatError(f"{p}: empty file") from None
        if header != CSV_HEADER:
            raise ReportFormatError(
                f"{p}: header {','.join(header)!r} does not match {','.join(CSV_HEADER)!r}"
            )
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(CSV_HEADER):
                raise ReportFormatError(f"{p}:{lineno}: expected {len(CSV_HEADER)} fields")
            values = {
                name: _parse_field(name, raw, p, lineno)
                for name, raw in zip(CSV_HEADER, record)
            }
            rows.append(ReportRow(**values))
    return rows


def merge_rows(row_lists: list[list[ReportRow]]) -> list[ReportRow]:
    """Union, deduplicated on full row equality, deterministically sorted."""
    seen = set()
    merged = []
    for rows in row_lists:
        for row in rows:
            if row not in seen:
                seen.add(row)
                merged.append(row)
    return sorted(merged, key=ReportRow.sort_key)


def best_row_index(rows: list[ReportRow]) -> int:
    """Index of the lowest mean score; first in order wins ties."""
    if not rows:
        raise ValueError("no rows")
    best = 0
    for i, row in enumerate(rows):
        if row.bdm_mean < rows[best].bdm_mean:
            best = i
    return best


def summary_table(rows: list[ReportRow]) -> str:
    """Aligned text table with scores shown as "mean (std)"; the best row is
    marked with an asterisk."""
    if not rows:
        return "(no results)\n"
    best = best_row_index(rows)
    header = ("method", "strategy", "filter", "channel", "best_param", "score")
    body = []
    for i, row in enumerate(rows):
        param = _MISSING if row.best_param is None else f"{row.best_param:.4f}"
        score = f"{row.bdm_mean:.2f} ({row.bdm_std:.2f})"
        mark = " *" if i == best else ""
        body.append((row.method, row.strategy, row.filter, row.channel, param, score + mark))
    widths = [max(len(header[c]), max(len(r[c]) for r in body)) for c in range(len(header))]
    lines = [
        "  ".join(h.ljust(widths[c]) for c, h in enumerate(header)).rstrip(),
        "  ".join("-" * widths[c] for c in range(len(header))),
    ]
    for r in body:
        lines.append("  ".join(r[c].ljust(widths[c]) for c in range(len(header))).rstrip())
    lines.append("")
    lines.append("* lowest mean score")
    return "\n".join(lines) + "\n"


def render_figure(rows: list[ReportRow], path: str | Path) -> None:
    """Bar chart of mean scores with standard-deviation whiskers."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = []
    for row in rows:
        channel = f"({row.channel})" if row.channel != _MISSING else ""
        labels.append(f"{row.method}\n{row.strategy}{channel}, {row.filter}")
    means = [row.bdm_mean for row in rows]
    stds = [row.bdm_std for row in rows]

    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(rows)), 4.5))
    positions = range(len(rows))
    ax.bar(positions, means, yerr=stds, capsize=3, color="#4878a8")
    if rows:
        best = best_row_index(rows)
        ax.bar([best], [means[best]], yerr=[stds[best]], capsize=3, color="#c44e52")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("delta metric, mean over simulations")
    ax.set_title("Edge detection benchmark (lower is better)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
