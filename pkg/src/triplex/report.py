"""Result rendering: metric tables, predicate frequency charts, heatmaps.

All SVG output is built from strings with fixed formatting, so rendering the
same inputs twice yields byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping
from xml.sax.saxutils import escape

from .evaluation import Metrics, PredicateDistribution

__all__ = [
    "VARIANT_ORDER",
    "metrics_table",
    "parse_metrics_csv",
    "frequency_chart",
    "HeatmapSpec",
    "heatmap_spec_from_distributions",
    "heatmap",
]

VARIANT_ORDER = ("zero-shot", "one-shot", "few-shot", "negative-examples")

_MODE_ROWS = (
    ("exact", "precision"),
    ("exact", "recall"),
    ("exact", "f1"),
    ("semantic", "precision"),
    ("semantic", "recall"),
    ("semantic", "f1"),
)
_MODE_TITLES = {"exact": "Exact match", "semantic": "Semantic match"}


def _ordered_variants(results: Mapping[str, Mapping[str, Metrics]]) -> list[str]:
    known = [v for v in VARIANT_ORDER if v in results]
    extra = [v for v in results if v not in VARIANT_ORDER]
    return known + extra


def metrics_table(results: Mapping[str, Mapping[str, Metrics]]) -> tuple[str, str]:
    """Render exact and semantic P/R/F1 per variant.

    ``results`` maps variant name to ``{"exact": Metrics, "semantic": Metrics}``.
    Returns ``(csv_text, aligned_text)``; every value is printed with two
    decimals, and parsing the CSV back recovers exactly those values.
    """
    variants = _ordered_variants(results)
    if not variants:
        raise ValueError("metrics_table requires at least one variant")

    csv_lines = ["metric," + ",".join(variants)]
    for mode, metric in _MODE_ROWS:
        cells = [f"{getattr(results[v][mode], metric):.2f}" for v in variants]
        csv_lines.append(f"{mode}_{metric}," + ",".join(cells))
    csv_text = "\n".join(csv_lines) + "\n"

    label_width = max(len("  " + m.capitalize()) for _, m in _MODE_ROWS)
    label_width = max(label_width, *(len(t) for t in _MODE_TITLES.values()))
    col_width = max(8, *(len(v) for v in variants))
    header = " " * label_width + "  " + "  ".join(v.rjust(col_width) for v in variants)
    lines = [header]
    for mode in ("exact", "semantic"):
        lines.append(_MODE_TITLES[mode])
        for metric in ("precision", "recall", "f1"):
            label = ("  " + (metric.upper() if metric == "f1" else metric.capitalize())).ljust(
                label_width
            )
            cells = "  ".join(
                f"{getattr(results[v][mode], metric):.2f}".rjust(col_width)
                for v in variants
            )
            lines.append(f"{label}  {cells}")
    text = "\n".join(lines) + "\n"
    return csv_text, text


def parse_metrics_csv(csv_text: str) -> dict[str, dict[str, Metrics]]:
    """Inverse of the CSV half of :func:`metrics_table` (2-decimal values)."""
    lines = [line for line in csv_text.splitlines() if line.strip()]
    header = lines[0].split(",")
    variants = header[1:]
    values: dict[str, dict[str, float]] = {v: {} for v in variants}
    for line in lines[1:]:
        cells = line.split(",")
        metric_name = cells[0]
        for variant, cell in zip(variants, cells[1:]):
            values[variant][metric_name] = float(cell)
    out: dict[str, dict[str, Metrics]] = {}
    for variant, metric_values in values.items():
        out[variant] = {
            mode: Metrics(
                precision=metric_values[f"{mode}_precision"],
                recall=metric_values[f"{mode}_recall"],
                f1=metric_values[f"{mode}_f1"],
            )
            for mode in ("exact", "semantic")
        }
    return out


# ---------------------------------------------------------------------------
# SVG helpers
# ---------------------------------------------------------------------------


def _svg_header(width: int, height: int) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">'
    )


def frequency_chart(
    distribution: PredicateDistribution, top_k: int = 20, title: str = ""
) -> str:
    """Horizontal bar chart of predicate frequencies, sorted descending.

    Shows at most ``top_k`` bars; any remaining predicates fold into a final
    ``other (n predicates)`` bar. Raises on an empty distribution.
    """
    if distribution.total == 0 or not distribution.counts:
        raise ValueError("frequency_chart requires a non-empty distribution")
    ranked = sorted(distribution.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    shown = ranked[:top_k]
    folded = ranked[top_k:]
    rows: list[tuple[str, int]] = list(shown)
    if folded:
        rows.append((f"other ({len(folded)} predicates)", sum(c for _, c in folded)))

    bar_height, gap, top = 22, 6, 40 if title else 16
    label_width = 10 + max(len(label) for label, _ in rows) * 7
    chart_width = 420
    width = label_width + chart_width + 70
    height = top + len(rows) * (bar_height + gap) + 10
    max_count = max(count for _, count in rows)

    parts = [_svg_header(width, height)]
    parts.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    if title:
        parts.append(
            f'<text x="10" y="24" font-size="16" fill="#222">{escape(title)}</text>'
        )
    for i, (label, count) in enumerate(rows):
        y = top + i * (bar_height + gap)
        bar = int(round(chart_width * count / max_count)) if max_count else 0
        parts.append(
            f'<text x="{label_width - 6}" y="{y + 15}" font-size="12" fill="#222" '
            f'text-anchor="end">{escape(label)}</text>'
        )
        parts.append(
            f'<rect x="{label_width}" y="{y}" width="{max(bar, 1)}" '
            f'height="{bar_height}" fill="#4a6fa5"/>'
        )
        parts.append(
            f'<text x="{label_width + max(bar, 1) + 6}" y="{y + 15}" font-size="12" '
            f'fill="#222">{count}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@dataclass(frozen=True)
class HeatmapSpec:
    """Grid data for :func:`heatmap`: rows x columns of relative frequencies."""

    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: tuple[tuple[float, ...], ...]
    column_remainders: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.cells) != len(self.rows):
            raise ValueError("cell row count does not match row labels")
        for row in self.cells:
            if len(row) != len(self.columns):
                raise ValueError("cell column count does not match column labels")
        for j in range(len(self.columns)):
            column_sum = sum(row[j] for row in self.cells)
            if column_sum > 1.0 + 1e-9:
                raise ValueError(f"column {j} sums to {column_sum}, above 1")


def heatmap_spec_from_distributions(
    distributions: Mapping[str, PredicateDistribution], top_k: int = 15
) -> HeatmapSpec:
    """Rows are the overall top-k predicates, columns the given runs.

    Each cell is the predicate's relative frequency within its column's run,
    so a column sums to 1 minus the mass of its predicates outside the top-k;
    that remainder is reported per column.
    """
    if not distributions:
        raise ValueError("heatmap requires at least one distribution")
    columns = [v for v in VARIANT_ORDER if v in distributions]
    columns += [v for v in distributions if v not in VARIANT_ORDER]
    combined: dict[str, int] = {}
    for dist in distributions.values():
        for predicate, count in dist.counts.items():
            combined[predicate] = combined.get(predicate, 0) + count
    ranked = sorted(combined.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    rows = tuple(predicate for predicate, _ in ranked)
    cells = []
    for predicate in rows:
        row = []
        for column in columns:
            dist = distributions[column]
            row.append(dist.counts.get(predicate, 0) / dist.total if dist.total else 0.0)
        cells.append(tuple(row))
    remainders = tuple(
        round(1.0 - sum(row[j] for row in cells), 10) if distributions[c].total else 0.0
        for j, c in enumerate(columns)
    )
    return HeatmapSpec(
        rows=rows, columns=tuple(columns), cells=tuple(cells), column_remainders=remainders
    )


def _cell_fill(value: float, max_value: float) -> str:
    intensity = value / max_value if max_value > 0 else 0.0
    shade = int(round(245 - 205 * intensity))
    return f"rgb({shade},{shade},{shade})"


def heatmap(spec: HeatmapSpec, title: str = "") -> str:
    """Monochrome heatmap; darker means higher relative frequency."""
    cell_w, cell_h = 96, 24
    top = 64 if title else 40
    label_width = 16 + (max(len(r) for r in spec.rows) * 7 if spec.rows else 40)
    width = label_width + len(spec.columns) * cell_w + 40
    legend_height = 56 + (16 if spec.column_remainders else 0)
    height = top + len(spec.rows) * cell_h + legend_height
    max_value = max((v for row in spec.cells for v in row), default=0.0)

    parts = [_svg_header(width, height)]
    parts.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    if title:
        parts.append(
            f'<text x="12" y="26" font-size="16" fill="#222">{escape(title)}</text>'
        )
    for j, column in enumerate(spec.columns):
        x = label_width + j * cell_w + cell_w // 2
        parts.append(
            f'<text x="{x}" y="{top - 8}" font-size="12" fill="#222" '
            f'text-anchor="middle">{escape(column)}</text>'
        )
    for i, row_label in enumerate(spec.rows):
        y = top + i * cell_h
        parts.append(
            f'<text x="{label_width - 8}" y="{y + 16}" font-size="12" fill="#222" '
            f'text-anchor="end">{escape(row_label)}</text>'
        )
        for j in range(len(spec.columns)):
            value = spec.cells[i][j]
            parts.append(
                f'<rect x="{label_width + j * cell_w}" y="{y}" width="{cell_w}" '
                f'height="{cell_h}" fill="{_cell_fill(value, max_value)}" '
                f'stroke="#cccccc" stroke-width="1"/>'
            )
    base_y = top + len(spec.rows) * cell_h
    if spec.column_remainders:
        for j, remainder in enumerate(spec.column_remainders):
            x = label_width + j * cell_w + cell_w // 2
            parts.append(
                f'<text x="{x}" y="{base_y + 16}" font-size="10" fill="#666" '
                f'text-anchor="middle">other: {remainder:.2f}</text>'
            )
        base_y += 16
    # legend: five swatches from zero to the maximum cell value
    parts.append(
        f'<text x="{label_width}" y="{base_y + 24}" font-size="11" fill="#222">'
        f"relative frequency: 0.00</text>"
    )
    swatch_x = label_width + 170
    for step in range(5):
        value = max_value * step / 4 if max_value else 0.0
        parts.append(
            f'<rect x="{swatch_x + step * 26}" y="{base_y + 12}" width="26" height="16" '
            f'fill="{_cell_fill(value, max_value)}" stroke="#cccccc" stroke-width="1"/>'
        )
    parts.append(
        f'<text x="{swatch_x + 5 * 26 + 8}" y="{base_y + 24}" font-size="11" '
        f'fill="#222">{max_value:.2f}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_report_bundle(
    out_dir: str | Path,
    table_results: Mapping[str, Mapping[str, Metrics]],
    distributions: Mapping[str, PredicateDistribution],
    heatmap_spec: HeatmapSpec,
    frequency_top_k: int = 20,
    extra: Mapping | None = None,
) -> list[Path]:
    """Write metrics.csv/.txt, per-variant frequency charts, heatmap.svg, report.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    csv_text, table_text = metrics_table(table_results)
    for name, content in (("metrics.csv", csv_text), ("metrics.txt", table_text)):
        path = out / name
        path.write_text(content, encoding="utf-8")
        written.append(path)
    for variant, dist in distributions.items():
        if dist.total == 0:
            continue
        path = out / f"freq_{variant}.svg"
        path.write_text(
            frequency_chart(dist, top_k=frequency_top_k, title=f"Predicate frequency: {variant}"),
            encoding="utf-8",
        )
        written.append(path)
    heatmap_path = out / "heatmap.svg"
    heatmap_path.write_text(
        heatmap(heatmap_spec, title="Predicate frequency by run"), encoding="utf-8"
    )
    written.append(heatmap_path)
    bundle = {
        "metrics": {
            variant: {
                mode: {
                    "precision": round(m.precision, 6),
                    "recall": round(m.recall, 6),
                    "f1": round(m.f1, 6),
                }
                for mode, m in modes.items()
            }
            for variant, modes in table_results.items()
        },
        "predicate_distributions": {
            variant: dict(sorted(dist.counts.items()))
            for variant, dist in distributions.items()
        },
        "heatmap": {
            "rows": list(heatmap_spec.rows),
            "columns": list(heatmap_spec.columns),
            "cells": [list(row) for row in heatmap_spec.cells],
            "column_remainders": list(heatmap_spec.column_remainders),
        },
        "files": sorted(p.name for p in written) + ["report.json"],
    }
    if extra:
        bundle.update(extra)
    report_path = out / "report.json"
    report_path.write_text(
        json.dumps(bundle, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append(report_path)
    return written
