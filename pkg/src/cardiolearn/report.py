"""Evaluation outputs: metric/confusion CSVs, their SVG twins, run manifests.

Every graphic is rendered from the text of its CSV twin, never from live
objects, so a plot can never disagree with the numbers shipped beside it.
The SVG is written directly (no plotting dependency) with fixed coordinate
formatting, keeping report bytes deterministic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import TrainedModel, predict_matrix
from .dataset import Dataset, summarize
from .errors import ConfigurationError, UndefinedMetricError
from .metrics import ConfusionMatrix, MetricReport, compute_metrics, confusion, roc_auc
from .preprocess import SplitConfig, stratified_split

METRIC_COLUMNS = ("accuracy", "precision", "recall", "f1", "auc")


@dataclass(frozen=True)
class RunManifest:
    command: str
    data_path: str
    seed: int
    spec_file: str | None
    grid_file: str | None
    output_dir: str
    toolkit_version: str
    timestamp: str


def write_manifest(
    out_dir: str | Path,
    command: str,
    data_path: str,
    seed: int,
    spec_file: str | None = None,
    grid_file: str | None = None,
) -> Path:
    """Write manifest.json next to a command's outputs; returns its path."""
    manifest = RunManifest(
        command=command,
        data_path=str(data_path),
        seed=seed,
        spec_file=spec_file,
        grid_file=grid_file,
        output_dir=str(out_dir),
        toolkit_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return path


def evaluate_on(
    model: TrainedModel, rows: Dataset, threshold: float = 0.5
) -> tuple[MetricReport, ConfusionMatrix]:
    """Metric report (with AUC when defined) and confusion counts on given rows."""
    y = rows.target.astype(np.int64)
    labels, scores = predict_matrix(model, rows.features, threshold)
    cm = confusion(y, labels)
    report = compute_metrics(cm)
    try:
        auc = roc_auc(y, scores)
    except UndefinedMetricError:
        auc = None
    if auc is not None:
        report = MetricReport(
            accuracy=report.accuracy,
            precision=report.precision,
            recall=report.recall,
            f1=report.f1,
            auc=auc,
            degenerate=report.degenerate,
        )
    return report, cm


def test_rows_for(model: TrainedModel, data: Dataset, seed: int | None = None) -> Dataset:
    """Reconstruct the artifact's held-out test rows from its recorded split."""
    split = model.metadata.split
    if seed is not None:
        split = SplitConfig(seed=seed)
    if split is None:
        raise ConfigurationError(
            "artifact records no train/test split; evaluate with --split all or give --seed"
        )
    _train, test = stratified_split(data, split)
    return test


def provenance_mismatch(model: TrainedModel, data_path: str) -> str | None:
    """Human-readable warning when the artifact was trained on different data."""
    recorded = model.metadata.data_source.split("[", 1)[0]
    if recorded != str(data_path):
        return (
            f"provenance mismatch: artifact was trained on {recorded!r}, "
            f"evaluating against {data_path!r}"
        )
    return None


def metrics_csv(report: MetricReport) -> str:
    """Single-row metric CSV with the fixed evaluate header."""
    auc = repr(float(report.auc)) if report.auc is not None else ""
    row = [repr(report.accuracy), repr(report.precision), repr(report.recall), repr(report.f1), auc]
    return ",".join(METRIC_COLUMNS) + "\n" + ",".join(row) + "\n"


def confusion_block_csv(cm: ConfusionMatrix) -> str:
    """2x2 block layout: rows are true classes, columns predicted classes."""
    return (
        ",pred_0,pred_1\n"
        f"true_0,{cm.tn},{cm.fp}\n"
        f"true_1,{cm.fn},{cm.tp}\n"
    )


def comparison_csv(rows: list[tuple[str, MetricReport]]) -> str:
    """Per-model comparison table: algorithm plus the five metric columns."""
    lines = ["algorithm," + ",".join(METRIC_COLUMNS)]
    for name, report in rows:
        lines.append(report.csv_row(name))
    return "\n".join(lines) + "\n"


def confusion_table_csv(rows: list[tuple[str, ConfusionMatrix]]) -> str:
    lines = ["algorithm,tp,fp,fn,tn"]
    for name, cm in rows:
        lines.append(f"{name},{cm.tp},{cm.fp},{cm.fn},{cm.tn}")
    return "\n".join(lines) + "\n"


def correlation_csv(data: Dataset) -> str:
    """Numeric-column correlation matrix; undefined entries serialize as nan."""
    stats = summarize(data)
    names = stats.correlation_columns
    lines = ["column," + ",".join(names)]
    for i, name in enumerate(names):
        cells = [repr(float(v)) for v in stats.correlation[i]]
        lines.append(name + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def class_sex_frequency_csv(data: Dataset) -> str:
    """Counts by (sex, target), the class/sex imbalance summary."""
    sex = data.column_values("sex")
    target = data.target
    lines = ["sex,target,count"]
    for s in (0, 1):
        for t in (0, 1):
            count = int(np.sum((sex == s) & (target == t)))
            lines.append(f"{s},{t},{count}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG rendering (from CSV twin text only)

_PALETTE = ("#4878a8", "#e1812c", "#3a923a", "#c03d3e", "#9372b2")
_FONT = 'font-family="Helvetica,Arial,sans-serif"'


def _parse_csv(text: str) -> list[list[str]]:
    return [row for row in csv.reader(io.StringIO(text)) if row]


def _svg(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _bar(x: float, y: float, w: float, h: float, color: str) -> str:
    return (
        f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
        f'fill="{color}" />'
    )


def _text(x: float, y: float, s: str, size: int = 11, anchor: str = "middle") -> str:
    return (
        f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}" '
        f"{_FONT}>{s}</text>"
    )


def render_metric_bars_svg(csv_text: str) -> str:
    """Grouped bars: one group per algorithm, one bar per metric column."""
    rows = _parse_csv(csv_text)
    header, body = rows[0], rows[1:]
    metric_names = header[1:]
    width, height = 640, 360
    left, top, bottom = 50, 30, 60
    plot_w, plot_h = width - left - 20, height - top - bottom
    group_w = plot_w / max(len(body), 1)
    bar_w = group_w / (len(metric_names) + 1)

    parts: list[str] = []
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = top + plot_h * (1.0 - frac)
        parts.append(
            f'<line x1="{left}" y1="{y:.2f}" x2="{width - 20}" y2="{y:.2f}" '
            f'stroke="#dddddd" stroke-width="1" />'
        )
        parts.append(_text(left - 8, y + 4, f"{frac:.2f}", size=10, anchor="end"))
    for g, row in enumerate(body):
        name = row[0]
        for m, cell in enumerate(row[1:]):
            if not cell:
                continue
            value = max(0.0, min(1.0, float(cell)))
            x = left + g * group_w + (m + 0.5) * bar_w
            h = plot_h * value
            parts.append(_bar(x, top + plot_h - h, bar_w * 0.9, h, _PALETTE[m % len(_PALETTE)]))
        parts.append(_text(left + (g + 0.5) * group_w, height - bottom + 16, name))
    for m, metric in enumerate(metric_names):
        x = left + (m + 0.5) * (plot_w / len(metric_names))
        parts.append(_bar(x - 28, height - 24, 10, 10, _PALETTE[m % len(_PALETTE)]))
        parts.append(_text(x + 8, height - 15, metric, size=10))
    return _svg(width, height, parts)


def render_confusion_grid_svg(csv_text: str) -> str:
    """Grid of 2x2 count blocks, one per algorithm row in the twin CSV."""
    rows = _parse_csv(csv_text)
    body = rows[1:]
    cols = 2
    cell = 70
    pad = 50
    block_w = 2 * cell + pad
    block_h = 2 * cell + pad + 20
    n_rows = (len(body) + cols - 1) // cols
    width = cols * block_w + pad
    height = n_rows * block_h + pad

    parts: list[str] = []
    for i, row in enumerate(body):
        name = row[0]
        tp, fp, fn, tn = (int(v) for v in row[1:5])
        counts = [[tn, fp], [fn, tp]]
        ox = pad + (i % cols) * block_w
        oy = pad + (i // cols) * block_h
        parts.append(_text(ox + cell, oy - 10, name, size=12))
        peak = max(tp, fp, fn, tn, 1)
        for r in range(2):
            for c in range(2):
                value = counts[r][c]
                shade = 255 - int(140 * value / peak)
                color = f"rgb({shade},{shade},255)"
                x, y = ox + c * cell, oy + r * cell
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                    f'fill="{color}" stroke="#333333" />'
                )
                parts.append(_text(x + cell / 2, y + cell / 2 + 4, str(value), size=13))
        parts.append(_text(ox + cell, oy + 2 * cell + 16, "predicted 0 | 1", size=9))
    return _svg(width, height, parts)


def _correlation_color(value: float) -> str:
    if not np.isfinite(value):
        return "rgb(200,200,200)"
    v = max(-1.0, min(1.0, value))
    if v >= 0:
        other = int(255 * (1 - v))
        return f"rgb(255,{other},{other})"
    other = int(255 * (1 + v))
    return f"rgb({other},{other},255)"


def render_correlation_svg(csv_text: str) -> str:
    """Heatmap of the correlation twin with the coefficient printed per cell."""
    rows = _parse_csv(csv_text)
    names = rows[0][1:]
    cell = 80
    left, top = 110, 90
    width = left + cell * len(names) + 20
    height = top + cell * len(names) + 20

    parts: list[str] = []
    for j, name in enumerate(names):
        parts.append(_text(left + (j + 0.5) * cell, top - 12, name, size=10))
    for i, row in enumerate(rows[1:]):
        parts.append(_text(left - 8, top + (i + 0.5) * cell + 4, row[0], size=10, anchor="end"))
        for j, cellv in enumerate(row[1:]):
            value = float(cellv)
            x, y = left + j * cell, top + i * cell
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{_correlation_color(value)}" stroke="#666666" />'
            )
            label = "nan" if not np.isfinite(value) else f"{value:.2f}"
            parts.append(_text(x + cell / 2, y + cell / 2 + 4, label, size=11))
    return _svg(width, height, parts)


def render_frequency_svg(csv_text: str) -> str:
    """Grouped bars of (sex, target) counts from the frequency twin."""
    rows = _parse_csv(csv_text)
    body = rows[1:]
    counts: dict[tuple[str, str], int] = {(r[0], r[1]): int(r[2]) for r in body}
    sexes = sorted({r[0] for r in body})
    targets = sorted({r[1] for r in body})
    peak = max(counts.values()) if counts else 1

    width, height = 420, 320
    left, top, bottom = 60, 30, 60
    plot_w, plot_h = width - left - 20, height - top - bottom
    group_w = plot_w / len(sexes)
    bar_w = group_w / (len(targets) + 1)

    parts: list[str] = []
    for s_i, s in enumerate(sexes):
        for t_i, t in enumerate(targets):
            value = counts.get((s, t), 0)
            h = plot_h * value / peak
            x = left + s_i * group_w + (t_i + 0.5) * bar_w
            parts.append(_bar(x, top + plot_h - h, bar_w * 0.9, h, _PALETTE[t_i]))
            parts.append(_text(x + bar_w * 0.45, top + plot_h - h - 5, str(value), size=10))
        parts.append(_text(left + (s_i + 0.5) * group_w, height - bottom + 16, f"sex={s}"))
    for t_i, t in enumerate(targets):
        x = left + (t_i + 0.5) * (plot_w / len(targets))
        parts.append(_bar(x - 34, height - 24, 10, 10, _PALETTE[t_i]))
        parts.append(_text(x + 8, height - 15, f"target={t}", size=10))
    return _svg(width, height, parts)
