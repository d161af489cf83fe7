"""Markdown tables and grouped bar charts for sets of metric reports."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Sequence

from . import plotting
from .evalsuite import MetricReport, compare_methods

CHART_METRICS = (("DA", "da", 1.0), ("QE", "qe", 1.0), ("ROUGE", "rouge", 1.0),
                 ("ED", "ed", 1.0), ("LAJ x20", "laj", 20.0))


def _slug(tag: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", tag).strip("_") or "corpus"


def group_by_corpus(reports: Sequence[MetricReport]) -> dict[str, list[MetricReport]]:
    groups: dict[str, list[MetricReport]] = {}
    for r in reports:
        groups.setdefault(r.corpus_tag, []).append(r)
    return groups


def metrics_table(reports: Sequence[MetricReport]) -> str:
    lines = ["| Corpus | Method | DA | QE | ROUGE | ED | LAJ | p | n |",
             "|---|---|---:|---:|---:|---:|---:|---:|---:|"]
    for r in reports:
        lines.append(f"| {r.corpus_tag} | {r.method_tag} | {r.da:.2f} | {r.qe:.2f} | {r.rouge:.2f} "
                     f"| {r.ed:.2f} | {r.laj:.2f} | {r.composite:.3f} | {r.n} |")
    return "\n".join(lines)


def deltas_table(reports: Sequence[MetricReport], baseline: str) -> str:
    lines = [f"| Corpus | Method | p - p({baseline}) |", "|---|---|---:|"]
    for corpus, group in group_by_corpus(reports).items():
        base = next((r for r in group if r.method_tag == baseline), None)
        if base is None:
            lines.append(f"| {corpus} | (no `{baseline}` report) | - |")
            continue
        for r in group:
            delta = compare_methods(r, base)
            lines.append(f"| {corpus} | {r.method_tag} | {delta + 0.0:+.3f} |")
    return "\n".join(lines)


def plot_corpus(reports: Sequence[MetricReport], path) -> Path:
    tags = {r.corpus_tag for r in reports}
    if len(tags) != 1:
        raise ValueError(f"one chart per corpus; got corpus tags {sorted(tags)}")
    fig, ax = plotting.new_figure()
    series = [[getattr(r, key) * scale for _, key, scale in CHART_METRICS] for r in reports]
    plotting.grouped_bars(ax, [name for name, _, _ in CHART_METRICS], series,
                          [r.method_tag for r in reports])
    ax.set_ylabel("score (0-100)")
    ax.set_title(f"Translation quality: {tags.pop()}")
    ax.legend(loc="upper right")
    return Path(plotting.save(fig, path))


def render_report(reports: Sequence[MetricReport], out_dir, baseline: str | None = None) -> dict[str, Path]:
    """Write ``report.md`` and one ``chart_<corpus>.png`` per corpus into ``out_dir``.

    ``baseline`` names the method every delta is taken against; it defaults
    to the method tag of the first report.
    """
    if not reports:
        raise ValueError("render_report needs at least one report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    baseline = baseline or reports[0].method_tag
    written: dict[str, Path] = {}

    md = ["# Evaluation report", "",
          "p = (DA + QE + ROUGE + ED + 20 * LAJ) / 5", "",
          "## Metrics", "", metrics_table(reports), "",
          f"## Deltas against `{baseline}`", "", deltas_table(reports, baseline), "",
          "## Charts", ""]
    for corpus, group in group_by_corpus(reports).items():
        chart = out_dir / f"chart_{_slug(corpus)}.png"
        written[f"chart:{corpus}"] = plot_corpus(group, chart)
        md.append(f"![{corpus}]({chart.name})")
    md.append("")
    notes = sorted({f"{k}: {v}" for r in reports for k, v in r.meta.items()})
    if notes:
        md += ["## Metric definitions", "", *(f"- {n}" for n in notes), ""]
    md_path = out_dir / "report.md"
    md_path.write_text("\n".join(md), encoding="utf-8")
    written["markdown"] = md_path
    return written
