"""Analysis outputs: per-source fits, the fits CSV, SVG scatter panels, summary."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .errors import BenchError
from .stats.fitts import FittsFit, compare_fits, fitts_fit, ballistic_fit, remove_outliers

FIT_COLUMNS = ("source", "model", "a", "b", "se_a", "se_b", "r2", "F", "p", "lof_F", "lof_p", "n_kept", "n_removed")


@dataclass
class SourceResult:
    trials: list
    kept: list
    removed: list
    fits: dict[str, FittsFit | None] = field(default_factory=dict)
    fit_errors: dict[str, str] = field(default_factory=dict)

    def success_by_condition(self) -> dict[tuple[float, float], tuple[int, int]]:
        out: dict[tuple[float, float], list[int]] = {}
        for tr in self.trials:
            cell = out.setdefault((tr.distance_m, tr.width_m), [0, 0])
            cell[0] += int(tr.success)
            cell[1] += 1
        return {k: (v[0], v[1]) for k, v in sorted(out.items())}


def fit_source(trials, outliers: bool = True, k: float = 1.5) -> SourceResult:
    """Outlier filtering followed by both regressions; failures are recorded, not raised."""
    kept, removed = remove_outliers(trials, k) if outliers else (list(trials), [])
    res = SourceResult(list(trials), kept, removed)
    for model, fn in (("fitts", fitts_fit), ("ballistic", ballistic_fit)):
        try:
            res.fits[model] = fn(kept)
        except BenchError as exc:
            res.fits[model] = None
            res.fit_errors[model] = exc.code
    return res


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def fits_csv(results: dict[str, SourceResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIT_COLUMNS)
    for source, res in results.items():
        n_kept = sum(1 for t in res.kept if t.success)
        for model, fit in res.fits.items():
            if fit is None:
                w.writerow([source, model] + [""] * 9 + [n_kept, len(res.removed)])
                continue
            lof = fit.lack_of_fit
            w.writerow([
                source, model, _num(fit.a), _num(fit.b), _num(fit.se_a), _num(fit.se_b),
                _num(fit.r_squared), _num(fit.anova.F), _num(fit.anova.p),
                _num(lof.F if lof else None), _num(lof.p if lof else None),
                fit.n, len(res.removed),
            ])
    return buf.getvalue()


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def scatter_svg(res: SourceResult, source: str, provenance: dict | None = None,
                width: int = 480, height: int = 360) -> str:
    """MT against ID with the fitted line and an R^2 annotation."""
    fit = res.fits["fitts"]
    xs, ys = fit.x, fit.y
    left, right, top, bottom = 60, 20, 30, 50
    x_lo, x_hi = float(xs.min()) - 0.25, float(xs.max()) + 0.25
    y_lo, y_hi = 0.0, float(ys.max()) * 1.15
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return top + ph - (y - y_lo) / (y_hi - y_lo) * ph

    el = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
    ]
    if provenance:
        el.append(f"<!-- config_hash={escape(str(provenance.get('config_hash')))} "
                  f"seed={escape(str(provenance.get('seed')))} -->")
    el.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>')
    el.append(f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>')
    el.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>')
    for t in _ticks(x_lo, x_hi):
        el.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 4}" stroke="black"/>')
        el.append(f'<text x="{px(t):.2f}" y="{top + ph + 16}" text-anchor="middle">{t:.2f}</text>')
    for t in _ticks(y_lo, y_hi):
        el.append(f'<line x1="{left - 4}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>')
        el.append(f'<text x="{left - 6}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.2f}</text>')
    el.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">ID (bits)</text>')
    el.append(f'<text x="14" y="{top + ph / 2:.2f}" text-anchor="middle" '
              f'transform="rotate(-90 14 {top + ph / 2:.2f})">MT (s)</text>')
    color = "#1f5fa8" if source == "human" else "#c0392b"
    for x, y in zip(xs, ys):
        el.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}" fill-opacity="0.6"/>')
    y0, y1 = fit.a + fit.b * x_lo, fit.a + fit.b * x_hi
    el.append(f'<line x1="{px(x_lo):.2f}" y1="{py(y0):.2f}" x2="{px(x_hi):.2f}" y2="{py(y1):.2f}" '
              f'stroke="black" stroke-width="1.5"/>')
    el.append(f'<text x="{left + 8}" y="{top + 14}">{escape(source)}: MT = {fit.a:.3f} + {fit.b:.3f} ID</text>')
    el.append(f'<text x="{left + 8}" y="{top + 28}">R² = {fit.r_squared:.3f} (n = {fit.n})</text>')
    el.append("</svg>")
    return "\n".join(el) + "\n"


def _fmt(v, spec=".4f") -> str:
    return "n/a" if v is None else format(v, spec)


def summary_markdown(results: dict[str, SourceResult], provenance: dict) -> str:
    lines = [
        "# Fitts benchmark summary",
        "",
        f"config_hash: `{provenance['config_hash']}`, seed: {provenance['seed']}",
        "",
        "## Fits",
        "",
        "| source | model | a | b | R² | F | p | lack-of-fit p | n | removed |",
        "|---|---|---|---|---|---|---|---|---|---|",
    ]
    for source, res in results.items():
        for model, fit in res.fits.items():
            if fit is None:
                lines.append(f"| {source} | {model} | fit failed: {res.fit_errors.get(model)} | | | | | | | {len(res.removed)} |")
                continue
            lof = fit.lack_of_fit
            lines.append(
                f"| {source} | {model} | {_fmt(fit.a)} | {_fmt(fit.b)} | {_fmt(fit.r_squared)} | "
                f"{_fmt(fit.anova.F, '.3g')} | {_fmt(fit.anova.p, '.3g')} | "
                f"{_fmt(lof.p if lof else None, '.3g')} | {fit.n} | {len(res.removed)} |"
            )
    lines += ["", "## Success rate per condition", ""]
    for source, res in results.items():
        cells = ", ".join(f"D={d:g} m: {s}/{n}" for (d, _), (s, n) in res.success_by_condition().items())
        lines.append(f"- {source}: {cells}")
    lines += ["", "## Human vs policy", ""]
    h = results.get("human")
    p = results.get("policy")
    hf = h.fits.get("fitts") if h else None
    pf = p.fits.get("fitts") if p else None
    if hf is None or pf is None:
        lines.append("Comparison absent: both a human and a policy Fitts fit are required.")
    else:
        c = compare_fits(hf, pf)
        lines += [
            f"- slope difference (human - policy): {c.slope_diff:.4f} s/bit, pooled SE {c.slope_diff_se:.4f}",
            f"- equal-slope test: t = {c.t:.3f}, df = {c.df}, p = {c.p_equal_slopes:.3g}",
            f"- R² gap (human - policy): {c.delta_r_squared:.4f}",
        ]
    return "\n".join(lines) + "\n"
