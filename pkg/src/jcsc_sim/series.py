"""Sweep results, their CSV form, and baseline-vs-proposed comparison."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

Z95 = NormalDist().inv_cdf(0.975)
FLAGS = ("ok", "truncated", "saturated", "warn_no_hidden")
NA = "na"

# experiment -> (axis column, variant column, value column, extra column)
LAYOUTS = {
    "ber": ("snr_db", "mode", None, None),
    "rmse": ("snr_db", "mode", None, None),
    "nd": ("neighbor_count", "algorithm", "mean_slots", "truncated_fraction"),
    "mac": ("frame_slots", "variant", "mean_delay_slots", "saturation_flag"),
}


def mean_ci(samples) -> tuple[float, float]:
    """Sample mean and 95% normal-approximation half-width (NaN for fewer than 2 samples)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    if x.size < 2:
        return float(x.mean()), math.nan
    return float(x.mean()), float(Z95 * x.std(ddof=1) / math.sqrt(x.size))


def rmse_ci(errors) -> tuple[float, float]:
    """RMSE and a delta-method 95% half-width."""
    e2 = np.asarray(errors, dtype=float) ** 2
    ms, ms_half = mean_ci(e2)
    rmse = math.sqrt(ms)
    if math.isnan(ms_half):
        return rmse, math.nan
    return rmse, (ms_half / (2.0 * rmse) if rmse > 0 else 0.0)


@dataclass
class SeriesRow:
    axis: float
    variant: str
    metric: str
    mean: float
    ci_half_width: float
    trials: int
    flag: str = "ok"
    extra: float | None = None

    def __post_init__(self):
        if self.flag not in FLAGS:
            raise ValueError(f"unknown flag {self.flag!r}")
        if not math.isnan(self.ci_half_width) and self.ci_half_width < 0:
            raise ValueError("ci half-width must be >= 0")


@dataclass
class TrialSeries:
    experiment: str
    rows: list[SeriesRow] = field(default_factory=list)

    def __post_init__(self):
        if self.experiment not in LAYOUTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")

    def sorted(self) -> "TrialSeries":
        rows = sorted(self.rows, key=lambda r: (r.axis, r.variant, r.metric))
        return TrialSeries(self.experiment, rows)

    @property
    def flags(self) -> set[str]:
        return {r.flag for r in self.rows}

    def variants(self) -> list[str]:
        return sorted({r.variant for r in self.rows})

    def metrics(self) -> list[str]:
        return sorted({r.metric for r in self.rows})

    def curve(self, variant: str | None = None, metric: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``(axis, mean)`` arrays for one variant/metric, axis ascending."""
        rows = [r for r in self.rows
                if (variant is None or r.variant == variant) and (metric is None or r.metric == metric)]
        if not rows:
            raise KeyError(f"no rows for variant={variant!r} metric={metric!r}")
        if len({(r.variant, r.metric) for r in rows}) > 1:
            raise ValueError("ambiguous selection: several variants/metrics match")
        rows.sort(key=lambda r: r.axis)
        return np.array([r.axis for r in rows], dtype=float), np.array([r.mean for r in rows], dtype=float)

    def row(self, axis, variant: str, metric: str | None = None) -> SeriesRow:
        for r in self.rows:
            if r.axis == axis and r.variant == variant and (metric is None or r.metric == metric):
                return r
        raise KeyError((axis, variant, metric))


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return NA
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _parse_num(s: str) -> float:
    return math.nan if s == NA else float(s)


def header_columns(experiment: str) -> list[str]:
    axis, var, value, extra = LAYOUTS[experiment]
    if experiment in ("ber", "rmse"):
        return [axis, var, "metric", "mean", "ci_half_width", "trials"]
    return [axis, var, value, "ci_half_width", extra, "trials"]


def to_csv(series: TrialSeries, comment: str = "") -> str:
    """Render as CSV text: ``#`` comment lines, one header row, deterministic row order."""
    buf = io.StringIO()
    for line in comment.splitlines():
        buf.write(f"# {line}\n" if line else "#\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header_columns(series.experiment))
    for r in series.sorted().rows:
        if series.experiment in ("ber", "rmse"):
            w.writerow([_fmt(r.axis), r.variant, r.metric, _fmt(r.mean), _fmt(r.ci_half_width), r.trials])
        elif series.experiment == "nd":
            w.writerow([_fmt(r.axis), r.variant, _fmt(r.mean), _fmt(r.ci_half_width), _fmt(r.extra), r.trials])
        else:
            w.writerow([_fmt(r.axis), r.variant, _fmt(r.mean), _fmt(r.ci_half_width), r.flag, r.trials])
    return buf.getvalue()


def split_comment(text: str) -> tuple[str, str]:
    """Split CSV text into (comment block without ``# ``, data part)."""
    comment, data = [], []
    for line in text.splitlines(keepends=True):
        if not data and line.startswith("#"):
            body = line[1:].rstrip("\n")
            comment.append(body[1:] if body.startswith(" ") else body)
        else:
            data.append(line)
    return "\n".join(comment), "".join(data)


def from_csv(text: str) -> TrialSeries:
    _, data = split_comment(text)
    reader = csv.reader(io.StringIO(data))
    header = next(reader)
    experiment = None
    for exp in ("nd", "mac", "ber"):
        if header == header_columns(exp):
            experiment = exp
            break
    if experiment is None:
        raise ValueError(f"unrecognised CSV header {header}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        if experiment == "ber":
            axis, var, metric, mean, ci, trials = rec
            rows.append(SeriesRow(float(axis), var, metric, _parse_num(mean), _parse_num(ci), int(trials)))
        elif experiment == "nd":
            axis, var, mean, ci, trunc, trials = rec
            t = _parse_num(trunc)
            rows.append(SeriesRow(float(axis), var, "mean_slots", _parse_num(mean), _parse_num(ci), int(trials),
                                  "truncated" if t > 0 else "ok", t))
        else:
            axis, var, mean, ci, flag, trials = rec
            rows.append(SeriesRow(float(axis), var, "mean_delay_slots", _parse_num(mean), _parse_num(ci),
                                  int(trials), flag))
    if experiment == "ber" and rows and not any(r.metric == "ber" for r in rows):
        experiment = "rmse"
    return TrialSeries(experiment, rows)


@dataclass
class PointComparison:
    axis: float
    baseline: float
    proposed: float

    @property
    def ratio(self) -> float:
        return self.proposed / self.baseline if self.baseline else math.nan

    @property
    def improvement_pct(self) -> float:
        return 100.0 * (1.0 - self.ratio) if self.baseline else math.nan


@dataclass
class Summary:
    points: list[PointComparison]
    gain_db: float | None = None
    target: float | None = None

    def report(self, baseline: str = "baseline", proposed: str = "proposed") -> str:
        lines = [f"{proposed} vs {baseline}"]
        for p in self.points:
            lines.append(f"  axis={_fmt(p.axis):>8}  {baseline}={p.baseline:.6g}  {proposed}={p.proposed:.6g}  "
                         f"ratio={p.ratio:.4f}  improvement={p.improvement_pct:.1f}%")
        if self.gain_db is not None:
            lines.append(f"  horizontal gain at {self.target:g}: {self.gain_db:.2f} dB")
        return "\n".join(lines)


def crossing(axis, values, target: float) -> float:
    """Axis value where a decreasing curve crosses ``target``, interpolating log10(value) linearly."""
    x = np.asarray(axis, dtype=float)
    y = np.asarray(values, dtype=float)
    order = np.argsort(x)
    x, y = x[order], y[order]
    for i in range(len(x) - 1):
        y0, y1 = y[i], y[i + 1]
        if y0 >= target >= y1 and y0 > 0 and y1 > 0 and y0 != y1:
            l0, l1, lt = math.log10(y0), math.log10(y1), math.log10(target)
            return float(x[i] + (lt - l0) * (x[i + 1] - x[i]) / (l1 - l0))
        if y0 == target:
            return float(x[i])
    if len(x) and y[-1] == target:
        return float(x[-1])
    raise ValueError(f"curve does not bracket target {target:g}")


def summarize(baseline: tuple, proposed: tuple, target: float | None = None) -> Summary:
    """Compare two ``(axis, mean)`` curves.

    Per-point ratio/improvement is reported on the shared axis. With
    ``target`` set (error-rate curves), the horizontal offset between the two
    curves at that level is also reported, and the axes need not coincide.
    """
    xa, ya = (np.asarray(v, dtype=float) for v in baseline)
    xb, yb = (np.asarray(v, dtype=float) for v in proposed)
    same_axis = xa.shape == xb.shape and np.array_equal(np.sort(xa), np.sort(xb))
    if not same_axis and target is None:
        raise ValueError("axis mismatch: series are defined on different sweep points")
    points = []
    if same_axis:
        ia, ib = np.argsort(xa), np.argsort(xb)
        points = [PointComparison(float(x), float(a), float(b)) for x, a, b in zip(xa[ia], ya[ia], yb[ib])]
    gain = None
    if target is not None:
        gain = crossing(xa, ya, target) - crossing(xb, yb, target)
    return Summary(points, gain, target)
