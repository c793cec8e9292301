"""Parameter sweeps, CSV/gnuplot emitters, agreement reports and presets."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import rng
from .closedform import outage_best_path
from .model import (
    ConfigParseError,
    Scenario,
    ValidationError,
    Issue,
    _convert,
    parse_config_text,
    validate,
)
from .montecarlo import simulate_snr, _estimate

__all__ = [
    "AXES",
    "AgreementReport",
    "Preset",
    "SweepRow",
    "SweepSpec",
    "agreement_report",
    "emit_csv",
    "emit_gnuplot",
    "list_presets",
    "load_preset",
    "read_csv",
    "run_preset",
    "run_sweep",
]

AXES = ("avg_snr_lambda", "fail_prob", "n_elements", "dist_user", "gamma_t")
METHODS = ("closed_form", "monte_carlo")
_METHOD_ALIASES = {"cf": "closed_form", "closed_form": "closed_form", "mc": "monte_carlo", "monte_carlo": "monte_carlo"}
CSV_HEADER = ("axis", "axis_value", "outage_cf", "outage_mc", "mc_ci", "flags")
AGREE_FLOOR = 0.02
AGREE_CI_MULT = 3.0

AXIS_LABELS = {
    "avg_snr_lambda": "average link SNR lambda_U = lambda_B",
    "fail_prob": "element failure probability p",
    "n_elements": "elements per RIS M",
    "dist_user": "user-RIS distance d_UR (m)",
    "gamma_t": "SNR threshold gamma_T",
}


def parse_methods(text):
    if isinstance(text, str):
        items = [t.strip() for t in text.split(",") if t.strip()]
    else:
        items = list(text)
    out = []
    for item in items:
        try:
            m = _METHOD_ALIASES[item]
        except KeyError:
            raise ValueError(f"unknown method {item!r}; use cf, mc") from None
        if m not in out:
            out.append(m)
    if not out:
        raise ValueError("at least one method is required")
    return tuple(m for m in METHODS if m in out)


def parse_grid(text):
    values = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            lo, hi = tok.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            values.extend(float(v) for v in range(lo_i, hi_i + 1))
        else:
            values.append(float(tok))
    return tuple(values)


def _changes(axis, value):
    if axis == "avg_snr_lambda":
        return {"lambda_u": value, "lambda_b": value}
    if axis == "fail_prob":
        return {"fail_prob": value}
    if axis == "n_elements":
        if not float(value).is_integer():
            raise ValueError(f"n_elements grid values must be integers, got {value}")
        return {"elements_per_ris": int(value)}
    if axis == "dist_user":
        return {"dist_user_m": value}
    if axis == "gamma_t":
        return {"gamma_t": value}
    raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple
    fixed: Scenario
    methods: tuple = METHODS
    trials: int = 100_000
    seed: int = 0
    crn: bool = True
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        object.__setattr__(self, "methods", parse_methods(self.methods))
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}; expected one of {AXES}")
        if not self.grid:
            raise ValueError("grid must not be empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError(f"grid must be strictly increasing: {self.grid}")
        if self.axis == "n_elements":
            j = self.fixed.blocks_per_ris
            bad = [v for v in self.grid if not float(v).is_integer() or int(v) % j]
            if bad:
                raise ValueError(f"n_elements grid values {bad} are not divisible by blocks_per_ris={j}")
        if "monte_carlo" in self.methods and int(self.trials) < 1:
            raise ValueError("trials must be positive")

    def point_scenarios(self):
        """Validated scenario for every grid point (raises on the first bad one)."""
        out = []
        issues = []
        for v in self.grid:
            try:
                out.append(self.fixed.replace(**_changes(self.axis, v)))
            except ValidationError as exc:
                issues.extend(Issue(i.code, f"{self.axis}={v:g}: {i.field}", i.message) for i in exc.issues)
        if issues:
            raise ValidationError(issues)
        return out

    def point_seed(self, index):
        if self.crn:
            return int(self.seed)
        return rng.mix64((int(self.seed) ^ (index + 1)) & ((1 << 64) - 1))


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    outage_cf: float | None = None
    outage_mc: float | None = None
    mc_ci: float | None = None
    cf_flags: str = ""


def run_sweep(spec: SweepSpec):
    """Evaluate every grid point with the requested methods, in grid order.

    With ``crn`` every point reuses the same trial streams, so differences
    between points come only from the varied parameter. Closed-form errors
    at a point are recorded in ``cf_flags`` and the sweep continues.
    """
    scenarios = spec.point_scenarios()
    rows = []
    shared_snr = None
    for i, (value, scn) in enumerate(zip(spec.grid, scenarios)):
        cf = mc = ci = None
        flags = []
        if "closed_form" in spec.methods:
            try:
                res = outage_best_path(scn)
            except (ValueError, ArithmeticError) as exc:
                flags.append(f"closed form failed: {exc}")
            else:
                cf = res.probability
                if res.flags:
                    flags.append(f"ill-conditioned ({len(res.flags)} evaluations, max {res.digits_lost:.1f} digits lost)")
                if res.raw != res.probability:
                    flags.append(f"clamped raw={res.raw:.6g}")
        if "monte_carlo" in spec.methods:
            seed = spec.point_seed(i)
            if spec.axis == "gamma_t" and spec.crn:
                # threshold does not enter the draws: one simulation serves every point
                if shared_snr is None:
                    shared_snr = simulate_snr(scn, spec.trials, seed, workers=spec.workers)
                snr = shared_snr
            else:
                snr = simulate_snr(scn, spec.trials, seed, workers=spec.workers)
            est = _estimate(snr, scn.gamma_t, seed)
            mc, ci = est.outage_prob, est.ci_halfwidth
        rows.append(SweepRow(spec.axis, value, cf, mc, ci, "; ".join(flags)))
    return rows


# ---------------------------------------------------------------------------
# CSV


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float) and v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return format(v, ".10g")


def render_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.axis, _fmt(r.axis_value), _fmt(r.outage_cf), _fmt(r.outage_mc), _fmt(r.mc_ci), r.cf_flags])
    return buf.getvalue()


def emit_csv(rows, path):
    """Write rows as CSV; identical rows always give identical bytes."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    path.write_bytes(render_csv(rows).encode("utf-8"))
    return path


def read_csv(path):
    def opt(s):
        return float(s) if s != "" else None

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        return [SweepRow(a, float(v), opt(cf), opt(mc), opt(ci), fl) for a, v, cf, mc, ci, fl in reader]


def emit_gnuplot(series, path, title="", xlabel="", csv_names=None):
    """gnuplot script plotting each series' CSV (cf as lines, mc as points).

    ``series`` maps a series label to its CSV filename relative to ``path``.
    """
    path = Path(path)
    lines = [
        "# gnuplot script; run from this directory: gnuplot -p " + path.name,
        "set datafile separator ','",
        "set key outside right",
        "set grid",
        f"set title {_gp_quote(title)}",
        f"set xlabel {_gp_quote(xlabel)}",
        "set ylabel 'outage probability'",
        "set yrange [0:1.05]",
    ]
    plots = []
    for label, fname in series.items():
        plots.append(f"{_gp_quote(fname)} using 2:($3 == $3 ? $3 : NaN) with lines title {_gp_quote(label + ' (closed form)')}")
        plots.append(f"{_gp_quote(fname)} using 2:4:5 with yerrorbars title {_gp_quote(label + ' (Monte Carlo)')}")
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _gp_quote(s):
    return "'" + str(s).replace("'", "''") + "'"


# ---------------------------------------------------------------------------
# closed form vs Monte Carlo


@dataclass(frozen=True)
class AgreementPoint:
    axis_value: float
    outage_cf: float
    outage_mc: float
    mc_ci: float
    gap: float
    tolerance: float

    @property
    def agrees(self):
        return self.gap <= self.tolerance


@dataclass(frozen=True)
class AgreementReport:
    axis: str
    points: tuple
    verdict: str
    worst: AgreementPoint
    notes: tuple = field(default=())

    @property
    def max_gap(self):
        return self.worst.gap

    def render(self, title=""):
        out = []
        if title:
            out.append(f"# {title}")
        out.append(f"verdict: {self.verdict.upper()}")
        w = self.worst
        out.append(
            f"worst point: {self.axis}={_fmt(w.axis_value)} gap={w.gap:.6g} tolerance={w.tolerance:.6g}"
        )
        out.append(f"points diverging: {sum(not p.agrees for p in self.points)}/{len(self.points)}")
        out.append("")
        out.append(f"{self.axis:>16} {'closed_form':>12} {'monte_carlo':>12} {'mc_ci':>10} {'gap':>10} {'tol':>8}  status")
        for p in self.points:
            out.append(
                f"{_fmt(p.axis_value):>16} {p.outage_cf:12.6f} {p.outage_mc:12.6f} {p.mc_ci:10.6f} {p.gap:10.6f} {p.tolerance:8.4f}  {'ok' if p.agrees else 'DIVERGE'}"
            )
        for n in self.notes:
            out.append(f"note: {n}")
        return "\n".join(out) + "\n"


def agreement_report(rows):
    """Compare both methods point by point against max(0.02, 3 * CI).

    Divergence is a finding, not an error: the verdict is reported and the
    caller's exit status is unaffected.
    """
    rows = list(rows)
    points = []
    notes = []
    for r in rows:
        if r.outage_cf is None or r.outage_mc is None:
            raise ValueError(f"row at {r.axis}={r.axis_value} lacks one of the two methods")
        ci = r.mc_ci or 0.0
        tol = max(AGREE_FLOOR, AGREE_CI_MULT * ci)
        points.append(AgreementPoint(r.axis_value, r.outage_cf, r.outage_mc, ci, abs(r.outage_cf - r.outage_mc), tol))
        if r.cf_flags:
            notes.append(f"{r.axis}={_fmt(r.axis_value)}: {r.cf_flags}")
    if not points:
        raise ValueError("no rows to compare")
    worst = max(points, key=lambda p: (p.gap - p.tolerance, p.gap))
    verdict = "agree" if all(p.agrees for p in points) else "diverge"
    return AgreementReport(rows[0].axis, tuple(points), verdict, worst, tuple(notes))


# ---------------------------------------------------------------------------
# presets


@dataclass(frozen=True)
class Preset:
    name: str
    scenario: Scenario
    axis: str
    grid: tuple
    methods: tuple
    trials: int
    seed: int
    crn: bool
    title: str = ""
    series: tuple = ()  # (label, {key: value}) pairs

    def specs(self, trials=None, seed=None, workers=None):
        out = []
        for label, overrides in self.series or (("main", {}),):
            scn = self.scenario.replace(**overrides) if overrides else self.scenario
            out.append(
                (
                    label,
                    SweepSpec(
                        axis=self.axis,
                        grid=self.grid,
                        fixed=scn,
                        methods=self.methods,
                        trials=self.trials if trials is None else int(trials),
                        seed=self.seed if seed is None else int(seed),
                        crn=self.crn,
                        workers=workers,
                    ),
                )
            )
        return out


def _preset_dir():
    return resources.files("ris_outage") / "presets"


def list_presets():
    return sorted(p.name[:-4] for p in _preset_dir().iterdir() if p.name.endswith(".cfg"))


def _parse_bool(text, lineno, key):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigParseError(f"expected a boolean, got {text!r}", line=lineno, key=key)


def _parse_overrides(text, lineno, key):
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigParseError(f"series override {part!r} is not key=value", line=lineno, key=key)
        k, v = (x.strip() for x in part.split("=", 1))
        out[k] = (v, lineno)
    try:
        return _convert(out)
    except ConfigParseError as exc:
        raise ConfigParseError(str(exc), line=lineno, key=key) from None


def parse_preset_text(text, name="preset"):
    entries = parse_config_text(text, extra_prefixes=("sweep.", "series."))
    scen = {k: v for k, v in entries.items() if not k.startswith(("sweep.", "series."))}
    sweep = {k[len("sweep.") :]: v for k, v in entries.items() if k.startswith("sweep.")}
    series = [(k[len("series.") :], v) for k, v in entries.items() if k.startswith("series.")]
    known = {"axis", "grid", "methods", "trials", "seed", "crn", "title"}
    for k, (_, lineno) in sweep.items():
        if k not in known:
            raise ConfigParseError("unknown sweep setting", line=lineno, key=f"sweep.{k}")
    for k in ("axis", "grid"):
        if k not in sweep:
            raise ConfigParseError(f"preset needs sweep.{k}")
    scenario = validate(_convert(scen))

    def get(k, conv, default):
        if k not in sweep:
            return default
        v, lineno = sweep[k]
        try:
            return conv(v)
        except ValueError as exc:
            raise ConfigParseError(str(exc), line=lineno, key=f"sweep.{k}") from None

    crn = _parse_bool(*sweep["crn"], "sweep.crn") if "crn" in sweep else True
    parsed_series = tuple((label, _parse_overrides(v, ln, f"series.{label}")) for label, (v, ln) in series)
    return Preset(
        name=name,
        scenario=scenario,
        axis=get("axis", str, None),
        grid=get("grid", parse_grid, ()),
        methods=get("methods", parse_methods, METHODS),
        trials=get("trials", int, 100_000),
        seed=get("seed", lambda s: int(s, 0), 0),
        crn=crn,
        title=get("title", str, name),
        series=parsed_series,
    )


def load_preset(name_or_path):
    p = Path(name_or_path)
    if p.suffix == ".cfg" and p.exists():
        return parse_preset_text(p.read_text(encoding="utf-8"), name=p.stem)
    res = _preset_dir() / f"{name_or_path}.cfg"
    if not res.is_file():
        raise FileNotFoundError(f"no preset named {name_or_path!r}; available: {', '.join(list_presets())}")
    return parse_preset_text(res.read_text(encoding="utf-8"), name=str(name_or_path))


def _slug(label):
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in label)


def run_preset(preset, out_dir, trials=None, seed=None, workers=None, log=None):
    """Run every series of a preset and write CSVs, a gnuplot script and,
    when both methods ran, an agreement report. Returns ``{label: rows}``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = {}
    csvs = {}
    reports = []
    for label, spec in preset.specs(trials=trials, seed=seed, workers=workers):
        if log:
            log(f"{preset.name}: series {label} ({len(spec.grid)} points)")
        rows = run_sweep(spec)
        results[label] = rows
        fname = f"{preset.name}_{_slug(label)}.csv"
        emit_csv(rows, out_dir / fname)
        csvs[label] = fname
        if set(spec.methods) == set(METHODS):
            reports.append(agreement_report(rows).render(title=f"{preset.name} series {label}"))
    emit_gnuplot(csvs, out_dir / f"{preset.name}.gp", title=preset.title, xlabel=AXIS_LABELS[preset.axis])
    if reports:
        (out_dir / f"{preset.name}_agreement.txt").write_text("\n".join(reports), encoding="utf-8")
    return results
