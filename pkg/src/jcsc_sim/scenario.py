"""Scenario files: strict TOML parsing, dispatch to the simulators, CSV output.

A scenario has top-level ``experiment``, ``seed``, ``trials`` and optional
``output``, one model section (``[waveform]`` for ber/rmse, ``[nd]`` or
``[mac]``) and a ``[sweep]`` section. Every key is validated; anything
unknown is rejected with the section and line that holds it.
"""
from __future__ import annotations

import dataclasses
import os
import sys
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .mac import VARIANTS, MacConfig, run_mac_sweep
from .nd import ALGORITHMS, NdConfig, run_nd_sweep
from .phy.channel import PointTarget, check_unambiguous
from .phy.sweeps import equivalent_snr_gain, run_ber_sweep, run_rmse_sweep
from .phy.waveform import MODES, WaveformConfig
from .rng import RngHandle
from .series import TrialSeries, split_comment, summarize, to_csv

EXPERIMENTS = ("ber", "rmse", "nd", "mac")
HEADER_TAG = "jcsc-sim scenario"
_TOP = ("experiment", "seed", "trials", "output")
_MODEL = {"ber": "waveform", "rmse": "waveform", "nd": "nd", "mac": "mac"}
_WAVEFORM_KEYS = tuple(f.name for f in dataclasses.fields(WaveformConfig) if f.name != "mode")
_ND_KEYS = tuple(f.name for f in dataclasses.fields(NdConfig) if f.name != "trials")
_MAC_KEYS = tuple(f.name for f in dataclasses.fields(MacConfig) if f.name not in ("trials", "variant"))
_SWEEP = {
    "ber": {"modes": list(MODES), "snr_db": None, "min_bits": 0},
    "rmse": {"modes": list(MODES), "snr_db": None, "target_range_m": None,
             "target_velocity_mps": 0.0, "inr_db": None},
    "nd": {"neighbor_counts": None, "algorithms": list(ALGORITHMS)},
    "mac": {"variants": list(VARIANTS)},
}


class ScenarioError(ValueError):
    exit_code = 1


class ScenarioParseError(ScenarioError):
    """Malformed file, unknown key or wrong type (usage/parse failure)."""


class ScenarioInvariantError(ScenarioError):
    """Well-formed scenario whose values break a model invariant."""
    exit_code = 2


def _plain(v):
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _defaults(cls, keys) -> dict:
    inst = cls()
    return {k: _plain(getattr(inst, k)) for k in keys if getattr(inst, k) is not None}


@dataclass
class Scenario:
    experiment: str
    seed: int
    trials: int
    model: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output: str | None = None

    def __post_init__(self):
        _validate(self)

    @property
    def model_section(self) -> str:
        return _MODEL[self.experiment]

    def with_overrides(self, seed: int | None = None, trials: int | None = None,
                       output: str | None = None) -> "Scenario":
        return Scenario(self.experiment, self.seed if seed is None else seed,
                        self.trials if trials is None else trials, dict(self.model), dict(self.sweep),
                        self.output if output is None else output)

    def to_dict(self, include_output: bool = True) -> dict:
        d = {"experiment": self.experiment, "seed": self.seed, "trials": self.trials}
        if include_output and self.output:
            d["output"] = self.output
        d[self.model_section] = _plain(self.model)
        d["sweep"] = {k: v for k, v in _plain(self.sweep).items() if v is not None}
        return d

    def to_toml(self, include_output: bool = True) -> str:
        return tomli_w.dumps(self.to_dict(include_output))

    # built model objects
    def waveform(self, mode: str | None = None) -> WaveformConfig:
        cfg = WaveformConfig(**self.model)
        return cfg.as_mode(mode) if mode else cfg

    def nd_config(self) -> NdConfig:
        return NdConfig(**self.model, trials=self.trials)

    def mac_config(self) -> MacConfig:
        return MacConfig(**self.model, trials=self.trials)

    def snr_points(self, mode: str) -> list[float]:
        s = self.sweep["snr_db"]
        return list(s[mode]) if isinstance(s, dict) else list(s)


def _line_of(text: str | None, key: str) -> str:
    if not text:
        return ""
    for no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith(key) and stripped[len(key):].lstrip().startswith(("=", ".")):
            return f" (line {no})"
    return ""


def _check_keys(section: str, given: dict, allowed, text: str | None = None):
    for k in given:
        if k not in allowed:
            raise ScenarioParseError(f"unknown key {k!r} in [{section}]{_line_of(text, k)}; "
                                     f"allowed: {', '.join(sorted(allowed))}")


def _validate(sc: Scenario):
    if sc.experiment not in EXPERIMENTS:
        raise ScenarioParseError(f"experiment must be one of {EXPERIMENTS}, got {sc.experiment!r}")
    if not isinstance(sc.seed, int) or isinstance(sc.seed, bool) or not 0 <= sc.seed < 2**64:
        raise ScenarioInvariantError("seed must be an integer in [0, 2**64)")
    if not isinstance(sc.trials, int) or isinstance(sc.trials, bool) or sc.trials < 1:
        raise ScenarioInvariantError("trials must be an integer >= 1")
    try:
        if sc.experiment in ("ber", "rmse"):
            base = sc.waveform()
            modes = sc.sweep["modes"]
            if not modes or any(m not in MODES for m in modes):
                raise ValueError(f"sweep.modes must be a non-empty subset of {MODES}")
            for m in modes:
                base.as_mode(m)
                pts = sc.snr_points(m)
                if not pts:
                    raise ValueError(f"sweep.snr_db is empty for mode {m}")
            if sc.experiment == "rmse":
                target = PointTarget(sc.sweep["target_range_m"], sc.sweep["target_velocity_mps"])
                check_unambiguous(target, base)
            elif sc.sweep["min_bits"] < 0:
                raise ValueError("sweep.min_bits must be >= 0")
        elif sc.experiment == "nd":
            sc.nd_config()
            counts = sc.sweep["neighbor_counts"]
            if not counts or any(int(c) < 0 for c in counts):
                raise ValueError("sweep.neighbor_counts must be a non-empty list of counts >= 0")
            if not sc.sweep["algorithms"] or any(a not in ALGORITHMS for a in sc.sweep["algorithms"]):
                raise ValueError(f"sweep.algorithms must be a non-empty subset of {ALGORITHMS}")
        else:
            cfg = sc.mac_config()
            if not cfg.frame_slots:
                raise ValueError("mac.frame_slots must not be empty")
            for f in cfg.frame_slots:
                cfg.arrival_prob_for(f)
            if not sc.sweep["variants"] or any(v not in VARIANTS for v in sc.sweep["variants"]):
                raise ValueError(f"sweep.variants must be a non-empty subset of {VARIANTS}")
    except ScenarioError:
        raise
    except (TypeError, KeyError) as exc:
        raise ScenarioParseError(f"{sc.experiment} scenario: {exc}") from exc
    except ValueError as exc:
        raise ScenarioInvariantError(f"{sc.experiment} scenario: {exc}") from exc


def scenario_from_dict(data: dict, text: str | None = None) -> Scenario:
    """Validate a parsed document and fill defaults."""
    exp = data.get("experiment")
    if exp not in EXPERIMENTS:
        raise ScenarioParseError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}{_line_of(text, 'experiment')}")
    section = _MODEL[exp]
    _check_keys("top level", data, _TOP + (section, "sweep"), text)
    for k in ("seed", "trials"):
        if k not in data:
            raise ScenarioParseError(f"missing required key {k!r}")
    model_in = data.get(section, {})
    sweep_in = data.get("sweep", {})
    if not isinstance(model_in, dict) or not isinstance(sweep_in, dict):
        raise ScenarioParseError(f"[{section}] and [sweep] must be tables")

    if exp in ("ber", "rmse"):
        keys, cls = _WAVEFORM_KEYS, WaveformConfig
    elif exp == "nd":
        keys, cls = _ND_KEYS, NdConfig
    else:
        keys, cls = _MAC_KEYS, MacConfig
    _check_keys(section, model_in, keys, text)
    model = _defaults(cls, keys)
    model.update(_plain(model_in))

    _check_keys("sweep", sweep_in, _SWEEP[exp], text)
    sweep = dict(_SWEEP[exp])
    sweep.update(_plain(sweep_in))
    for k, v in sweep.items():
        if v is None and k not in ("inr_db",):
            raise ScenarioParseError(f"missing required key {k!r} in [sweep]")
    if isinstance(sweep.get("snr_db"), dict):
        _check_keys("sweep.snr_db", sweep["snr_db"], MODES, text)
    out = data.get("output")
    if out is not None and not isinstance(out, str):
        raise ScenarioParseError("output must be a string path")
    return Scenario(exp, data["seed"], data["trials"], model, sweep, out)


def parse_scenario(text: str) -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(f"malformed scenario: {exc}") from exc
    return scenario_from_dict(data, text)


def load_scenario(path) -> Scenario:
    """Load a ``.toml`` scenario, or the scenario embedded in a result CSV's header."""
    p = Path(path)
    if not p.is_file():
        raise ScenarioParseError(f"scenario file not found: {p}")
    text = p.read_text(encoding="utf-8")
    if p.suffix.lower() == ".csv" or text.startswith(f"# {HEADER_TAG}"):
        comment, _ = split_comment(text)
        lines = comment.splitlines()
        if not lines or not lines[0].startswith(HEADER_TAG):
            raise ScenarioParseError(f"{p}: no embedded scenario header")
        text = "\n".join(lines[1:]) + "\n"
    return parse_scenario(text)


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("jcsc_sim") / "scenarios"
    return {Path(str(e)).stem: Path(str(e)) for e in sorted(root.iterdir(), key=lambda e: e.name)
            if e.name.endswith(".toml")}


def resolve_scenario_path(name_or_path) -> Path:
    p = Path(name_or_path)
    if p.is_file():
        return p
    found = bundled_scenarios().get(str(name_or_path))
    if found is None:
        raise ScenarioParseError(f"scenario file not found: {name_or_path}")
    return found


def header_comment(sc: Scenario) -> str:
    return f"{HEADER_TAG} (jcsc-sim {__version__})\n" + sc.to_toml(include_output=False)


def simulate(sc: Scenario, trial_log: dict | None = None) -> TrialSeries:
    """Dispatch to the experiment's sweep; ``trial_log`` collects per-trial data for nd/mac."""
    rng = RngHandle(sc.seed)
    if sc.experiment == "ber":
        rows = []
        for m in sc.sweep["modes"]:
            s = run_ber_sweep(sc.waveform(m), sc.snr_points(m), sc.trials, rng, sc.sweep["min_bits"])
            rows += s.rows
        return TrialSeries("ber", rows)
    if sc.experiment == "rmse":
        target = PointTarget(sc.sweep["target_range_m"], sc.sweep["target_velocity_mps"])
        rows = []
        for m in sc.sweep["modes"]:
            s = run_rmse_sweep(sc.waveform(m), sc.snr_points(m), target, sc.trials, rng, sc.sweep["inr_db"])
            rows += s.rows
        return TrialSeries("rmse", rows)
    if sc.experiment == "nd":
        return run_nd_sweep(sc.nd_config(), sc.sweep["neighbor_counts"], rng, tuple(sc.sweep["algorithms"]),
                            trial_log)
    return run_mac_sweep(sc.mac_config(), rng, tuple(sc.sweep["variants"]), trial_log)


def write_atomic(path, text: str):
    """Write via a temp file in the target directory, then rename over ``path``."""
    p = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{p.name}.", suffix=".tmp", dir=p.parent if str(p.parent) else ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, p)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_scenario(sc: Scenario, out=None, trial_log: dict | None = None) -> tuple[TrialSeries, str]:
    """Run, render CSV with the embedded scenario header, and write it to ``out`` if given."""
    series = simulate(sc, trial_log)
    text = to_csv(series, header_comment(sc))
    if out:
        write_atomic(out, text)
    return series, text


def summary_report(series: TrialSeries) -> str:
    """Proposed-vs-baseline comparison for whichever pair the series holds."""
    exp = series.experiment
    pairs = {"ber": ("plain_ofdm", "cd_ofdm"), "rmse": ("plain_ofdm", "cd_ofdm"),
             "nd": ("cra", "rl_cra"), "mac": ("conventional", "jcsc")}
    base, prop = pairs[exp]
    if not {base, prop} <= set(series.variants()):
        return f"{exp}: single variant, nothing to compare"
    if exp == "ber":
        try:
            s = summarize(series.curve(base, "ber"), series.curve(prop, "ber"), target=1e-3)
            return s.report(base, prop)
        except ValueError as exc:
            return f"ber: {exc}"
    if exp == "rmse":
        lines = []
        for metric in ("range_rmse", "velocity_rmse"):
            xb, yb = series.curve(base, metric)
            xp, yp = series.curve(prop, metric)
            gain = equivalent_snr_gain(xb, yb, xp, yp)
            finite = np.sort(gain[~np.isnan(gain)])
            med = f"{float(np.median(finite)):.2f} dB" if len(finite) else "n/a"
            lines.append(f"{metric}: equivalent-SNR gain of {prop} over {base}, median {med}")
            try:
                s = summarize((xb, yb), (xp, yp))
                lines.append(s.report(base, prop))
            except ValueError:
                pass
        return "\n".join(lines)
    return summarize(series.curve(base), series.curve(prop)).report(base, prop)


__all__ = [
    "EXPERIMENTS", "Scenario", "ScenarioError", "ScenarioParseError", "ScenarioInvariantError",
    "load_scenario", "parse_scenario", "scenario_from_dict", "bundled_scenarios", "resolve_scenario_path",
    "header_comment", "simulate", "run_scenario", "write_atomic", "summary_report",
]
