"""Experiment configuration files.

INI-style text with explicit units in key names::

    [protocol]
    kernel = auto            ; closed-form | oracle | auto
    schedule = equal         ; equal | iterative
    rounds = 100
    interval_s = auto        ; seconds, or auto = 1/W_th of the initial state
    update_every = 1

    [truncation]
    tail_epsilon = 1e-12
    hard_cap = 1024

    [output]
    csv = run.csv
    fidelity = mode_a: a; total: a, b

    [mode a]
    omega_rad_per_s = 1.4e9
    coupling_rad_per_s = 5.6e7
    detuning_rad_per_s = 1.4e7
    temperature_K = 0.1

Every ``[mode <label>]`` section adds one mode, in file order.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .errors import ConfigError, InvalidArgument
from .physics import ModeSpec, TruncationPolicy
from .protocol import EQUAL, ITERATIVE, Schedule

KERNELS = ("closed-form", "oracle", "auto")
MODE_KEYS = ("omega_rad_per_s", "coupling_rad_per_s", "detuning_rad_per_s", "temperature_K")


@dataclass(frozen=True)
class ExperimentConfig:
    labels: tuple
    modes: tuple
    schedule: Schedule = Schedule()
    kernel: str = "auto"
    truncation: TruncationPolicy = TruncationPolicy()
    csv: str | None = None
    fidelity: tuple = ()  # ((name, (label, ...)), ...)
    scan_tau_max_s: float | None = None
    scan_samples: int = 2000

    def fidelity_subsets(self) -> dict:
        if not self.fidelity:
            return {f"mode_{self.labels[0]}": (0,), "total": tuple(range(len(self.modes)))}
        pos = {lab: k for k, lab in enumerate(self.labels)}
        return {name: tuple(pos[lab] for lab in labs) for name, labs in self.fidelity}

    def replace_mode(self, label, **changes) -> "ExperimentConfig":
        from dataclasses import replace
        k = self.labels.index(label)
        modes = list(self.modes)
        modes[k] = replace(modes[k], **changes)
        return replace(self, modes=tuple(modes))


def _parser():
    p = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    p.optionxform = str  # keep temperature_K
    return p


def _get(section, key, conv, name, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"[{name}] missing required key '{key}'")
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{name}] {key} = {raw!r}: {exc}") from None


def _finite(raw):
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _integer(raw):
    v = float(raw)
    if v != int(v):
        raise ValueError("must be an integer")
    return int(v)


def _fidelity_spec(raw, labels):
    out = []
    for item in filter(None, (s.strip() for s in raw.split(";"))):
        if ":" not in item:
            raise ValueError(f"expected 'name: label, label', got {item!r}")
        name, labs = item.split(":", 1)
        labs = tuple(s.strip() for s in labs.split(",") if s.strip())
        if not labs:
            raise ValueError(f"fidelity subset {name.strip()!r} is empty")
        unknown = [lab for lab in labs if lab not in labels]
        if unknown:
            raise ValueError(f"unknown mode labels {unknown}")
        out.append((name.strip(), labs))
    return tuple(out)


def parse_config(text: str) -> ExperimentConfig:
    p = _parser()
    try:
        p.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    labels, modes = [], []
    for name in p.sections():
        if not name.startswith("mode"):
            continue
        label = name[4:].strip(" .")
        if not label:
            raise ConfigError(f"[{name}] mode sections are named '[mode <label>]'")
        sec = p[name]
        unknown = set(sec) - set(MODE_KEYS)
        if unknown:
            raise ConfigError(f"[{name}] unknown keys {sorted(unknown)}")
        vals = [_get(sec, k, _finite, name, required=True) for k in MODE_KEYS]
        try:
            modes.append(ModeSpec(*vals))
        except InvalidArgument as exc:
            raise ConfigError(f"[{name}] {exc}") from None
        labels.append(label)
    if not modes:
        raise ConfigError("config defines no modes: add at least one '[mode <label>]' section")
    if len(set(labels)) != len(labels):
        raise ConfigError("mode labels must be unique")

    proto = p["protocol"] if p.has_section("protocol") else {}
    kernel = _get(proto, "kernel", str, "protocol", "auto")
    if kernel not in KERNELS:
        raise ConfigError(f"[protocol] kernel = {kernel!r}: expected one of {KERNELS}")
    kind = _get(proto, "schedule", str, "protocol", EQUAL)
    interval = _get(proto, "interval_s", lambda r: None if r == "auto" else _finite(r),
                    "protocol", None)
    try:
        schedule = Schedule(kind=kind,
                            rounds=_get(proto, "rounds", _integer, "protocol", 1),
                            interval=interval,
                            update_every=_get(proto, "update_every", _integer, "protocol", 1))
    except InvalidArgument as exc:
        raise ConfigError(f"[protocol] {exc}") from None
    if kind == ITERATIVE and interval is not None:
        raise ConfigError("[protocol] interval_s must be 'auto' for iterative schedules")

    trunc = p["truncation"] if p.has_section("truncation") else {}
    defaults = TruncationPolicy()
    try:
        policy = TruncationPolicy(
            tail_epsilon=_get(trunc, "tail_epsilon", _finite, "truncation", defaults.tail_epsilon),
            hard_cap=_get(trunc, "hard_cap", _integer, "truncation", defaults.hard_cap),
            joint_tail_epsilon=_get(trunc, "joint_tail_epsilon", _finite, "truncation",
                                    defaults.joint_tail_epsilon),
            max_grid_entries=_get(trunc, "max_grid_entries", _integer, "truncation",
                                  defaults.max_grid_entries))
    except InvalidArgument as exc:
        raise ConfigError(f"[truncation] {exc}") from None

    out = p["output"] if p.has_section("output") else {}
    fidelity = _get(out, "fidelity", lambda r: _fidelity_spec(r, labels), "output", ())
    scan = p["scan"] if p.has_section("scan") else {}
    samples = _get(scan, "samples", _integer, "scan", 2000)
    tau_max = _get(scan, "tau_max_s", _finite, "scan", None)
    return ExperimentConfig(tuple(labels), tuple(modes), schedule, kernel, policy,
                            _get(out, "csv", str, "output", None), fidelity, tau_max, samples)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    s = cfg.schedule
    t = cfg.truncation
    lines = ["[protocol]",
             f"kernel = {cfg.kernel}",
             f"schedule = {s.kind}",
             f"rounds = {s.rounds}",
             f"interval_s = {'auto' if s.interval is None else repr(float(s.interval))}",
             f"update_every = {s.update_every}",
             "",
             "[truncation]",
             f"tail_epsilon = {t.tail_epsilon!r}",
             f"hard_cap = {t.hard_cap}",
             f"joint_tail_epsilon = {t.joint_tail_epsilon!r}",
             f"max_grid_entries = {t.max_grid_entries}",
             ""]
    out = []
    if cfg.csv is not None:
        out.append(f"csv = {cfg.csv}")
    if cfg.fidelity:
        out.append("fidelity = " + "; ".join(f"{n}: {', '.join(labs)}" for n, labs in cfg.fidelity))
    if out:
        lines += ["[output]", *out, ""]
    lines += ["[scan]", f"samples = {cfg.scan_samples}"]
    if cfg.scan_tau_max_s is not None:
        lines.append(f"tau_max_s = {cfg.scan_tau_max_s!r}")
    lines.append("")
    for label, m in zip(cfg.labels, cfg.modes):
        lines += [f"[mode {label}]",
                  f"omega_rad_per_s = {m.omega!r}",
                  f"coupling_rad_per_s = {m.coupling!r}",
                  f"detuning_rad_per_s = {m.detuning!r}",
                  f"temperature_K = {m.temperature!r}",
                  ""]
    return "\n".join(lines)
