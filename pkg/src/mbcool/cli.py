"""Command line: ``mbcool run | scan | reproduce``.

Exit codes: 0 success, 2 configuration error, 3 numeric error,
4 truncation overflow.  ``MBCOOL_THREADS`` sets the worker count for the
oracle's eigendecompositions (0 = all cores).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .config import ExperimentConfig, dump_config, load_config, parse_config
from .errors import (AlreadyCold, ConfigError, InvalidArgument, KernelMismatch, NumericError,
                     TruncationOverflow)
from .interval import scan_interval
from .protocol import EQUAL, ITERATIVE, Schedule, resolve_kernel, run_protocol
from .state import joint_state_from_thermal

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TRUNCATION = 0, 2, 3, 4
FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7")

log = logging.getLogger("mbcool")


def bundled_config_text(name: str) -> str:
    return resources.files("mbcool").joinpath("configs", f"{name}.cfg").read_text()


def bundled_config(name: str) -> ExperimentConfig:
    return parse_config(bundled_config_text(name))


def execute(cfg: ExperimentConfig):
    state = joint_state_from_thermal(cfg.modes, cfg.truncation)
    return run_protocol(state, cfg.schedule, cfg.modes, resolve_kernel(cfg.kernel, cfg.modes),
                        cfg.fidelity_subsets(), mode_labels=cfg.labels)


def execute_scan(cfg: ExperimentConfig, tau_max=None, samples=None):
    tau_max = tau_max if tau_max is not None else cfg.scan_tau_max_s
    if tau_max is None:
        tau_max = 20.0 / cfg.modes[0].omega
    samples = samples if samples is not None else cfg.scan_samples
    state = joint_state_from_thermal(cfg.modes, cfg.truncation)
    return scan_interval(state, cfg.modes, tau_max, samples, resolve_kernel(cfg.kernel, cfg.modes))


def summary_line(rec) -> str:
    total = rec.nbar_total
    fid = rec.fidelities.get("total", next(iter(rec.fidelities.values())))
    return (f"rounds={rec.rounds} nbar_total={total[-1]:.6g} (initial {total[0]:.6g}) "
            f"fid_total={fid[-1]:.6g} survival_cum={rec.survival_cum[-1]:.6g}")


def cmd_run(args):
    cfg = load_config(args.config)
    rec = execute(cfg)
    out = Path(args.out or cfg.csv or Path(args.config).with_suffix(".csv").name)
    rec.to_csv(out)
    print(summary_line(rec))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_scan(args):
    cfg = load_config(args.config)
    res = execute_scan(cfg, args.tau_max, args.samples)
    out = Path(args.out or Path(args.config).with_suffix(".scan.csv").name)
    res.to_csv(out)
    meta = out.with_suffix(".meta.json")
    res.write_metadata(meta)
    print(f"minimizer tau={res.minimizer:.6g} s nbar={res.minimum:.6g} "
          f"({res.minimum / res.initial_mean:.4f} of initial {res.initial_mean:.6g})")
    print(f"wrote {out} and {meta}")
    return EXIT_OK


def _write_run(out_dir, name, cfg, rec, entries, columns=None):
    cfg_name = f"{name}.cfg"
    (out_dir / cfg_name).write_text(dump_config(cfg))
    rec.to_csv(out_dir / f"{name}.csv", columns)
    entries.append({"csv": f"{name}.csv", "config": cfg_name})


def reproduce(figure: str, out_dir) -> list:
    """Regenerate one figure's curves as CSV files plus a manifest."""
    if figure not in FIGURES:
        raise InvalidArgument(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []

    if figure == "fig3":
        for name in ("fig3a", "fig3b"):
            cfg = bundled_config(name)
            res = execute_scan(cfg)
            (out_dir / f"{name}.cfg").write_text(dump_config(cfg))
            res.to_csv(out_dir / f"{name}.csv")
            res.write_metadata(out_dir / f"{name}.meta.json")
            entries.append({"csv": f"{name}.csv", "config": f"{name}.cfg",
                            "metadata": f"{name}.meta.json"})
    elif figure == "fig4":
        cfg = bundled_config("fig4")
        rec = execute(cfg)
        labels = [f"nbar_mode_{lab}" for lab in cfg.labels]
        teff = [f"Teff_mode_{lab}_K" for lab in cfg.labels]
        fids = [f"fid_{name}" for name in cfg.fidelity_subsets()]
        (out_dir / "fig4.cfg").write_text(dump_config(cfg))
        for name, cols in (("fig4_populations", ["round", *labels, "nbar_total", *teff]),
                           ("fig4_fidelities", ["round", *fids]),
                           ("fig4_survival", ["round", "interval_s", "survival_round",
                                              "survival_cum"])):
            rec.to_csv(out_dir / f"{name}.csv", cols)
            entries.append({"csv": f"{name}.csv", "config": "fig4.cfg"})
    elif figure == "fig5":
        base = bundled_config("fig5")
        equal = replace(base, schedule=Schedule(EQUAL, base.schedule.rounds))
        _write_run(out_dir, "fig5_equal", equal, execute(equal), entries)
        for L in (10, 5, 2, 1):
            cfg = replace(base, schedule=Schedule(ITERATIVE, base.schedule.rounds, None, L))
            _write_run(out_dir, f"fig5_L{L}", cfg, execute(cfg), entries)
    elif figure == "fig6":
        cfg = bundled_config("fig6")
        _write_run(out_dir, "fig6", cfg, execute(cfg), entries)
    elif figure == "fig7":
        base = bundled_config("fig7")
        d_e = base.modes[0].detuning
        for r in (1, 2, 3, 4):
            cfg = base.replace_mode(base.labels[1], detuning=r * d_e)
            _write_run(out_dir, f"fig7_df{r}", cfg, execute(cfg), entries)

    manifest = {"figure": figure, "outputs": entries}
    (out_dir / f"{figure}_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return entries


def cmd_reproduce(args):
    entries = reproduce(args.figure, args.out_dir)
    for e in entries:
        print(Path(args.out_dir) / e["csv"])
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="mbcool",
                                description="Measurement-based cooling of resonator modes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a cooling protocol and write its per-round CSV")
    r.add_argument("config")
    r.add_argument("--out", help="CSV path (default: the config's [output] csv)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("scan", help="scan the measurement interval for one measurement")
    s.add_argument("config")
    s.add_argument("--tau-max", type=float, help="largest interval in seconds")
    s.add_argument("--samples", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    f = sub.add_parser("reproduce", help="regenerate a figure's data from bundled configs")
    f.add_argument("figure", choices=FIGURES)
    f.add_argument("--out-dir", default=".")
    f.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TruncationOverflow as exc:
        print(f"truncation overflow: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (ConfigError, InvalidArgument, KernelMismatch) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, AlreadyCold, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
