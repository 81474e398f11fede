"""Batch front-end: run scenarios, compare actuation variants, selftest.

Subcommands:

* ``run``: one scenario with one variant; writes trace.csv, stats.txt and
  manifest.txt into the output directory.
* ``compare``: runs SEA and CEA from the same config (only the variant key
  differs), writes per-variant outputs plus a delta table with the
  corresponding flight-test reference values for side-by-side display.
* ``selftest``: the built-in property suite; exit 0 iff everything passes.
* ``print-config``: the full resolved default config.

Exit codes: 0 success, 1 selftest failure, 2 configuration error,
3 simulation fault (non-finite state; the message names the tick).
The TAILSIM_LOG environment variable sets the log level (DEBUG/INFO/...).
Outputs are byte-stable for identical inputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import SCENARIOS, default_config_text, parse_run_config
from .errors import ConfigError, ParseError, SimulationFault, TailsimError, ValidationError
from .scenarios import ScenarioReport, format_stats, format_trace_csv, run_scenario
from .selftest import run_selftest

log = logging.getLogger("tailsim")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_FAULT = 3

# reference values measured on the physical test vehicle, shown next to the
# simulated SEA/CEA pairs in compare tables (display only, never asserted)
FLIGHT_REFERENCE = {
    "takeoff": {"max_pitch_err_deg": ("1.4", "8.6 (ground) / 2.1 (pedestal)"),
                "max_x_err_m": ("0.04", "0.79")},
    "fig8": {"yaw_err_median_deg": ("19.5", "27.1"),
             "yaw_err_max_deg": ("87.9", "119.3"),
             "pos_err_median_cm": ("14.17", "15.35"),
             "pos_err_max_cm": ("38.91", "40.64")},
    "hover_gust": {"x_err_median_cm": ("1.77", "3.83"),
                   "x_err_max_cm": ("6.60", "7.92"),
                   "pitch_err_median_deg": ("1.32", "1.09"),
                   "pitch_err_max_deg": ("4.08", "5.78")},
    "step_x": {"max_yaw_err_return_deg": ("-", "31.2"),
               "max_roll_err_deg": ("-", "8.2")},
    "step_y": {"max_yaw_err_return_deg": ("8.4", "22.1")},
    "transition": {"final_airspeed_m_s": ("9.6", "-"),
                   "pitch_overshoot_deg": ("~0", "-")},
}


def _load_config(path: str | None):
    if path is None:
        return parse_run_config(""), "<defaults>"
    text = Path(path).read_text()
    return parse_run_config(text), path


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _manifest_text(args, cfg, scenario: str, variant: str) -> str:
    lines = [
        f"tool=tailsim {__version__}",
        f"config={args.config or '<defaults>'}",
        f"output={args.out}",
        f"scenario={scenario}",
        f"variant={variant}",
        f"fidelity={cfg.sim.fidelity}",
        f"seed={cfg.sim.seed}",
    ]
    return "\n".join(lines) + "\n"


def _report_stats(report: ScenarioReport) -> dict:
    out = {"scenario": report.scenario, "variant": report.variant}
    for k, v in report.headline.items():
        out[k] = v
    for k, v in report.stats.items():
        out[k] = v
    return out


def cmd_run(args) -> int:
    cfg, _ = _load_config(args.config)
    scenario = args.scenario or cfg.scenario.get("name", "hover")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r} (known: {', '.join(SCENARIOS)})")
    if args.variant:
        cfg.sim.variant = args.variant
    if args.fidelity:
        cfg.sim.fidelity = args.fidelity
    if args.seed is not None:
        cfg.sim.seed = args.seed
    out = Path(args.out)
    log.info("running %s/%s into %s", scenario, cfg.sim.variant, out)
    report = run_scenario(scenario, cfg.sim.variant, cfg)
    _write(out / "trace.csv", format_trace_csv(report.trace))
    _write(out / "stats.txt", format_stats(_report_stats(report)))
    _write(out / "manifest.txt", _manifest_text(args, cfg, scenario, cfg.sim.variant))
    if args.json:
        print(json.dumps(_report_stats(report), sort_keys=True))
    else:
        sys.stdout.write(format_stats(report.headline))
    return EXIT_OK


def _delta_table(scenario: str, sea: ScenarioReport, cea: ScenarioReport) -> str:
    ref = FLIGHT_REFERENCE.get(scenario, {})
    rows = [f"# {scenario}: simulated SEA vs CEA (flight reference shown where available)",
            "metric | sea | cea | cea/sea | flight sea | flight cea"]
    for key in sea.headline:
        a, b = sea.headline[key], cea.headline.get(key)
        if b is None:
            continue
        ratio = b / a if a not in (0, 0.0) else float("inf")
        r_sea, r_cea = ref.get(key, ("-", "-"))
        rows.append(f"{key} | {a:.6g} | {b:.6g} | {ratio:.3f} | {r_sea} | {r_cea}")
    return "\n".join(rows) + "\n"


def cmd_compare(args) -> int:
    cfg, _ = _load_config(args.config)
    scenario = args.scenario or cfg.scenario.get("name", "hover")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r} (known: {', '.join(SCENARIOS)})")
    if args.fidelity:
        cfg.sim.fidelity = args.fidelity
    if args.seed is not None:
        cfg.sim.seed = args.seed
    out = Path(args.out)
    reports = {}
    for variant in ("sea", "cea"):
        # identical configs differing only in the variant key
        vcfg = replace(cfg, sim=replace(cfg.sim, variant=variant))
        log.info("running %s/%s", scenario, variant)
        report = run_scenario(scenario, variant, vcfg)
        _write(out / variant / "trace.csv", format_trace_csv(report.trace))
        _write(out / variant / "stats.txt", format_stats(_report_stats(report)))
        reports[variant] = report
    table = _delta_table(scenario, reports["sea"], reports["cea"])
    _write(out / "delta.txt", table)
    _write(out / "manifest.txt", _manifest_text(args, cfg, scenario, "sea+cea"))
    if args.json:
        print(json.dumps({v: _report_stats(r) for v, r in reports.items()},
                         sort_keys=True))
    else:
        sys.stdout.write(table)
    return EXIT_OK


def cmd_selftest(args) -> int:
    cfg, _ = _load_config(args.config)
    ok, results = run_selftest(cfg.params,
                               verbose_print=None if args.json else print)
    if args.json:
        print(json.dumps({"pass": ok, "checks": results}, sort_keys=True))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_print_config(args) -> int:
    sys.stdout.write(default_config_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tailsim",
                                 description="tail-sitter VTOL actuation simulator")
    ap.add_argument("--version", action="version", version=f"tailsim {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", help="INI config file (defaults when omitted)")
        if out:
            sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--scenario", choices=SCENARIOS)
        sp.add_argument("--fidelity", choices=("averaged", "cyclic"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    sp = sub.add_parser("run", help="run one scenario with one variant")
    common(sp)
    sp.add_argument("--variant", choices=("sea", "cea"))
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("compare", help="run SEA and CEA from one config")
    common(sp)
    sp.set_defaults(fn=cmd_compare)

    sp = sub.add_parser("selftest", help="run the property suite")
    sp.add_argument("--config", help="INI config file")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_selftest)

    sp = sub.add_parser("print-config", help="emit full resolved defaults")
    sp.set_defaults(fn=cmd_print_config)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TAILSIM_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SimulationFault as e:
        print(f"simulation fault: {e}", file=sys.stderr)
        return EXIT_FAULT
    except (ConfigError, ParseError, ValidationError, FileNotFoundError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TailsimError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
