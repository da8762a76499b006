"""Command-line front end: protocol statistics, delay scans, calibration.

Exit codes: 0 success, 2 configuration or validation error, 3 I/O error,
4 calibration target unreachable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, SCHEMA_VERSION, spec_from_json, spec_to_json
from .errors import ConfigError, NoSolution, TeleportSimError
from .oracle import calibrate_fourfold_overlap, calibrate_spurious
from .presets import (
    DEFAULT_PULSES,
    PRESET_NAMES,
    Scenario,
    build_preset,
    run_scenario,
)
from .protocol import teleport, teleport_postselected
from .states import BellOutcome, PolarizationSpec, fidelity

ENV_SEED = "TELEPORTSIM_SEED"
FALLBACK_SEED = 12345

_VISIBILITY_CSV = "visibility.csv"
_MANIFEST = "manifest.json"


def _resolve_seed(cli_seed: int | None, config_seed: int | None = None) -> int:
    """Precedence: CLI flag, then config value, then env fallback, then default."""
    if cli_seed is not None:
        return cli_seed
    if config_seed is not None:
        return config_seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{ENV_SEED} must be an integer, got {env!r}") from exc
    return FALLBACK_SEED


def cmd_teleport(args: argparse.Namespace) -> int:
    spec = PolarizationSpec.parse(args.state)
    seed = _resolve_seed(args.seed)
    rng = np.random.default_rng(seed)
    target = spec.state()

    print(f"input state: {spec}")
    print(f"trials: {args.trials}  seed: {seed}")
    if args.postselect:
        successes = 0
        fidelity_sum = 0.0
        for _ in range(args.trials):
            rho = teleport_postselected(spec, rng)
            if rho is not None:
                successes += 1
                fidelity_sum += fidelity(rho, target)
        rate = successes / args.trials
        print(f"postselected successes: {successes} ({rate:.6f})")
        if successes:
            print(f"mean output fidelity: {fidelity_sum / successes:.12f}")
    else:
        counts = {kind: 0 for kind in BellOutcome}
        fidelity_sum = 0.0
        for _ in range(args.trials):
            outcome, rho = teleport(spec, rng)
            counts[outcome] += 1
            fidelity_sum += fidelity(rho, target)
        print("outcome  count  frequency")
        for kind in BellOutcome:
            print(
                f"{kind.value:<7} {counts[kind]:>6}  "
                f"{counts[kind] / args.trials:.6f}"
            )
        print(f"mean corrected fidelity: {fidelity_sum / args.trials:.12f}")
    return 0


def _chi_filename(spec: PolarizationSpec, index: int) -> str:
    if spec.label != "custom":
        return spec.label
    return f"custom{index}"


def _scenario_from_config_dict(
    data: dict, args: argparse.Namespace
) -> tuple[Scenario, str | None]:
    """Build a scenario from a config file or a run manifest."""
    if "command" in data:  # run manifest: resolved snapshot, no recalibration
        if data.get("command") != "scan":
            raise ConfigError(f"manifest command {data.get('command')!r} is not 'scan'")
        config_data = dict(data["config"])
        preset = data.get("preset")
        chis = tuple(spec_from_json(spec) for spec in data["chis"])
        subtract = bool(data["subtract_background"])
        channel = data["visibility_channel"]
        name = preset or "custom"
    else:
        config_data = dict(data)
        preset = None
        chis = ()
        subtract = None
        channel = None
        name = "custom"

    config_data["seed"] = _resolve_seed(args.seed, config_data.get("seed"))
    if args.pulses_per_delay is not None:
        config_data["pulses_per_delay"] = args.pulses_per_delay
    config = ExperimentConfig.from_dict(config_data)

    if not chis:
        chis = (config.prep.chi,)
    if subtract is None:
        subtract = config.source.max_pairs_per_pass >= 2
    if channel is None:
        channel = "d1f1f2_corr" if subtract else "d1f1f2"
    return Scenario(name, config, chis, subtract, channel), preset


def cmd_scan(args: argparse.Namespace) -> int:
    if args.preset:
        seed = _resolve_seed(args.seed)
        pulses = args.pulses_per_delay or DEFAULT_PULSES
        scenario = build_preset(args.preset, seed, pulses)
        preset_name = args.preset
    else:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        scenario, preset_name = _scenario_from_config_dict(data, args)
        preset_name = preset_name or None

    results = run_scenario(scenario)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for i, res in enumerate(results):
        name = f"scan_{_chi_filename(res.chi, i)}.csv"
        res.scan.to_csv(out_dir / name)
        outputs.append(name)

    lines = ["polarization,channel,visibility,sigma_visibility"]
    for res in results:
        lines.append(
            f"{res.chi},{scenario.visibility_channel},"
            f"{res.visibility:.12g},{res.sigma_visibility:.12g}"
        )
    (out_dir / _VISIBILITY_CSV).write_text("\n".join(lines) + "\n")
    outputs.append(_VISIBILITY_CSV)

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "command": "scan",
        "preset": preset_name,
        "seed": scenario.base_config.seed,
        "config": scenario.base_config.to_dict(),
        "chis": [spec_to_json(chi) for chi in scenario.chis],
        "subtract_background": scenario.subtract_background,
        "visibility_channel": scenario.visibility_channel,
        "outputs": outputs,
    }
    (out_dir / _MANIFEST).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )

    print(f"scenario: {scenario.name}  seed: {scenario.base_config.seed}")
    for res in results:
        print(
            f"chi {res.chi}: {scenario.visibility_channel} visibility "
            f"{res.visibility:.4f} +- {res.sigma_visibility:.4f}"
        )
    print(f"wrote {len(outputs) + 1} files to {out_dir}")
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    if args.spurious_target is not None:
        source = calibrate_spurious(args.spurious_target)
        fragment = {
            "source": {
                "mean_pairs_pass1": source.mean_pairs_pass1,
                "mean_pairs_pass2": source.mean_pairs_pass2,
                "max_pairs_per_pass": source.max_pairs_per_pass,
                "emission_statistics": source.emission_statistics,
            }
        }
    else:
        # solved against the double-pair scenario the fourfold preset uses
        context = build_preset("fig5-fourfold", seed=0, pulses_per_delay=1)
        base = replace(context.base_config, max_overlap=1.0)
        v_max = calibrate_fourfold_overlap(args.fourfold_visibility, base)
        fragment = {"max_overlap": v_max}
    print(json.dumps(fragment, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleportsim",
        description="Simulate polarization teleportation and its coincidence statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_tel = sub.add_parser("teleport", help="run ideal-protocol trials")
    p_tel.add_argument("--state", required=True, help="polarization: label or 'alpha,beta'")
    p_tel.add_argument("--trials", type=int, default=10_000)
    p_tel.add_argument("--seed", type=int, default=None)
    p_tel.add_argument("--postselect", action="store_true",
                       help="keep only the antisymmetric outcome")
    p_tel.set_defaults(func=cmd_teleport)

    p_scan = sub.add_parser("scan", help="run a delay scan and write CSVs")
    group = p_scan.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=PRESET_NAMES)
    group.add_argument("--config", help="JSON config file or run manifest")
    p_scan.add_argument("--out", required=True, help="output directory")
    p_scan.add_argument("--seed", type=int, default=None)
    p_scan.add_argument("--pulses-per-delay", type=int, default=None)
    p_scan.set_defaults(func=cmd_scan)

    p_cal = sub.add_parser("calibrate", help="solve source or overlap parameters")
    target = p_cal.add_mutually_exclusive_group(required=True)
    target.add_argument("--spurious-target", type=float, default=None)
    target.add_argument("--fourfold-visibility", type=float, default=None)
    p_cal.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoSolution as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except TeleportSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
