#!/usr/bin/env python3
"""
Spectrum Sensing - Command Line
Runs config-driven sensing experiments and writes their CSV tables.

Usage:
    python scripts/sensing.py run configs/single_user.yaml
    python scripts/sensing.py run configs/cooperative_and.yaml --output results/and.csv
    python scripts/sensing.py theory [configs/single_user.yaml] [--output results/theory.csv]
    python scripts/sensing.py validate configs/sprt_attack.yaml

Exit status: 0 success, 1 validation error, 2 runtime error. Logs and the
progress bar go to stderr; data goes only to the output files.
"""

import argparse
import json
import logging
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from config import (
    LOG_LEVEL, SHOW_PROGRESS, Mode, default_experiment, load_config, resolve_output,
)
from energy_detector import required_samples
from signal_model import Fading
from montecarlo import (
    compare_theory, fused_theory_curve, run_cooperative, run_single_user, run_sprt_attack,
    theory_curves, train_reputations,
)
from reports import (
    channel_path, comparison_summary, log_summary, render_csv, render_sprt_csv,
    render_theory_csv, write_outputs,
)

logger = logging.getLogger("sensing")

DEFAULT_THEORY_OUTPUT = "theory.csv"


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the validation status."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _setup_logging():
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, LOG_LEVEL, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# ============================================================
# Commands
# ============================================================

def _channel_ids(cfg):
    return cfg.channel_ids or tuple(range(1, len(cfg.experiment.channels) + 1))


def _theory_bodies(spec, output, channel_ids):
    for cid, ch in zip(channel_ids, spec.channels):
        snr = ch.mean_snr if ch.fading is Fading.RAYLEIGH else ch.snr_linear
        logger.info("channel %d (%.1f dB): %d samples needed for pf 0.1 / pd 0.9",
                    cid, ch.snr_db, required_samples(0.1, 0.9, snr))
    if spec.rule is not None:
        return {output: render_theory_csv(fused_theory_curve(spec))}
    return {
        channel_path(output, cid): render_theory_csv(points)
        for cid, points in zip(channel_ids, theory_curves(spec))
    }


def cmd_theory(config_path, output=None):
    if config_path:
        cfg = load_config(config_path)
        spec, ids = cfg.experiment, _channel_ids(cfg)
        output = output or cfg.output_path
    else:
        spec = default_experiment()
        ids = tuple(range(1, len(spec.channels) + 1))
        output = output or DEFAULT_THEORY_OUTPUT
    return write_outputs(_theory_bodies(spec, resolve_output(output), ids))


def cmd_run(config_path, output=None):
    cfg = load_config(config_path)
    spec = cfg.experiment
    output = resolve_output(output or cfg.output_path)

    if cfg.mode is Mode.THEORY_ONLY:
        bodies = _theory_bodies(spec, output, _channel_ids(cfg))

    elif cfg.mode is Mode.SINGLE_USER:
        curves = run_single_user(spec, progress=SHOW_PROGRESS)
        bodies = {}
        for cid, points in zip(_channel_ids(cfg), curves):
            log_summary(comparison_summary(compare_theory(points, spec.n_trials), f"ch{cid}"))
            bodies[channel_path(output, cid)] = render_csv(points)

    elif cfg.mode is Mode.COOPERATIVE:
        reputations = None
        if spec.trust_floor is not None:
            reputations = train_reputations(spec, cfg.sprt)
        points = run_cooperative(spec, reputations, progress=SHOW_PROGRESS)
        log_summary(comparison_summary(compare_theory(points, spec.n_trials), str(spec.rule)))
        bodies = {output: render_csv(points)}

    else:
        bodies = {output: render_sprt_csv(run_sprt_attack(spec, cfg.sprt))}

    return write_outputs(bodies)


def cmd_validate(config_path):
    cfg = load_config(config_path)
    spec = cfg.experiment
    logger.info("%s: mode %s, %d channels, %d trials, seed %d",
                config_path, cfg.mode.value, len(spec.channels), spec.n_trials, spec.seed)
    return 0


# ============================================================
# CLI
# ============================================================

def build_parser():
    parser = _Parser(prog="sensing", description="Cooperative spectrum sensing experiments")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="Run the experiment a config describes")
    run.add_argument("config", help="Run config (YAML)")
    run.add_argument("--output", help="Override the config's output path")

    th = sub.add_parser("theory", help="Closed-form curves only, no simulation")
    th.add_argument("config", nargs="?", help="Run config (default: the three reference channels)")
    th.add_argument("--output", help="Output path")

    val = sub.add_parser("validate", help="Parse and check a config without running it")
    val.add_argument("config", help="Run config (YAML)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1

    _setup_logging()
    try:
        if args.command == "run":
            written = cmd_run(args.config, args.output)
        elif args.command == "theory":
            written = cmd_theory(args.config, args.output)
        else:
            return cmd_validate(args.config)
    except ValueError as e:
        print(json.dumps({"error": str(e)}), file=sys.stderr)
        return 1
    except Exception as e:
        print(json.dumps({"error": f"Unexpected error: {e}"}), file=sys.stderr)
        return 2
    logger.info("done: %d bytes written", written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
