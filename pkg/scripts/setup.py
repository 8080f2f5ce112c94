#!/usr/bin/env python3
"""
Spectrum Sensing — First-Run Setup

Checks the Python version and numeric dependencies, creates the output
directory, validates the canned run configs and runs a small smoke sweep.

Usage:
    python scripts/setup.py

    # Or with env vars pre-set:
    SENSING_OUTPUT_DIR=/tmp/roc python scripts/setup.py
"""

import glob
import importlib
import os
import sys

# Resolve paths relative to this script
REPO_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCRIPTS_DIR = os.path.join(REPO_DIR, "scripts")
CONFIGS_DIR = os.path.join(REPO_DIR, "configs")

# Allow imports from scripts/
sys.path.insert(0, SCRIPTS_DIR)

DEPENDENCIES = (("numpy", "numpy"), ("scipy", "scipy"), ("yaml", "PyYAML"), ("tqdm", "tqdm"))


def banner(msg):
    print(f"\n{'='*60}")
    print(f"  {msg}")
    print(f"{'='*60}\n")


def ok(msg):
    print(f"  ✅ {msg}")


def warn(msg):
    print(f"  ⚠️  {msg}")


def fail(msg):
    print(f"  ❌ {msg}")


def section(msg):
    print(f"\n--- {msg} ---")


def check_dependencies():
    """Names of missing packages."""
    missing = []
    for module, package in DEPENDENCIES:
        try:
            mod = importlib.import_module(module)
            ok(f"{package} {getattr(mod, '__version__', '?')}")
        except ImportError:
            fail(f"{package} not installed — run: pip install -r requirements.txt")
            missing.append(package)
    return missing


def check_configs(config_dir=CONFIGS_DIR):
    """(path, error message) for every canned config that fails to load."""
    from config import load_config

    problems = []
    paths = sorted(glob.glob(os.path.join(config_dir, "*.yaml")))
    if not paths:
        warn(f"No configs found in {config_dir}")
    for path in paths:
        name = os.path.basename(path)
        try:
            cfg = load_config(path)
            ok(f"{name}: {cfg.mode.value}, {len(cfg.experiment.channels)} channels")
        except ValueError as e:
            fail(f"{name}: {e}")
            problems.append((path, str(e)))
    return problems


def smoke_sweep():
    """A 200-trial run of the reference channels; returns the within-3-SE share."""
    from config import default_experiment
    from montecarlo import compare_theory, run_single_user

    spec = default_experiment(n_trials=200, seed=1)
    shares = [
        compare_theory(points, spec.n_trials).within_fraction
        for points in run_single_user(spec)
    ]
    return min(shares)


def main():
    banner("Spectrum Sensing — Setup")
    errors = []

    # ========================================
    # 1. Python version
    # ========================================
    section("Python")
    v = sys.version_info
    if v >= (3, 11):
        ok(f"Python {v.major}.{v.minor}.{v.micro}")
    elif v >= (3, 9):
        warn(f"Python {v.major}.{v.minor} — works but 3.11+ recommended")
    else:
        fail(f"Python {v.major}.{v.minor} — requires 3.9+")
        errors.append("Python version too old")

    # ========================================
    # 2. Dependencies
    # ========================================
    section("Dependencies")
    missing = check_dependencies()
    errors.extend(f"{p} not installed" for p in missing)
    if missing:
        banner("Setup Incomplete")
        for e in errors:
            print(f"  ❌ {e}")
        return 1

    # ========================================
    # 3. Output directory
    # ========================================
    section("Output Directory")
    from config import OUTPUT_DIR
    if os.path.isdir(OUTPUT_DIR):
        ok(f"Exists: {OUTPUT_DIR}")
    else:
        os.makedirs(OUTPUT_DIR, exist_ok=True)
        ok(f"Created: {OUTPUT_DIR}")
    if os.environ.get("SENSING_SEED"):
        warn(f"SENSING_SEED={os.environ['SENSING_SEED']} overrides every config's seed")

    # ========================================
    # 4. Canned configs
    # ========================================
    section("Configs")
    for path, message in check_configs():
        errors.append(f"{os.path.basename(path)}: {message}")

    # ========================================
    # 5. Smoke sweep
    # ========================================
    section("Smoke Sweep")
    try:
        share = smoke_sweep()
        if share >= 0.9:
            ok(f"200-trial sweep: {share:.0%} of points within 3 standard errors of theory")
        else:
            warn(f"200-trial sweep: only {share:.0%} of points within 3 standard errors")
    except Exception as e:
        fail(f"Smoke sweep failed: {e}")
        errors.append(f"smoke sweep: {e}")

    # ========================================
    # Summary
    # ========================================
    banner("Setup Complete" if not errors else "Setup Complete (with issues)")

    if errors:
        print("Issues to fix:")
        for e in errors:
            print(f"  ❌ {e}")
        print()
    else:
        print("Everything looks good! 🎉\n")

    print("Quick start:")
    print("  python scripts/sensing.py theory")
    print("  python scripts/sensing.py run configs/single_user.yaml")
    print("  python scripts/sensing.py run configs/sprt_attack.yaml")
    print()

    return 0 if not errors else 1


if __name__ == "__main__":
    sys.exit(main())
