"""
Spectrum Sensing - Reports
CSV tables for ROC sweeps, closed-form curves and SPRT scenarios, plus the
simulation-vs-theory summary logged after a run.

Every table is rendered to text first; write_outputs then commits a whole
run's files at once and removes what it wrote if any write fails.
"""

import csv
import io
import json
import logging
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

logger = logging.getLogger(__name__)

CURVE_HEADER = ["threshold", "pf_sim", "pd_sim", "pf_theory", "pd_theory"]
THEORY_HEADER = ["threshold", "pf_theory", "pd_theory"]
SPRT_HEADER = ["scenario", "false_alarm_rate", "miss_rate", "mean_reports",
               "undecided_rate", "expected_reports"]


# ============================================================
# Formatting
# ============================================================

def _fixed(value):
    """Six decimals, always a decimal point (str.format ignores the locale)."""
    text = f"{float(value):.6f}"
    return "0.000000" if text == "-0.000000" else text


def _to_csv(header, rows):
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return output.getvalue()


def render_csv(points):
    return _to_csv(CURVE_HEADER, (
        [_fixed(p.threshold), _fixed(p.pf_sim), _fixed(p.pd_sim),
         _fixed(p.pf_theory), _fixed(p.pd_theory)]
        for p in points
    ))


def render_theory_csv(points):
    return _to_csv(THEORY_HEADER, (
        [_fixed(p.threshold), _fixed(p.pf_theory), _fixed(p.pd_theory)] for p in points
    ))


def render_sprt_csv(results):
    return _to_csv(SPRT_HEADER, (
        [r.scenario, _fixed(r.false_alarm_rate), _fixed(r.miss_rate), _fixed(r.mean_reports),
         _fixed(r.undecided_rate), _fixed(r.expected_reports)]
        for r in results
    ))


# ============================================================
# Writers
# ============================================================

def _emit(text, destination):
    data = text.encode("utf-8")
    if hasattr(destination, "write"):
        destination.write(data)
        return len(data)
    parent = os.path.dirname(os.path.abspath(destination))
    os.makedirs(parent, exist_ok=True)
    with open(destination, "wb") as f:
        f.write(data)
    return len(data)


def emit_csv(points, destination):
    """
    Write a ROC table to a path or binary stream and return the byte count.

    Header `threshold,pf_sim,pd_sim,pf_theory,pd_theory`, one row per point,
    six decimals, `\\n` line endings. OSError propagates for unwritable paths.
    """
    return _emit(render_csv(points), destination)


def emit_theory_csv(points, destination):
    return _emit(render_theory_csv(points), destination)


def emit_sprt_csv(results, destination):
    return _emit(render_sprt_csv(results), destination)


def write_outputs(bodies):
    """
    Write {path: text} in order. If any write fails the files already written
    are removed before the error propagates.
    """
    written = []
    total = 0
    try:
        for path, text in bodies.items():
            total += _emit(text, path)
            written.append(path)
    except BaseException:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                logger.warning("could not remove partial output %s", path)
        raise
    for path in written:
        logger.info("wrote %s", path)
    return total


def channel_path(output_path, channel_id):
    """results/roc.csv -> results/roc_ch2.csv"""
    stem, ext = os.path.splitext(output_path)
    return f"{stem}_ch{channel_id}{ext or '.csv'}"


# ============================================================
# Summaries
# ============================================================

def comparison_summary(comparison, label=""):
    """Compact dict of a TheoryComparison, suitable for a JSON log line."""
    worst = max(
        comparison.deviations,
        key=lambda d: max(d.pf_gap, d.pd_gap),
        default=None,
    )
    summary = {
        "label": label,
        "points": len(comparison.deviations),
        "n_trials": comparison.n_trials,
        "within_fraction": round(comparison.within_fraction, 4),
        "flagged_thresholds": comparison.flagged_points,
    }
    if worst is not None:
        summary["worst_threshold"] = worst.threshold
        summary["worst_gap"] = round(max(worst.pf_gap, worst.pd_gap), 6)
    return summary


def log_summary(summary):
    logger.info("theory comparison %s", json.dumps(summary, default=str))
