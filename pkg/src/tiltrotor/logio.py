"""Trajectory CSV and summary text output, plus reading the CSV back."""

import csv
import math
import os
from dataclasses import fields

from .mission import TrajectoryRecord, summarize

COLUMNS = tuple(f.name for f in fields(TrajectoryRecord))
ANGLE_COLUMNS = ("theta", "theta_dot", "beta", "theta_m", "theta_f", "theta_d", "delta_e",
                 "beta_dot")
INT_COLUMNS = ("k",)
TEXT_COLUMNS = ("mode", "sat_flags")
TRAJECTORY_FILE = "trajectory.csv"
SUMMARY_FILE = "summary.txt"


def _fmt(value):
    return format(value, ".9g")


def _row(rec, degrees):
    row = []
    for name in COLUMNS:
        value = getattr(rec, name)
        if name in INT_COLUMNS or name in TEXT_COLUMNS:
            row.append(str(value))
        else:
            if degrees and name in ANGLE_COLUMNS:
                value = math.degrees(value)
            row.append(_fmt(value))
    return row


def write_trajectory(log, path, degrees=False):
    """One header row then one row per record. Angles are radians unless ``degrees``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for rec in log:
            writer.writerow(_row(rec, degrees))


def _summary_value(value):
    if value is None:
        return "none"
    if isinstance(value, float):
        return _fmt(value)
    return str(value)


def format_summary(summary, degrees=False):
    lines = [
        f"status: {summary.status}",
        f"steps: {summary.steps}",
        f"failure_step: {_summary_value(summary.failure_step)}",
        f"failure: {_summary_value(summary.failure)}",
        f"angle_unit: {'deg' if degrees else 'rad'}",
    ]
    for t, mode in summary.mode_switches:
        lines.append(f"mode_switch: {_fmt(t)} {mode}")
    for mode, dev in summary.transition_deviation.items():
        lines.append(f"transition_deviation[{mode}]: {_fmt(dev)}")
    for mode, start, settle in summary.settling_times:
        lines.append(f"settling_time[{mode}@{_fmt(start)}]: {_summary_value(settle)}")
    for mode, mean in summary.thrust_mean.items():
        lines.append(f"thrust_mean[{mode}]: {_fmt(mean)}")
    for mode, peak in summary.thrust_peak.items():
        lines.append(f"thrust_peak[{mode}]: {_fmt(peak)}")
    lines.append(f"touchdown_time: {_summary_value(summary.touchdown_time)}")
    lines.append(f"touchdown_sink_rate: {_summary_value(summary.touchdown_sink_rate)}")
    lines.append(f"impact_speed: {_summary_value(summary.impact_speed)}")
    return "\n".join(lines) + "\n"


def write_log(log, summary, output_path, degrees=False):
    """Write trajectory.csv and summary.txt into ``output_path`` (created if needed).

    OSError is re-raised with the offending path in the message.
    """
    try:
        os.makedirs(output_path, exist_ok=True)
        write_trajectory(log, os.path.join(output_path, TRAJECTORY_FILE), degrees)
        with open(os.path.join(output_path, SUMMARY_FILE), "w", encoding="utf-8") as fh:
            fh.write(format_summary(summary, degrees))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write log to {output_path}: {exc.strerror}",
                      exc.filename) from exc


def read_trajectory(path, degrees=False):
    """Parse a trajectory CSV back into records (angles converted back to radians)."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return records
        if tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in reader:
            values = {}
            for name, text in zip(COLUMNS, row):
                if name in INT_COLUMNS:
                    values[name] = int(text)
                elif name in TEXT_COLUMNS:
                    values[name] = text
                else:
                    value = float(text)
                    values[name] = math.radians(value) if degrees and name in ANGLE_COLUMNS else value
            records.append(TrajectoryRecord(**values))
    return records


def read_log(output_path):
    """Load a written run: (records, recomputed summary); units come from summary.txt."""
    degrees = False
    summary_path = os.path.join(output_path, SUMMARY_FILE)
    status = "completed"
    if os.path.exists(summary_path):
        with open(summary_path, encoding="utf-8") as fh:
            for line in fh:
                key, _, value = line.partition(": ")
                if key == "angle_unit":
                    degrees = value.strip() == "deg"
                elif key == "status":
                    status = value.strip()
    records = read_trajectory(os.path.join(output_path, TRAJECTORY_FILE), degrees)
    return records, (summarize(records, status) if records else None)
