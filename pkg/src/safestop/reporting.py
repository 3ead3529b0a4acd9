"""Report generation from trace/monitor logs.

Produces the stop/no-stop scatter data, per-trial stop-cost time series,
and a linear-separability summary of the trigger boundary in the
(obstacle distance, offset angle) plane.
"""

from __future__ import annotations

import csv
import glob
import json
import os
from dataclasses import dataclass

import numpy as np
from sklearn.linear_model import LogisticRegression

SPEED_BAND = (1.0, 2.0)  # m/s band used for the separability fit


@dataclass
class ScatterPoint:
    trial: str
    t: float
    speed: float
    distance: float
    angle: float
    triggered: bool


def load_monitor_logs(in_dir: str) -> list[ScatterPoint]:
    points = []
    for path in sorted(glob.glob(os.path.join(in_dir, "*.monitor.csv"))):
        trial = os.path.basename(path).replace(".monitor.csv", "")
        with open(path) as f:
            for row in csv.DictReader(f):
                if not row["obstacle_distance"]:
                    continue  # no evaluated obstacle this tick
                points.append(ScatterPoint(
                    trial=trial,
                    t=float(row["t"]),
                    speed=float(row["speed"]),
                    distance=float(row["obstacle_distance"]),
                    angle=float(row["obstacle_angle"]),
                    triggered=row["triggered"] == "1",
                ))
    return points


def write_scatter(points: list[ScatterPoint], path: str) -> None:
    with open(path, "w") as f:
        f.write("trial,t,obstacle_distance,offset_angle,speed,triggered\n")
        for p in points:
            f.write(f"{p.trial},{p.t:.4f},{p.distance:.6f},{p.angle:.6f},"
                    f"{p.speed:.6f},{int(p.triggered)}\n")


def write_cost_series(in_dir: str, out_dir: str) -> list[str]:
    """Per-trial (t, stop_cost_min) series pulled from the trace logs."""
    written = []
    for path in sorted(glob.glob(os.path.join(in_dir, "*.trace.csv"))):
        trial = os.path.basename(path).replace(".trace.csv", "")
        out_path = os.path.join(out_dir, f"{trial}.stopcost.csv")
        with open(path) as f, open(out_path, "w") as out:
            out.write("t,stop_cost_min,stop_event\n")
            for row in csv.DictReader(f):
                if row["stop_cost_min"]:
                    out.write(f"{row['t']},{row['stop_cost_min']},"
                              f"{row['stop_event']}\n")
        written.append(out_path)
    return written


def linear_separability(points: list[ScatterPoint]) -> dict:
    """Accuracy of the best linear classifier on (distance, angle).

    Restricted to the configured speed band; undefined when either class
    is empty there.
    """
    band = [p for p in points
            if SPEED_BAND[0] <= p.speed <= SPEED_BAND[1]]
    n_pos = sum(p.triggered for p in band)
    n_neg = len(band) - n_pos
    if n_pos == 0 or n_neg == 0:
        return {"defined": False, "n_points": len(band),
                "n_triggered": n_pos, "accuracy": None}
    X = np.array([[p.distance, p.angle] for p in band])
    y = np.array([int(p.triggered) for p in band])
    clf = LogisticRegression(max_iter=1000)
    clf.fit(X, y)
    acc = float(clf.score(X, y))
    return {
        "defined": True,
        "n_points": len(band),
        "n_triggered": int(n_pos),
        "accuracy": acc,
        "coefficients": clf.coef_[0].tolist(),
        "intercept": float(clf.intercept_[0]),
        "speed_band": list(SPEED_BAND),
    }


def generate_report(in_dir: str, out_dir: str) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    points = load_monitor_logs(in_dir)
    if not points and not glob.glob(os.path.join(in_dir, "*.trace.csv")):
        notice = {"empty": True, "message": f"no trace logs found in {in_dir}"}
        with open(os.path.join(out_dir, "report.json"), "w") as f:
            json.dump(notice, f, indent=2)
        return notice
    write_scatter(points, os.path.join(out_dir, "stop_scatter.csv"))
    write_cost_series(in_dir, out_dir)
    sep = linear_separability(points)
    report = {"empty": False, "n_monitor_points": len(points),
              "separability": sep}
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        json.dump(report, f, indent=2)
    return report
