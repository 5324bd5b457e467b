"""Readers for the simulation CLI's CSV and manifest outputs.

Only the documented file formats are consumed here: trajectory.csv with
columns (tau, mode, occupation), equilibrium.csv with columns
(mode, n_B, inv_n_plus_1), and the run directory's manifest.json.
"""

import csv
import json
from pathlib import Path

import numpy as np


class InputError(ValueError):
    """Raised when an input file is missing, empty, or malformed."""


def read_trajectory(path):
    """Parse trajectory.csv into (taus, modes, occupations[n_times, n_modes])."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such trajectory file: {path}")
    per_tau = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {
            "tau",
            "mode",
            "occupation",
        }:
            raise InputError(f"{path} does not look like a trajectory CSV")
        for row in reader:
            per_tau.setdefault(float(row["tau"]), {})[int(row["mode"])] = float(
                row["occupation"]
            )
    if not per_tau:
        raise InputError(f"{path} contains no data rows")
    taus = np.array(sorted(per_tau))
    modes = np.array(sorted(per_tau[taus[0]]))
    occ = np.array([[per_tau[t][m] for m in modes] for t in taus])
    return taus, modes, occ


def read_equilibrium(path):
    """Parse equilibrium.csv into (modes, n_B, inv_n_plus_1)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such equilibrium file: {path}")
    modes, n_b, inv = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {
            "mode",
            "n_B",
            "inv_n_plus_1",
        }:
            raise InputError(f"{path} does not look like an equilibrium CSV")
        for row in reader:
            modes.append(int(row["mode"]))
            n_b.append(float(row["n_B"]))
            inv.append(float(row["inv_n_plus_1"]))
    if not modes:
        raise InputError(f"{path} contains no data rows")
    return np.array(modes), np.array(n_b), np.array(inv)


def read_manifest(csv_path):
    """Load manifest.json from the directory containing a run CSV."""
    mpath = Path(csv_path).parent / "manifest.json"
    if not mpath.exists():
        raise InputError(f"no manifest next to {csv_path}")
    with open(mpath) as fh:
        return json.load(fh)


def final_state(taus, modes, occ):
    """Occupations at the last recorded time."""
    return modes, occ[-1]
