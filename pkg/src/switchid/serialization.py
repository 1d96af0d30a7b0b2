"""File formats: JSON models, CSV hybrid words and trajectories, Hankel dumps.

All floats go through Python's shortest round-trip decimal representation
(the default for ``repr``/``json``), so a save/load cycle reproduces every
double bit for bit and identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .hankel import HankelSubMatrix
from .lss import HybridWord, SwitchedLinearSystem, Trajectory
from .pe_inputs import PersistentInput
from .realization import RealizationResult


class ModelFormatError(ValueError):
    """A model or sidecar file does not match the expected schema."""


def model_to_dict(sys: SwitchedLinearSystem) -> dict:
    return {
        "n": sys.n, "m": sys.m, "p": sys.p, "D": sys.D,
        "A": [M.tolist() for M in sys.A],
        "B": [M.tolist() for M in sys.B],
        "C": [M.tolist() for M in sys.C],
    }


def model_from_dict(data: dict) -> SwitchedLinearSystem:
    try:
        sys = SwitchedLinearSystem(data["A"], data["B"], data["C"])
    except KeyError as exc:
        raise ModelFormatError(f"model file is missing key {exc}") from exc
    for key in ("n", "m", "p", "D"):
        if key in data and data[key] != getattr(sys, key):
            raise ModelFormatError(
                f"declared {key}={data[key]} but matrices imply {getattr(sys, key)}"
            )
    return sys


def save_model(sys: SwitchedLinearSystem, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(sys), indent=1, sort_keys=True) + "\n")


def load_model(path: str | Path) -> SwitchedLinearSystem:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path} is not valid JSON: {exc}") from exc
    return model_from_dict(data)


def save_word(w: HybridWord, path: str | Path) -> None:
    """Write a hybrid word as CSV with columns t, q, u_1..u_m."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "q"] + [f"u_{j}" for j in range(1, w.m + 1)])
        for t in range(len(w)):
            writer.writerow([t, int(w.modes[t])] + [repr(float(x)) for x in w.inputs[t]])


def load_word(path: str | Path) -> HybridWord:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["t", "q"]:
            raise ModelFormatError(f"{path}: expected header t,q,u_1..u_m")
        m = len(header) - 2
        modes, rows = [], []
        for line in reader:
            if not line:
                continue
            modes.append(int(line[1]))
            rows.append([float(x) for x in line[2 : 2 + m]])
    if not modes:
        return HybridWord.empty(max(m, 1))
    return HybridWord(np.asarray(modes), np.asarray(rows))


def save_trajectory(w: HybridWord, traj: Trajectory, path: str | Path) -> None:
    """Write t, q, u_1..u_m, y_1..y_p rows for each step of a simulation."""
    p = traj.outputs.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "q"]
                        + [f"u_{j}" for j in range(1, w.m + 1)]
                        + [f"y_{i}" for i in range(1, p + 1)])
        for t in range(len(w)):
            writer.writerow([t, int(w.modes[t])]
                            + [repr(float(x)) for x in w.inputs[t]]
                            + [repr(float(y)) for y in traj.outputs[t]])


def load_outputs(path: str | Path) -> np.ndarray:
    """Read the y_* columns back from a trajectory CSV."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ModelFormatError(f"{path}: empty trajectory file")
        y_cols = [i for i, name in enumerate(header) if name.startswith("y_")]
        if not y_cols:
            raise ModelFormatError(f"{path}: no y_* columns")
        rows = [[float(line[i]) for i in y_cols] for line in reader if line]
    return np.asarray(rows, dtype=float).reshape(len(rows), len(y_cols))


def _sidecar(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")


def save_hankel(H: HankelSubMatrix, path: str | Path, tol: float = 1e-9) -> None:
    """Dense CSV of the section plus a JSON sidecar with its geometry."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in H.H:
            writer.writerow([repr(float(x)) for x in row])
    meta = {"L": H.L, "K": H.K, "p": H.p, "m": H.m, "D": H.D, "tol": tol}
    _sidecar(path).write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")


def load_hankel(path: str | Path) -> tuple[HankelSubMatrix, dict]:
    path = Path(path)
    meta_path = _sidecar(path)
    if not path.exists() or not meta_path.exists():
        raise FileNotFoundError(f"need both {path} and {meta_path}")
    meta = json.loads(meta_path.read_text())
    with open(path, newline="") as fh:
        rows = [[float(x) for x in line] for line in csv.reader(fh) if line]
    H = np.asarray(rows, dtype=float)
    try:
        return HankelSubMatrix(meta["L"], meta["K"], H, meta["p"], meta["m"], meta["D"]), meta
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"{meta_path}: {exc}") from exc


def save_pe_input(pe: PersistentInput, word_path: str | Path,
                  index_path: str | Path) -> None:
    """Hybrid-word CSV plus a JSON sidecar with the probe read-off positions."""
    save_word(pe.w, word_path)
    probes = [
        {"q0": q0, "v": list(v), "q": q, "j": j, "pos": pos}
        for (q0, v, q, j), pos in sorted(pe.probe_index.items())
    ]
    data = {"n_bound": pe.n_bound, "D": pe.D, "m": pe.m, "probes": probes}
    Path(index_path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def load_pe_input(word_path: str | Path, index_path: str | Path) -> PersistentInput:
    w = load_word(word_path)
    data = json.loads(Path(index_path).read_text())
    index = {
        (rec["q0"], tuple(rec["v"]), rec["q"], rec["j"]): rec["pos"]
        for rec in data["probes"]
    }
    return PersistentInput(w, index, data["n_bound"], data["D"], data["m"])


def realization_report(result: RealizationResult, tol_rel: float) -> dict:
    fact = result.factorization
    return {
        "rank": result.rank,
        "N": result.N,
        "basis_columns": list(fact.basis_columns),
        "singular_values": [float(s) for s in fact.singular_values],
        "singular_value_gap": result.singular_value_gap,
        "tol_rel": tol_rel,
    }
