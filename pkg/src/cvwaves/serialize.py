"""Flat-file formats: INI run configs, '#'-annotated CSV tables and JSON snapshots."""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .continuation import ContinuationConfig, ContinuationState
from .governing import BifurcationPoint, SolutionPoint, WaveParameters
from .spectral import PeriodicSeries

__all__ = [
    "fmt",
    "write_table",
    "read_table",
    "load_config",
    "RunConfig",
    "point_to_dict",
    "point_from_dict",
    "write_snapshot",
    "read_snapshot",
]

SNAPSHOT_VERSION = 1
EMIT_CHOICES = ("branch_csv", "solutions", "fields", "diagnostics")


def fmt(x) -> str:
    """Round-trip decimal text for a number (17 significant digits); bools as 0/1."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def write_table(path, columns, rows, footer: dict | None = None):
    """CSV with a '#'-prefixed header line and an optional '# key=value' footer record."""
    path = Path(path)
    lines = ["# " + ",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    if footer is not None:
        lines.append("# " + ",".join(f"{k}={fmt(v)}" for k, v in footer.items()))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_table(path):
    """Inverse of :func:`write_table`: (columns, float array, footer dict)."""
    text = Path(path).read_text().splitlines()
    columns = text[0][1:].strip().split(",")
    rows, footer = [], {}
    for line in text[1:]:
        if line.startswith("#"):
            for item in line[1:].strip().split(","):
                if "=" in item:
                    k, v = item.split("=", 1)
                    footer[k] = v
            continue
        if line.strip():
            rows.append([float(v) if _is_num(v) else np.nan for v in line.split(",")])
    return columns, np.array(rows, dtype=float).reshape(-1, len(columns)), footer


def _is_num(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# configuration

class RunConfig:
    """Validated contents of an INI run file."""

    def __init__(self, physical: WaveParameters, branch: ContinuationConfig, n_max: int = 3,
                 laminar_lambda: float | None = None, output_dir: str = "out",
                 emit=EMIT_CHOICES, snapshot_every: int = 10):
        self.physical = physical
        self.branch = branch
        if int(n_max) != n_max or n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {n_max}")
        self.n_max = int(n_max)
        self.laminar_lambda = laminar_lambda
        self.output_dir = output_dir
        bad = set(emit) - set(EMIT_CHOICES)
        if bad:
            raise ValueError(f"unknown emit entries {sorted(bad)}; choose from {EMIT_CHOICES}")
        self.emit = tuple(emit)
        if snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        self.snapshot_every = int(snapshot_every)


def _typed(section, name, kind, default):
    if section is None or name not in section:
        return default
    raw = section[name].strip()
    if raw.lower() in ("", "none", "default"):
        return None
    if kind is int:
        val = float(raw)
        if val != int(val):
            raise ValueError(f"{name} must be an integer, got {raw}")
        return int(val)
    if kind is float:
        return float(raw)
    return raw


def load_config(path=None) -> RunConfig:
    """Read an INI file; missing sections/keys fall back to the g = k = h = 1 defaults."""
    cp = configparser.ConfigParser()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ValueError(f"config file not found: {path}")
        cp.read(path)
    sec = lambda name: cp[name] if cp.has_section(name) else None
    ph = sec("physical")
    physical = WaveParameters(
        g=_typed(ph, "g", float, 1.0),
        upsilon=_typed(ph, "upsilon", float, 0.0),
        k=_typed(ph, "k", float, 1.0),
        h=_typed(ph, "h", float, 1.0),
        N=_typed(ph, "N", int, 64),
    )
    br = sec("branch")
    kw = {}
    for f in fields(ContinuationConfig):
        kind = int if f.name in ("n", "newton_max_iter", "max_steps") else (str if f.name == "sign" else float)
        val = _typed(br, f.name, kind, f.default)
        kw[f.name] = val
    branch = ContinuationConfig(**kw)
    n_max = _typed(sec("bifurcation"), "n_max", int, 3)
    lam = _typed(sec("laminar"), "lambda", float, None)
    out = sec("output")
    out_dir = _typed(out, "dir", str, "out")
    emit_raw = _typed(out, "emit", str, None)
    emit = EMIT_CHOICES if emit_raw is None else tuple(e.strip() for e in emit_raw.split(",") if e.strip())
    every = _typed(out, "snapshot_every", int, 10)
    return RunConfig(physical, branch, n_max if n_max is not None else 3, lam, out_dir, emit, every)


# ---------------------------------------------------------------------------
# snapshots

def point_to_dict(p: SolutionPoint) -> dict:
    return {
        "lambda": float(p.lam),
        "mu": float(p.mu),
        "m": float(p.m),
        "Q": float(p.Q),
        "s": float(p.s),
        "newton_iters": int(p.newton_iters),
        "residual_norms": [float(r) for r in p.residual_norms],
        "cos_coeffs": [float(a) for a in p.w.cos_coeffs],
    }


def point_from_dict(params: WaveParameters, d: dict) -> SolutionPoint:
    w = PeriodicSeries.from_trig(0.0, np.asarray(d["cos_coeffs"], dtype=float))
    return SolutionPoint.build(
        params, d["lambda"], d["mu"], w,
        residual_norms=tuple(d.get("residual_norms", (np.nan, np.nan))),
        s=d.get("s", 0.0), newton_iters=d.get("newton_iters", 0),
    )


def write_snapshot(path, params: WaveParameters, point: SolutionPoint, config: ContinuationConfig | None = None,
                   bifurcation: BifurcationPoint | None = None, state: ContinuationState | None = None, index: int = 0):
    doc = {
        "version": SNAPSHOT_VERSION,
        "params": asdict(params),
        "point": point_to_dict(point),
        "index": int(index),
        "config": asdict(config) if config is not None else None,
        "bifurcation": asdict(bifurcation) if bifurcation is not None else None,
        "state": state.to_dict() if state is not None else None,
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))
    return Path(path)


def read_snapshot(path) -> dict:
    """Load a snapshot; raises ValueError if it cannot be parsed."""
    try:
        doc = json.loads(Path(path).read_text())
        params = WaveParameters(**doc["params"])
        point = point_from_dict(params, doc["point"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ValueError(f"cannot read snapshot {path}: {exc}") from exc
    out = {"params": params, "point": point, "index": doc.get("index", 0)}
    out["config"] = ContinuationConfig(**doc["config"]) if doc.get("config") else None
    out["bifurcation"] = BifurcationPoint(**doc["bifurcation"]) if doc.get("bifurcation") else None
    out["state"] = ContinuationState.from_dict(doc["state"]) if doc.get("state") else None
    return out
