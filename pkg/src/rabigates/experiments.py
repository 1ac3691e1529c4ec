"""Parameter studies: convergence with R, Wigner cuts, region maps, quartic study, verify.

Each scenario writes plain CSV files plus one ``manifest.json`` into the
configured output directory and returns a :class:`ScenarioResult`.  Parameter
points are independent and may run on a thread pool (capped by the
``RABIGATES_MAX_WORKERS`` environment variable); rows are always assembled in
sorted parameter order so the output bytes do not depend on scheduling.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from ._accel import HAVE_NUMBA
from .config import ExperimentConfig
from .diagnostics import (
    WignerGrid,
    fidelity,
    fidelity_of_change,
    orthogonal_purity,
    purity,
    wigner,
    wigner_cut,
)
from .errors import DegenerateResidual, NoImprovement, RabiGatesError
from .fock import TruncationConfig, coherent_state, ket_to_dm, leakage
from .qubit import QubitConvention
from .synthesis import (
    GateSchedule,
    SynthesisStrategy,
    ideal_output,
    optimize_zeta,
    params_for_target,
    round_kraus,
    run_schedule,
)

log = logging.getLogger(__name__)

WORKERS_ENV = "RABIGATES_MAX_WORKERS"


@dataclass
class ScenarioResult:
    scenario: str
    rows: list[dict[str, Any]]
    files: list[Path] = field(default_factory=list)
    manifest: Path | None = None
    ok: bool = True
    extra: dict[str, Any] = field(default_factory=dict)


def max_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", WORKERS_ENV, raw)
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Sequence) -> list:
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, rows: list[dict[str, Any]], columns: Sequence[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(type(obj))


def write_manifest(cfg: ExperimentConfig, files: list[Path], points: list[dict], extra: dict,
                   started: float) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.json"
    manifest = {
        "scenario": cfg.scenario,
        "config": cfg.to_dict(),
        "qubit_convention": {"ground_is_plus_z": cfg.ground_is_plus_z},
        "software": {
            "rabigates": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "wigner_backend": "numba" if HAVE_NUMBA else "numpy",
        },
        "files": sorted(p.name for p in files),
        "points": points,
        "timings": {"wall_seconds": round(time.time() - started, 3)},
        **extra,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)
        fh.write("\n")
    return path


def truncation(cfg: ExperimentConfig) -> TruncationConfig:
    return TruncationConfig(dim=cfg.dim, guard=cfg.guard, leak_tol=cfg.leak_tol)


def convention(cfg: ExperimentConfig) -> QubitConvention:
    return QubitConvention(ground_is_plus_z=cfg.ground_is_plus_z)


def input_state(alpha: float, trunc: TruncationConfig) -> np.ndarray:
    return ket_to_dm(coherent_state(alpha, trunc))


def make_schedule(cfg: ExperimentConfig, chi: float, reps: int, zeta: float | None = None) -> GateSchedule:
    params = params_for_target(
        SynthesisStrategy(chi, reps, cfg.ratio),
        cfg.order,
        cfg.variant,
        convention(cfg),
        cfg.k,
        cfg.allow_strong,
    )
    return GateSchedule(params, reps, cfg.correction, cfg.zeta if zeta is None else zeta)


def tuned_schedule(cfg: ExperimentConfig, chi: float, reps: int, rho0: np.ndarray,
                   trunc: TruncationConfig) -> tuple[GateSchedule, str]:
    """Schedule with the quartic zeta optimised when the config asks for it."""
    sched = make_schedule(cfg, chi, reps)
    if cfg.order != 4 or not cfg.optimize_zeta:
        return sched, ""
    try:
        z = optimize_zeta(sched, rho0, trunc, convention(cfg), chi=chi)
        note = ""
    except NoImprovement as exc:
        z, note = exc.zeta, "zeta search flat"
    return GateSchedule(sched.round, reps, sched.correction, z), note


def all_success_probability(rho0: np.ndarray, sched: GateSchedule, trunc, conv) -> float:
    """Probability that every one of the R ancilla measurements returns ``g``."""
    s = round_kraus(sched.round, trunc, conv).success
    sr = np.linalg.matrix_power(s, sched.repetitions)
    return float(np.real(np.trace(sr @ rho0 @ sr.conj().T)))


def _point_record(cfg, chi, reps, alpha, sched: GateSchedule | None) -> dict:
    rec = {"chi": chi, "R": reps, "alpha": alpha, "order": cfg.order, "variant": cfg.variant}
    if sched is not None:
        rec.update(t1=sched.round.t1, t2=sched.round.t2, zeta=sched.zeta, k=sched.round.k)
    return rec


def _safe(fn, *args):
    try:
        return fn(*args)
    except DegenerateResidual:
        return math.nan


# ---------------------------------------------------------------- convergence

CONVERGENCE_COLUMNS = ("alpha", "chi", "R", "t1", "t2", "F", "F_perp", "P", "P_perp", "success_prob", "leakage",
                       "trusted", "error")


def scenario_convergence(cfg: ExperimentConfig) -> ScenarioResult:
    started = time.time()
    trunc, conv = truncation(cfg), convention(cfg)
    items = sorted((a, c, r) for a in cfg.alpha for c in cfg.chi for r in cfg.rounds)

    def point(item):
        alpha, chi, reps = item
        row = {"alpha": alpha, "chi": chi, "R": reps}
        sched = None
        try:
            rho0 = input_state(alpha, trunc)
            sched = make_schedule(cfg, chi, reps)
            out = run_schedule(rho0, sched, trunc, conv, strict=False)
            ideal = ideal_output(rho0, cfg.order, chi, trunc)
            leak = max(leakage(out, trunc), leakage(ideal, trunc))
            row.update(
                t1=sched.round.t1, t2=sched.round.t2,
                F=fidelity(ideal, out),
                F_perp=_safe(fidelity_of_change, ideal, out, rho0),
                P=purity(out),
                P_perp=_safe(orthogonal_purity, out, rho0),
                success_prob=all_success_probability(rho0, sched, trunc, conv),
                leakage=leak, trusted=leak <= trunc.leak_tol, error="",
            )
        except (RabiGatesError, ValueError) as exc:
            row.update(trusted=False, error=f"{type(exc).__name__}: {exc}")
        return row, _point_record(cfg, chi, reps, alpha, sched)

    results = parallel_map(point, items)
    rows = [r for r, _ in results]
    files = [write_csv(Path(cfg.out) / "convergence.csv", rows, CONVERGENCE_COLUMNS)]
    extra = {"leakage_max": _nanmax(r.get("leakage") for r in rows)}
    manifest = write_manifest(cfg, files, [p for _, p in results], extra, started)
    return ScenarioResult("convergence", rows, files, manifest, ok=all(not r["error"] for r in rows))


def _nanmax(values) -> float | None:
    vals = [v for v in values if v is not None and not math.isnan(v)]
    return max(vals) if vals else None


# ---------------------------------------------------------------- wigner cuts

WIGNER_SUMMARY_COLUMNS = ("chi", "R", "t1", "t2", "zeta", "F", "Linf_cut_distance", "min_negativity_ideal",
                          "min_negativity_engineered", "leakage", "trusted", "note")


def _grid(cfg: ExperimentConfig) -> WignerGrid:
    return WignerGrid(x_min=-5.0, x_max=5.0, p_min=cfg.p_min, p_max=cfg.p_max, n_x=201, n_p=cfg.n_p)


def _cut_study(cfg: ExperimentConfig, chi: float, reps: int, trunc, conv) -> tuple[dict, dict, list[dict]]:
    rho0 = input_state(cfg.alpha[0], trunc)
    sched, note = tuned_schedule(cfg, chi, reps, rho0, trunc)
    out = run_schedule(rho0, sched, trunc, conv, strict=False)
    ideal = ideal_output(rho0, cfg.order, chi, trunc)
    grid = _grid(cfg)
    ps, w_id = wigner_cut(ideal, x=cfg.cut_x, grid=grid)
    _, w_en = wigner_cut(out, x=cfg.cut_x, grid=grid)
    leak = max(leakage(out, trunc), leakage(ideal, trunc))
    row = {
        "chi": chi, "R": reps, "t1": sched.round.t1, "t2": sched.round.t2, "zeta": sched.zeta,
        "F": fidelity(ideal, out),
        "Linf_cut_distance": float(np.max(np.abs(w_id - w_en))),
        "min_negativity_ideal": float(wigner(ideal, grid).values.min()),
        "min_negativity_engineered": float(wigner(out, grid).values.min()),
        "cut_min_ideal": float(w_id.min()),
        "cut_min_engineered": float(w_en.min()),
        "leakage": leak, "trusted": leak <= trunc.leak_tol,
        "note": note or ("" if leak <= trunc.leak_tol else "ExcessLeakage"),
        "_rho_ideal": ideal, "_rho_engineered": out,
    }
    cut = [{"p": p, "W_ideal": a, "W_engineered": b} for p, a, b in zip(ps, w_id, w_en)]
    return row, _point_record(cfg, chi, reps, cfg.alpha[0], sched), cut


def _cut_filename(chi: float, reps: int) -> str:
    return f"cut_chi{chi:g}_R{reps}.csv"


def scenario_wigner_cuts(cfg: ExperimentConfig) -> ScenarioResult:
    started = time.time()
    trunc, conv = truncation(cfg), convention(cfg)
    pairs = sorted(zip(cfg.chi, cfg.rounds))
    results = parallel_map(lambda pr: _cut_study(cfg, pr[0], pr[1], trunc, conv), pairs)
    files, rows = [], []
    for row, _, cut in results:
        files.append(write_csv(Path(cfg.out) / _cut_filename(row["chi"], row["R"]), cut,
                               ("p", "W_ideal", "W_engineered")))
        rows.append(row)
    files.append(write_csv(Path(cfg.out) / "wigner_summary.csv", rows, WIGNER_SUMMARY_COLUMNS))
    extra = {"leakage_max": _nanmax(r["leakage"] for r in rows), "cut_x": cfg.cut_x}
    manifest = write_manifest(cfg, files, [p for _, p, _ in results], extra, started)
    return ScenarioResult("wigner_cuts", rows, files, manifest)


# ---------------------------------------------------------------- region map

REGION_COLUMNS = ("alpha", "chi", "R", "t1", "t2", "F", "F_perp", "pass_F_099", "pass_Fperp_095", "leakage",
                  "trusted", "error")
COUNT_COLUMNS = ("R", "cells", "trusted_cells", "pass_F_count", "pass_Fperp_count")


def scenario_region_map(cfg: ExperimentConfig) -> ScenarioResult:
    started = time.time()
    trunc, conv = truncation(cfg), convention(cfg)
    items = sorted((r, a, c) for r in cfg.rounds for a in cfg.alpha for c in cfg.chi)

    def point(item):
        reps, alpha, chi = item
        row = {"alpha": alpha, "chi": chi, "R": reps, "pass_F_099": False, "pass_Fperp_095": False}
        sched = None
        try:
            rho0 = input_state(alpha, trunc)
            sched = make_schedule(cfg, chi, reps)
            out = run_schedule(rho0, sched, trunc, conv, strict=False)
            ideal = ideal_output(rho0, cfg.order, chi, trunc)
            f = fidelity(ideal, out)
            fp = _safe(fidelity_of_change, ideal, out, rho0)
            leak = max(leakage(out, trunc), leakage(ideal, trunc))
            row.update(t1=sched.round.t1, t2=sched.round.t2, F=f, F_perp=fp,
                       pass_F_099=f > cfg.f_threshold, pass_Fperp_095=fp > cfg.fperp_threshold,
                       leakage=leak, trusted=leak <= trunc.leak_tol, error="")
        except (RabiGatesError, ValueError) as exc:
            row.update(trusted=False, error=f"{type(exc).__name__}: {exc}")
        return row, _point_record(cfg, chi, reps, alpha, sched)

    results = parallel_map(point, items)
    rows = [r for r, _ in results]
    counts = []
    for reps in sorted(set(cfg.rounds)):
        sel = [r for r in rows if r["R"] == reps]
        trusted = [r for r in sel if r["trusted"]]
        counts.append({
            "R": reps, "cells": len(sel), "trusted_cells": len(trusted),
            "pass_F_count": sum(bool(r["pass_F_099"]) for r in trusted),
            "pass_Fperp_count": sum(bool(r["pass_Fperp_095"]) for r in trusted),
        })
    out = Path(cfg.out)
    files = [write_csv(out / "region_map.csv", rows, REGION_COLUMNS),
             write_csv(out / "region_counts.csv", counts, COUNT_COLUMNS)]
    extra = {"leakage_max": _nanmax(r.get("leakage") for r in rows),
             "thresholds": {"F": cfg.f_threshold, "F_perp": cfg.fperp_threshold}}
    manifest = write_manifest(cfg, files, [p for _, p in results], extra, started)
    return ScenarioResult("region_map", rows, files, manifest, extra={"counts": counts})


# ---------------------------------------------------------------- quartic study

QUARTIC_COLUMNS = ("chi", "R", "t1", "t2", "zeta_opt", "F_zeta1", "F_opt", "F_perp_opt", "P_opt",
                   "Linf_cut_distance", "min_negativity_ideal", "min_negativity_engineered", "leakage", "note")


def scenario_quartic_study(cfg: ExperimentConfig) -> ScenarioResult:
    started = time.time()
    trunc, conv = truncation(cfg), convention(cfg)
    if len(cfg.chi) == len(cfg.rounds):
        pairs = sorted(zip(cfg.chi, cfg.rounds))
    else:
        pairs = sorted((c, r) for c in cfg.chi for r in cfg.rounds)

    def point(pr):
        chi, reps = pr
        row, rec, cut = _cut_study(cfg, chi, reps, trunc, conv)
        rho0 = input_state(cfg.alpha[0], trunc)
        ideal = row["_rho_ideal"]
        plain = run_schedule(rho0, GateSchedule(make_schedule(cfg, chi, reps).round, reps, cfg.correction, 1.0),
                             trunc, conv, strict=False)
        out = row["_rho_engineered"]
        q = {
            "chi": chi, "R": reps, "t1": row["t1"], "t2": row["t2"], "zeta_opt": row["zeta"],
            "F_zeta1": fidelity(ideal, plain), "F_opt": row["F"],
            "F_perp_opt": _safe(fidelity_of_change, ideal, out, rho0), "P_opt": purity(out),
            "Linf_cut_distance": row["Linf_cut_distance"],
            "min_negativity_ideal": row["min_negativity_ideal"],
            "min_negativity_engineered": row["min_negativity_engineered"],
            "leakage": row["leakage"], "note": row["note"],
        }
        return q, rec, cut

    results = parallel_map(point, pairs)
    files, rows = [], []
    for row, _, cut in results:
        files.append(write_csv(Path(cfg.out) / _cut_filename(row["chi"], row["R"]), cut,
                               ("p", "W_ideal", "W_engineered")))
        rows.append(row)
    files.append(write_csv(Path(cfg.out) / "quartic_study.csv", rows, QUARTIC_COLUMNS))
    extra = {"leakage_max": _nanmax(r["leakage"] for r in rows), "cut_x": cfg.cut_x}
    manifest = write_manifest(cfg, files, [p for _, p, _ in results], extra, started)
    return ScenarioResult("quartic_study", rows, files, manifest)


# ---------------------------------------------------------------- verify

def scenario_verify(cfg: ExperimentConfig) -> ScenarioResult:
    from .checks import run_checks

    started = time.time()
    checks = run_checks(cfg)
    ok = all(c["passed"] for c in checks)
    files = [write_csv(Path(cfg.out) / "verify_report.csv", checks, ("check", "residual", "tolerance", "passed",
                                                                       "detail"))]
    manifest = write_manifest(cfg, files, [], {"all_passed": ok}, started)
    return ScenarioResult("verify", checks, files, manifest, ok=ok)


SCENARIO_RUNNERS = {
    "convergence": scenario_convergence,
    "wigner_cuts": scenario_wigner_cuts,
    "region_map": scenario_region_map,
    "quartic_study": scenario_quartic_study,
    "verify": scenario_verify,
}


def run_scenario(cfg: ExperimentConfig) -> ScenarioResult:
    return SCENARIO_RUNNERS[cfg.scenario](cfg)
