"""Invariant suite behind ``rabigates verify``.

Every check returns a row ``{check, residual, tolerance, passed, detail}``;
``passed`` is ``residual < tolerance`` unless noted.  Randomised draws come
from ``numpy.random.default_rng(cfg.seed)`` so a report is reproducible.
"""
from __future__ import annotations

import json
import math
from typing import Any, Callable

import numpy as np
from scipy.linalg import expm

from ._accel import HAVE_NUMBA
from ._wigner_kernels import wigner_points
from .config import ExperimentConfig
from .diagnostics import WignerGrid, fidelity, orthogonal_complement, wigner
from .errors import ExcessLeakage, RabiGatesError
from .fock import (
    TruncationConfig,
    coherent_state,
    displacement,
    fock_state,
    hermitian_exp,
    ideal_phase_gate,
    ket_to_dm,
    number_operator,
    quadrature_function,
    quadratures,
    vacuum,
)
from .qubit import (
    QubitConvention,
    combined_m1,
    combined_m1_closed,
    combined_m2,
    combined_m2_closed,
    rabi_unitary,
)
from .synthesis import (
    GateSchedule,
    RoundParams,
    SynthesisStrategy,
    apply_channel,
    correction,
    params_for_target,
    realized_coefficient,
    round_kraus,
    run_schedule,
)

Row = dict[str, Any]


def _row(name: str, residual: float, tol: float, detail: str = "", passed: bool | None = None) -> Row:
    if passed is None:
        passed = bool(residual < tol)
    return {"check": name, "residual": float(residual), "tolerance": tol, "passed": passed, "detail": detail}


def _inf(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _phase_aligned_residual(a: np.ndarray, b: np.ndarray) -> float:
    """``min_phi |a - e^{i phi} b|_inf`` with the overlap-optimal phase."""
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return _inf(a - phase * b)


def _draws(rng: np.random.Generator, n: int) -> np.ndarray:
    # (0, 0.3]^2
    return 0.3 * (1.0 - rng.random((n, 2)))


def _unitarity(trunc: TruncationConfig, rng) -> Row:
    h = rng.normal(size=(trunc.dim, trunc.dim)) + 1j * rng.normal(size=(trunc.dim, trunc.dim))
    ops = [hermitian_exp((h + h.conj().T) / 2), displacement(0.7, trunc),
           ideal_phase_gate(3, 0.4, trunc), ideal_phase_gate(4, 0.4, trunc)]
    eye = np.eye(trunc.dim)
    return _row("unitarity", max(_inf(u.conj().T @ u - eye) for u in ops), 1e-11)


def _x_functions_commute(trunc: TruncationConfig, rng) -> Row:
    c = rng.normal(size=(2, 4))
    f = quadrature_function(lambda x: np.exp(1j * np.polyval(c[0], x)), trunc)
    g = quadrature_function(lambda x: np.exp(1j * np.polyval(c[1], x)), trunc)
    return _row("x_functions_commute", _inf(f @ g - g @ f), 1e-11)


def _number_spectrum(trunc: TruncationConfig, rng) -> Row:
    w = np.linalg.eigvalsh(number_operator(trunc))
    return _row("number_spectrum", _inf(w - np.arange(trunc.dim)), 1e-12)


def _coherent_states(trunc: TruncationConfig, alphas) -> list[Row]:
    rows = []
    _, p = quadratures(trunc)
    for alpha in alphas:
        name = f"coherent_state[alpha={alpha:g}]"
        try:
            ket = coherent_state(alpha, trunc)
        except ExcessLeakage as exc:
            rows.append(_row(name, exc.leakage, trunc.leak_tol, f"ExcessLeakage: {exc}", passed=False))
            continue
        ref = expm(-math.sqrt(2) * 1j * alpha * p) @ vacuum(trunc)
        ref /= np.linalg.norm(ref)
        rows.append(_row(name, 1.0 - abs(np.vdot(ref, ket)) ** 2, 1e-8))
    return rows


def _pair_identity(name: str, product: Callable, closed: Callable, draws, trunc) -> Row:
    x, _ = quadratures(trunc)
    worst = 0.0
    for t1, t2 in draws:
        worst = max(worst, _inf(product(t1 * x, t2 * x) - closed(t1 * x, t2 * x)))
    return _row(name, worst, 1e-10, f"{len(draws)} draws")


def _rabi_block_diagonal(trunc: TruncationConfig, draws) -> Row:
    x, _ = quadratures(trunc)
    d = trunc.dim
    worst = 0.0
    for t1, _t2 in draws[:10]:
        u = rabi_unitary("z", t1 * x)
        worst = max(worst, _inf(u[:d, d:]), _inf(u[d:, :d]))
    return _row("rabi_z_block_diagonal", worst, 1e-14)


def _random_params(draws, k: int = 2) -> list[RoundParams]:
    out = []
    for i, (t1, t2) in enumerate(draws):
        variant = ("five_query", "three_query", "two_query", "k_block")[i % 4]
        out.append(RoundParams(t1, t2, 3, variant, k))
        out.append(RoundParams(t1, t2, 4, "five_query"))
    return out


def _kraus_completeness(trunc, conv, draws) -> Row:
    worst = max(round_kraus(p, trunc, conv).completeness_residual() for p in _random_params(draws))
    return _row("kraus_completeness", worst, 1e-10, "all variants, both orders")


def _failure_closed_form(order: int, trunc, conv, draws) -> Row:
    worst = 0.0
    for t1, t2 in draws:
        pair = round_kraus(RoundParams(t1, t2, order, "five_query"), trunc, conv)
        ref = quadrature_function(lambda x: -np.sin(t2 * x) ** 2 * np.sin(4 * t1 * x), trunc)
        worst = max(worst, _phase_aligned_residual(pair.failure, ref))
    return _row(f"failure_closed_form[order={order}]", worst, 1e-10, "up to global phase")


def _correction_commutes(trunc, conv, draws) -> Row:
    worst = 0.0
    for p in _random_params(draws[:20]):
        pair = round_kraus(p, trunc, conv)
        g = correction(p.order, p, 1.0, trunc, conv)
        worst = max(worst, _inf(g @ pair.success - pair.success @ g), _inf(g @ pair.failure - pair.failure @ g))
    return _row("correction_commutes", worst, 1e-10)


def _placement(cfg, trunc, conv) -> Row:
    rho0 = ket_to_dm(vacuum(trunc))
    p = params_for_target(SynthesisStrategy(cfg.chi[0], cfg.rounds[0], cfg.ratio), cfg.order, cfg.variant, conv,
                          cfg.k, cfg.allow_strong)
    a = run_schedule(rho0, GateSchedule(p, cfg.rounds[0], "per_round", cfg.zeta), trunc, conv, strict=False)
    b = run_schedule(rho0, GateSchedule(p, cfg.rounds[0], "at_end", cfg.zeta), trunc, conv, strict=False)
    return _row("correction_placement_equivalence", _inf(a - b), 1e-9)


def _weak_limit(trunc, conv) -> Row:
    rho0 = ket_to_dm(vacuum(trunc))
    norms = []
    for t in (0.2, 0.1, 0.05, 0.025):
        out = apply_channel(rho0, round_kraus(RoundParams(t, t), trunc, conv))
        norms.append(float(np.sum(np.abs(np.linalg.eigvalsh((out - rho0 + (out - rho0).conj().T) / 2)))))
    ratio = max(b / a for a, b in zip(norms, norms[1:]))
    return _row("weak_limit_monotone", ratio, 1.0, "max successive trace-norm ratio over halved strengths")


def _long_run_validity(trunc, conv) -> list[Row]:
    rho = ket_to_dm(vacuum(trunc))
    pair = round_kraus(params_for_target(SynthesisStrategy(0.3, 200)), trunc, conv)
    trace_err = 0.0
    for _ in range(200):
        rho = apply_channel(rho, pair)
        trace_err = max(trace_err, abs(np.real(np.trace(rho)) - 1.0))
    herm = _inf(rho - rho.conj().T)
    min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    return [
        _row("trace_preservation[R<=200]", trace_err, 1e-9),
        _row("hermiticity[R=200]", herm, 1e-10),
        _row("positivity[R=200]", max(0.0, -min_eig), 1e-9, f"min eigenvalue {min_eig:.3e}"),
    ]


def _wigner_checks(rng) -> list[Row]:
    trunc = TruncationConfig(dim=20, guard=4)
    vac = ket_to_dm(vacuum(trunc))
    one = ket_to_dm(fock_state(1, trunc))
    rows = [
        _row("wigner_vacuum_origin", abs(wigner_points(vac, 0.0, 0.0) - 1 / math.pi), 1e-8),
        _row("wigner_fock1_origin", abs(wigner_points(one, 0.0, 0.0) + 1 / math.pi), 1e-8),
        _row("wigner_normalisation", abs(wigner(one, WignerGrid()).integral() - 1.0), 1e-3),
    ]
    lam = 0.3
    pts = rng.uniform(-3, 3, size=(2, 50))
    mix = wigner_points(lam * vac + (1 - lam) * one, *pts)
    lin = lam * wigner_points(vac, *pts) + (1 - lam) * wigner_points(one, *pts)
    rows.append(_row("wigner_linearity", _inf(mix - lin), 1e-10))
    if HAVE_NUMBA:
        psi = rng.normal(size=trunc.dim) + 1j * rng.normal(size=trunc.dim)
        rho = ket_to_dm(psi / np.linalg.norm(psi))
        diff = wigner_points(rho, *pts, backend="numba") - wigner_points(rho, *pts, backend="numpy")
        rows.append(_row("wigner_backends_agree", _inf(diff), 1e-12))
    return rows


def _fidelity_checks(trunc, rng) -> list[Row]:
    def rand_dm(rank):
        a = rng.normal(size=(trunc.dim, rank)) + 1j * rng.normal(size=(trunc.dim, rank))
        rho = a @ a.conj().T
        return rho / np.trace(rho)

    a, b = rand_dm(3), rand_dm(2)
    psi = rng.normal(size=trunc.dim) + 0j
    rho0 = ket_to_dm(psi / np.linalg.norm(psi))
    perp = orthogonal_complement(a, rho0)
    return [
        _row("fidelity_symmetry", abs(fidelity(a, b) - fidelity(b, a)), 1e-12),
        _row("orthogonal_complement_overlap", abs(np.real(np.trace(perp @ rho0))), 1e-10),
    ]


def _chi_sign(cfg, trunc, conv) -> Row:
    chi, reps = cfg.chi[0], cfg.rounds[0]
    p = params_for_target(SynthesisStrategy(chi, reps, cfg.ratio), cfg.order, cfg.variant, conv, cfg.k,
                          cfg.allow_strong)
    realized = realized_coefficient(p, trunc, conv, cfg.zeta) * reps
    rel = abs(realized - chi) / abs(chi)
    ok = math.copysign(1, realized) == math.copysign(1, chi) and rel < 0.1
    return _row("chi_sign", rel, 0.1, f"requested {chi:g}, realised {realized:.6g}", passed=ok)


def _manifest_consistency(path: str) -> list[Row]:
    """Recompute the realised sign of every stored point under the stored convention."""
    try:
        with open(path, encoding="utf-8") as fh:
            man = json.load(fh)
        stored = man["qubit_convention"]["ground_is_plus_z"]
        conf = man["config"]
        points = [pt for pt in man["points"] if "t1" in pt]
    except (OSError, KeyError, TypeError, ValueError) as exc:
        return [_row("manifest_readable", 1.0, 0.5, f"{type(exc).__name__}: {exc}", passed=False)]
    conv = QubitConvention(ground_is_plus_z=bool(stored))
    trunc = TruncationConfig(dim=conf.get("dim", 80), guard=conf.get("guard", 8), leak_tol=conf.get("leak_tol", 1e-6))
    bad = []
    for pt in points:
        p = RoundParams(pt["t1"], pt["t2"], pt["order"], pt["variant"], pt.get("k", 2), allow_strong=True)
        realized = realized_coefficient(p, trunc, conv, pt.get("zeta", 1.0))
        if math.copysign(1, realized) != math.copysign(1, pt["chi"]):
            bad.append(pt["chi"])
    detail = f"{len(points)} points, ground_is_plus_z={stored}"
    if bad:
        detail += f"; chi-sign inconsistency for chi={sorted(set(bad))}"
    return [_row("manifest_chi_sign", len(bad), 1, detail)]


def run_checks(cfg: ExperimentConfig) -> list[Row]:
    rng = np.random.default_rng(cfg.seed)
    trunc = TruncationConfig(dim=cfg.dim, guard=cfg.guard, leak_tol=cfg.leak_tol)
    conv = QubitConvention(ground_is_plus_z=cfg.ground_is_plus_z)
    draws = _draws(rng, cfg.trials)

    rows: list[Row] = []

    def guarded(name, fn, *args):
        try:
            res = fn(*args)
        except RabiGatesError as exc:
            res = _row(name, math.inf, 0.0, f"{type(exc).__name__}: {exc}", passed=False)
        rows.extend(res if isinstance(res, list) else [res])

    guarded("unitarity", _unitarity, trunc, rng)
    guarded("x_functions_commute", _x_functions_commute, trunc, rng)
    guarded("number_spectrum", _number_spectrum, trunc, rng)
    guarded("coherent_state", _coherent_states, trunc, cfg.alpha)
    guarded("m1_closed_form", _pair_identity, "m1_closed_form", combined_m1, combined_m1_closed, draws, trunc)
    guarded("m2_closed_form", _pair_identity, "m2_closed_form", combined_m2, combined_m2_closed, draws, trunc)
    guarded("rabi_z_block_diagonal", _rabi_block_diagonal, trunc, draws)
    guarded("kraus_completeness", _kraus_completeness, trunc, conv, draws)
    guarded("failure_closed_form[order=3]", _failure_closed_form, 3, trunc, conv, draws)
    guarded("failure_closed_form[order=4]", _failure_closed_form, 4, trunc, conv, draws)
    guarded("correction_commutes", _correction_commutes, trunc, conv, draws)
    guarded("correction_placement_equivalence", _placement, cfg, trunc, conv)
    guarded("weak_limit_monotone", _weak_limit, trunc, conv)
    guarded("long_run_validity", _long_run_validity, trunc, conv)
    guarded("wigner", _wigner_checks, rng)
    guarded("fidelity", _fidelity_checks, trunc, rng)
    guarded("chi_sign", _chi_sign, cfg, trunc, conv)
    if cfg.manifest:
        guarded("manifest_chi_sign", _manifest_consistency, cfg.manifest)
    return rows
