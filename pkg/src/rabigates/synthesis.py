"""Engineered phase-gate rounds, the deterministic channel and its repetition.

One round projects a short Rabi-pulse sequence onto the ancilla and returns
the two Kraus operators (ancilla found in ``g`` / in ``e``).  Ignoring the
outcome gives the trace-preserving channel ``O_s rho O_s^dag + O_f rho O_f^dag``,
which is optionally followed by a correction unitary cancelling the unwanted
lowest-order term, and repeated ``R`` times.

Realised per-round coefficients (default convention, ``u = t2 x``, ``v = t1 x``):

* cubic five-pulse round: phase ``2u - 4uv^2 + O(5)``, i.e. ``-4 t1^2 t2 X^3``
  after the ``D(2 t2)`` correction;
* quartic five-pulse round: phase ``4uv - (8/3) uv (u^2 + v^2) + O(6)``, i.e.
  ``-(8/3) t1 t2 (t1^2 + t2^2) X^4`` after the ``X^2`` correction.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import ExcessLeakage, NoImprovement, StrengthOutOfRange
from .fock import (
    DEFAULT_CFG,
    TruncationConfig,
    ideal_phase_gate,
    leakage,
    quadrature_function,
    quadratures,
)
from .qubit import DEFAULT_CONVENTION, QubitConvention, combined_m1, combined_m2, kraus_extract

Variant = Literal["five_query", "three_query", "two_query", "k_block"]
Correction = Literal["per_round", "at_end", "none"]

VARIANTS = ("five_query", "three_query", "two_query", "k_block")
CORRECTIONS = ("per_round", "at_end", "none")
MAX_STRENGTH = 0.5


@dataclass(frozen=True)
class RoundParams:
    """Pulse strengths and construction of a single round.

    ``k`` is only read for the ``k_block`` variant.  Strengths above
    ``MAX_STRENGTH`` leave the weak-interaction regime and are rejected unless
    ``allow_strong`` is set.
    """

    t1: float
    t2: float
    order: int = 3
    variant: Variant = "five_query"
    k: int = 2
    allow_strong: bool = False

    def __post_init__(self):
        if self.order not in (3, 4):
            raise ValueError(f"order must be 3 or 4, got {self.order}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.order == 4 and self.variant != "five_query":
            raise ValueError("the quartic gate is only built from the five_query round")
        if self.variant == "k_block" and self.k < 2:
            raise ValueError(f"k_block needs k >= 2, got {self.k}")
        if not self.allow_strong and max(abs(self.t1), abs(self.t2)) > MAX_STRENGTH:
            raise StrengthOutOfRange(
                f"|t1|={abs(self.t1):.4g}, |t2|={abs(self.t2):.4g} exceed {MAX_STRENGTH}; set allow_strong to override"
            )

    @property
    def elementary_interactions(self) -> int:
        """Rabi pulses per round, counting merged neighbouring pulses once."""
        return {"five_query": 5, "three_query": 3, "two_query": 2, "k_block": 4 * self.k + 1}[self.variant]


@dataclass(frozen=True)
class KrausPair:
    success: np.ndarray
    failure: np.ndarray

    def completeness_residual(self) -> float:
        s, f = self.success, self.failure
        eye = np.eye(s.shape[0])
        return float(np.max(np.abs(s.conj().T @ s + f.conj().T @ f - eye)))

    def __iter__(self):
        yield self.success
        yield self.failure


@dataclass(frozen=True)
class GateSchedule:
    round: RoundParams
    repetitions: int
    correction: Correction = "per_round"
    zeta: float = 1.0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.correction not in CORRECTIONS:
            raise ValueError(f"unknown correction placement {self.correction!r}")


@dataclass(frozen=True)
class SynthesisStrategy:
    """Target strength, number of rounds, and the split ``|t2/t1|``."""

    target_chi: float
    repetitions: int
    ratio: float = 1.0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.ratio == 0:
            raise ValueError("ratio must be non-zero")


def round_unitary(params: RoundParams, cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    """Joint unitary of one round, before the ancilla projection."""
    x, _ = quadratures(cfg)
    t1x, t2x = params.t1 * x, params.t2 * x
    if params.order == 4:
        return combined_m2(t1x, t2x) @ combined_m2(-t1x, -t2x)
    if params.variant == "five_query":
        return combined_m1(t1x, t2x) @ combined_m1(-t1x, t2x)
    if params.variant == "three_query":
        return combined_m1(t1x, t2x)
    if params.variant == "two_query":
        return combined_m1(t1x, params.t2 * np.eye(cfg.dim, dtype=complex))
    block = combined_m1(t1x, t2x) @ combined_m1(-t1x, t2x)
    return np.linalg.matrix_power(block, params.k)


@lru_cache(maxsize=256)
def _round_kraus(params: RoundParams, cfg: TruncationConfig, conv: QubitConvention) -> KrausPair:
    u = round_unitary(params, cfg)
    s = kraus_extract(u, "g", "g", conv)
    f = kraus_extract(u, "g", "e", conv)
    s.setflags(write=False)
    f.setflags(write=False)
    return KrausPair(s, f)


def round_kraus(
    params: RoundParams,
    cfg: TruncationConfig = DEFAULT_CFG,
    conv: QubitConvention = DEFAULT_CONVENTION,
) -> KrausPair:
    """Kraus pair ``(<g|U|g>, <e|U|g>)`` of one round of any variant."""
    return _round_kraus(params, cfg, conv)


def cubic_round(params: RoundParams, cfg: TruncationConfig = DEFAULT_CFG,
                conv: QubitConvention = DEFAULT_CONVENTION) -> KrausPair:
    if params.order != 3 or params.variant != "five_query":
        raise ValueError("cubic_round expects order=3, variant='five_query'")
    return round_kraus(params, cfg, conv)


def quartic_round(params: RoundParams, cfg: TruncationConfig = DEFAULT_CFG,
                  conv: QubitConvention = DEFAULT_CONVENTION) -> KrausPair:
    if params.order != 4:
        raise ValueError("quartic_round expects order=4")
    return round_kraus(params, cfg, conv)


def alt_round(params: RoundParams, cfg: TruncationConfig = DEFAULT_CFG,
              conv: QubitConvention = DEFAULT_CONVENTION) -> KrausPair:
    if params.variant not in ("three_query", "two_query", "k_block"):
        raise ValueError(f"alt_round does not build {params.variant!r}")
    return round_kraus(params, cfg, conv)


def _linear_residual(params: RoundParams) -> float:
    # coefficient of X in the success phase under the default convention
    return {"five_query": 2 * params.t2, "three_query": params.t2, "two_query": 0.0,
            "k_block": 2 * params.k * params.t2}[params.variant]


def correction(
    order: int,
    params: RoundParams,
    zeta: float = 1.0,
    cfg: TruncationConfig = DEFAULT_CFG,
    conv: QubitConvention = DEFAULT_CONVENTION,
    times: int = 1,
) -> np.ndarray:
    """Correction unitary for ``times`` rounds.

    Cubic: ``D(2 t2) = exp(-2i t2 X)`` (``t2`` replaced by the variant's linear
    residual).  Quartic: ``exp(-4i zeta t1 t2 X^2)``.  Both flip sign with the
    qubit convention so that they always cancel the realised term.
    """
    if order == 3:
        c = conv.sign * _linear_residual(params) * times
        return quadrature_function(lambda x: np.exp(-1j * c * x), cfg)
    if order == 4:
        c = conv.sign * 4 * zeta * params.t1 * params.t2 * times
        return quadrature_function(lambda x: np.exp(-1j * c * x**2), cfg)
    raise ValueError(f"no correction defined for order {order}")


def apply_channel(rho: np.ndarray, pair: KrausPair) -> np.ndarray:
    s, f = pair
    if s.shape != rho.shape:
        raise ValueError(f"dimension mismatch: state {rho.shape}, Kraus {s.shape}")
    return s @ rho @ s.conj().T + f @ rho @ f.conj().T


def success_probability(rho: np.ndarray, pair: KrausPair) -> float:
    s = pair.success
    return float(np.real(np.trace(s @ rho @ s.conj().T)))


def run_schedule(
    rho0: np.ndarray,
    schedule: GateSchedule,
    cfg: TruncationConfig = DEFAULT_CFG,
    conv: QubitConvention = DEFAULT_CONVENTION,
    strict: bool = True,
) -> np.ndarray:
    """``R`` rounds of the channel with the scheduled correction placement.

    With ``strict`` an output whose guard-band population exceeds
    ``cfg.leak_tol`` raises ExcessLeakage.
    """
    p = schedule.round
    pair = round_kraus(p, cfg, conv)
    order = p.order
    if schedule.correction == "per_round":
        g = correction(order, p, schedule.zeta, cfg, conv)
        pair = KrausPair(g @ pair.success, g @ pair.failure)
    rho = np.asarray(rho0, dtype=complex)
    for _ in range(schedule.repetitions):
        rho = apply_channel(rho, pair)
    if schedule.correction == "at_end":
        g = correction(order, p, schedule.zeta, cfg, conv, times=schedule.repetitions)
        rho = g @ rho @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    if strict:
        leak = leakage(rho, cfg)
        if leak > cfg.leak_tol:
            raise ExcessLeakage(leak, cfg.leak_tol, what="schedule output")
    return rho


def round_strength(params: RoundParams, conv: QubitConvention = DEFAULT_CONVENTION) -> float:
    """Leading ``X^m`` coefficient one corrected round realises.

    The two-pulse variant has no odd-order term and returns 0.
    """
    t1, t2 = params.t1, params.t2
    if params.order == 4:
        return -conv.sign * (8.0 / 3.0) * t1 * t2 * (t1**2 + t2**2)
    scale = {"five_query": 4.0, "three_query": 2.0, "two_query": 0.0, "k_block": 4.0 * params.k}[params.variant]
    return -conv.sign * scale * t1**2 * t2


def params_for_target(
    strategy: SynthesisStrategy,
    order: int = 3,
    variant: Variant = "five_query",
    conv: QubitConvention = DEFAULT_CONVENTION,
    k: int = 2,
    allow_strong: bool = False,
) -> RoundParams:
    """Solve the per-round strength rule for ``t1 >= 0`` and ``|t2| = |ratio| t1``.

    The sign of ``t2`` is chosen so the realised gate is ``exp(+i chi X^m)``
    with the requested sign of ``chi`` under ``conv``.
    """
    chi = strategy.target_chi
    if chi == 0:
        raise ValueError("target_chi must be non-zero")
    r, reps = abs(strategy.ratio), strategy.repetitions
    per_round = abs(chi) / reps
    if order == 3:
        scale = {"five_query": 4.0, "three_query": 2.0, "k_block": 4.0 * k}.get(variant)
        if scale is None:
            raise ValueError(f"variant {variant!r} has no cubic strength rule")
        t = (per_round / (scale * r)) ** (1 / 3)
    elif order == 4:
        if variant != "five_query":
            raise ValueError("the quartic gate is only built from the five_query round")
        t = (3 * per_round / (8 * r * (1 + r**2))) ** 0.25
    else:
        raise ValueError(f"no strength rule for order {order}")
    # realised coefficient is -sign * (positive) * t2 for t1 > 0
    t2 = -math.copysign(1.0, chi) * conv.sign * r * t
    return RoundParams(t1=t, t2=t2, order=order, variant=variant, k=k, allow_strong=allow_strong)


def schedule_for_target(
    chi: float,
    repetitions: int,
    order: int = 3,
    ratio: float = 1.0,
    variant: Variant = "five_query",
    correction: Correction = "per_round",
    zeta: float = 1.0,
    conv: QubitConvention = DEFAULT_CONVENTION,
    k: int = 2,
) -> GateSchedule:
    p = params_for_target(SynthesisStrategy(chi, repetitions, ratio), order, variant, conv, k)
    return GateSchedule(p, repetitions, correction, zeta)


def ideal_output(rho0: np.ndarray, order: int, chi: float, cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    u = ideal_phase_gate(order, chi, cfg)
    return u @ rho0 @ u.conj().T


_INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-4, max_iter: int = 200):
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(x_best, f_best, n_evals)``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > tol and n < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        n += 1
    return (c, fc, n) if fc >= fd else (d, fd, n)


def optimize_zeta(
    template: GateSchedule,
    rho_ref: np.ndarray,
    cfg: TruncationConfig = DEFAULT_CFG,
    conv: QubitConvention = DEFAULT_CONVENTION,
    chi: float | None = None,
    bounds: tuple[float, float] = (0.25, 2.0),
    tol: float = 1e-4,
) -> float:
    """Squeezing-correction weight maximising the fidelity to the ideal quartic state.

    ``chi`` defaults to the strength the template realises at leading order.
    Raises NoImprovement (carrying the best ``zeta``) when the optimum is not
    strictly better than both window endpoints.
    """
    from .diagnostics import fidelity

    if template.round.order != 4:
        raise ValueError("zeta is only defined for the quartic gate")
    if chi is None:
        chi = round_strength(template.round, conv) * template.repetitions
    target = ideal_output(rho_ref, 4, chi, cfg)

    def score(z):
        out = run_schedule(rho_ref, replace(template, zeta=z), cfg, conv, strict=False)
        return fidelity(target, out)

    z_best, f_best, _ = golden_section_max(score, *bounds, tol=tol)
    edge = max(score(bounds[0]), score(bounds[1]))
    if not f_best > edge:
        raise NoImprovement(z_best, f_best, edge)
    return float(z_best)


def realized_coefficient(
    params: RoundParams,
    cfg: TruncationConfig = DEFAULT_CFG,
    conv: QubitConvention = DEFAULT_CONVENTION,
    zeta: float = 1.0,
    x_max: float = 1.5,
) -> float:
    """``X^order`` coefficient of the corrected success operator, fitted numerically.

    Independent of ``round_strength``: the success operator is diagonalised in
    the ``X`` eigenbasis and its phase is fitted by a polynomial over eigenvalues
    with ``|x| <= x_max``.
    """
    from .fock import x_eigensystem

    w, v = x_eigensystem(cfg)
    pair = round_kraus(params, cfg, conv)
    g = correction(params.order, params, zeta, cfg, conv)
    diag = np.einsum("ij,jk,ki->i", v.T, g @ pair.success, v)
    keep = np.abs(w) <= x_max
    phase = np.unwrap(np.angle(diag[keep]))
    with warnings.catch_warnings():
        # tiny cutoffs leave few eigenvalues inside the fit window
        warnings.simplefilter("ignore", np.exceptions.RankWarning)
        coeffs = np.polynomial.polynomial.polyfit(w[keep], phase, params.order + 2)
    return float(coeffs[params.order])
