"""Truncated Fock space: ladder and quadrature operators, states, exponentials.

Kets are 1-D complex arrays of length ``dim``; density matrices and
oscillator operators are ``dim x dim`` complex arrays.  Everything that is a
function of the quadrature ``X`` is evaluated in the eigenbasis of the
*truncated* ``X`` matrix, so all such operators commute exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import ExcessLeakage, NotHermitian

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class TruncationConfig:
    """Fock cutoff plus the guard band used by the leakage monitor.

    ``dim`` levels ``0..dim-1`` are kept.  The top ``guard`` levels are where
    the truncated ``X`` departs from the true quadrature; population found
    there above ``leak_tol`` marks a result as untrustworthy.
    """

    dim: int = 80
    guard: int = 8
    leak_tol: float = 1e-6

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if not 0 <= self.guard < self.dim:
            raise ValueError(f"guard must satisfy 0 <= guard < dim, got guard={self.guard}, dim={self.dim}")
        if not self.leak_tol > 0:
            raise ValueError(f"leak_tol must be positive, got {self.leak_tol}")


DEFAULT_CFG = TruncationConfig()


def ladder(cfg: TruncationConfig = DEFAULT_CFG) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(a, a_dag)`` with ``<n-1|a|n> = sqrt(n)``."""
    a = np.diag(np.sqrt(np.arange(1, cfg.dim, dtype=float)), k=1).astype(complex)
    return a, a.conj().T.copy()


def number_operator(cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    return np.diag(np.arange(cfg.dim, dtype=float)).astype(complex)


def quadratures(cfg: TruncationConfig = DEFAULT_CFG) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X, P)`` with ``X = (a + a_dag)/sqrt(2)``, ``P = (a - a_dag)/(sqrt(2) i)``."""
    a, ad = ladder(cfg)
    return (a + ad) / np.sqrt(2), (a - ad) / (np.sqrt(2) * 1j)


@lru_cache(maxsize=16)
def _x_eigensystem(dim: int) -> tuple[np.ndarray, np.ndarray]:
    # X is real symmetric tridiagonal; eigh of the real matrix keeps V real.
    off = np.sqrt(np.arange(1, dim, dtype=float) / 2)
    w, v = np.linalg.eigh(np.diag(off, 1) + np.diag(off, -1))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def x_eigensystem(cfg: TruncationConfig = DEFAULT_CFG) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and (real, orthogonal) eigenvectors of the truncated ``X``."""
    return _x_eigensystem(cfg.dim)


def quadrature_function(f: Callable[[np.ndarray], np.ndarray], cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    """Operator ``f(X)`` built from the spectral decomposition of the truncated ``X``."""
    w, v = x_eigensystem(cfg)
    return (v * f(w)) @ v.T


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL, what: str = "operator") -> None:
    resid = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if resid >= tol:
        raise NotHermitian(f"{what} is not Hermitian: max |H - H^dag| = {resid:.3e}")


def hermitian_exp(h: np.ndarray, s: float = 1.0) -> np.ndarray:
    """``exp(i s H)`` for Hermitian ``H`` via its eigendecomposition."""
    h = np.asarray(h)
    check_hermitian(h)
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(1j * s * w)) @ v.conj().T


def displacement(z: float, cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    """``D(z) = exp(-i z X)``: shifts the momentum quadrature by ``-z``."""
    return quadrature_function(lambda x: np.exp(-1j * z * x), cfg)


def ideal_phase_gate(m: int, chi: float, cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    """Target unitary ``exp(i chi X^m)``."""
    if m < 1:
        raise ValueError(f"gate order must be >= 1, got {m}")
    return quadrature_function(lambda x: np.exp(1j * chi * x**m), cfg)


def fock_state(n: int, cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    if not 0 <= n < cfg.dim:
        raise ValueError(f"Fock level {n} outside 0..{cfg.dim - 1}")
    ket = np.zeros(cfg.dim, dtype=complex)
    ket[n] = 1.0
    return ket


def vacuum(cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    return fock_state(0, cfg)


def coherent_state(alpha: float, cfg: TruncationConfig = DEFAULT_CFG) -> np.ndarray:
    """Coherent state ``exp(-sqrt(2) i alpha P)|0>`` for real ``alpha``.

    Raises ExcessLeakage when the analytic Poisson mass at or above level
    ``dim - guard`` exceeds ``leak_tol``.
    """
    alpha = float(alpha)
    n = np.arange(cfg.dim)
    if alpha == 0.0:
        return vacuum(cfg)
    tail = poisson.sf(cfg.dim - cfg.guard - 1, alpha**2)
    if tail > cfg.leak_tol:
        raise ExcessLeakage(tail, cfg.leak_tol, what=f"coherent state alpha={alpha:g}")
    logmag = -(alpha**2) / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amps = np.exp(logmag) * np.sign(alpha) ** n
    norm = np.linalg.norm(amps)
    log.debug("coherent alpha=%g: truncation deficit %.3e", alpha, 1 - norm**2)
    return (amps / norm).astype(complex)


def ket_to_dm(ket: np.ndarray) -> np.ndarray:
    return np.outer(ket, ket.conj())


def check_ket(ket: np.ndarray, tol: float = 1e-10) -> None:
    if ket.ndim != 1:
        raise ValueError("a ket must be a 1-D array")
    if abs(np.linalg.norm(ket) - 1) > tol:
        raise ValueError(f"ket norm deviates from 1 by {abs(np.linalg.norm(ket) - 1):.3e}")


def check_density(rho: np.ndarray, tol: float = 1e-10, psd_tol: float = 1e-9) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValueError(f"density matrix not Hermitian (residual {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix trace {tr.real:.12f} != 1")
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if lam[0] < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")


def leakage(state: np.ndarray, cfg: TruncationConfig = DEFAULT_CFG) -> float:
    """Population in the guard band, levels ``dim-guard .. dim-1``."""
    lo = cfg.dim - cfg.guard
    if cfg.guard == 0:
        return 0.0
    if state.ndim == 1:
        return float(np.sum(np.abs(state[lo:]) ** 2))
    return float(np.sum(np.real(np.diag(state)[lo:])))
