"""Figures of merit: overlap fidelity, fidelity of change, purity, Wigner functions."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._wigner_kernels import wigner_points
from .errors import DegenerateResidual, ExcessLeakageWarning
from .fock import TruncationConfig, leakage

RESIDUAL_TOL = 1e-12


def _herm(rho: np.ndarray) -> np.ndarray:
    return (rho + rho.conj().T) / 2


def fidelity(rho_id: np.ndarray, rho_re: np.ndarray) -> float:
    """Overlap ``Tr[rho_id rho_re]``.

    This equals the Uhlmann fidelity only when one argument is pure; for two
    identical mixed states it returns their purity.
    """
    if rho_id.shape != rho_re.shape:
        raise ValueError(f"dimension mismatch: {rho_id.shape} vs {rho_re.shape}")
    val = np.real(np.sum(_herm(rho_id).T * _herm(rho_re)))
    return float(np.clip(val, 0.0, 1.0 + 1e-9))


def purity(rho: np.ndarray) -> float:
    rho = _herm(rho)
    return float(np.real(np.sum(rho.T * rho)))


def orthogonal_complement(rho: np.ndarray, rho0: np.ndarray) -> np.ndarray:
    """Normalised projection of ``rho`` onto the complement of the pure state ``rho0``."""
    rho, rho0 = _herm(rho), _herm(rho0)
    if purity(rho0) < 1 - 1e-8:
        raise ValueError("reference state must be pure")
    q = np.eye(rho.shape[0]) - rho0
    proj = q @ rho @ q
    resid = np.real(np.trace(proj))
    if resid <= RESIDUAL_TOL:
        raise DegenerateResidual(f"no weight outside the reference state (residual trace {resid:.3e})")
    return _herm(proj) / resid


def fidelity_of_change(rho_id: np.ndarray, rho_re: np.ndarray, rho0: np.ndarray) -> float:
    return fidelity(orthogonal_complement(rho_id, rho0), orthogonal_complement(rho_re, rho0))


def orthogonal_purity(rho: np.ndarray, rho0: np.ndarray) -> float:
    return purity(orthogonal_complement(rho, rho0))


@dataclass(frozen=True)
class WignerGrid:
    x_min: float = -5.0
    x_max: float = 5.0
    p_min: float = -5.0
    p_max: float = 5.0
    n_x: int = 201
    n_p: int = 201

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.p_max > self.p_min):
            raise ValueError("grid bounds must satisfy max > min")
        if self.n_x < 2 or self.n_p < 2:
            raise ValueError("grid needs at least two points per axis")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)


@dataclass(frozen=True)
class WignerField:
    """``values[i, j] = W(xs[i], ps[j])``."""

    values: np.ndarray
    grid: WignerGrid

    def integral(self, weight: np.ndarray | None = None) -> float:
        v = self.values if weight is None else self.values * weight
        return float(np.trapezoid(np.trapezoid(v, self.grid.ps, axis=1), self.grid.xs))

    def moments(self) -> tuple[float, float]:
        x, p = np.meshgrid(self.grid.xs, self.grid.ps, indexing="ij")
        return self.integral(x), self.integral(p)


def _warn_leakage(rho, cfg):
    if cfg is not None:
        leak = leakage(rho, cfg)
        if leak > cfg.leak_tol:
            warnings.warn(
                f"state leaks {leak:.3e} into the guard band; Wigner values may not be trustworthy",
                ExcessLeakageWarning,
                stacklevel=3,
            )


def wigner(rho: np.ndarray, grid: WignerGrid = WignerGrid(), cfg: TruncationConfig | None = None,
           backend: str | None = None) -> WignerField:
    """Wigner function on a rectangular grid, in units where vacuum is ``exp(-x^2-p^2)/pi``."""
    _warn_leakage(rho, cfg)
    x, p = np.meshgrid(grid.xs, grid.ps, indexing="ij")
    return WignerField(wigner_points(_herm(rho), x, p, backend=backend), grid)


def wigner_cut(rho: np.ndarray, x: float | None = None, p: float | None = None,
               grid: WignerGrid = WignerGrid(), cfg: TruncationConfig | None = None,
               backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Slice at fixed ``x`` (sampled along the grid's p axis) or fixed ``p``.

    Returns ``(coords, values)``.
    """
    if (x is None) == (p is None):
        raise ValueError("give exactly one of x or p")
    _warn_leakage(rho, cfg)
    if x is not None:
        coords = grid.ps
        vals = wigner_points(_herm(rho), np.full_like(coords, x), coords, backend=backend)
    else:
        coords = grid.xs
        vals = wigner_points(_herm(rho), coords, np.full_like(coords, p), backend=backend)
    return coords, vals


def min_negativity(field: WignerField) -> tuple[float, float, float]:
    """Minimum value of the field and its ``(x, p)`` location."""
    i, j = np.unravel_index(np.argmin(field.values), field.values.shape)
    return float(field.values[i, j]), float(field.grid.xs[i]), float(field.grid.ps[j])
