"""Ancilla qubit algebra and the joint qubit (x) oscillator space.

Joint operators are ``2*dim x 2*dim`` arrays with the qubit as the slow
(outer) tensor index, i.e. ``np.kron(qubit_op, oscillator_op)``.  Block
``(i, j)`` of size ``dim`` is ``<i|U|j>`` in the qubit computational basis
where index 0 is the ``+1`` eigenvector of ``sigma_z``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import NonCommuting
from .fock import check_hermitian, hermitian_exp

Axis = Literal["x", "y", "z"]
QubitState = Literal["g", "e"]

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

COMMUTE_TOL = 1e-10


@dataclass(frozen=True)
class QubitConvention:
    """Which ``sigma_z`` eigenvector is the ancilla ground state ``|g>``.

    With the default ``ground_is_plus_z=True`` the cubic round carries the
    phase ``exp(+2i t2 X cos(2 t1 X))``; flipping it conjugates every
    engineered phase, i.e. ``chi -> -chi`` at fixed pulse strengths.
    """

    ground_is_plus_z: bool = True

    def index(self, state: QubitState) -> int:
        if state not in ("g", "e"):
            raise ValueError(f"qubit state must be 'g' or 'e', got {state!r}")
        plus = (state == "g") == self.ground_is_plus_z
        return 0 if plus else 1

    @property
    def sign(self) -> int:
        """``<g|sigma_z|g>``."""
        return 1 if self.ground_is_plus_z else -1


DEFAULT_CONVENTION = QubitConvention()


def pauli(axis: Axis) -> np.ndarray:
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def rabi_unitary(axis: Axis, t_op: np.ndarray) -> np.ndarray:
    """``exp(i sigma_axis (x) T)`` for a Hermitian oscillator operator ``T``."""
    check_hermitian(t_op, what="Rabi generator")
    return hermitian_exp(np.kron(pauli(axis), t_op))


def _check_commuting(t1: np.ndarray, t2: np.ndarray) -> None:
    check_hermitian(t1, what="T1")
    check_hermitian(t2, what="T2")
    resid = np.max(np.abs(t1 @ t2 - t2 @ t1))
    if resid >= COMMUTE_TOL:
        raise NonCommuting(f"T1 and T2 do not commute: max |[T1,T2]| = {resid:.3e}")


def _sandwich(t1: np.ndarray, t2: np.ndarray, middle: Axis) -> np.ndarray:
    # With standard Pauli matrices exp(-i T sy) sz exp(i T sy) = cos(2T) sz + sin(2T) sx,
    # so the outer pulses go as exp(+i T1 sy) ... exp(-i T1 sy) to land on the
    # single-exponential forms below (equivalently, the mirrored sequence at -T1).
    _check_commuting(t1, t2)
    return rabi_unitary("y", t1) @ rabi_unitary(middle, t2) @ rabi_unitary("y", -t1)


def combined_m1(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Three-pulse conjugation of ``exp(i T2 sz)`` by a ``sigma_y`` Rabi pulse.

    Built as the explicit product ``exp(i T1 sy) exp(i T2 sz) exp(-i T1 sy)``,
    which equals ``exp(i T2 (cos(2T1) sz - sin(2T1) sx))``.
    """
    return _sandwich(t1, t2, "z")


def combined_m2(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Three-pulse conjugation of ``exp(i T2 sx)``; equals ``exp(i T2 (cos(2T1) sx + sin(2T1) sz))``."""
    return _sandwich(t1, t2, "x")


def _herm_fn(h: np.ndarray, f) -> np.ndarray:
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * f(w)) @ v.conj().T


def _closed(t1, t2, a: Axis, sa: float, b: Axis, sb: float) -> np.ndarray:
    c = _herm_fn(t1, lambda w: np.cos(2 * w))
    s = _herm_fn(t1, lambda w: np.sin(2 * w))
    cos_part, sin_part = t2 @ c, t2 @ s
    gen = sa * np.kron(pauli(a), (cos_part + cos_part.conj().T) / 2)
    gen = gen + sb * np.kron(pauli(b), (sin_part + sin_part.conj().T) / 2)
    return hermitian_exp(gen)


def combined_m1_closed(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Single-exponential form ``exp(i T2 (cos(2T1) sz - sin(2T1) sx))``."""
    _check_commuting(t1, t2)
    return _closed(t1, t2, "z", 1.0, "x", -1.0)


def combined_m2_closed(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Single-exponential form ``exp(i T2 (cos(2T1) sx + sin(2T1) sz))``."""
    _check_commuting(t1, t2)
    return _closed(t1, t2, "x", 1.0, "z", 1.0)


def kraus_extract(
    u: np.ndarray,
    inp: QubitState = "g",
    out: QubitState = "g",
    conv: QubitConvention = DEFAULT_CONVENTION,
) -> np.ndarray:
    """Oscillator block ``<out|U|inp>`` of a joint operator."""
    dim = u.shape[0] // 2
    if u.shape != (2 * dim, 2 * dim):
        raise ValueError(f"joint operator must be 2*dim square, got {u.shape}")
    i, o = conv.index(inp), conv.index(out)
    return u[o * dim:(o + 1) * dim, i * dim:(i + 1) * dim].copy()
