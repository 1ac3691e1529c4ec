import math

import numpy as np
import pytest

from rabigates import (
    DegenerateResidual,
    ExcessLeakageWarning,
    TruncationConfig,
    WignerGrid,
    coherent_state,
    fidelity,
    fidelity_of_change,
    fock_state,
    ket_to_dm,
    min_negativity,
    orthogonal_complement,
    orthogonal_purity,
    purity,
    quadratures,
    run_schedule,
    schedule_for_target,
    vacuum,
    wigner,
    wigner_cut,
)
from rabigates.synthesis import ideal_output

CFG = TruncationConfig(dim=60, guard=8)
VAC = ket_to_dm(vacuum(CFG))


def random_ket(dim, rng):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_density(dim, rank, rng):
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture(scope="module")
def cubic_pair():
    out = run_schedule(VAC, schedule_for_target(0.2, 18), CFG)
    return ideal_output(VAC, 3, 0.2, CFG), out


def test_fidelity_symmetric(rng):
    a, b = random_density(20, 3, rng), random_density(20, 2, rng)
    assert abs(fidelity(a, b) - fidelity(b, a)) < 1e-12


def test_fidelity_of_pure_states_is_squared_overlap(rng):
    psi, phi = random_ket(20, rng), random_ket(20, rng)
    assert fidelity(ket_to_dm(psi), ket_to_dm(phi)) == pytest.approx(abs(np.vdot(psi, phi)) ** 2, abs=1e-10)


def test_fidelity_shape_mismatch():
    with pytest.raises(ValueError):
        fidelity(np.eye(3) / 3, np.eye(4) / 4)


def test_purity_of_mixture(rng):
    psi = random_ket(10, rng)
    phi = random_ket(10, rng)
    phi -= np.vdot(psi, phi) * psi
    phi /= np.linalg.norm(phi)
    rho = 0.7 * ket_to_dm(psi) + 0.3 * ket_to_dm(phi)
    assert purity(rho) == pytest.approx(0.7**2 + 0.3**2, abs=1e-12)


def test_complement_is_orthogonal_and_normalised(rng):
    rho0 = ket_to_dm(random_ket(15, rng))
    perp = orthogonal_complement(random_density(15, 4, rng), rho0)
    assert abs(np.trace(perp @ rho0)) < 1e-10
    assert np.trace(perp).real == pytest.approx(1.0)


def test_complement_degenerate_and_mixed_reference(rng):
    rho0 = ket_to_dm(random_ket(8, rng))
    with pytest.raises(DegenerateResidual):
        fidelity_of_change(rho0, rho0, rho0)
    with pytest.raises(ValueError):
        orthogonal_complement(rho0, np.eye(8) / 8)


def test_orthogonal_purity_of_pure_change_is_one(rng):
    rho0 = ket_to_dm(fock_state(0, CFG))
    psi = (fock_state(0, CFG) + 0.3 * fock_state(3, CFG)) / math.sqrt(1.09)
    assert orthogonal_purity(ket_to_dm(psi), rho0) == pytest.approx(1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        WignerGrid(x_min=1, x_max=0)
    with pytest.raises(ValueError):
        WignerGrid(n_p=1)


def test_normalisation_and_first_moments():
    rho = ket_to_dm(coherent_state(1.0, CFG))
    field = wigner(rho, WignerGrid(), CFG)
    x, p = quadratures(CFG)
    assert field.integral() == pytest.approx(1.0, abs=1e-3)
    mx, mp = field.moments()
    assert mx == pytest.approx(np.trace(rho @ x).real, abs=1e-2)
    assert mp == pytest.approx(np.trace(rho @ p).real, abs=1e-2)


def test_momentum_sign_convention():
    # (|0> + i|1>)/sqrt2 has <P> = +1/sqrt2
    psi = (fock_state(0, CFG) + 1j * fock_state(1, CFG)) / math.sqrt(2)
    rho = ket_to_dm(psi)
    _, p = quadratures(CFG)
    assert np.trace(rho @ p).real == pytest.approx(1 / math.sqrt(2))
    assert wigner(rho).moments()[1] == pytest.approx(1 / math.sqrt(2), abs=1e-3)


def test_wigner_linearity(rng):
    a, b = random_density(20, 2, rng), random_density(20, 3, rng)
    grid = WignerGrid(n_x=21, n_p=21)
    mix = wigner(0.25 * a + 0.75 * b, grid).values
    assert np.max(np.abs(mix - 0.25 * wigner(a, grid).values - 0.75 * wigner(b, grid).values)) < 1e-10


def test_min_negativity_references():
    assert min_negativity(wigner(VAC))[0] >= -1e-9
    val, x, p = min_negativity(wigner(ket_to_dm(fock_state(1, CFG))))
    assert val == pytest.approx(-1 / math.pi, abs=1e-12) and x == 0 and p == 0


def test_cubic_outputs_are_negative_and_mirror_symmetric(cubic_pair):
    for rho in cubic_pair:
        field = wigner(rho, WignerGrid(), CFG)
        assert min_negativity(field)[0] < 0
        assert np.max(np.abs(field.values - field.values[::-1, :])) < 1e-6


def test_cut_matches_field_slice(cubic_pair):
    ideal, _ = cubic_pair
    grid = WignerGrid()
    field = wigner(ideal, grid)
    ps, cut = wigner_cut(ideal, x=0.0, grid=grid)
    assert np.array_equal(ps, grid.ps)
    assert np.allclose(cut, field.values[100, :], atol=1e-13)
    xs, row = wigner_cut(ideal, p=grid.ps[40], grid=grid)
    assert np.allclose(row, field.values[:, 40], atol=1e-13)
    with pytest.raises(ValueError):
        wigner_cut(ideal, x=0.0, p=0.0)


def test_leaky_state_warns():
    tiny = TruncationConfig(dim=10, guard=3)
    with pytest.warns(ExcessLeakageWarning):
        wigner(ket_to_dm(fock_state(9, tiny)), WignerGrid(n_x=5, n_p=5), tiny)
