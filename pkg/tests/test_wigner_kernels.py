import math
import os
import subprocess
import sys

import numpy as np
import pytest

from rabigates import fock_state, ket_to_dm, TruncationConfig
from rabigates._accel import HAVE_NUMBA
from rabigates._wigner_kernels import wigner_points

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


def hermite_functions(n_max, x):
    psi = np.zeros((n_max, x.size))
    psi[0] = math.pi ** -0.25 * np.exp(-x**2 / 2)
    if n_max > 1:
        psi[1] = math.sqrt(2) * x * psi[0]
    for n in range(1, n_max - 1):
        psi[n + 1] = math.sqrt(2 / (n + 1)) * x * psi[n] - math.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def wigner_by_integral(rho, x, p, half_width=14.0, n=6001):
    """(1/pi) int <x-y|rho|x+y> exp(2ipy) dy on a fine uniform grid."""
    y = np.linspace(-half_width, half_width, n)
    dim = rho.shape[0]
    minus = hermite_functions(dim, x - y)
    plus = hermite_functions(dim, x + y)
    kernel = np.einsum("my,mn,ny->y", minus, rho, plus)
    return float(np.real(np.trapezoid(kernel * np.exp(2j * p * y), y)) / math.pi)


def random_density(dim, rank, rng):
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("backend", BACKENDS)
def test_matches_direct_integral(backend, rng):
    rho = random_density(16, 3, rng)
    pts = [(0.0, 0.0), (0.7, -1.1), (-2.3, 0.4), (1.5, 2.5), (-0.2, -3.0)]
    got = wigner_points(rho, [p[0] for p in pts], [p[1] for p in pts], backend=backend)
    want = [wigner_by_integral(rho, x, p) for x, p in pts]
    assert np.allclose(got, want, atol=1e-10)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_fock_state_origin_values(backend, n):
    rho = ket_to_dm(fock_state(n, TruncationConfig(dim=12, guard=2)))
    assert wigner_points(rho, 0.0, 0.0, backend=backend) == pytest.approx((-1) ** n / math.pi, abs=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_high_fock_level_is_stable(backend):
    # forward Laguerre recurrence must not lose accuracy at large cutoffs
    cfg = TruncationConfig(dim=121, guard=8)
    rho = ket_to_dm(fock_state(100, cfg))
    assert wigner_points(rho, 0.0, 0.0, backend=backend) == pytest.approx(1 / math.pi, abs=1e-10)
    r = np.array([3.0, 7.5, 12.0])
    vals = wigner_points(rho, r / math.sqrt(2), r / math.sqrt(2), backend=backend)
    assert np.all(np.isfinite(vals)) and np.max(np.abs(vals)) <= 1 / math.pi + 1e-12


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree_at_large_dim(rng):
    rho = random_density(120, 4, rng)
    x = rng.uniform(-6, 6, 500)
    p = rng.uniform(-6, 6, 500)
    assert np.max(np.abs(wigner_points(rho, x, p, "numba") - wigner_points(rho, x, p, "numpy"))) < 1e-12


def test_shape_is_preserved(rng):
    rho = random_density(6, 2, rng)
    x, p = np.meshgrid(np.linspace(-1, 1, 4), np.linspace(-2, 2, 3), indexing="ij")
    assert wigner_points(rho, x, p).shape == (4, 3)
    assert wigner_points(rho, 0.5, np.linspace(0, 1, 7)).shape == (7,)


def test_unknown_backend(rng):
    with pytest.raises(ValueError):
        wigner_points(random_density(4, 1, rng), 0.0, 0.0, backend="cuda")


def test_env_flag_selects_numpy_fallback():
    code = (
        "from rabigates._accel import HAVE_NUMBA\n"
        "from rabigates._wigner_kernels import wigner_points\n"
        "import numpy as np\n"
        "assert not HAVE_NUMBA\n"
        "try:\n"
        "    wigner_points(np.eye(3) / 3, 0.0, 0.0, backend='numba')\n"
        "except RuntimeError:\n"
        "    pass\n"
        "else:\n"
        "    raise SystemExit('numba backend should be refused')\n"
        "print(float(wigner_points(np.diag([1.0, 0, 0]) + 0j, 0.0, 0.0)))\n"
    )
    env = dict(os.environ, RABIGATES_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) == pytest.approx(1 / math.pi, abs=1e-14)
