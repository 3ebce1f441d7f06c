import numpy as np
import pytest

from bornground import nonlinearity as nl
from bornground import nonradial as nr
from bornground import radial
from bornground.errors import ConfigurationError, ConstraintViolation, PreconditionError

SPEC4 = nl.make_power_zero_mass(4, 8)


@pytest.fixture(scope="module")
def grid():
    return nr.BlockRadialGrid(2, 2, 10.0, 61)


def _smooth_tau(grid, a=0.3, w=2.0):
    x = grid.nodes
    X, Y = x[:, None], x[None, :]
    v = a * (X * X - Y * Y) / (w * w) * np.exp(-(X * X + Y * Y) / (w * w))
    v[-1, :] = v[:, -1] = 0.0
    return v


@pytest.mark.parametrize("k", [(2, 2), (2, 3), (3, 3)])
def test_volume_of_cylinder(k):
    g = nr.BlockRadialGrid(k[0], k[1], 5.0, 41)
    assert g.integrate(np.ones(g.shape)) == pytest.approx(g.cylinder_volume(), rel=1e-12)


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        nr.BlockRadialGrid(1, 2, 5.0, 41)
    with pytest.raises(ConfigurationError):
        nr.BlockRadialGrid(2, 2, 0.0, 41)


def test_tau_identities(grid):
    rng = np.random.default_rng(1)
    u = nr.BlockProfile(grid, rng.normal(size=grid.shape))
    tu = nr.tau_apply(u)
    assert np.array_equal(nr.tau_apply(tu).values, u.values)
    p = nr.tau_project(u)
    assert np.array_equal(nr.tau_project(p).values, p.values)
    assert np.all(np.diag(p.values) == 0)
    assert np.array_equal(nr.tau_apply(p).values, p.values)


def test_tau_needs_square():
    with pytest.raises(ConfigurationError):
        nr.tau_apply(np.zeros((3, 4)))
    with pytest.raises(ConfigurationError):
        nr.tau_project(np.zeros((3, 4)))


def test_tau_profile_rejects_nonsymmetric(grid):
    v = _smooth_tau(grid)
    v[3, 1] += 1e-3
    with pytest.raises(PreconditionError):
        nr.TauProfile(grid, v)


def test_zero_profile_functionals(grid):
    f = nr.functionals2(nr.BlockProfile(grid, np.zeros(grid.shape)), SPEC4)
    assert (f.psi, f.phi, f.energy, f.pohozaev) == (0.0, 0.0, 0.0, 0.0)


def test_dimension_mismatch(grid):
    with pytest.raises(ConfigurationError):
        nr.functionals2(nr.BlockProfile(grid, np.zeros(grid.shape)), nl.make_power_zero_mass(3, 8))


def test_capped_profile_rejected(grid):
    x = grid.nodes
    v = np.maximum(0, 8 - x[:, None] - x[None, :]) * 1.0
    v[-1, :] = v[:, -1] = 0
    with pytest.raises(ConstraintViolation):
        nr.functionals2(nr.BlockProfile(grid, v), SPEC4)


@pytest.mark.parametrize("a", [0.3, 0.7])
def test_radialized_functionals_match_radial(a):
    g = nr.BlockRadialGrid(2, 2, 10.0, 201)
    rg = radial.RadialGrid(4, 10.0, 2001)
    u = rg.profile(lambda r: a * np.exp(-((r / 1.5) ** 2)))
    f = nr.functionals2(nr.radialize(g, u), SPEC4)
    assert f.psi == pytest.approx(radial.psi(u), rel=0.01)
    assert f.phi == pytest.approx(radial.phi(u, SPEC4), rel=0.01)


def test_halves_carry_half(grid):
    u = nr.TauProfile(grid, _smooth_tau(grid))
    full = nr.functionals2(u, SPEC4)
    lo = nr.functionals2(u, SPEC4, "lower")
    up = nr.functionals2(u, SPEC4, "upper")
    for name in ("psi", "phi", "energy", "pohozaev"):
        assert getattr(lo, name) == pytest.approx(getattr(up, name), rel=1e-12)
        assert getattr(lo, name) == pytest.approx(0.5 * getattr(full, name), rel=1e-12)


def test_unknown_region(grid):
    with pytest.raises(ConfigurationError):
        nr.functionals2(nr.BlockProfile(grid, np.zeros(grid.shape)), SPEC4, "left")


def test_grad_psi2_directional_derivatives(grid):
    mesh = grid._mesh
    u = _smooth_tau(grid).ravel() + 0.05 * np.exp(-grid.nodes[:, None] ** 2 - grid.nodes[None, :] ** 2).ravel()
    g = nr._grad_psi2(mesh, grid.omega, u)
    H = nr._hess_psi2(mesh, grid.omega, u)
    rng = np.random.default_rng(5)
    eps = 1e-6
    for _ in range(5):
        d = rng.normal(size=u.size) * 1e-2
        fd = (nr._psi2(mesh, grid.omega, u + eps * d) - nr._psi2(mesh, grid.omega, u - eps * d)) / (2 * eps)
        assert g @ d == pytest.approx(fd, rel=1e-6)
        fdg = (nr._grad_psi2(mesh, grid.omega, u + eps * d) - nr._grad_psi2(mesh, grid.omega, u - eps * d)) / (2 * eps)
        assert np.max(np.abs(H @ d - fdg)) <= 1e-6 * np.max(np.abs(fdg))


def test_interpolate_reproduces_nodes_and_linears(grid):
    x = grid.nodes
    L = 2 * x[:, None] - 0.5 * x[None, :] + 1
    rng = np.random.default_rng(2)
    P = rng.uniform(0, grid.R * 0.99, size=(2, 200))
    assert np.allclose(nr.interpolate(grid, L, P[0], P[1]), 2 * P[0] - 0.5 * P[1] + 1, atol=1e-12)
    X, Y = np.meshgrid(x[:-1], x[:-1], indexing="ij")
    assert np.allclose(nr.interpolate(grid, L, X, Y), L[:-1, :-1], rtol=0, atol=1e-12)


def test_odd_nonlinearity_required():
    even = nl.NonlinearitySpec(
        regime=nl.ZERO_MASS, dimension=4, f=lambda s: np.abs(s) ** 7, fprime=lambda s: 7 * np.abs(s) ** 6 * np.sign(s),
        F=lambda s: np.abs(s) ** 7 * s / 8, name="even",
    )
    with pytest.raises(PreconditionError):
        nr.minimize_tau(nr.TauConfig(n=21), even)


def test_tau_minimizer_small_grid():
    res = nr.minimize_tau(nr.TauConfig(n=41, max_iter=500))
    assert res.converged
    assert res.sign == "sign-changing"
    assert res.diagonal_max <= 1e-12
    assert abs(res.pohozaev_residual) <= 1e-6 * res.psi
    assert res.lower_energy == pytest.approx(0.5 * res.energy, rel=1e-10)
    assert res.max_value == pytest.approx(-res.min_value, rel=1e-12)
    e = np.asarray(res.energy_history)
    assert np.all(np.diff(e) <= 1e-9 * e[0])


def test_k_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        nr.minimize_tau(nr.TauConfig(k1=2, k2=3, n=21))


def test_doubling_check_arithmetic():
    rep = nr.doubling_check(10.0, 9.7, 4.0, 3.97)
    assert rep.tau_error == pytest.approx(0.1)
    assert rep.radial_error == pytest.approx(0.01)
    assert rep.margin == pytest.approx(2.0)
    assert rep.passed
    assert not nr.doubling_check(8.05, 7.0, 4.0, 3.97).passed


def test_block_csv_roundtrip(grid, tmp_path):
    u = nr.BlockProfile(grid, _smooth_tau(grid))
    path = tmp_path / "block.csv"
    nr.write_block_csv(path, u)
    back = nr.read_block_csv(path, 2, 2)
    assert back.grid.n == grid.n and back.grid.R == grid.R
    assert np.array_equal(back.values, u.values)
