"""Noise sampling, moment functionals and stochastic integrals."""

import math

import numpy as np
import pytest
from scipy.stats import norm as gauss

from fracspde.errors import DomainError, ParameterError
from fracspde.kernels import TorusGrid
from fracspde.levy import (
    TRUNC_GAUSS_CUT,
    JumpPath,
    LevySpec,
    WhiteNoiseExpansion,
    moment_mp,
    quad_variation,
    sample_jump_path,
    sample_wiener_on_nodes,
    sample_wiener_path,
    stochastic_integral,
    trig_basis,
    white_noise_field,
)


class TestSampling:
    def test_identical_seed_bitwise_identical(self):
        spec = LevySpec(rate=5.0, law="uniform", scale=1.0, dim=2)
        a = sample_jump_path(spec, 2.0, seed=42, copy=3)
        b = sample_jump_path(spec, 2.0, seed=42, copy=3)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.jumps, b.jumps)

    def test_distinct_copies_differ(self):
        spec = LevySpec(rate=5.0, law="uniform")
        a = sample_jump_path(spec, 2.0, seed=42, copy=0)
        b = sample_jump_path(spec, 2.0, seed=42, copy=1)
        assert a.times.size != b.times.size or not np.array_equal(a.times, b.times)

    def test_poisson_count_mean(self):
        spec = LevySpec(rate=3.0, law="two_point")
        counts = np.array([
            sample_jump_path(spec, 2.0, seed=s).times.size for s in range(4000)
        ])
        se = counts.std() / math.sqrt(counts.size)
        assert abs(counts.mean() - 6.0) < 3.0 * se

    def test_martingale_mean_zero(self):
        spec = LevySpec(rate=4.0, law="trunc_gauss", scale=0.7)
        finals = np.array([
            sample_jump_path(spec, 1.0, seed=s).value(1.0)[0] for s in range(4000)
        ])
        se = finals.std() / math.sqrt(finals.size)
        assert abs(finals.mean()) < 3.0 * se

    def test_single_forced_jump_path(self):
        path = JumpPath(times=np.array([0.4]), jumps=np.array([[1.0]]),
                        horizon=1.0)
        t = np.array([0.0, 0.39, 0.4, 1.0])
        vals = path.value(t)[:, 0]
        assert np.array_equal(vals, [0.0, 0.0, 1.0, 1.0])

    def test_invalid_law_rejected(self):
        with pytest.raises(ParameterError):
            LevySpec(rate=1.0, law="cauchy")


class TestMoments:
    def test_two_point_any_order(self):
        spec = LevySpec(rate=4.0, law="two_point")
        for p in (2.0, 3.0, 4.0):
            assert moment_mp(spec, p) == pytest.approx(4.0 ** (1.0 / p))

    def test_two_point_order_scaling(self):
        lam = 2.7
        spec = LevySpec(rate=lam, law="two_point")
        assert moment_mp(spec, 2.0) == pytest.approx(lam**0.5)
        assert moment_mp(spec, 4.0) == pytest.approx(lam**0.25)

    def test_uniform_second_moment(self):
        # integral of z^2/2 over [-1,1] is 1/3
        spec = LevySpec(rate=1.0, law="uniform")
        assert moment_mp(spec, 2.0) == pytest.approx(math.sqrt(1.0 / 3.0))

    def test_uniform_vector_valued(self):
        spec = LevySpec(rate=1.0, law="uniform", dim=3)
        assert moment_mp(spec, 2.0) == pytest.approx(1.0)

    def test_cross_dimensional_quadrature_against_simulation(self):
        spec = LevySpec(rate=1.0, law="uniform", dim=2)
        got = moment_mp(spec, 3.0)
        rng = np.random.default_rng(0)
        z = rng.uniform(-1.0, 1.0, size=(400000, 2))
        mc = (np.linalg.norm(z, axis=1) ** 3).mean() ** (1.0 / 3.0)
        assert got == pytest.approx(mc, rel=5e-3)

    def test_truncated_gaussian_variance(self):
        spec = LevySpec(rate=1.0, law="trunc_gauss")
        c = TRUNC_GAUSS_CUT
        z = 2.0 * gauss.cdf(c) - 1.0
        ref = math.sqrt(1.0 - 2.0 * c * gauss.pdf(c) / z)
        assert moment_mp(spec, 2.0) == pytest.approx(ref, rel=1e-8)

    def test_order_below_two_rejected(self):
        with pytest.raises(DomainError):
            moment_mp(LevySpec(rate=1.0, law="uniform"), 1.0)


@pytest.fixture
def two_jump_path():
    return JumpPath(times=np.array([0.3, 0.7]),
                    jumps=np.array([[1.0], [-2.0]]), horizon=1.0)


class TestStochasticIntegral:
    def test_unit_integrand_reproduces_path(self, two_jump_path):
        nodes = np.linspace(0.0, 1.0, 11)
        t, v = stochastic_integral(np.ones(10), nodes, two_jump_path)
        assert v[-1] == pytest.approx(-1.0)
        assert v[np.searchsorted(t, 0.5)] == pytest.approx(1.0)

    def test_window_integrand(self, two_jump_path):
        nodes = np.linspace(0.0, 1.0, 11)
        h = np.where(nodes[:-1] >= 0.5, 1.0, 0.0)
        _, v = stochastic_integral(h, nodes, two_jump_path)
        assert v[-1] == pytest.approx(-2.0)

    def test_wiener_case_full_sum(self):
        path = sample_wiener_path(1.0, 64, 1, seed=5)
        nodes = np.linspace(0.0, 1.0, 65)
        _, v = stochastic_integral(np.ones(64), nodes, path)
        assert v[-1] == pytest.approx(path.increments[:, 0].sum(), abs=1e-14)

    def test_ito_isometry_jump_case(self):
        spec = LevySpec(rate=3.0, law="two_point")
        nodes = np.linspace(0.0, 1.0, 11)
        h = np.sin(nodes[:-1] * 2.0)
        sq = []
        for s in range(4000):
            path = sample_jump_path(spec, 1.0, seed=s)
            _, v = stochastic_integral(h, nodes, path)
            sq.append(v[-1] ** 2)
        sq = np.array(sq)
        target = float((h**2 * np.diff(nodes)).sum()) * 3.0  # |z| = 1, mass 3
        se = sq.std() / math.sqrt(sq.size)
        assert abs(sq.mean() - target) < 3.0 * se

    def test_moment_sum_inequality(self):
        # sum |a_k|^p <= (sum |a_k|^2)^(p/2) for p >= 2
        rng = np.random.default_rng(11)
        for p in (2.0, 3.0, 5.0):
            for _ in range(20):
                a = rng.normal(size=rng.integers(2, 40))
                assert (np.abs(a) ** p).sum() <= (a**2).sum() ** (p / 2.0) + 1e-12

    def test_supremum_moment_bound_single_constant(self):
        # E sup_s |sum_k M_s^k|^p <= C sum_r E |h^r|^p_{L_p([0,T]; l2)}
        # with one fitted constant across three integrand choices
        spec = LevySpec(rate=2.0, law="uniform", copies=3)
        nodes = np.linspace(0.0, 1.0, 17)
        p = 3.0
        h_choices = [
            np.ones((16, 3)),
            np.outer(np.sin(3 * nodes[:-1]) + 1.2, [1.0, 0.5, 0.25]),
            np.outer(np.where(nodes[:-1] > 0.5, 1.0, 0.0), [0.3, 1.0, 0.7]),
        ]
        lhs, rhs = [], []
        for h in h_choices:
            sups = []
            for s in range(600):
                paths = [sample_jump_path(spec, 1.0, seed=s, copy=k)
                         for k in range(3)]
                total_t = np.unique(np.concatenate(
                    [nodes] + [pp.times for pp in paths]))
                acc = np.zeros_like(total_t)
                for k, pp in enumerate(paths):
                    _, v = stochastic_integral(h[:, k], nodes, pp, total_t)
                    acc += v
                sups.append(np.abs(acc).max() ** p)
            lhs.append(np.mean(sups))
            l2 = np.sqrt((h**2).sum(axis=1))
            rhs.append(float((l2**p * np.diff(nodes)).sum()))
        ratios = np.array(lhs) / np.array(rhs)
        assert ratios.max() / ratios.min() < 10.0  # one constant fits all

    def test_mismatched_integrand_rejected(self, two_jump_path):
        with pytest.raises(DomainError):
            stochastic_integral(np.ones(5), np.linspace(0, 1, 11), two_jump_path)


class TestQuadVariation:
    def test_unit_integrand(self, two_jump_path):
        nodes = np.linspace(0.0, 1.0, 11)
        assert quad_variation(np.ones(10), nodes, two_jump_path, 1.0) == 5.0

    def test_zero_integrand(self, two_jump_path):
        nodes = np.linspace(0.0, 1.0, 11)
        assert quad_variation(np.zeros(10), nodes, two_jump_path, 1.0) == 0.0

    def test_window_excludes_first_jump(self, two_jump_path):
        nodes = np.linspace(0.0, 1.0, 11)
        h = np.where(nodes[:-1] >= 0.5, 1.0, 0.0)
        assert quad_variation(h, nodes, two_jump_path, 1.0) == 4.0


class TestPathCSV:
    def test_roundtrip(self, tmp_path):
        from fracspde.levy import paths_from_csv, paths_to_csv

        spec = LevySpec(rate=4.0, law="uniform", dim=2, copies=3)
        paths = [sample_jump_path(spec, 1.0, seed=9, copy=k) for k in range(3)]
        f = tmp_path / "paths.csv"
        paths_to_csv(f, paths)
        header = f.read_text().splitlines()[0]
        assert header == "k,time,z_1,z_2"
        back = paths_from_csv(f)
        assert len(back) == sum(1 for p in paths if p.times.size)
        got = np.concatenate([p.jumps for p in back])
        want = np.concatenate([p.jumps for p in paths if p.times.size])
        assert np.array_equal(got, want)


class TestWhiteNoise:
    def test_basis_orthonormal(self):
        grid = TorusGrid(2, 16, 2.0 * math.pi)
        basis = trig_basis(grid, 9)
        gram = np.einsum("ax,bx->ab", basis.reshape(9, -1),
                         basis.reshape(9, -1)) * grid.cell_volume
        assert np.abs(gram - np.eye(9)).max() < 1e-12

    def test_first_basis_function_projects_to_its_path(self):
        grid = TorusGrid(1, 32, 2.0 * math.pi)
        spec = LevySpec(rate=4.0, law="uniform")
        wn = white_noise_field(spec, 4, grid, 1.0, seed=11)
        nodes = np.linspace(0.0, 1.0, 11)
        x_vals = np.repeat(wn.basis[2][None], 10, axis=0)
        got = wn.integrate(x_vals, nodes, 1.0)
        assert got == pytest.approx(wn.paths[2].value(1.0)[0], abs=1e-12)

    def test_orthogonal_test_function_gives_zero(self):
        grid = TorusGrid(1, 32, 2.0 * math.pi)
        spec = LevySpec(rate=4.0, law="uniform")
        full = white_noise_field(spec, 5, grid, 1.0, seed=11)
        truncated = WhiteNoiseExpansion(grid=grid, basis=full.basis[:3],
                                        paths=full.paths[:3])
        nodes = np.linspace(0.0, 1.0, 11)
        x_vals = np.repeat(full.basis[4][None], 10, axis=0)
        assert abs(truncated.integrate(x_vals, nodes, 1.0)) < 1e-12

    def test_two_copies_forced_jumps_hand_sum(self):
        grid = TorusGrid(1, 16, 2.0 * math.pi)
        basis = trig_basis(grid, 2)
        paths = [
            JumpPath(times=np.array([0.25]), jumps=np.array([[2.0]]), horizon=1.0),
            JumpPath(times=np.array([0.75]), jumps=np.array([[-1.0]]), horizon=1.0),
        ]
        wn = WhiteNoiseExpansion(grid=grid, basis=basis, paths=paths)
        nodes = np.linspace(0.0, 1.0, 5)
        x_field = basis[0] + 3.0 * basis[1]
        x_vals = np.repeat(x_field[None], 4, axis=0)
        # coefficients against eta_1, eta_2 are 1 and 3: total = 1*2 + 3*(-1)
        assert wn.integrate(x_vals, nodes, 1.0) == pytest.approx(-1.0, abs=1e-12)
