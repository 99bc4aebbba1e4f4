import numpy as np
import pytest

from ponderomotive.errors import NotAchievable
from ponderomotive.gaussian import CovarianceMatrix, log_negativity, tmsv
from ponderomotive.noise_mc import (
    CHUNK,
    McConfig,
    en_distribution,
    perturb_batch,
    perturb_cm,
    required_precision,
    standard_normals,
)


class TestPerturb:
    def test_zero_sigma_identity(self, golden):
        out = perturb_cm(golden, 0.0, np.random.default_rng(1))
        assert np.array_equal(out.entries, golden)

    def test_symmetric(self, golden):
        out = perturb_cm(golden, 0.01, np.random.default_rng(1))
        assert np.array_equal(out.entries, out.entries.T)
        assert not np.array_equal(out.entries, golden)

    def test_keeps_normalization(self):
        cm = CovarianceMatrix(np.eye(4), "vacuum_one")
        assert perturb_cm(cm, 0.1, np.zeros(10)).normalization is cm.normalization

    def test_entry_std(self, golden):
        z = standard_normals(3, 0, 100_000)
        draws = perturb_batch(golden, 0.01, z)
        iu = np.triu_indices(4)
        rel = np.std(draws[:, iu[0], iu[1]], axis=0) / (0.01 * np.abs(golden[iu]))
        assert np.all(np.abs(rel - 1) < 0.02)

    def test_absolute(self, golden):
        z = np.ones((1, 10))
        out = perturb_batch(golden, 0.5, z, absolute=True)[0]
        assert np.allclose(out - golden, 0.5)

    def test_zero_entries_use_diagonal_scale(self):
        V = np.eye(4)
        out = perturb_batch(V, 0.1, np.ones((1, 10)))[0]
        assert out[0, 1] == pytest.approx(0.1)


class TestDistribution:
    def test_sigma_zero(self, golden):
        res = en_distribution(golden, McConfig(0.0, samples=500))
        assert res.std_EN == 0.0
        assert res.mean_EN == log_negativity(golden)

    def test_seed_determinism(self, golden):
        mc = McConfig(1e-3, samples=5000, seed=11)
        assert en_distribution(golden, mc) == en_distribution(golden, mc)
        other = en_distribution(golden, McConfig(1e-3, samples=5000, seed=12))
        assert other != en_distribution(golden, mc)

    def test_workers_do_not_matter(self, golden):
        mc = McConfig(1e-3, samples=3 * CHUNK + 17, seed=5)
        a, da = en_distribution(golden, mc, workers=1, return_draws=True)
        b, db = en_distribution(golden, mc, workers=4, return_draws=True)
        assert a == b and np.array_equal(da, db)

    def test_prefix_stable(self, golden):
        _, a = en_distribution(golden, McConfig(1e-3, samples=CHUNK + 10), return_draws=True)
        _, b = en_distribution(golden, McConfig(1e-3, samples=2 * CHUNK), return_draws=True)
        assert np.array_equal(a, b[: a.size])

    def test_std_grows_with_sigma(self, golden):
        stds = [en_distribution(golden, McConfig(s, samples=4000)).std_EN for s in (1e-4, 1e-3, 1e-2)]
        assert stds[0] < stds[1] < stds[2]

    def test_converges(self, golden):
        a = en_distribution(golden, McConfig(1e-3, samples=10_000, seed=1)).std_EN
        b = en_distribution(golden, McConfig(1e-3, samples=40_000, seed=2)).std_EN
        assert a == pytest.approx(b, rel=0.05)

    def test_noise_swamps_at_one_percent(self, golden):
        res = en_distribution(golden, McConfig(1e-2, samples=10_000, seed=7))
        assert res.std_EN >= 2 * log_negativity(golden)
        assert 0 < res.clamped_fraction < 1

    def test_tenth_percent_feasible(self, golden):
        res = en_distribution(golden, McConfig(1e-3, samples=10_000, seed=7))
        assert res.std_EN <= log_negativity(golden)
        assert res.std_EN <= res.mean_EN
        assert res.ci67_low <= res.mean_EN <= res.ci67_high

    def test_config_validation(self):
        for bad in (dict(relative_sigma=-1), dict(relative_sigma=0.1, samples=0), dict(relative_sigma=0.1, seed=-1)):
            with pytest.raises(ValueError):
                McConfig(**bad)


class TestRequiredPrecision:
    def test_golden_band(self, golden):
        s = required_precision(golden, 1.0, samples=10_000)
        assert 5e-4 <= s <= 5e-3
        ratio = en_distribution(golden, McConfig(s, samples=10_000)).std_EN / log_negativity(golden)
        assert ratio == pytest.approx(1.0, rel=0.05)

    def test_huge_target_returns_upper_bracket(self, golden):
        assert required_precision(golden, 1e6, samples=2000) == 1e-1

    def test_unreachable(self, golden):
        with pytest.raises(NotAchievable):
            required_precision(golden, 1e-9, samples=2000)

    def test_needs_entanglement(self):
        with pytest.raises(ValueError):
            required_precision(CovarianceMatrix.vacuum(), 1.0)

    def test_tmsv_reasonable(self):
        s = required_precision(tmsv(1.0), 0.1, samples=4000)
        assert 1e-6 < s < 1e-1
