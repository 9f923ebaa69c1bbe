import numpy as np
import pytest

from signretrieval.simulation import (
    GLOBAL_PHASE,
    GLOBAL_PHASE_REFLECTION,
    SIGN,
    Layout,
    MonteCarloConfig,
    NoiseConfig,
    TrialReport,
    aggregate,
    aggregate_csv,
    apply_noise,
    gen_real_spectrum_signal,
    gen_separated_pair,
    joint_mse,
    monte_carlo,
    mse,
    reports_jsonl,
    sign_errors,
    trial_seed,
)
from signretrieval.spectral import count_sign_changes, idft, is_conjugate_symmetric, sign_of_real_spectrum


def test_real_spectrum_signal():
    f, F = gen_real_spectrum_signal(64, 12, 7)
    assert is_conjugate_symmetric(f)
    assert np.linalg.norm(F) == pytest.approx(1.0)
    assert np.max(np.abs(idft(f).imag)) <= 1e-12 * np.linalg.norm(F)
    assert np.count_nonzero(f) == 13
    assert count_sign_changes(sign_of_real_spectrum(F)) <= 12


def test_real_spectrum_signal_tau_zero():
    f, F = gen_real_spectrum_signal(16, 0, 1)
    assert np.count_nonzero(f) == 1
    np.testing.assert_allclose(np.abs(F), 1 / 4)


def test_generators_are_deterministic():
    a = gen_real_spectrum_signal(32, 6, 3)
    b = gen_real_spectrum_signal(32, 6, 3)
    c = gen_real_spectrum_signal(32, 6, 4)
    np.testing.assert_array_equal(a[0], b[0])
    assert not np.array_equal(a[0], c[0])


def test_separated_pair_layout():
    f, f1, f2, layout = gen_separated_pair(500, 50, 51, 50, 0)
    assert layout.total == 151
    np.testing.assert_array_equal(f, f1 + f2)
    support = np.flatnonzero(np.abs(f) > 0)
    assert len(support) == 100
    # centred: the reflection that fixes the layout is k -> -k
    assert layout.reflection_center(500) == 0
    _, _, f2, _ = gen_separated_pair(64, 5, 6, 0, 0)
    assert not np.any(f2)
    with pytest.raises(ValueError):
        gen_separated_pair(64, 5, 5, 3, 0)


def test_noise_free_is_exact():
    _, F = gen_real_spectrum_signal(32, 6, 0)
    np.testing.assert_array_equal(apply_noise(F, NoiseConfig(0.0, 5)), F**2)


def test_noise_is_seeded():
    _, F = gen_real_spectrum_signal(32, 6, 0)
    a = apply_noise(F, NoiseConfig(0.1, 5))
    np.testing.assert_array_equal(a, apply_noise(F, NoiseConfig(0.1, 5)))
    assert not np.array_equal(a, apply_noise(F, NoiseConfig(0.1, 6)))
    with pytest.raises(ValueError):
        NoiseConfig(-1.0)


def test_noise_calibration():
    # the real part of eta along any fixed phase has variance 1/2
    n, sigma = 100_000, 1.0
    F = np.full(n, 1e6)
    eta = (np.sqrt(apply_noise(F, NoiseConfig(sigma, 11))) - F) * np.sqrt(n) / sigma
    assert abs(np.mean(eta)) < 0.01
    assert np.var(eta) == pytest.approx(0.5, rel=0.03)


def test_mse_examples():
    rng = np.random.default_rng(0)
    f = rng.normal(size=16) + 1j * rng.normal(size=16)
    assert mse(-f, f, SIGN) == 0
    assert mse(1j * f, f, GLOBAL_PHASE) < 1e-28
    for mode in (SIGN, GLOBAL_PHASE):
        assert mse(np.zeros(16), f, mode) == pytest.approx(np.sum(np.abs(f) ** 2))
    with pytest.raises(ValueError):
        mse(f[:3], f)
    with pytest.raises(ValueError):
        mse(f, f, "bogus")


def test_mse_global_phase_against_grid():
    rng = np.random.default_rng(1)
    for _ in range(5):
        f = rng.normal(size=20) + 1j * rng.normal(size=20)
        g = f + 0.3 * (rng.normal(size=20) + 1j * rng.normal(size=20))
        def cost(theta):
            return np.sum(np.abs(np.exp(1j * theta)[:, None] * g - f) ** 2, axis=1)

        theta = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
        best = theta[np.argmin(cost(theta))]
        step = theta[1]
        grid = cost(np.linspace(best - step, best + step, 10_001)).min()
        closed = np.sum(np.abs(g) ** 2) + np.sum(np.abs(f) ** 2) - 2 * np.abs(np.vdot(g, f))
        assert mse(g, f, GLOBAL_PHASE) == pytest.approx(closed, rel=1e-12)
        assert mse(g, f, GLOBAL_PHASE) == pytest.approx(grid, abs=1e-9)
        assert mse(g, f, GLOBAL_PHASE) <= grid + 1e-12


def test_mse_reflection():
    f = np.array([1, 2 + 1j, 0, 0, 0, 3 - 2j], dtype=complex)
    refl = np.conj(f[(-np.arange(6)) % 6])
    assert mse(refl, f, GLOBAL_PHASE) > 1
    assert mse(refl * 1j, f, GLOBAL_PHASE_REFLECTION) < 1e-28
    shifted = np.conj(f[(1 - np.arange(6)) % 6])
    assert mse(shifted, f, GLOBAL_PHASE_REFLECTION, center=1) < 1e-28
    assert joint_mse([refl, 2 * refl], [f, 2 * f]) < 1e-28
    assert joint_mse([refl, 2 * refl], [f, 2 * f], reflection=False) > 1


def test_sign_errors():
    s = np.array([1, 1, -1, -1])
    assert sign_errors(-s, s) == 0
    assert sign_errors(np.array([1, -1, -1, -1]), s) == 1


def test_trial_seed_independent_of_order():
    seeds = {trial_seed(0, i, t) for i in range(3) for t in range(50)}
    assert len(seeds) == 150
    assert trial_seed(7, 1, 2) == trial_seed(7, 1, 2)


def test_monte_carlo_noise_free_sign():
    reports = monte_carlo(MonteCarloConfig(n=64, tau=12, sigma_list=[0.0], trials=1, seed=0))
    (r,) = reports
    assert isinstance(r, TrialReport)
    assert r.sign_errors == 0
    assert r.mse <= 1e-20


def test_monte_carlo_trend_and_determinism():
    cfg = MonteCarloConfig(n=100, tau=20, sigma_list=[1e-4, 1e-3, 1e-2], trials=20, seed=3)
    a = monte_carlo(cfg)
    means = [row["mean_mse"] for row in aggregate(a)]
    assert means == sorted(means)
    assert aggregate_csv(a) == aggregate_csv(monte_carlo(cfg, threads=3))
    assert reports_jsonl(a) == reports_jsonl(monte_carlo(cfg))
    assert aggregate_csv(a).splitlines()[0] == "sigma,mean_mse,median_mse,mean_sign_errors,trials"


@pytest.mark.parametrize("task, kw", [("vpr3", {}), ("separated", {"len1": 12, "gap": 14, "len2": 12})])
def test_monte_carlo_other_tasks(task, kw):
    cfg = MonteCarloConfig(n=128, tau=20, sigma_list=[0.0], trials=2, task=task, seed=1, **kw)
    for r in monte_carlo(cfg):
        assert r.mse <= 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        MonteCarloConfig(task="nope")
    with pytest.raises(ValueError):
        MonteCarloConfig(trials=0)
    with pytest.raises(ValueError):
        MonteCarloConfig.from_dict({"n": 10, "extra": 1})
    assert MonteCarloConfig.from_dict({"n": 10, "tau": 2}).n == 10
    assert Layout(1, 2, 1).total == 4
