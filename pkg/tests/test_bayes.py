import numpy as np
import pytest

from qotomo.bayes import (
    PosteriorSampleSet,
    SamplerConfig,
    credible_interval,
    density_from_theta,
    estimate_full,
    estimate_pairs,
    gibbs_sample,
    interval_from_values,
    log_likelihood,
    log_prior,
    nearest_rank,
    physical_start,
    posterior_mean,
    theta_from_stokes,
)
from qotomo.core import (
    fidelity,
    pure_density,
    random_density,
    stokes_from_density,
    trace_distance,
)
from qotomo.exact import full_schedule, reconstruct_full
from qotomo.measurement import CountRecord, Dataset, exact_dataset
from qotomo.qot import qot_schedule
from qotomo.source import NoiseSpec, ghz_state, simulate_dataset


@pytest.fixture(scope="module")
def ghz_data():
    rho = pure_density(ghz_state(4))
    return rho, simulate_dataset(rho, full_schedule(4), NoiseSpec(2000, 0.005, 0))


@pytest.fixture(scope="module")
def ghz_chain(ghz_data):
    return estimate_full(ghz_data[1], SamplerConfig(seed=3, iterations=1500))


def test_log_likelihood_examples(rng):
    rho = random_density(2, rng)
    data = exact_dataset(rho, full_schedule(2), scale=10**9)
    assert log_likelihood(theta_from_stokes(stokes_from_density(rho)), data) == pytest.approx(0, abs=1e-6)
    one = [CountRecord("Z", [520, 480])]
    assert log_likelihood(np.zeros(3), one) == pytest.approx(-1.6)


def test_log_likelihood_decreases_along_ray(rng):
    for seed in range(10):
        r = np.random.default_rng(seed)
        rho = 0.7 * random_density(2, r) + 0.3 * np.eye(4) / 4
        data = exact_dataset(rho, full_schedule(2), scale=10**6)
        theta = theta_from_stokes(stokes_from_density(rho))
        d = r.normal(size=theta.shape)
        d /= np.linalg.norm(d)
        vals = [log_likelihood(theta + t * d, data) for t in (0, 0.005, 0.01, 0.02)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_log_likelihood_unphysical_and_mismatch():
    assert log_likelihood(np.array([0, 0, 1.5]), [CountRecord("Z", [5, 5])]) == -np.inf
    with pytest.raises(ValueError):
        log_likelihood(np.zeros(3), [CountRecord("ZZ", [1, 1, 1, 1])])


def test_log_prior_examples():
    t = np.array([0.3, -0.2])
    assert log_prior(t, t) == 0
    assert log_prior(np.array([0.6]), np.array([0.5])) == pytest.approx(-0.01)
    assert log_prior(np.array([0.1]), np.array([0.0]), sigma_floor=0.1) == pytest.approx(-0.05)


def test_no_move_limit():
    data = [CountRecord("Z", [40, 60]), CountRecord("X", [50, 50]), CountRecord("Y", [45, 55])]
    start = np.array([0.1, -0.05, -0.2])
    s = gibbs_sample(data, start, start, SamplerConfig(beta=1e-9, iterations=200))
    assert np.allclose(s.samples, start, atol=1e-7)


def test_exact_ghz_start_at_truth():
    rho = pure_density(ghz_state(4))
    data = exact_dataset(rho, full_schedule(4), scale=10**6)
    truth = theta_from_stokes(stokes_from_density(rho))
    dists = []
    for seed in range(10):
        s = gibbs_sample(data, truth, truth, SamplerConfig(seed=seed, iterations=2000))
        dists.append(trace_distance(posterior_mean(s), rho))
    assert np.percentile(dists, 95) < 0.02


def test_bme_beats_linear_inversion():
    rho = pure_density(ghz_state(4))
    wins = 0
    for seed in range(10):
        data = simulate_dataset(rho, full_schedule(4), NoiseSpec(2000, 0.005, 100 + seed))
        bme = fidelity(posterior_mean(estimate_full(data, SamplerConfig(seed=seed))), rho)
        wins += bme >= fidelity(reconstruct_full(data).physical, rho)
    assert wins >= 8


def test_nonphysical_start_rejected():
    with pytest.raises(ValueError, match="positive semidefinite"):
        gibbs_sample([CountRecord("Z", [1, 1])], np.zeros(3), np.array([0.0, 0.0, 1.2]))


def test_samples_physical_and_reproducible(ghz_data, ghz_chain):
    for theta in ghz_chain.retained[::25]:
        assert np.linalg.eigvalsh(density_from_theta(theta))[0] >= -1e-9
    again = estimate_full(ghz_data[1], SamplerConfig(seed=3, iterations=1500))
    assert np.array_equal(again.samples, ghz_chain.samples)
    assert again.acceptance_rate == ghz_chain.acceptance_rate
    other = estimate_full(ghz_data[1], SamplerConfig(seed=4, iterations=1500))
    assert not np.array_equal(other.samples, ghz_chain.samples)


def test_posterior_mean_examples():
    theta = theta_from_stokes(stokes_from_density(random_density(1, np.random.default_rng(1))))
    same = PosteriorSampleSet(1, np.tile(theta, (20, 1)), 0, 0.0)
    assert np.allclose(posterior_mean(same), density_from_theta(theta))
    hv = PosteriorSampleSet(1, np.array([[0, 0, 1.0], [0, 0, -1.0]]), 0, 0.0)
    assert np.allclose(posterior_mean(hv), np.eye(2) / 2)
    with pytest.raises(ValueError):
        PosteriorSampleSet(1, np.zeros((3, 3)), 3, 0.0)


def test_posterior_mean_linear_and_permutation_invariant(ghz_chain, rng):
    mean_theta = ghz_chain.retained.mean(axis=0)
    s = stokes_from_density(posterior_mean(ghz_chain)).reshape(-1)[1:]
    assert np.max(np.abs(s - mean_theta)) < 1e-9
    perm = rng.permutation(len(ghz_chain.retained))
    shuffled = PosteriorSampleSet(4, ghz_chain.retained[perm], 0, 0.0)
    assert np.allclose(posterior_mean(shuffled), posterior_mean(ghz_chain), atol=1e-12)


def test_credible_interval_examples(ghz_data, ghz_chain):
    lo, hi = credible_interval(ghz_chain, lambda r: 0.25)
    assert lo == hi == 0.25
    rho = ghz_data[0]
    lo, hi = credible_interval(ghz_chain, lambda r: fidelity(r, rho))
    vals = [fidelity(r, rho) for r in ghz_chain.densities()]
    assert lo <= np.mean(vals) <= hi
    v = np.random.default_rng(0).permutation(1000).astype(float)
    assert interval_from_values(v, 0.95) == (24.0, 974.0)
    assert nearest_rank(v, 0.5) == 499.0
    few = PosteriorSampleSet(1, np.zeros((9, 3)), 0, 0.0)
    with pytest.raises(ValueError, match="at least 10"):
        credible_interval(few, lambda r: 0.0)


def test_marginal_is_stokes_subtensor(ghz_chain):
    m = ghz_chain.marginal((1, 3))
    full = ghz_chain.stokes()
    assert np.allclose(m.stokes(), full[:, 0, :, 0, :])


def test_flat_posterior_matches_quadrature():
    """Single qubit, Z data only, flat prior: the z marginal is L(z)(1 - z^2)."""
    n = 20
    data = [CountRecord("Z", [n // 2, n // 2])]
    cfg = SamplerConfig(beta=4e-7, sigma_floor=1e6, iterations=50000, burn_in=0.02, seed=9)
    s = gibbs_sample(data, np.zeros(3), np.zeros(3), cfg)
    z = np.sort(s.retained[::5, 2])[:10000]
    grid = np.linspace(-1, 1, 20001)
    nbar = np.stack([n * (1 + grid) / 2, n * (1 - grid) / 2])
    loglik = -np.sum((nbar - n / 2) ** 2 / np.maximum(nbar, 0.5), axis=0)
    dens = np.exp(loglik) * (1 - grid**2)
    cdf = np.concatenate([[0], np.cumsum((dens[1:] + dens[:-1]) / 2)])
    cdf /= cdf[-1]
    emp_hi = np.arange(1, len(z) + 1) / len(z)
    model = np.interp(z, grid, cdf)
    ks = max(np.max(emp_hi - model), np.max(model - (emp_hi - 1 / len(z))))
    assert ks < 0.05


def test_physical_start_is_interior(ghz_data):
    from qotomo.exact import full_stokes

    theta = physical_start(full_stokes(ghz_data[1]))
    assert np.linalg.eigvalsh(density_from_theta(theta))[0] > 1e-4


def test_estimate_pairs_runs_per_pair(ghz_data):
    rho = ghz_data[0]
    data = simulate_dataset(rho, qot_schedule(4).settings, NoiseSpec(4000, 0.005, 1))
    out = estimate_pairs(data, SamplerConfig(beta=0.05, iterations=400, seed=1))
    assert sorted(out) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert all(s.n_qubits == 2 and s.samples.shape == (400, 15) for s in out.values())
    assert len({s.samples[-1].tobytes() for s in out.values()}) == 6


def test_sampler_config_validation():
    for bad in (dict(beta=0), dict(burn_in=1.0), dict(sigma_floor=-1), dict(iterations=0)):
        with pytest.raises(ValueError):
            SamplerConfig(**bad)


def test_dataset_input_accepted(ghz_data):
    sub = ghz_data[1].subset(["ZZZZ", "XXXX"])
    assert isinstance(sub, Dataset)
    theta = np.zeros(255)
    s = gibbs_sample(sub, theta, theta, SamplerConfig(iterations=5))
    assert s.samples.shape == (5, 255)
