"""Population generators and the end-to-end experiment harness."""

import math

import numpy as np
import pytest

from ldpgap.analytics import GroupProfile, PopulationProfile, mse_gap
from ldpgap.errors import DomainError
from ldpgap.mechanisms import EPS_CAP, Budget, MechanismSpec
from ldpgap.simulation import (
    ExperimentConfig,
    GeneratorSpec,
    chebyshev_comparison,
    generate,
    run_experiment,
)


def two_point(sizes, means, nu2s, **kw):
    return GeneratorSpec(mode="two_point", sizes=sizes, means=means, nu2s=nu2s, **kw)


# ------------------------------------------------------------------ generate


def test_generator_spec_validation():
    with pytest.raises(DomainError):
        GeneratorSpec(mode="gauss", sizes=(5, 5))
    with pytest.raises(DomainError):
        two_point((0, 5), (0.0, 0.0), (0.5, 0.5))
    with pytest.raises(DomainError):
        GeneratorSpec(mode="two_point", sizes=(5, 5))
    with pytest.raises(DomainError):
        GeneratorSpec(mode="constant", sizes=(5, 5))
    with pytest.raises(DomainError):
        GeneratorSpec(mode="resample", sizes=(5, 5))


def test_two_point_rademacher():
    pop = generate(two_point((10, 10), (0.0, 0.0), (1.0, 1.0)), seed=1)
    assert set(np.unique(pop.values)) == {-1.0, 1.0}
    assert pop.means() == (0.0, 0.0)
    assert pop.nu2s() == (1.0, 1.0)


def test_two_point_exact_moments_even_n():
    pop = generate(two_point((100, 40), (0.44, -0.18), (0.36, 0.1)), seed=0)
    m = pop.means()
    q = pop.nu2s()
    assert m[0] == pytest.approx(0.44, abs=1e-15)
    assert m[1] == pytest.approx(-0.18, abs=1e-15)
    assert q[0] == pytest.approx(0.36, abs=1e-15)
    assert q[1] == pytest.approx(0.1, abs=1e-15)


def test_two_point_odd_n_close():
    pop = generate(two_point((11, 11), (0.2, 0.0), (0.2, 0.5)), seed=0)
    assert pop.means()[0] == pytest.approx(0.2, abs=0.1)


def test_two_point_infeasible_pairs():
    with pytest.raises(DomainError):
        generate(two_point((4, 4), (0.9, 0.0), (0.5, 0.5)), seed=0)  # nu2 < mean^2
    with pytest.raises(DomainError):
        generate(two_point((4, 4), (0.8, 0.0), (0.9, 0.5)), seed=0)  # leaves [-1,1]


def test_constant_generator():
    spec = GeneratorSpec(mode="constant", sizes=(10, 5), values=(0.5, -0.25))
    pop = generate(spec, seed=3)
    assert pop.sizes == (10, 5)
    assert np.all(pop.values[:10] == 0.5)
    assert pop.nu2s() == (pytest.approx(0.25), pytest.approx(0.0625))


def test_resample_moments():
    seeds = ((0.2, 0.4, 0.6), (0.1, 0.3))
    spec = GeneratorSpec(mode="resample", sizes=(10**6, 1000), seed_values=seeds)
    pop = generate(spec, seed=11)
    vals = pop.group_values(0)
    assert set(np.unique(vals)) <= {0.2, 0.4, 0.6}
    n = len(vals)
    sd = math.sqrt(np.var([0.2, 0.4, 0.6]) / n)
    assert abs(vals.mean() - 0.4) <= 4 * sd
    nu2 = float((vals**2).mean())
    assert abs(nu2 - 0.56 / 3.0) <= 4 * math.sqrt(np.var([0.04, 0.16, 0.36]) / n)


def test_resample_deterministic():
    seeds = ((0.2, 0.4, 0.6), (0.1, 0.3))
    spec = GeneratorSpec(mode="resample", sizes=(50, 50), seed_values=seeds)
    a = generate(spec, seed=4)
    b = generate(spec, seed=4)
    assert np.array_equal(a.values, b.values)
    c = generate(spec, seed=5)
    assert not np.array_equal(a.values, c.values)


def test_rescale_mapping():
    # [0, 1] metrics map to [-1, 1]; moments specified in raw units
    spec = two_point((10, 10), (0.8901, 0.7177), (0.8901**2, 0.7177**2), rescale=True)
    pop = generate(spec, seed=0)
    assert pop.means()[0] == pytest.approx(2 * 0.8901 - 1, abs=1e-12)
    assert pop.means()[1] == pytest.approx(2 * 0.7177 - 1, abs=1e-12)
    spec = GeneratorSpec(
        mode="resample", sizes=(5, 5), seed_values=((0.5,), (1.0,)), rescale=True
    )
    pop = generate(spec, seed=0)
    assert np.all(pop.group_values(0) == 0.0)
    assert np.all(pop.group_values(1) == 1.0)


def test_group_labels_by_size():
    pop = generate(two_point((6, 4), (0.0, 0.0), (0.25, 0.25)), seed=0)
    assert pop.sizes == (6, 4)
    assert np.array_equal(pop.groups, np.array([0] * 6 + [1] * 4))


# ------------------------------------------------------------ run_experiment


def _config(mech, runs=2000, seed=17, **gen_kw):
    gen = two_point((10, 10), (0.44, -0.18), (0.36, 0.1), **gen_kw)
    return ExperimentConfig(generator=gen, mechanism=mech, runs=runs, seed=seed)


def test_identity_limit_laplace_zero_error():
    mech = MechanismSpec("l", Budget(EPS_CAP, EPS_CAP))
    res = run_experiment(_config(mech, runs=50))
    assert res.empirical_mse == 0.0
    assert res.mean_abs_error == 0.0
    assert res.true_gap == pytest.approx(0.62, abs=1e-12)


def test_identity_limit_r_discretization_only():
    # with a = b = 1 the only randomness left is the value discretization
    mech = MechanismSpec("r", Budget(EPS_CAP, EPS_CAP))
    res = run_experiment(_config(mech, runs=100000))
    assert res.theoretical_mse == pytest.approx(
        (1 - 0.36) / 10 + (1 - 0.1) / 10, rel=1e-12
    )
    assert abs(res.empirical_mse / res.theoretical_mse - 1.0) < 0.05


def test_experiment_reproducible_and_thread_invariant(mech_r):
    cfg = _config(mech_r, runs=400)
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    c = run_experiment(cfg, threads=2)
    assert a.empirical_mse == b.empirical_mse == c.empirical_mse
    assert a.empirical_bias == b.empirical_bias == c.empirical_bias
    assert a.empirical_group_cov == c.empirical_group_cov


def test_experiment_moments_against_theory(mech_r):
    cfg = _config(mech_r, runs=200000)
    res = run_experiment(cfg)
    pop = PopulationProfile(
        GroupProfile(10, 0.36, mean=0.44), GroupProfile(10, 0.1, mean=-0.18)
    )
    assert res.theoretical_mse == pytest.approx(mse_gap(pop, mech_r).point, rel=1e-12)
    assert abs(res.empirical_mse / res.theoretical_mse - 1.0) < 0.03
    # unbiasedness and zero covariance, 4 standard-error bands
    se_bias = math.sqrt(res.empirical_mse / res.runs)
    assert abs(res.empirical_bias) <= 4 * se_bias
    v0, v1 = res.empirical_group_vars
    se_cov = math.sqrt(v0 * v1 / res.runs)
    assert abs(res.empirical_group_cov) <= 4 * se_cov
    assert res.empirical_mse >= res.empirical_bias**2


def test_experiment_keep_estimates(mech_l):
    cfg = ExperimentConfig(
        generator=two_point((10, 10), (0.2, 0.0), (0.2, 0.3)),
        mechanism=mech_l,
        runs=25,
        seed=3,
        keep_estimates=True,
    )
    res = run_experiment(cfg)
    assert res.estimates.shape == (25,)
    assert res.group_estimates.shape == (25, 2)
    diffs = res.group_estimates[:, 0] - res.group_estimates[:, 1]
    assert np.allclose(diffs, res.estimates)


def test_experiment_rejects_nonbinary():
    with pytest.raises(DomainError):
        ExperimentConfig(
            generator=two_point((5, 5), (0.0, 0.0), (0.5, 0.5)),
            mechanism=MechanismSpec("r", Budget(1, 1), d=3),
            runs=10,
            seed=0,
        )
    with pytest.raises(DomainError):
        ExperimentConfig(
            generator=two_point((5, 5), (0.0, 0.0), (0.5, 0.5)),
            mechanism=MechanismSpec("r", Budget(1, 1)),
            runs=0,
            seed=0,
        )


def test_experiment_mean_abs_error_within_chebyshev(mech_l):
    # desk-scale version of the bound comparison: K = 2000, 10 runs
    gen = two_point((1000, 1000), (0.44, -0.18), (0.36, 0.1))
    cfg = ExperimentConfig(generator=gen, mechanism=mech_l, runs=10, seed=2)
    res = run_experiment(cfg)
    from ldpgap.analytics import chebyshev_alpha

    alpha = chebyshev_alpha(res.theoretical_mse, 0.99)
    assert res.mean_abs_error <= alpha


# ------------------------------------------------------ chebyshev_comparison


def test_chebyshev_comparison_rows():
    gen = two_point((500, 500), (0.44, -0.18), (0.36, 0.1))
    cfg = ExperimentConfig(
        generator=gen, mechanism=MechanismSpec("r", Budget(1, 1)), runs=20, seed=5
    )
    rows = chebyshev_comparison(cfg, [0.1, 1.0, 10.0])
    assert [r["eps"] for r in rows] == [0.1, 1.0, 10.0]
    for row in rows:
        assert row["mean_abs_error"] <= row["alpha"]
        assert row["abs_error_sd"] >= 0.0
    errs = [r["mean_abs_error"] for r in rows]
    assert errs[0] > errs[-1]  # error shrinks as the budget grows
    alphas = [r["alpha"] for r in rows]
    assert alphas == sorted(alphas, reverse=True)


def test_chebyshev_comparison_l_uses_optimal_allocation():
    gen = two_point((200, 200), (0.2, -0.2), (0.25, 0.25))
    cfg = ExperimentConfig(
        generator=gen, mechanism=MechanismSpec("l", Budget(1, 1)), runs=5, seed=9
    )
    rows = chebyshev_comparison(cfg, [0.5])
    from ldpgap.analytics import chebyshev_alpha, mechanism_for

    mech = mechanism_for("l-opt", 0.5)
    pop = PopulationProfile(GroupProfile(200, 1.0), GroupProfile(200, 1.0))
    assert rows[0]["alpha"] == pytest.approx(
        chebyshev_alpha(mse_gap(pop, mech).point, 0.99)
    )
