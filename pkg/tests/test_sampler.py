import numpy as np
import pytest
from scipy.special import ndtr

import schauderpath as sp
from schauderpath.sampler import _corrected_rho_z, _replica_rng


# ------------------------------------------------------------- marginal laws

def test_uniform_law_range_and_moments():
    rng = np.random.default_rng(100)
    x = sp.sample_law("uniform-sqrt3", rng, 10 ** 5)
    s3 = np.sqrt(3.0)
    assert np.all((x >= -s3) & (x <= s3))
    assert abs(x.mean()) < 3.0 / np.sqrt(len(x))              # sd = 1
    assert abs(x.var() - 1.0) < 3.0 * np.sqrt(0.8 / len(x))   # var of U^2 = 4/5


def test_three_point_law():
    rng = np.random.default_rng(101)
    x = sp.sample_law("threePoint", rng, 10 ** 5)
    s3 = np.sqrt(3.0)
    assert set(np.unique(x)) == {-s3, 0.0, s3}
    p_plus = np.mean(x == s3)
    p_minus = np.mean(x == -s3)
    assert p_plus == pytest.approx(1 / 6, abs=0.01)
    assert p_minus == pytest.approx(1 / 6, abs=0.01)
    assert np.mean(x ** 4) == pytest.approx(3.0, abs=0.1)     # normal fourth moment


@pytest.mark.parametrize("name", sp.LAW_NAMES)
def test_every_law_mean_zero_variance_one(name):
    rng = np.random.default_rng(abs(hash(name)) % 2 ** 31)
    x = sp.sample_law(name, rng, 10 ** 6)
    n = len(x)
    m4 = np.mean(x ** 4)
    assert abs(x.mean()) < 4.0 / np.sqrt(n)
    assert abs(x.var() - 1.0) < 4.0 * np.sqrt(max(m4 - 1.0, 0.1) / n)


def test_law_ppf_inverts_cdf():
    u = np.linspace(0.01, 0.99, 25)
    for name in ("uniform-sqrt3", "beta22", "betaHalfHalf"):
        x = sp.law_ppf(name, u)
        assert np.all(np.diff(x) > 0)
    with pytest.raises(ValueError):
        sp.law_ppf("threePoint", u)


def test_unknown_law_rejected():
    with pytest.raises(ValueError, match="unknown marginal law"):
        sp.MarginalSpec(law="cauchy")
    with pytest.raises(ValueError):
        sp.MarginalSpec(mixing={"even": "uniform-sqrt3"})


def test_mixed_spec_parity():
    spec = sp.MarginalSpec.mixed()
    assert spec.law_for_level(0) == "uniform-sqrt3"
    assert spec.law_for_level(1) == "standard-normal"
    assert spec.law_for_level(2) == "uniform-sqrt3"


# ------------------------------------------------------------- iid draws

def test_draw_iid_coeffs_shapes(basis10):
    field = sp.draw_iid_coeffs(sp.MarginalSpec.mixed(), basis10, seed=5)
    field.check_shape(basis10)
    # even levels uniform: bounded by sqrt(3)
    assert np.max(np.abs(field.levels[0])) <= np.sqrt(3.0)
    assert np.max(np.abs(field.levels[2])) <= np.sqrt(3.0)


def test_bernoulli_mask_keeps_or_zeroes():
    field = sp.deterministic_example_b(10)
    masked = sp.apply_bernoulli_mask(field, 0.5, seed=3)
    kept = zeroed = 0
    for a, b in zip(field.levels, masked.levels):
        same = b == a
        zero = b == 0.0
        assert np.all(same | zero)
        kept += int(np.sum(same & (a != 0)))
        zeroed += int(np.sum(zero & (a != 0)))
    total = kept + zeroed
    assert kept / total == pytest.approx(0.5, abs=0.05)


# ------------------------------------------------------------- copula draws

def test_correlated_normal_spec_matches_covariance():
    seq = sp.build_dyadic(1.0, 4)
    basis = sp.enumerate_supports(seq, 3)
    cov = sp.assemble_covariance(basis, 0.25)
    draws = np.empty((10 ** 4, cov.dim))
    sampler_cfg = sp.PathConfig(seed=50, depth=4, count=draws.shape[0], H=0.25)
    from schauderpath.sampler import _CopulaSampler, _copula_block
    sampler = _CopulaSampler(cov, sp.MarginalSpec(), False)
    for lo in range(0, draws.shape[0], 2000):
        hi = min(lo + 2000, draws.shape[0])
        block, _ = _copula_block(sampler_cfg, sampler, lo, hi)
        draws[lo:hi] = block
    emp = draws.T @ draws / draws.shape[0]
    n = draws.shape[0]
    for i in range(cov.dim):
        for j in range(cov.dim):
            se = np.sqrt((cov.matrix[i, i] * cov.matrix[j, j] + cov.matrix[i, j] ** 2) / n)
            assert abs(emp[i, j] - cov.matrix[i, j]) < 5 * se


def test_correlated_draw_beta_support_bound():
    seq = sp.build_dyadic(1.0, 5)
    basis = sp.enumerate_supports(seq, 4)
    cov = sp.assemble_covariance(basis, 0.5)
    field = sp.draw_correlated_coeffs(cov, sp.MarginalSpec(law="beta22"), seed=8)
    flat = field.flat()
    assert flat.size == basis.size
    assert np.max(np.abs(flat)) <= np.sqrt(20.0) / 2 + 1e-12  # beta22 support bound


def test_uniform_pair_pearson_correction():
    # closed form rho_z = 2 sin(pi rho / 6); corrected empirical Pearson
    # correlation of the transformed pair returns the target
    rho_z, bad = _corrected_rho_z("uniform-sqrt3", "uniform-sqrt3", np.array([0.5]))
    assert not bad.any()
    assert rho_z[0] == pytest.approx(2 * np.sin(np.pi * 0.5 / 6), rel=1e-12)
    g = np.random.default_rng(60)
    z1 = g.standard_normal(10 ** 5)
    z2 = rho_z[0] * z1 + np.sqrt(1 - rho_z[0] ** 2) * g.standard_normal(10 ** 5)
    u1 = sp.law_ppf("uniform-sqrt3", ndtr(z1))
    u2 = sp.law_ppf("uniform-sqrt3", ndtr(z2))
    assert np.corrcoef(u1, u2)[0, 1] == pytest.approx(0.5, abs=0.01)


def test_beta_pair_correction_via_quadrature_table():
    rho_z, bad = _corrected_rho_z("beta22", "beta22", np.array([-0.4, 0.2, 0.7]))
    assert not bad.any()
    g = np.random.default_rng(61)
    for target, rz in zip((-0.4, 0.2, 0.7), rho_z):
        z1 = g.standard_normal(10 ** 5)
        z2 = rz * z1 + np.sqrt(1 - rz ** 2) * g.standard_normal(10 ** 5)
        b1 = sp.law_ppf("beta22", ndtr(z1))
        b2 = sp.law_ppf("beta22", ndtr(z2))
        assert np.corrcoef(b1, b2)[0, 1] == pytest.approx(target, abs=0.015)


def test_three_point_rejected_in_copula_mode():
    seq = sp.build_dyadic(1.0, 4)
    basis = sp.enumerate_supports(seq, 3)
    cov = sp.assemble_covariance(basis, 0.25)
    with pytest.raises(ValueError, match="discrete"):
        sp.draw_correlated_coeffs(cov, sp.MarginalSpec(law="threePoint"), seed=1)


# ------------------------------------------------------------- ensembles

def test_fake_bm_reproducible_bitwise():
    cfg = sp.PathConfig(seed=7, depth=10, count=4, marginal=sp.MarginalSpec(law="beta22"))
    a = sp.fake_bm_paths(cfg)
    b = sp.fake_bm_paths(cfg)
    assert np.array_equal(a.values, b.values)
    assert a.manifest["seed"] == 7


def test_fake_bm_bridge_endpoints():
    cfg = sp.PathConfig(seed=9, depth=8, count=6)
    ens = sp.fake_bm_paths(cfg)
    assert np.all(ens.values[:, 0] == 0.0)
    assert np.all(ens.values[:, -1] == 0.0)


def test_fake_bm_with_endpoint_term():
    cfg = sp.PathConfig(seed=9, depth=8, count=2000, include_endpoint=True)
    ens = sp.fake_bm_paths(cfg)
    ends = ens.values[:, -1]
    assert abs(ends.mean()) < 3 / np.sqrt(len(ends))
    assert ends.var() == pytest.approx(1.0, abs=0.1)


def test_fbm_h_half_normal_spec_equals_bm():
    a = sp.fake_bm_paths(sp.PathConfig(seed=11, depth=7, count=3))
    b = sp.fake_fbm_paths(sp.PathConfig(seed=11, depth=7, count=3, H=0.5))
    assert np.array_equal(a.values, b.values)


def test_fbm_h_half_any_spec_independent_components():
    seq = sp.build_dyadic(1.0, 5)
    basis = sp.enumerate_supports(seq, 4)
    cov = sp.assemble_covariance(basis, 0.5)
    from schauderpath.sampler import _CopulaSampler
    sampler = _CopulaSampler(cov, sp.MarginalSpec(law="uniform-sqrt3"), False)
    assert np.array_equal(sampler.chol, np.eye(cov.dim))


def test_streaming_matches_full_paths():
    cfg = sp.PathConfig(seed=4, depth=9, count=32, marginal=sp.MarginalSpec.mixed(),
                        include_endpoint=True)
    full = sp.fake_bm_paths(cfg)
    t = np.array([0.125, 0.5, 0.8125])
    vals, _ = sp.sample_path_values(cfg, t)
    assert np.allclose(vals, full.values_at(t), rtol=0, atol=1e-12)


def test_streaming_matches_full_paths_fbm(basis12, cov12_h25):
    cfg = sp.PathConfig(seed=23, depth=12, count=8, H=0.25,
                        marginal=sp.MarginalSpec.mixed(), include_endpoint=True)
    full = sp.fake_fbm_paths(cfg, cov12_h25)
    t = np.array([0.25, 0.75])
    vals, _ = sp.sample_path_values(cfg, t, cov=cov12_h25)
    assert np.allclose(vals, full.values_at(t), rtol=0, atol=1e-12)


def test_fbm_manifest_records_jitter(cov12_h25):
    cfg = sp.PathConfig(seed=2, depth=12, count=2, H=0.25, include_endpoint=True)
    ens = sp.fake_fbm_paths(cfg, cov12_h25)
    assert "jitter" in ens.manifest
    assert ens.manifest["jitter"] == cov12_h25.jitter


def test_values_at_requires_grid_points():
    ens = sp.fake_bm_paths(sp.PathConfig(seed=1, depth=4, count=1))
    with pytest.raises(ValueError):
        ens.values_at(0.3)


def test_config_validation():
    with pytest.raises(ValueError):
        sp.PathConfig(seed=1, depth=0, count=1)
    with pytest.raises(ValueError):
        sp.PathConfig(seed=1, depth=4, count=0)
    with pytest.raises(ValueError):
        sp.PathConfig(seed=1, depth=4, count=1, H=1.5)
    with pytest.raises(ValueError):
        sp.PathConfig(seed=1, depth=4, count=1, kind="triadic")
    with pytest.raises(ValueError):
        sp.PathConfig(seed=1, depth=4, count=1, H=0.3, T=2.0)
    with pytest.raises(ValueError):
        sp.fake_bm_paths(sp.PathConfig(seed=1, depth=4, count=1, H=0.3))
    with pytest.raises(ValueError):
        sp.fake_fbm_paths(sp.PathConfig(seed=1, depth=4, count=1))


def test_replica_streams_differ():
    a = _replica_rng(5, 0).standard_normal(4)
    b = _replica_rng(5, 1).standard_normal(4)
    assert not np.allclose(a, b)


# ------------------------------------------------------------- deterministic fields

def test_example_a_level0_single_coefficient():
    field = sp.deterministic_example_a(0.2, 8)
    assert field.levels[0].tolist() == [1.0]
    assert field.levels[3].max() == pytest.approx(2.0 ** 0.6)


def test_example_a_eps_range():
    with pytest.raises(ValueError):
        sp.deterministic_example_a(0.4, 8)
    with pytest.raises(ValueError):
        sp.deterministic_example_a(0.0, 8)


def test_example_a_qv_vanishes():
    seq = sp.build_dyadic(1.0, 18)
    field = sp.deterministic_example_a(0.2, 18)
    assert sp.qv_from_coeffs_dyadic(field, seq, 18, 1.0) < 0.05


def test_example_b_nonzero_pattern():
    field = sp.deterministic_example_b(6)
    assert np.all(field.levels[0] == 0.0)
    assert field.levels[3].tolist()[0] == pytest.approx(np.sqrt(3))
    # k-multiples of m carry sqrt(m)
    m = 4
    arr = field.levels[m]
    assert np.all(arr[np.arange(0, 2 ** m, m)] == np.sqrt(m))
    mask = np.ones(2 ** m, dtype=bool)
    mask[np.arange(0, 2 ** m, m)] = False
    assert np.all(arr[mask] == 0.0)


def test_example_b_depth_check():
    with pytest.raises(ValueError):
        sp.deterministic_example_b(1)
