import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from airypng.png_sim import (PngConfig, HeightField, png_step, simulate,
                             sample_geometric, geometric_from_uniform,
                             replica_generator, last_passage_G,
                             last_passage_table, last_passage_batch,
                             coupling_check, coupling_check_detail,
                             noise_from_lpp, rescale_H, evolve_batch_heights,
                             d_scaling, growth_speed, active_sites)
from airypng.errors import DomainError

from oracles import lpp_bruteforce, geometric_pmf


def test_config_validation():
    with pytest.raises(DomainError):
        PngConfig(q=1.0, n_steps=4, seed=0)
    with pytest.raises(DomainError):
        PngConfig(q=0.5, n_steps=0, seed=0)


def test_geometric_mean_and_mass():
    rng = replica_generator(42, 0, 0)
    draws = geometric_from_uniform(rng.random(10 ** 6), 0.5)
    assert draws.mean() == pytest.approx(1.0, abs=0.01)
    assert np.mean(draws == 0) == pytest.approx(0.5, abs=0.005)


def test_geometric_chi_square_gof():
    from scipy.stats import chi2
    q = 0.3
    n = 10 ** 6
    rng = replica_generator(7, 0, 0)
    draws = geometric_from_uniform(rng.random(n), q)
    kmax = 20
    observed = np.bincount(np.minimum(draws, kmax), minlength=kmax + 1)
    probs = np.append(geometric_pmf(q, np.arange(kmax)), q ** kmax)
    expected = n * probs
    # pool right-tail bins until every expected count is >= 5
    while expected[-1] < 5.0 and len(expected) > 2:
        expected = np.append(expected[:-2], expected[-2] + expected[-1])
        observed = np.append(observed[:-2], observed[-2] + observed[-1])
    stat = float(np.sum((observed - expected) ** 2 / expected))
    p_value = float(chi2.sf(stat, df=len(expected) - 1))
    assert p_value > 0.001


def test_scalar_sampler():
    rng = replica_generator(1, 0, 0)
    vals = [sample_geometric(0.5, rng) for _ in range(2000)]
    assert min(vals) >= 0
    assert np.mean(vals) == pytest.approx(1.0, abs=0.12)


def test_first_step_single_block():
    rng = replica_generator(5, 0, 0)
    field = png_step(HeightField.flat(), rng, 0.25)
    assert field.t == 1
    assert field.heights.shape == (3,)
    assert field.heights[0] == field.heights[2] == 0
    # the single active site at time 1 carries the whole increment
    assert field.heights[1] >= 0


def test_zero_noise_stays_flat():
    field = HeightField.flat()
    for s in range(1, 8):
        field = png_step(field, None, 0.25,
                         noise=np.zeros(s, dtype=np.int64))
    assert np.all(field.heights == 0)


def test_replay_determinism():
    a = simulate(PngConfig(q=0.25, n_steps=25, seed=99, log_noise=True))
    b = simulate(PngConfig(q=0.25, n_steps=25, seed=99, log_noise=True))
    assert np.array_equal(a.heights, b.heights)
    assert all(np.array_equal(x, y) for x, y in zip(a.noise_log, b.noise_log))


def test_growth_cone_and_monotonicity():
    rng = replica_generator(3, 0, 0)
    field = HeightField.flat(log_noise=True)
    prev = None
    for s in range(1, 30):
        field = png_step(field, rng, 0.4)
        t = field.t
        h = field.heights
        assert np.all(h >= 0)
        if prev is not None:
            # pointwise nondecreasing on the common support
            assert np.all(h[1:-1] >= prev)
        prev = h.copy()
    for s, noise in enumerate(field.noise_log, start=1):
        assert noise.shape == (s,)
        assert np.all(active_sites(s) == np.arange(-(s - 1), s, 2))


def test_active_sites_parity():
    for s in (1, 2, 5, 10):
        xs = active_sites(s)
        assert np.all(np.abs(xs) <= s - 1)
        assert np.all((s - xs) % 2 == 1)


# ---------------------------------------------------------------------------
# Last-passage percolation.
# ---------------------------------------------------------------------------

def test_lpp_field_recurrence():
    from airypng.png_sim import lpp_field
    rng = np.random.default_rng(8)
    fld = lpp_field(rng.integers(0, 5, (4, 4)))
    assert fld.g[0, 0] == fld.w[0, 0]
    assert fld.g[3, 3] == fld.w[3, 3] + max(fld.g[2, 3], fld.g[3, 2])


def test_lpp_single_cell():
    w = np.array([[7]])
    assert last_passage_G(1, 1, w) == 7


def test_lpp_all_ones():
    w = np.ones((4, 6), dtype=int)
    assert last_passage_G(4, 6, w) == 4 + 6 - 1


def test_lpp_against_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(25):
        w = rng.integers(0, 7, (3, 3))
        assert last_passage_G(3, 3, w) == lpp_bruteforce(w)
    for _ in range(5):
        w = rng.integers(0, 5, (4, 5))
        assert last_passage_G(4, 5, w) == lpp_bruteforce(w)


def test_lpp_batch_matches_single():
    rng = np.random.default_rng(1)
    w = rng.integers(0, 9, (16, 3, 3))
    batch = last_passage_batch(w)
    singles = [last_passage_G(3, 3, wi) for wi in w]
    assert np.array_equal(batch, np.array(singles))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_lpp_table_recurrence(seed):
    rng = np.random.default_rng(seed)
    w = rng.integers(0, 6, (5, 4))
    g = last_passage_table(w)
    for i in range(5):
        for j in range(4):
            up = g[i - 1, j] if i else 0
            left = g[i, j - 1] if j else 0
            assert g[i, j] == w[i, j] + max(up, left)


# ---------------------------------------------------------------------------
# The exact coupling.
# ---------------------------------------------------------------------------

def test_coupling_n1():
    ok, viol = coupling_check_detail(0, 1)
    assert ok and viol is None


def test_coupling_medium():
    assert all(coupling_check(seed, 50) for seed in range(200))


def test_coupling_large():
    assert all(coupling_check(seed, 200) for seed in range(10))


def test_coupling_sensitivity_to_corruption():
    # corrupting one noise entry at the last step must break the identity
    # at the cell fed by that entry
    rng = replica_generator(12, 1, 0)
    N = 12
    w = geometric_from_uniform(rng.random((N, N)), 0.25)
    g = last_passage_table(w)
    field = HeightField.flat()
    last = 2 * N - 1
    for s in range(1, last + 1):
        noise = noise_from_lpp(w, s)
        if s == last:
            noise = noise.copy()
            noise[N - 1] += 1  # position x = 0, i.e. the (N, N) cell
        field = png_step(field, None, 0.25, noise=noise)
    assert field.heights[0 + field.t] == g[N - 1, N - 1] + 1


def test_coupling_size_domain():
    with pytest.raises(DomainError):
        coupling_check(0, 500)


# ---------------------------------------------------------------------------
# Rescaling.
# ---------------------------------------------------------------------------

def test_scaling_constants():
    assert d_scaling(0.25) == pytest.approx(2 * 0.75 ** (1 / 3), abs=1e-12)
    assert d_scaling(0.25) == pytest.approx(1.8171, abs=1e-4)
    assert growth_speed(0.25) == pytest.approx(2.0, abs=1e-15)


def test_rescale_interpolation_midpoint():
    field = simulate(PngConfig(q=0.25, n_steps=2 * 12 - 1, seed=4))
    from airypng.png_sim import space_scale
    scale = space_scale(0.25) * 12 ** (2.0 / 3.0)
    t_site = 3.0 / scale      # lands exactly on x = 3
    t_half = 3.5 / scale
    h_site = rescale_H(field, t_site, 0.25)
    h_next = rescale_H(field, (4.0 - 1e-12) / scale, 0.25)
    h_half = rescale_H(field, t_half, 0.25)
    assert h_half == pytest.approx(0.5 * (h_site + h_next), abs=1e-6)


def test_rescale_out_of_cone():
    field = simulate(PngConfig(q=0.25, n_steps=2 * 4 - 1, seed=4))
    with pytest.raises(DomainError):
        rescale_H(field, 50.0, 0.25)


def test_rescale_needs_odd_time():
    field = HeightField(t=4, heights=np.zeros(9, dtype=np.int64))
    with pytest.raises(DomainError):
        rescale_H(field, 0.0, 0.25)


# ---------------------------------------------------------------------------
# Batched evolution.
# ---------------------------------------------------------------------------

def test_batch_matches_sequential():
    q, T = 0.25, 23
    gen = replica_generator(99, 5, 3)
    field = HeightField.flat()
    for _ in range(T):
        field = png_step(field, gen, q)
    batch = evolve_batch_heights(q, T, 99, 5, [3], list(range(-T, T + 1)))
    assert np.array_equal(batch[0], field.heights)


def test_batch_grouping_invariance():
    q, T = 0.25, 15
    whole = evolve_batch_heights(q, T, 7, 11, list(range(10)), [0, 2])
    parts = np.concatenate([
        evolve_batch_heights(q, T, 7, 11, [r], [0, 2]) for r in range(10)])
    assert np.array_equal(whole, parts)


def test_batch_position_domain():
    with pytest.raises(DomainError):
        evolve_batch_heights(0.25, 5, 0, 0, [0], [9])
