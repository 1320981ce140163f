import math

import numpy as np
import pytest

from airypng.harness import (PngExperimentPlan, run_png_brownian_experiment,
                             run_airy_brownian_experiment, ks_distance,
                             gaussian_window_integral)
from airypng.errors import DomainError, InsufficientDataError

from oracles import gaussian_window_mass


SMALL_PLAN = dict(q=0.25, N=32, gamma=1.0 / 3.0, tau1=0.0, s_gaps=(1.0,),
                  windows=((-1.0, 1.0),), replicas=20_000, master_seed=777,
                  pilot_replicas=4000)


def test_plan_validation():
    with pytest.raises(DomainError):
        PngExperimentPlan(**{**SMALL_PLAN, "gamma": 0.7})
    with pytest.raises(DomainError):
        PngExperimentPlan(**{**SMALL_PLAN, "replicas": 100})
    with pytest.raises(DomainError):
        PngExperimentPlan(**{**SMALL_PLAN, "windows": ((1.0, -1.0),)})
    with pytest.raises(DomainError):
        PngExperimentPlan(**{**SMALL_PLAN, "s_gaps": ()})


def test_gaussian_window_integral_single():
    assert gaussian_window_integral([1.0], [(-1.0, 1.0)]) == pytest.approx(
        gaussian_window_mass(1.0, -1.0, 1.0), abs=1e-14)
    assert gaussian_window_integral([1.0], [(-1.0, 1.0)]) == pytest.approx(
        0.5204998778, abs=1e-9)


def test_gaussian_window_integral_two_steps():
    val = gaussian_window_integral([1.0, 1.0], [(-1.0, 1.0), (-1.0, 1.0)])
    # chained steps through symmetric windows; slightly below the product
    product = gaussian_window_mass(1.0, -1.0, 1.0) ** 2
    assert 0.20 < val < product
    wide = gaussian_window_integral([1.0, 1.0],
                                    [(-30.0, 30.0), (-1.0, 1.0)])
    assert wide == pytest.approx(gaussian_window_mass(2.0, -1.0, 1.0),
                                 abs=1e-9)


def test_ks_distance_basics():
    n = 400
    quantiles = (np.arange(1, n + 1) - 0.5) / n
    assert ks_distance(quantiles, lambda s: s) <= 0.5 / n + 1e-12
    const = np.full(200, 0.37)
    assert ks_distance(const, lambda s: s) >= 0.5
    with pytest.raises(DomainError):
        ks_distance(np.zeros(50), lambda s: s)


def test_ks_distance_critical_value():
    rng = np.random.default_rng(123)
    n = 2000
    samples = rng.random(n)
    assert ks_distance(samples, lambda s: min(max(s, 0.0), 1.0)) \
        < 1.63 / math.sqrt(n)


def test_png_experiment_report_shape():
    rep = run_png_brownian_experiment(PngExperimentPlan(**SMALL_PLAN))
    assert rep.conditioned_count >= 500
    assert 0.0 <= rep.joint_estimate <= 1.0
    assert rep.joint_standard_error > 0.0
    assert len(rep.estimates) == 1
    entry = rep.estimates[0]
    assert entry["standard_error"] == pytest.approx(
        math.sqrt(entry["estimate"] * (1 - entry["estimate"])
                  / rep.conditioned_count), rel=1e-9)
    assert rep.lattice["positions"][0] == 0
    assert 0.0 < rep.gaussian_target < 1.0
    assert rep.ks_distance < 0.25


def test_png_experiment_pure_function_of_plan():
    a = run_png_brownian_experiment(PngExperimentPlan(**SMALL_PLAN))
    b = run_png_brownian_experiment(
        PngExperimentPlan(**{**SMALL_PLAN, "workers": 2}))
    da = a.as_dict(include_timing=False)
    db = b.as_dict(include_timing=False)
    assert da == db


def test_png_experiment_window_covering_everything():
    plan = PngExperimentPlan(**{**SMALL_PLAN,
                                "windows": ((-40.0, 40.0),)})
    rep = run_png_brownian_experiment(plan)
    assert rep.joint_estimate == 1.0


def test_png_experiment_insufficient_data():
    plan = PngExperimentPlan(**{**SMALL_PLAN, "j1_override": 1_000_000})
    with pytest.raises(InsufficientDataError):
        run_png_brownian_experiment(plan)


def test_airy_experiment_rows_and_trend():
    table = run_airy_brownian_experiment(
        0.0, -1.0, [0.2, 0.1], [1.0], [(-1.0, 1.0)], n=96)
    assert len(table["rows"]) == 2
    assert table["gaussian_target"] == pytest.approx(0.5205, abs=1e-4)
    assert table["trend_ok"]
    for row in table["rows"]:
        assert row.abs_error == abs(row.estimate - row.gaussian_target)


def test_airy_experiment_degenerate_window():
    table = run_airy_brownian_experiment(
        0.0, -1.0, [0.1], [1.0], [(0.4, 0.4)], n=96)
    assert table["rows"][0].estimate == pytest.approx(0.0, abs=1e-12)


def test_airy_experiment_two_step_product_target():
    table = run_airy_brownian_experiment(
        0.0, -1.0, [0.1], [1.0, 1.0], [(-1.0, 1.0), (-1.0, 1.0)], n=64)
    # target is the chained double integral, near but below 0.2709
    assert 0.20 <= table["gaussian_target"] <= 0.2709 + 1e-6
