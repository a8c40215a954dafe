import math
import os

import numpy as np
import pytest

from sos_bounds.errors import AnchorOutsideClosure, InvalidParameters, UnknownName
from sos_bounds.experiments import catalog
from sos_bounds.geoassume import (
    ball_volume,
    growth_exponent,
    load_region,
    local_volume,
    named_region,
    region_from_dict,
)

REGIONS = os.path.join(catalog.sample_data_dir(), "regions")


def test_ball_volume():
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(4 / 3 * math.pi * 8)
    assert ball_volume(1, 0.5) == pytest.approx(1.0)


def test_named_regions():
    cusp = named_region("example1")
    inside = np.array([[0.5, 0.1], [0.9, 0.8]])
    outside = np.array([[0.5, 0.3], [-0.1, 0.0], [0.5, -0.01]])
    assert cusp.contains(inside).all()
    assert not cusp.contains(outside).any()
    flat = named_region("example2")
    assert flat.contains(np.array([[0.5, 0.1]])).all()
    assert not flat.contains(np.array([[0.5, 0.2], [0.1, 0.001]])).any()
    assert named_region("box", 3).contains(np.zeros((1, 3))).all()
    with pytest.raises(UnknownName):
        named_region("simplex")


@pytest.mark.parametrize("name", ["example1", "example2"])
def test_region_files_match_named_regions(name):
    from_file = load_region(os.path.join(REGIONS, f"{name}.json"))
    rng = np.random.default_rng(3)
    pts = rng.uniform(-0.2, 1.2, size=(5000, 2))
    np.testing.assert_array_equal(from_file.contains(pts), named_region(name).contains(pts))
    assert from_file.name == name


def test_region_from_dict_errors():
    with pytest.raises(InvalidParameters):
        region_from_dict({"nvars": 2, "box": [[0, 1]], "constraints": []})
    with pytest.raises(InvalidParameters):
        region_from_dict({"nvars": 2, "constraints": []})
    with pytest.raises(InvalidParameters):
        load_region("no/such/region.json")


def test_local_volume_interior_point():
    est = local_volume(named_region("box", 2), [0.0, 0.0], 0.5, 10_000, seed=1)
    assert est.fraction == 1.0
    assert est.stderr == 0.0
    assert est.hits == est.samples == 10_000


def test_local_volume_is_reproducible():
    region = named_region("example1")
    a = local_volume(region, [0.5, 0.2], 0.1, 5_000, seed=7, batch_size=1_000)
    b = local_volume(region, [0.5, 0.2], 0.1, 5_000, seed=7, batch_size=1_000, workers=3)
    assert a == b
    assert 0 < a.fraction < 1


def test_local_volume_arguments():
    region = named_region("example1")
    with pytest.raises(InvalidParameters):
        local_volume(region, [0.5, 0.2], 0.0, 100, seed=0)
    with pytest.raises(InvalidParameters):
        local_volume(region, [0.5, 0.2], 0.1, 0, seed=0)
    with pytest.raises(InvalidParameters):
        local_volume(region, [2.0, 0.2], 0.1, 100, seed=0)
    with pytest.raises(InvalidParameters):
        local_volume(region, [0.5], 0.1, 100, seed=0)


def test_growth_exponent_of_interior_point_is_dimension():
    fit = growth_exponent(named_region("box", 2), [0.0, 0.0], [0.5, 0.25, 0.125], 2_000, seed=0)
    assert fit.exponent == pytest.approx(2.0, abs=1e-9)
    assert fit.eta == pytest.approx(1.0, rel=1e-9)
    assert all(fit.reliable)
    assert not fit.divergent
    assert fit.satisfies_fat_condition()
    assert fit.epsilon == 0.5
    assert len(fit.rows()) == 3


def test_polynomial_cusp_has_exponent_three():
    fit = growth_exponent(
        named_region("example1"), [0.0, 0.0], [0.2, 0.1, 0.05, 0.025], 200_000, seed=0
    )
    assert 2.6 <= fit.exponent <= 3.4
    assert all(fit.reliable)
    assert not fit.divergent
    assert not fit.satisfies_fat_condition()


def test_exponential_cusp_is_flagged_divergent():
    fit = growth_exponent(
        named_region("example2"), [0.0, 0.0], [0.8, 0.5, 0.3, 0.2, 0.15], 200_000, seed=0
    )
    assert fit.divergent
    assert list(fit.local_slopes) == sorted(fit.local_slopes)


def test_growth_exponent_errors():
    region = named_region("example1")
    with pytest.raises(InvalidParameters):
        growth_exponent(region, [0.0, 0.0], [0.2, 0.1], 1_000, seed=0)
    with pytest.raises(InvalidParameters):
        growth_exponent(region, [0.0, 0.0], [0.1, 0.2, 0.05], 1_000, seed=0)
    with pytest.raises(AnchorOutsideClosure):
        growth_exponent(region, [0.0, 1.0], [0.2, 0.1, 0.05], 1_000, seed=0)


@pytest.mark.long
def test_polynomial_cusp_with_a_million_samples():
    fit = growth_exponent(
        named_region("example1"), [0.0, 0.0], [0.2, 0.1, 0.05, 0.025], 10**6, seed=0, workers=4
    )
    assert 2.8 <= fit.exponent <= 3.2
    assert fit.residual < 0.05


@pytest.mark.parametrize("anchor, expected", [([1.0, 0.0], 0.5), ([1.0, 1.0], 0.25)])
def test_local_volume_on_the_boundary_of_the_box(anchor, expected):
    est = local_volume(named_region("box", 2), anchor, 0.01, 200_000, seed=4)
    assert abs(est.fraction - expected) <= 4 * math.sqrt(expected * (1 - expected) / est.samples)


def test_growth_exponent_on_a_facet_is_dimension():
    fit = growth_exponent(named_region("box", 2), [1.0, 0.0], [0.4, 0.2, 0.1, 0.05], 50_000, seed=2)
    assert fit.exponent == pytest.approx(2.0, abs=0.05)
    assert fit.eta == pytest.approx(0.5, abs=0.02)
    assert fit.satisfies_fat_condition()
