from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caprag.cypher import CypherExecutionError, geodist_km
from caprag.cypher.geo import EARTH_RADIUS_KM

from oracles import geodist_oracle_km

lons = st.floats(-180.0, 180.0)
lats = st.floats(-90.0, 90.0)


def test_identical_points():
    assert geodist_km(10.18, 36.80, 10.18, 36.80) == 0.0


def test_antipodal_half_circumference():
    expected = math.pi * EARTH_RADIUS_KM  # 20015.086... km
    assert geodist_km(0.0, 0.0, 180.0, 0.0) == pytest.approx(expected, rel=1e-6)
    assert geodist_km(0.0, 0.0, 180.0, 0.0) == pytest.approx(20015.086, abs=5e-3)


def test_paris_london_matches_independent_oracle():
    got = geodist_km(2.3522, 48.8566, -0.1276, 51.5072)
    assert got == pytest.approx(geodist_oracle_km(2.3522, 48.8566, -0.1276, 51.5072), rel=1e-9)
    # Order-of-magnitude sanity: Paris-London is roughly 340 km.
    assert 300 < got < 400


def test_out_of_range_coordinates_rejected():
    with pytest.raises(CypherExecutionError):
        geodist_km(181.0, 0.0, 0.0, 0.0)
    with pytest.raises(CypherExecutionError):
        geodist_km(0.0, 91.0, 0.0, 0.0)
    with pytest.raises(CypherExecutionError):
        geodist_km(0.0, 0.0, -200.0, 0.0)


def test_oracle_agreement_random_pairs():
    rng = random.Random(77)
    for _ in range(500):
        lon1, lat1 = rng.uniform(-180, 180), rng.uniform(-90, 90)
        lon2, lat2 = rng.uniform(-180, 180), rng.uniform(-90, 90)
        got = geodist_km(lon1, lat1, lon2, lat2)
        want = geodist_oracle_km(lon1, lat1, lon2, lat2)
        assert math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)


@given(lons, lats, lons, lats)
@settings(max_examples=120, deadline=None)
def test_symmetry(lon1, lat1, lon2, lat2):
    assert geodist_km(lon1, lat1, lon2, lat2) == pytest.approx(
        geodist_km(lon2, lat2, lon1, lat1), abs=1e-12
    )


@given(lons, lats, lons, lats, lons, lats)
@settings(max_examples=120, deadline=None)
def test_triangle_inequality(lon1, lat1, lon2, lat2, lon3, lat3):
    ab = geodist_km(lon1, lat1, lon2, lat2)
    bc = geodist_km(lon2, lat2, lon3, lat3)
    ac = geodist_km(lon1, lat1, lon3, lat3)
    assert ac <= ab + bc + 1e-9
