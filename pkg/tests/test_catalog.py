import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darboux_pairs.catalog import default_combinations, describe, get_entry, list_entries
from darboux_pairs.errors import ConfigError, UnknownEntry
from darboux_pairs.framing import frame_curve


def test_listing_is_sorted_and_complete():
    names = list_entries()
    assert names == sorted(names)
    assert set(names) == {"plane", "sphere", "cylinder", "torus", "helicoid"}
    assert [d["name"] for d in describe()] == names


def test_every_surface_has_a_curve_in_the_defaults():
    assert {e.name for e, _ in default_combinations()} == set(list_entries())


def test_unknown_surface():
    with pytest.raises(UnknownEntry) as info:
        get_entry("klein_bottle")
    assert info.value.exit_code == 2


def test_unknown_curve():
    with pytest.raises(UnknownEntry):
        get_entry("sphere").curve("loxodrome")


@pytest.mark.parametrize("name, params", [
    ("cylinder", {"a": -1.0}),
    ("torus", {"R": 0.5, "r": 1.0}),
    ("helicoid", {"c": 0.0}),
    ("sphere", {"radius": 2.0}),
    ("cylinder", {"a": math.inf}),
])
def test_bad_surface_parameters(name, params):
    with pytest.raises(ConfigError):
        get_entry(name, **params)


def test_bad_curve_parameter_name():
    with pytest.raises(ConfigError):
        get_entry("plane").curve("circle", r=2.0)


def _check(entry, cname, n=200, **params):
    fr = frame_curve(entry.patch, entry.curve(cname, **params), n)
    kg, kn, tg = entry.expected(cname, **params)(fr.t)
    return max(np.max(np.abs(fr.k_g - kg)), np.max(np.abs(fr.k_n - kn)),
               np.max(np.abs(fr.tau_g - tg)))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-1.4, 1.4))
def test_cylinder_helix_closed_form(a, alpha):
    assert _check(get_entry("cylinder", a=a), "helix", alpha=alpha) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 2.9))
def test_sphere_latitude_closed_form(theta0):
    assert _check(get_entry("sphere"), "latitude", theta0=theta0) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(1.5, 4.0), st.floats(0.2, 1.2), st.floats(-3.0, 3.0))
def test_torus_parallel_closed_form(R, r, v0):
    assert _check(get_entry("torus", R=R, r=r), "parallel", v0=v0) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(-2.0, 2.0).filter(lambda c: abs(c) > 0.2), st.floats(0.2, 2.0))
def test_helicoid_helix_closed_form(c, v0):
    assert _check(get_entry("helicoid", c=c), "helix", v0=v0) < 1e-8


def test_custom_t_range():
    entry = get_entry("plane")
    curve = entry.curve("circle", t_range=(0.0, 1.0), radius=3.0)
    assert curve.t_range == (0.0, 1.0)
    assert _check(entry, "circle", radius=3.0) < 1e-10
