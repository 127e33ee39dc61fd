import json
import math

import numpy as np
import pytest

from qstar.errors import BadRange, BondOutOfRange, ConfigError
from qstar.graph import (Constant, Polynomial, SmoothObservable, SplitObservable, Tabulated,
                         ensemble_graph, ergodic_delta_l, graph_from_spec, indicator_value,
                         load_graph, make_graph, near_rational, resolve_delta_l, sample_lengths,
                         scaled_delta_l)


def test_degenerate_and_reproducible_sampling():
    assert np.array_equal(sample_lengths(1, 1, 1.0, 0.0, 7), [1.0])
    L = sample_lengths(2, 3, 1.0, 0.01, 1)
    assert L.shape == (6,) and np.all((L >= 1.0) & (L <= 1.01))
    assert np.array_equal(L, sample_lengths(2, 3, 1.0, 0.01, 1))
    assert not np.array_equal(L, sample_lengths(2, 3, 1.0, 0.01, 2))
    with pytest.raises(BadRange):
        sample_lengths(2, 3, 1.0, -0.1, 1)


def test_width_rules():
    assert scaled_delta_l(10) == pytest.approx(0.01)
    dl = ergodic_delta_l(30, 3, 100_000)
    k_top = 100_000 * math.pi / 90
    assert dl * k_top == pytest.approx(100.0)
    assert resolve_delta_l(30, 3, 100_000, 1.0, "auto") == dl
    assert resolve_delta_l(30, 3, None, 1.0, "scaled") == pytest.approx(1 / 900)
    assert resolve_delta_l(30, 3, None, 1.0, 0.02) == 0.02
    with pytest.raises(ConfigError):
        resolve_delta_l(30, 3, None, 1.0, "auto")
    with pytest.raises(ConfigError):
        resolve_delta_l(30, 3, 10, 1.0, "wide")


def test_classical_average_tends_to_one_over_alpha():
    for dl in (0.1, 0.01, 0.0):
        g = make_graph(sample_lengths(20, 3, 1.0, dl, 3), warn=False)
        assert abs(SplitObservable(20, 3).classical_average(g) - 1 / 3) <= dl
    assert indicator_value(SplitObservable(2, 3), 2) == 1.0
    assert indicator_value(SplitObservable(2, 3), 3) == 0.0
    with pytest.raises(BondOutOfRange):
        indicator_value(SplitObservable(2, 3), 7)


def test_graph_files(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"lengths": [1.0, math.sqrt(2)]}))
    assert load_graph(p).b == 2
    p.write_text(json.dumps({"v": 4, "alpha": 2, "seed": 9, "delta_l": 0.1}))
    g = load_graph(p)
    assert g.b == 8 and g == ensemble_graph(4, 2, delta_l=0.1, seed=9)
    assert load_graph(p) == g
    with pytest.raises(ConfigError):
        graph_from_spec({"v": 4})
    with pytest.raises(ConfigError):
        graph_from_spec([1, 2])
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_graph(p)


def test_weyl_count_and_properties():
    g = make_graph([1.0, 2.5], warn=False)
    assert g.total_length == 3.5
    assert g.weyl_count(math.pi) == pytest.approx(3.5)
    assert g.length(2) == 2.5
    assert g.lengths.flags.writeable is False


def test_near_rational():
    assert near_rational(1.5) is not None
    assert near_rational(math.sqrt(2)) is None


def test_smooth_observable_algebra():
    f = SmoothObservable((Polynomial((1.0, 2.0)), Constant(3.0)))
    g = SmoothObservable.constant(2, 0.5)
    h = (f + g).scale(2.0)
    assert h.functions[0](np.array([1.0]))[0] == pytest.approx(2 * (3.0 + 0.5))
    assert h.functions[1].integral(2.0) == pytest.approx(2 * 3.5 * 2.0)
    r = f.restrict([2])
    assert r.functions[0](np.array([0.3]))[0] == 0.0
    with pytest.raises(BadRange):
        f + SmoothObservable.constant(3)
    with pytest.raises(BondOutOfRange):
        SmoothObservable.indicator(2, [3])
    x = np.linspace(0, 2, 20)
    t = Tabulated(x, x**2)
    assert t.integral(2.0) == pytest.approx(8 / 3, rel=1e-3)
    with pytest.raises(BadRange):
        Tabulated([0, 1], [0, 1])
    wrapped = SmoothObservable.from_callables([np.sin, lambda x: 1.0])
    assert wrapped.functions[1](np.zeros(3)).shape == (3,)
    with pytest.raises(BadRange):
        SmoothObservable.from_callables([lambda x: np.full(np.shape(x), np.nan)]).check(make_graph([1.0]))
