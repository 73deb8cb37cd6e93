import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nalab import arcs
from nalab.arcs import EMPTY, FULL, TWO_PI, Arc, ArcSet

from oracles import grid, in_arcs

PI = math.pi

arc_st = st.builds(
    Arc,
    st.floats(0, TWO_PI, exclude_max=True, allow_nan=False),
    st.floats(0, TWO_PI, allow_nan=False),
)
raw_st = st.lists(arc_st, max_size=6)


def _set(raw):
    return arcs.normalize(raw)


def _canonical(a: ArcSet) -> bool:
    ps = a.pieces
    ok = all(0 <= s < e <= TWO_PI for s, e in ps)
    return ok and all(e1 < s2 for (_, e1), (s2, _) in zip(ps, ps[1:]))


def _close(a: ArcSet, b: ArcSet, tol=1e-9) -> bool:
    if len(a.pieces) != len(b.pieces):
        return False
    return all(abs(x - y) <= tol for p, q in zip(a.pieces, b.pieces) for x, y in zip(p, q))


def test_overlapping_merge():
    s = arcs.normalize([Arc(0, PI / 2), Arc(PI / 4, 3 * PI / 4)])
    assert s.pieces == ((0.0, PI),)
    assert s.measure == pytest.approx(PI)


def test_wrap_around_union():
    s = arcs.normalize([Arc.between(3 * PI / 2, PI / 4), Arc(0, PI / 2)])
    assert s.measure == pytest.approx(PI)
    assert s.contains(7 * PI / 4) and s.contains(0.1) and not s.contains(PI)
    assert len(s.arcs()) == 1


def test_empty_input():
    s = arcs.normalize([])
    assert s.is_empty and s.measure == 0


def test_zero_length_dropped_and_full_circle():
    assert arcs.normalize([Arc(1.0, 0.0)]).is_empty
    assert arcs.normalize([Arc(1.0, TWO_PI)]).is_full


@pytest.mark.parametrize("bad", [(math.nan, 1.0), (0.0, math.inf), (0.0, -0.5), (0.0, 7.0)])
def test_rejects_bad_arcs(bad):
    with pytest.raises(ValueError):
        arcs.normalize([bad])


def test_complement_half():
    c = arcs.complement(arcs.normalize([Arc(0, PI)]))
    assert c.pieces == ((PI, TWO_PI),)
    assert c.measure == pytest.approx(PI)
    assert arcs.complement(EMPTY) == FULL and arcs.complement(FULL) == EMPTY


def test_intersect_wrapped():
    a = arcs.normalize([Arc.between(3 * PI / 2, PI / 4)])
    b = arcs.normalize([Arc(0, PI / 2)])
    assert _close(arcs.intersect(a, b), ArcSet(((0.0, PI / 4),)))


def test_partition_of_circle_200_random():
    rng = np.random.default_rng(7)
    for _ in range(200):
        raw = [Arc(rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI)) for _ in range(rng.integers(0, 5))]
        a = arcs.normalize(raw)
        assert a.measure + arcs.complement(a).measure == pytest.approx(TWO_PI, abs=1e-12)


@given(raw_st)
def test_normalize_idempotent_and_canonical(raw):
    a = _set(raw)
    assert _canonical(a)
    assert arcs.normalize(a.arcs()) == a or _close(arcs.normalize(a.arcs()), a, 1e-12)


@given(raw_st, raw_st)
def test_inclusion_exclusion(ra, rb):
    a, b = _set(ra), _set(rb)
    lhs = arcs.union(a, b).measure + arcs.intersect(a, b).measure
    assert abs(lhs - (a.measure + b.measure)) <= 1e-12 * 10


@given(raw_st)
def test_double_complement(raw):
    a = _set(raw)
    assert arcs.complement(arcs.complement(a)) == a


@given(raw_st, raw_st)
def test_de_morgan(ra, rb):
    a, b = _set(ra), _set(rb)
    lhs = arcs.complement(arcs.union(a, b))
    rhs = arcs.intersect(arcs.complement(a), arcs.complement(b))
    assert _close(lhs, rhs, 1e-12)


@given(raw_st, raw_st)
def test_operators_match_functions(ra, rb):
    a, b = _set(ra), _set(rb)
    assert (a | b) == arcs.union(a, b)
    assert (a & b) == arcs.intersect(a, b)
    assert ~a == arcs.complement(a)
    assert arcs.overlap_measure(a, b) == pytest.approx(arcs.intersect(a, b).measure, abs=1e-12)


def test_rasterization_oracle():
    m = 1_000_000
    theta = grid(m)
    rng = np.random.default_rng(11)
    for _ in range(20):
        ra = [(rng.uniform(0, TWO_PI), rng.uniform(0, PI)) for _ in range(3)]
        rb = [(rng.uniform(0, TWO_PI), rng.uniform(0, PI)) for _ in range(3)]
        a, b = arcs.normalize(ra), arcs.normalize(rb)
        ma, mb = in_arcs(theta, ra), in_arcs(theta, rb)
        expr = arcs.union(arcs.intersect(a, arcs.complement(b)), arcs.difference(b, a))
        raster = np.mean((ma & ~mb) | (mb & ~ma))
        boundaries = 2 * (len(ra) + len(rb))
        assert abs(expr.measure / TWO_PI - raster) <= 3e-6 + boundaries / m
        # membership agrees away from boundaries too
        assert np.mean(expr.contains(theta) == ((ma & ~mb) | (mb & ~ma))) >= 1 - boundaries / m


def test_contains_scalar_and_array():
    a = arcs.normalize([Arc(0, 1.0)])
    assert a.contains(0.5) is True
    assert not a.contains(1.0)
    assert list(a.contains(np.array([0.5, 2.0]))) == [True, False]
    assert EMPTY.contains(0.3) is False
