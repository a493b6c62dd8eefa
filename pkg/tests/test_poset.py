import pytest

from src.models.poset import (
    FinitePreorder,
    GridPoset,
    MonotoneMap,
    NonMonotoneMapError,
    PosetError,
    PrincipalSet,
    is_interval,
    join,
    meet,
    principal_points,
    pullback_preorder,
)


def test_join_and_meet():
    assert join((1, 3), (2, 0)) == (2, 3)
    assert meet((1, 3), (2, 0)) == (1, 0)
    with pytest.raises(PosetError):
        join((1,), (1, 2))


def test_principal_sets_on_a_line():
    box = GridPoset.line(0, 4)
    assert principal_points(box, PrincipalSet((2,), "up")) == [(2,), (3,), (4,)]
    assert principal_points(box, PrincipalSet((2,), "down")) == [(0,), (1,), (2,)]


def test_principal_set_outside_box():
    box = GridPoset.line(0, 4)
    with pytest.raises(PosetError):
        principal_points(box, PrincipalSet((7,), "up"))
    assert principal_points(box, PrincipalSet((-3,), "up", virtual=True)) == box.points()
    assert principal_points(box, PrincipalSet((7,), "up", virtual=True)) == []


def test_grid_order_and_edges():
    box = GridPoset.cube(0, 1, 2)
    assert box.points() == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert box.leq((0, 1), (1, 1))
    assert not box.leq((0, 1), (1, 0))
    assert sorted(box.generating_edges()) == [((0, 0), (0, 1)), ((0, 0), (1, 0)), ((0, 1), (1, 1)), ((1, 0), (1, 1))]
    with pytest.raises(PosetError):
        box.leq((0, 2), (1, 1))


def test_empty_box_is_rejected():
    with pytest.raises(PosetError):
        GridPoset((2,), (1,))


def test_opposite_box_negates():
    opposite, to_opposite = GridPoset.line(1, 3).opposite()
    assert opposite.same_as(GridPoset.line(-3, -1))
    assert to_opposite((2,)) == (-2,)


def test_is_interval_on_grids():
    line = GridPoset.line(0, 4)
    assert is_interval(line, [(1,), (2,), (3,)])
    assert not is_interval(line, [(1,), (3,)])
    assert not is_interval(line, [])
    square = GridPoset.cube(0, 1, 2)
    assert not is_interval(square, [(0, 1), (1, 0)])
    assert is_interval(square, [(0, 1), (1, 1), (1, 0)])


def test_preorder_from_pairs_closes_transitively():
    q = FinitePreorder.from_pairs("abc", [("a", "b"), ("b", "c")])
    assert q.leq("a", "c")
    assert not q.leq("c", "a")
    assert q.points() == ["a", "b", "c"]


def test_preorder_with_cycle_is_not_a_poset():
    q = FinitePreorder.from_pairs("abc", [("a", "b"), ("b", "a"), ("b", "c")])
    assert q.equivalent("a", "b")
    assert q.representative("b") == "a"
    assert q.lower_neighbors("c") == ["a", "b"]


def test_invalid_relations_are_rejected():
    with pytest.raises(PosetError):
        FinitePreorder(("a", "b"), [[True, True], [False, False]])
    with pytest.raises(PosetError):
        FinitePreorder(("a", "b", "c"), [[1, 1, 0], [0, 1, 1], [0, 0, 1]])


def test_preorder_opposite_transposes():
    q = FinitePreorder.chain(3)
    opposite, to_opposite = q.opposite()
    assert opposite.leq(2, 0)
    assert to_opposite(1) == 1


def test_monotone_maps():
    chain = FinitePreorder.chain(3)
    line = GridPoset.line(0, 4)
    f = MonotoneMap(chain, line, {0: (0,), 1: (2,), 2: (2,)})
    assert f.is_monotone()
    assert f.preimage_up((1,)) == [1, 2]
    assert f.preimage_down((0,)) == [0]
    assert f.preimage_up((-5,)) == [0, 1, 2]

    g = MonotoneMap(chain, line, {0: (3,), 1: (1,), 2: (4,)})
    assert not g.is_monotone()
    with pytest.raises(NonMonotoneMapError):
        g.require_monotone()
    assert f.sup_distance(g) == 3


def test_map_must_be_total_and_land_in_target():
    chain = FinitePreorder.chain(2)
    line = GridPoset.line(0, 1)
    with pytest.raises(PosetError):
        MonotoneMap(chain, line, {0: (0,)})
    with pytest.raises(PosetError):
        MonotoneMap(chain, line, {0: (0,), 1: (5,)})


def test_pullback_preorder_makes_maps_monotone():
    space = FinitePreorder.indiscrete(["x", "y"])
    f = {"x": (0,), "y": (1,)}
    refined = pullback_preorder(space, [f], base=space)
    assert refined.leq("x", "y")
    assert not refined.leq("y", "x")
    assert MonotoneMap(refined, GridPoset.line(0, 1), f).is_monotone()
