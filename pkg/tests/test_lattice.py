"""Tests for lattice validation, monotonicity and Kleene iteration"""
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers

from models.lattice_models import FunctionTable, TupleSpace
from services.errors import NoBottom, NoLub, NonConvergence, NotAPoset, UnknownValue
from services.fuzz_service import random_monotone_table
from services.lattice_service import (
    belnap_lattice, check_monotone, kleene_fixpoint, kleene_iterates, lattice_from_covers, load_lattice,
    parse_lattice, tabulate, validate_lattice
)

###################################################################################################
# Belnap
###################################################################################################


def test_belnap_shape(lattice):
    assert lattice.elements == ("B", "t", "f", "T")
    assert lattice.bottom == lattice.index("B")
    assert lattice.top == lattice.index("T")
    assert lattice.chain_steps == 2


@pytest.mark.parametrize("a, b, join, meet", [
    ("t", "f", "T", "B"),
    ("B", "t", "t", "B"),
    ("f", "T", "T", "f"),
    ("t", "t", "t", "t"),
])
def test_belnap_join_meet(lattice, a, b, join, meet):
    x, y = lattice.index(a), lattice.index(b)
    assert lattice.symbol(lattice.join(x, y)) == join
    assert lattice.symbol(lattice.meet(x, y)) == meet


def test_lattice_file_matches_builtin(examples):
    parsed = load_lattice(str(examples / "belnap.lattice"))
    builtin = belnap_lattice()
    assert parsed.elements == builtin.elements
    assert parsed.leq == builtin.leq
    assert parsed.chain_steps == builtin.chain_steps


def test_upper_covers_of_bottom(lattice):
    space = TupleSpace(lattice, 2)
    covers = set(space.upper_covers(space.bottom))
    t, f = lattice.index("t"), lattice.index("f")
    assert covers == {(t, 0), (f, 0), (0, t), (0, f)}


###################################################################################################
# Validation failures
###################################################################################################


def test_not_reflexive():
    with pytest.raises(NotAPoset):
        validate_lattice(["a", "b"], [[True, True], [False, False]])


def test_not_antisymmetric():
    with pytest.raises(NotAPoset):
        validate_lattice(["a", "b"], [[True, True], [True, True]])


def test_no_bottom():
    with pytest.raises(NoBottom):
        parse_lattice("elements: a, b\n")


def test_no_least_upper_bound():
    covers = [("B", "x"), ("B", "y"), ("x", "p"), ("x", "q"), ("y", "p"), ("y", "q"), ("p", "T"), ("q", "T")]
    with pytest.raises(NoLub):
        lattice_from_covers(["B", "x", "y", "p", "q", "T"], covers)


def test_undeclared_cover():
    with pytest.raises(UnknownValue):
        lattice_from_covers(["a"], [("a", "b")])


def test_chain_height():
    lattice = parse_lattice("elements: 0, 1, 2, 3\n0 < 1\n1 < 2\n2 < 3\n")
    assert lattice.chain_steps == 3


###################################################################################################
# Monotonicity and fixed points
###################################################################################################


def test_swap_is_not_monotone(lattice):
    space = TupleSpace(lattice, 1)
    t, f = lattice.index("t"), lattice.index("f")
    swapped = {0: t, t: f, f: t, 3: 3}
    verdict = check_monotone(tabulate(space, space, lambda p: (swapped[p[0]],)))
    assert not verdict
    low, high = verdict.witness
    assert space.le(low, high)


def test_kleene_rejects_oscillation(lattice):
    space = TupleSpace(lattice, 1)
    t, f = lattice.index("t"), lattice.index("f")
    with pytest.raises(NonConvergence):
        kleene_fixpoint(space, lambda p: (f,) if p == (t,) else (t,))


def test_kleene_iterates_form_a_chain(lattice):
    space = TupleSpace(lattice, 2)
    t = lattice.index("t")
    iterates = list(kleene_iterates(space, lambda p: (t, p[0])))
    assert iterates == [(0, 0), (t, 0), (t, t)]
    for low, high in zip(iterates, iterates[1:]):
        assert space.le(low, high)


@settings(max_examples=200, deadline=None)
@given(integers(min_value=0, max_value=2 ** 32))
def test_kleene_finds_least_fixpoint(seed):
    lattice = belnap_lattice()
    space = TupleSpace(lattice, 2)
    table = random_monotone_table(Random(seed), space, space, samples=3, bottom_preserving=False)
    assert check_monotone(table)
    result = kleene_fixpoint(space, table)
    fixpoints = [p for p in space.points() if table(p) == p]
    assert result in fixpoints
    assert all(space.le(result, p) for p in fixpoints)


def test_function_table_indexing(lattice):
    space = TupleSpace(lattice, 3)
    table = FunctionTable(space, space, tuple(space.points()))
    for p in space.points():
        assert space.point(space.index(p)) == p
        assert table(p) == p
