import logging
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from models.lattice_models import FunctionTable, Lattice, MonotoneVerdict, Point, TupleSpace
from services.errors import (
    FileFormatError, NoBottom, NoGlb, NoLub, NonConvergence, NotAPoset, NoTop, UnknownValue
)

logger = logging.getLogger(__name__)

BELNAP_ELEMENTS = ("B", "t", "f", "T")
BELNAP_COVERS = (("B", "t"), ("B", "f"), ("t", "T"), ("f", "T"))


def validate_lattice(elements: Sequence[str], leq: Sequence[Sequence[bool]]) -> Lattice:
    """Check that `leq` is a lattice order on `elements` and derive its tables"""
    names = tuple(elements)
    n = len(names)
    if n == 0:
        raise NotAPoset("a lattice needs at least one element")
    if len(set(names)) != n:
        raise NotAPoset("element names must be unique")
    if len(leq) != n or any(len(row) != n for row in leq):
        raise NotAPoset(f"order table must be {n}x{n}")
    order = tuple(tuple(bool(v) for v in row) for row in leq)

    for a in range(n):
        if not order[a][a]:
            raise NotAPoset(f"order is not reflexive at {names[a]}", element=names[a])
        for b in range(n):
            if a != b and order[a][b] and order[b][a]:
                raise NotAPoset(f"order is not antisymmetric: {names[a]} and {names[b]}",
                                pair=(names[a], names[b]))
            if not order[a][b]:
                continue
            for c in range(n):
                if order[b][c] and not order[a][c]:
                    raise NotAPoset(f"order is not transitive: {names[a]} <= {names[b]} <= {names[c]}",
                                    triple=(names[a], names[b], names[c]))

    bottoms = [x for x in range(n) if all(order[x][y] for y in range(n))]
    if not bottoms:
        raise NoBottom("no element lies below every other element")
    tops = [x for x in range(n) if all(order[y][x] for y in range(n))]
    if not tops:
        raise NoTop("no element lies above every other element")

    join_rows, meet_rows = [], []
    for a in range(n):
        join_row, meet_row = [], []
        for b in range(n):
            upper = [c for c in range(n) if order[a][c] and order[b][c]]
            least = [c for c in upper if all(order[c][u] for u in upper)]
            if not least:
                raise NoLub(f"{names[a]} and {names[b]} have no least upper bound", a=names[a], b=names[b])
            lower = [c for c in range(n) if order[c][a] and order[c][b]]
            greatest = [c for c in lower if all(order[l][c] for l in lower)]
            if not greatest:
                raise NoGlb(f"{names[a]} and {names[b]} have no greatest lower bound", a=names[a], b=names[b])
            join_row.append(least[0])
            meet_row.append(greatest[0])
        join_rows.append(tuple(join_row))
        meet_rows.append(tuple(meet_row))

    def strictly(a: int, b: int) -> bool:
        return a != b and order[a][b]

    covers = tuple(
        tuple(c for c in range(n)
              if strictly(a, c) and not any(strictly(a, d) and strictly(d, c) for d in range(n)))
        for a in range(n)
    )

    # Longest strict chain below each element; elements with fewer predecessors come first.
    height = [0] * n
    for x in sorted(range(n), key=lambda e: sum(order[y][e] for y in range(n))):
        height[x] = max((height[y] + 1 for y in range(n) if strictly(y, x)), default=0)

    lattice = Lattice(
        elements=names,
        leq=order,
        join_table=tuple(join_rows),
        meet_table=tuple(meet_rows),
        bottom=bottoms[0],
        top=tops[0],
        chain_steps=max(height),
        upper_covers=covers,
    )
    logger.debug("validated lattice of %d elements, chain_steps=%d", n, lattice.chain_steps)
    return lattice


def lattice_from_covers(elements: Sequence[str], covers: Iterable[tuple[str, str]]) -> Lattice:
    """Build the reflexive-transitive closure of covering pairs `a < b` and validate it"""
    names = tuple(elements)
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    order = [[i == j for j in range(n)] for i in range(n)]
    for low, high in covers:
        for name in (low, high):
            if name not in index:
                raise UnknownValue(f"'{name}' is used in a covering pair but not declared", symbol=name)
        order[index[low]][index[high]] = True
    for k in range(n):
        for i in range(n):
            if order[i][k]:
                for j in range(n):
                    if order[k][j]:
                        order[i][j] = True
    return validate_lattice(names, order)


@lru_cache(maxsize=None)
def belnap_lattice() -> Lattice:
    return lattice_from_covers(BELNAP_ELEMENTS, BELNAP_COVERS)


def parse_lattice(text: str) -> Lattice:
    """Parse the lattice file format: `elements: a, b, c` plus one `a < b` line per covering pair"""
    elements: list[str] = []
    covers: list[tuple[str, str]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("elements:"):
            elements.extend(name.strip() for name in line[len("elements:"):].split(",") if name.strip())
        elif "<" in line:
            low, _, high = line.partition("<")
            if not low.strip() or not high.strip():
                raise FileFormatError(f"line {number}: malformed covering pair '{line}'", line=number)
            covers.append((low.strip(), high.strip()))
        else:
            raise FileFormatError(f"line {number}: expected 'elements:' or 'a < b', got '{line}'", line=number)
    if not elements:
        raise FileFormatError("lattice file declares no elements")
    return lattice_from_covers(elements, covers)


def load_lattice(path: str) -> Lattice:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileFormatError(f"cannot read lattice file {path}: {e}") from e
    return parse_lattice(text)


def tabulate(domain: TupleSpace, codomain: TupleSpace, fn: Callable[[Point], Point]) -> FunctionTable:
    return FunctionTable(domain, codomain, tuple(fn(point) for point in domain.points()))


def check_monotone(table: FunctionTable) -> MonotoneVerdict:
    """Exhaustive monotonicity check; covering pairs suffice because the order is transitive"""
    codomain = table.codomain
    for x, fx in table.items():
        for y in table.domain.upper_covers(x):
            if not codomain.le(fx, table(y)):
                return MonotoneVerdict(False, (x, y))
    return MonotoneVerdict(True)


def kleene_iterates(space: TupleSpace, f: Callable[[Point], Point], extra: int = 0) -> Iterator[Point]:
    """Yield ⊥, f(⊥), f(f(⊥)), ... up to and including the first fixed point"""
    x = space.bottom
    trace = [x]
    yield x
    for _ in range(space.chain_steps + 1 + extra):
        y = f(x)
        if y == x:
            return
        trace.append(y)
        yield y
        x = y
    raise NonConvergence(
        f"no fixed point within {space.chain_steps + 1 + extra} iterations; the function is not monotone",
        trace=tuple(trace),
    )


def kleene_fixpoint(space: TupleSpace, f: Callable[[Point], Point], extra: int = 0) -> Point:
    result = space.bottom
    for result in kleene_iterates(space, f, extra):
        pass
    return result
