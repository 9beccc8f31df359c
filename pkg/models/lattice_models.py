from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional

from services.errors import UnknownValue

# A tuple of interned lattice element indices.
Point = tuple[int, ...]


@dataclass(frozen=True)
class Lattice:
    """A finite lattice whose elements are interned to dense indices"""
    elements: tuple[str, ...]
    leq: tuple[tuple[bool, ...], ...]
    join_table: tuple[tuple[int, ...], ...]
    meet_table: tuple[tuple[int, ...], ...]
    bottom: int
    top: int
    chain_steps: int
    upper_covers: tuple[tuple[int, ...], ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.elements)})

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise UnknownValue(f"'{symbol}' is not an element of the lattice", symbol=symbol) from None

    def symbol(self, element: int) -> str:
        return self.elements[element]

    def le(self, a: int, b: int) -> bool:
        return self.leq[a][b]

    def join(self, a: int, b: int) -> int:
        return self.join_table[a][b]

    def meet(self, a: int, b: int) -> int:
        return self.meet_table[a][b]


@dataclass(frozen=True)
class TupleSpace:
    """The product lattice base^width, ordered pointwise"""
    base: Lattice
    width: int

    @property
    def size(self) -> int:
        return self.base.size ** self.width

    @property
    def chain_steps(self) -> int:
        return self.width * self.base.chain_steps

    @property
    def bottom(self) -> Point:
        return (self.base.bottom,) * self.width

    @property
    def top(self) -> Point:
        return (self.base.top,) * self.width

    def points(self) -> Iterator[Point]:
        return product(range(self.base.size), repeat=self.width)

    def le(self, x: Point, y: Point) -> bool:
        leq = self.base.leq
        return all(leq[a][b] for a, b in zip(x, y))

    def join(self, x: Point, y: Point) -> Point:
        table = self.base.join_table
        return tuple(table[a][b] for a, b in zip(x, y))

    def meet(self, x: Point, y: Point) -> Point:
        table = self.base.meet_table
        return tuple(table[a][b] for a, b in zip(x, y))

    def join_all(self, points) -> Point:
        result = self.bottom
        for point in points:
            result = self.join(result, point)
        return result

    def index(self, point: Point) -> int:
        n = self.base.size
        result = 0
        for element in point:
            result = result * n + element
        return result

    def point(self, index: int) -> Point:
        n = self.base.size
        digits = []
        for _ in range(self.width):
            index, digit = divmod(index, n)
            digits.append(digit)
        return tuple(reversed(digits))

    def upper_covers(self, point: Point) -> Iterator[Point]:
        """Points obtained by raising one coordinate to an upper cover"""
        covers = self.base.upper_covers
        for i, element in enumerate(point):
            for above in covers[element]:
                yield point[:i] + (above,) + point[i + 1:]

    def lower_covers(self, point: Point) -> Iterator[Point]:
        base = self.base
        for i, element in enumerate(point):
            for below in range(base.size):
                if element in base.upper_covers[below]:
                    yield point[:i] + (below,) + point[i + 1:]


@dataclass(frozen=True)
class FunctionTable:
    """A total function between tuple spaces, stored in domain enumeration order"""
    domain: TupleSpace
    codomain: TupleSpace
    outputs: tuple[Point, ...]

    def __call__(self, point: Point) -> Point:
        return self.outputs[self.domain.index(point)]

    def items(self) -> Iterator[tuple[Point, Point]]:
        return zip(self.domain.points(), self.outputs)


@dataclass(frozen=True)
class MonotoneVerdict:
    monotone: bool
    witness: Optional[tuple[Point, Point]] = None

    def __bool__(self) -> bool:
        return self.monotone


@dataclass(frozen=True)
class SampledFunction:
    """
    The least monotone extension of finitely many samples: a point maps to the join of the
    sample outputs at or below it, ⊥ when there are none.
    """
    domain: TupleSpace
    codomain: TupleSpace
    samples: tuple[tuple[Point, Point], ...]

    def __call__(self, point: Point) -> Point:
        le = self.domain.le
        return self.codomain.join_all(out for at, out in self.samples if le(at, point))

    def items(self) -> Iterator[tuple[Point, Point]]:
        return ((point, self(point)) for point in self.domain.points())
