"""Sphere and ball enumeration in Cayley graphs.

Balls are enumerated breadth-first with lexicographic tie-breaking inside
each sphere, so basis indices (and every operator matrix built on them) are
reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .groups import F2_GENERATORS, F2_IDENTITY, FreeWord, HeisenbergElement

__all__ = [
    "BallCapExceeded",
    "BallIndex",
    "SphereSlice",
    "ball",
    "sphere",
    "f2_ball",
    "f2_sphere",
    "heisenberg_generators",
    "first_letter_partition",
    "DEFAULT_BALL_CAP",
]

DEFAULT_BALL_CAP = 5_000_000


class BallCapExceeded(RuntimeError):
    """The requested ball does not fit the configured element cap."""


@dataclass
class BallIndex:
    """Ordered basis for a Cayley ball: BFS order, identity first."""

    radius: int
    elements: list
    index: dict
    sphere_sizes: list[int]
    offsets: list[int] = field(init=False)

    def __post_init__(self):
        offs = [0]
        for s in self.sphere_sizes:
            offs.append(offs[-1] + s)
        self.offsets = offs

    def __len__(self) -> int:
        return len(self.elements)

    def size_within(self, r: int) -> int:
        """Number of elements of word length <= r."""
        if r < 0:
            return 0
        return self.offsets[min(r, self.radius) + 1]

    def sphere_elements(self, n: int) -> list:
        if n > self.radius:
            raise ValueError(f"sphere {n} outside ball of radius {self.radius}")
        return self.elements[self.offsets[n]:self.offsets[n + 1]]

    def word_length(self, position: int) -> int:
        for n in range(self.radius + 1):
            if position < self.offsets[n + 1]:
                return n
        raise IndexError(position)


def ball(identity, generators: Sequence, radius: int, *,
         cap: int = DEFAULT_BALL_CAP,
         sort_key: Callable | None = None) -> BallIndex:
    """BFS ball of the given radius around the identity."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if sort_key is None:
        sort_key = lambda x: x.sort_key()
    elements = [identity]
    index = {identity: 0}
    sphere_sizes = [1]
    frontier = [identity]
    for _ in range(radius):
        seen: set = set()
        level = []
        for w in frontier:
            for g in generators:
                y = w * g
                if y not in index and y not in seen:
                    seen.add(y)
                    level.append(y)
        level.sort(key=sort_key)
        if len(elements) + len(level) > cap:
            raise BallCapExceeded(
                f"ball would exceed cap of {cap} elements "
                f"({len(elements)} so far, next sphere {len(level)})")
        for y in level:
            index[y] = len(elements)
            elements.append(y)
        sphere_sizes.append(len(level))
        frontier = level
    return BallIndex(radius=radius, elements=elements, index=index,
                     sphere_sizes=sphere_sizes)


def sphere(identity, generators: Sequence, n: int, *,
           cap: int = DEFAULT_BALL_CAP) -> list:
    """Exactly the elements at word length n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return ball(identity, generators, n, cap=cap).sphere_elements(n)


def f2_ball(radius: int, *, cap: int = DEFAULT_BALL_CAP) -> BallIndex:
    return ball(F2_IDENTITY, F2_GENERATORS, radius, cap=cap)


def f2_sphere(n: int) -> list[FreeWord]:
    return sphere(F2_IDENTITY, F2_GENERATORS, n)


def heisenberg_generators() -> tuple[HeisenbergElement, ...]:
    x = HeisenbergElement(1, 0, 0)
    y = HeisenbergElement(0, 1, 0)
    return (x, y, x.inverse(), y.inverse())


@dataclass(frozen=True)
class SphereSlice:
    """Partition of a sphere in the rank-2 free group by first letter."""

    n: int
    by_first_letter: dict[str, list[FreeWord]]

    def class_size(self, letter: str) -> int:
        return len(self.by_first_letter[letter])


def first_letter_partition(n: int) -> SphereSlice:
    """Split S_n into the four classes of words sharing a first letter."""
    if n < 1:
        raise ValueError("the first-letter partition needs n >= 1")
    classes: dict[str, list[FreeWord]] = {"a": [], "b": [], "A": [], "B": []}
    for w in f2_sphere(n):
        classes[w.first_letter()].append(w)
    return SphereSlice(n=n, by_first_letter=classes)
