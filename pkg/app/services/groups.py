"""Exact word arithmetic and ball enumeration.

Every supported family has a canonical normal form stored as a plain
hashable tuple, so hot loops elsewhere can work on raw words and only
wrap results in :class:`GroupElement` at the edges.

Words are written as whitespace separated tokens: a generator label, its
upper-case form for the inverse, optionally with an exponent (``a^3``,
``B^2``).  ``e`` (or an empty string) is the identity.
"""

from __future__ import annotations

import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from app.config import get_settings
from app.core.errors import CapacityExceeded, GroupMismatch, UnknownGenerator

logger = logging.getLogger(__name__)

Word = tuple
_TOKEN = re.compile(r"^([A-Za-z][A-Za-z0-9_]*?)(?:\^(-?\d+))?$")


def _letter_rank(index: int, sign: int) -> int:
    # a < a^-1 < b < b^-1 < ...
    return 2 * index + (0 if sign > 0 else 1)


class GroupModel(ABC):
    """A group family with solvable word problem and a finite generating set."""

    labels: tuple[str, ...]

    @property
    @abstractmethod
    def identity_word(self) -> Word: ...

    @abstractmethod
    def generator_word(self, index: int, sign: int) -> Word: ...

    @abstractmethod
    def mul(self, u: Word, v: Word) -> Word: ...

    @abstractmethod
    def inv(self, u: Word) -> Word: ...

    @abstractmethod
    def letters(self, u: Word) -> tuple[tuple[int, int], ...]:
        """The normal form spelled as (generator index, sign) letters."""

    @property
    def is_abelian(self) -> bool:
        return False

    def length(self, u: Word) -> int:
        return len(self.letters(u))

    def sort_key(self, u: Word) -> tuple[int, tuple[int, ...]]:
        spelled = self.letters(u)
        return len(spelled), tuple(_letter_rank(i, s) for i, s in spelled)

    def generators(self) -> list[Word]:
        """S ∪ S⁻¹ in enumeration order a, a⁻¹, b, b⁻¹, ..."""
        gens: list[Word] = []
        for index in range(len(self.labels)):
            for sign in (1, -1):
                word = self.generator_word(index, sign)
                if word not in gens and word != self.identity_word:
                    gens.append(word)
        return gens

    def power(self, u: Word, n: int) -> Word:
        base = u if n >= 0 else self.inv(u)
        result = self.identity_word
        for _ in range(abs(n)):
            result = self.mul(result, base)
        return result

    def format(self, u: Word) -> str:
        spelled = self.letters(u)
        if not spelled:
            return "e"
        tokens: list[str] = []
        run_letter, run = spelled[0], 0
        for letter in spelled + ((-1, 0),):
            if letter == run_letter:
                run += 1
                continue
            index, sign = run_letter
            label = self.labels[index] if sign > 0 else self.labels[index].upper()
            tokens.append(label if run == 1 else f"{label}^{run}")
            run_letter, run = letter, 1
        return " ".join(tokens)

    def parse(self, text: str) -> Word:
        return self.parse_tokens(text.split())

    def parse_tokens(self, tokens: Iterable[str]) -> Word:
        lookup = {label: i for i, label in enumerate(self.labels)}
        word = self.identity_word
        for token in tokens:
            if token in ("e", "1"):
                continue
            match = _TOKEN.match(token)
            if match is None:
                raise UnknownGenerator(f"Malformed token {token!r}")
            symbol, exponent = match.group(1), int(match.group(2) or 1)
            if symbol in lookup:
                index, sign = lookup[symbol], 1
            elif symbol.lower() in lookup and symbol != symbol.lower():
                index, sign = lookup[symbol.lower()], -1
            else:
                raise UnknownGenerator(f"Generator {symbol!r} not in alphabet {self.labels}")
            word = self.mul(word, self.power(self.generator_word(index, sign), exponent))
        return word


@dataclass(frozen=True)
class FreeGroup(GroupModel):
    """Free group; words are tuples of signed letters ±(index + 1)."""

    labels: tuple[str, ...]

    @property
    def identity_word(self) -> Word:
        return ()

    def generator_word(self, index: int, sign: int) -> Word:
        return ((index + 1) * sign,)

    def mul(self, u: Word, v: Word) -> Word:
        k = 0
        limit = min(len(u), len(v))
        while k < limit and u[-1 - k] == -v[k]:
            k += 1
        if k == 0:
            return u + v
        return u[: len(u) - k] + v[k:]

    def inv(self, u: Word) -> Word:
        return tuple(-x for x in reversed(u))

    def letters(self, u: Word) -> tuple[tuple[int, int], ...]:
        return tuple((abs(x) - 1, 1 if x > 0 else -1) for x in u)

    def length(self, u: Word) -> int:
        return len(u)

    def sort_key(self, u: Word) -> tuple[int, tuple[int, ...]]:
        return len(u), tuple(2 * (abs(x) - 1) + (x < 0) for x in u)


@dataclass(frozen=True)
class FreeAbelian(GroupModel):
    """ℤᵏ; words are exponent vectors."""

    labels: tuple[str, ...]

    @property
    def is_abelian(self) -> bool:
        return True

    @property
    def identity_word(self) -> Word:
        return (0,) * len(self.labels)

    def generator_word(self, index: int, sign: int) -> Word:
        return tuple(sign if i == index else 0 for i in range(len(self.labels)))

    def mul(self, u: Word, v: Word) -> Word:
        return tuple(x + y for x, y in zip(u, v))

    def inv(self, u: Word) -> Word:
        return tuple(-x for x in u)

    def letters(self, u: Word) -> tuple[tuple[int, int], ...]:
        spelled: list[tuple[int, int]] = []
        for i, x in enumerate(u):
            spelled.extend([(i, 1 if x > 0 else -1)] * abs(x))
        return tuple(spelled)

    def length(self, u: Word) -> int:
        return sum(abs(x) for x in u)


@dataclass(frozen=True)
class CyclicTimesFinite(GroupModel):
    """ℤ × ℤ/n with generators t (infinite order) and s (order n).

    Words are pairs (k, r) with 0 <= r < n.
    """

    order: int
    labels: tuple[str, ...] = ("t", "s")

    @property
    def is_abelian(self) -> bool:
        return True

    @property
    def identity_word(self) -> Word:
        return (0, 0)

    def generator_word(self, index: int, sign: int) -> Word:
        if index == 0:
            return (sign, 0)
        return (0, sign % self.order)

    def mul(self, u: Word, v: Word) -> Word:
        return (u[0] + v[0], (u[1] + v[1]) % self.order)

    def inv(self, u: Word) -> Word:
        return (-u[0], (-u[1]) % self.order)

    def letters(self, u: Word) -> tuple[tuple[int, int], ...]:
        k, r = u
        spelled = [(0, 1 if k > 0 else -1)] * abs(k)
        if r <= self.order - r:
            spelled += [(1, 1)] * r
        else:
            spelled += [(1, -1)] * (self.order - r)
        return tuple(spelled)


@dataclass(frozen=True)
class DirectProduct(GroupModel):
    """Direct product; words are tuples of factor words."""

    factors: tuple[GroupModel, ...]
    labels: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        labels = tuple(label for factor in self.factors for label in factor.labels)
        if len(set(labels)) != len(labels):
            raise UnknownGenerator(f"Factor alphabets overlap: {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def is_abelian(self) -> bool:
        return all(factor.is_abelian for factor in self.factors)

    def _locate(self, index: int) -> tuple[int, int]:
        for j, factor in enumerate(self.factors):
            if index < len(factor.labels):
                return j, index
            index -= len(factor.labels)
        raise UnknownGenerator(f"Generator index {index} out of range")

    @property
    def identity_word(self) -> Word:
        return tuple(factor.identity_word for factor in self.factors)

    def generator_word(self, index: int, sign: int) -> Word:
        j, local = self._locate(index)
        return tuple(
            factor.generator_word(local, sign) if i == j else factor.identity_word
            for i, factor in enumerate(self.factors)
        )

    def mul(self, u: Word, v: Word) -> Word:
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, u, v))

    def inv(self, u: Word) -> Word:
        return tuple(f.inv(x) for f, x in zip(self.factors, u))

    def letters(self, u: Word) -> tuple[tuple[int, int], ...]:
        spelled: list[tuple[int, int]] = []
        offset = 0
        for factor, x in zip(self.factors, u):
            spelled.extend((i + offset, s) for i, s in factor.letters(x))
            offset += len(factor.labels)
        return tuple(spelled)

    def length(self, u: Word) -> int:
        return sum(f.length(x) for f, x in zip(self.factors, u))


@dataclass(frozen=True)
class GroupElement:
    group: GroupModel
    word: Word
    length: int = field(default=-1, compare=False)

    def __post_init__(self) -> None:
        if self.length < 0:
            object.__setattr__(self, "length", self.group.length(self.word))

    def __mul__(self, other: GroupElement) -> GroupElement:
        return multiply(self, other)

    def __str__(self) -> str:
        return self.group.format(self.word)

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return self.group.sort_key(self.word)

    def is_identity(self) -> bool:
        return self.word == self.group.identity_word


def normal_form(raw_word: str | Sequence[str], group: GroupModel) -> GroupElement:
    """Canonical element for a generator-symbol sequence (or a word string)."""
    if isinstance(raw_word, str):
        word = group.parse(raw_word)
    else:
        word = group.parse_tokens(raw_word)
    return GroupElement(group, word)


def identity(group: GroupModel) -> GroupElement:
    return GroupElement(group, group.identity_word, 0)


def multiply(x: GroupElement, y: GroupElement) -> GroupElement:
    if x.group != y.group:
        raise GroupMismatch(f"Cannot multiply elements of {x.group} and {y.group}")
    return GroupElement(x.group, x.group.mul(x.word, y.word))


def invert(x: GroupElement) -> GroupElement:
    return GroupElement(x.group, x.group.inv(x.word), x.length)


def power(x: GroupElement, n: int) -> GroupElement:
    return GroupElement(x.group, x.group.power(x.word, n))


def words_commute(group: GroupModel, u: Word, v: Word) -> bool:
    return group.is_abelian or group.mul(u, v) == group.mul(v, u)


def commutes(x: GroupElement, y: GroupElement) -> bool:
    if x.group != y.group:
        raise GroupMismatch(f"Cannot compare elements of {x.group} and {y.group}")
    return words_commute(x.group, x.word, y.word)


@lru_cache(maxsize=64)
def ball_words(group: GroupModel, radius: int, capacity: int | None = None) -> tuple[Word, ...]:
    """Normal forms of word length <= radius, sphere by sphere in shortlex order."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    limit = capacity if capacity is not None else get_settings().ball_capacity
    gens = group.generators()
    seen = {group.identity_word}
    ordered: list[Word] = [group.identity_word]
    frontier = [group.identity_word]
    for n in range(1, radius + 1):
        sphere: list[Word] = []
        for u in frontier:
            for s in gens:
                v = group.mul(u, s)
                if v not in seen:
                    seen.add(v)
                    sphere.append(v)
        sphere.sort(key=group.sort_key)
        ordered.extend(sphere)
        if len(ordered) > limit:
            raise CapacityExceeded(
                f"ball of radius {radius} exceeds capacity {limit} at sphere {n}"
            )
        frontier = sphere
    logger.debug("ball(%d) of %s has %d elements", radius, group, len(ordered))
    return tuple(ordered)


def ball(group: GroupModel, radius: int, capacity: int | None = None) -> list[GroupElement]:
    return [GroupElement(group, w) for w in ball_words(group, radius, capacity)]


def build_group(family: str, rank: int = 2, order: int = 1, labels: Sequence[str] | None = None,
                factors: Sequence[GroupModel] = ()) -> GroupModel:
    """Construct a model from a family name as written in scenario files."""
    family = family.lower()
    if family in ("free", "freegroup"):
        return FreeGroup(_checked_labels(labels or _default_labels(rank)))
    if family in ("abelian", "freeabelian"):
        return FreeAbelian(_checked_labels(labels or _default_labels(rank)))
    if family in ("cyclic_times_finite", "cyclictimesfinite"):
        return CyclicTimesFinite(order, _checked_labels(labels or ("t", "s")))
    if family in ("product", "directproduct"):
        return DirectProduct(tuple(factors))
    raise UnknownGenerator(f"Unsupported group family {family!r}")


# "e" is the identity token and never a generator
_LABEL_POOL = [chr(c) for c in range(ord("a"), ord("z") + 1) if chr(c) != "e"]


def _default_labels(rank: int) -> list[str]:
    if rank > len(_LABEL_POOL):
        raise UnknownGenerator(f"No default alphabet for {rank} generators")
    return _LABEL_POOL[:rank]


def _checked_labels(labels: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise UnknownGenerator(f"Repeated generator label in {labels}")
    for label in labels:
        if label in ("e", "1") or not label.islower() or _TOKEN.match(label) is None:
            raise UnknownGenerator(f"{label!r} cannot be a generator label")
    return labels
