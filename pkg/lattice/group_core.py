#!/usr/bin/env python3
"""
Finite Abelian Group Core
=========================

Arithmetic on G = Z_N1 x ... x Z_Nk: elements, characters, subgroup
closure, coset transversals and measure bookkeeping (covolume, Weil's
formula).

Conventions:
    - elements are tuples of ints reduced mod the orders
    - enumeration order is lexicographic on the coordinate tuples
    - the dual group uses the same coordinate tuples; omega(x) =
      exp(2 pi i sum_i x_i omega_i / N_i)
    - a GroupSpec may carry a total Haar mass; unset means counting
      measure. The phase space of G carries mass |G|.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from numbers import Integral, Real
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import DESK_SCALE
from lattice.errors import ContainmentError, InvalidInputError

logger = logging.getLogger("group_core")

GroupElement = Tuple[int, ...]

# =========================================================================
# EXACT ROOTS OF UNITY
# =========================================================================

_QUARTER_TURNS = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])


def unit_phase(numerators, denominator: int):
    """
    exp(2 pi i m / P) for integer m (scalar or array).

    Quarter turns come out exact so that c = 1, -1, i, -i compare equal
    without a tolerance.
    """
    m = np.mod(np.asarray(numerators, dtype=np.int64), denominator)
    values = np.exp(2j * np.pi * m / denominator)
    quarter = (4 * m) % denominator == 0
    if np.any(quarter):
        values = np.where(quarter, _QUARTER_TURNS[(4 * m // denominator) % 4], values)
    if values.ndim == 0:
        return complex(values)
    return values


# =========================================================================
# GROUPS
# =========================================================================

def _as_positive_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (Integral, Real)):
        raise InvalidInputError(f"{what} must be an integer, got {value!r}")
    if isinstance(value, Real) and not isinstance(value, Integral):
        if not float(value).is_integer():
            raise InvalidInputError(f"{what} must be an integer, got {value!r}")
    value = int(value)
    if value < 1:
        raise InvalidInputError(f"{what} must be >= 1, got {value}")
    return value


def as_weight(weight) -> Fraction:
    """Positive measure weight as an exact Fraction (floats are rationalized)."""
    if isinstance(weight, bool):
        raise InvalidInputError(f"weight must be a positive number, got {weight!r}")
    if isinstance(weight, str):
        try:
            weight = Fraction(weight)
        except (ValueError, ZeroDivisionError):
            raise InvalidInputError(f"weight must be a positive number, got {weight!r}") from None
    if isinstance(weight, (Integral, Fraction)):
        value = Fraction(weight)
    elif isinstance(weight, Real):
        if not math.isfinite(float(weight)):
            raise InvalidInputError(f"weight must be finite, got {weight!r}")
        value = Fraction(float(weight)).limit_denominator(DESK_SCALE['max_weight_denominator'])
    else:
        raise InvalidInputError(f"weight must be a positive number, got {weight!r}")
    if value <= 0:
        raise InvalidInputError(f"weight must be > 0, got {weight!r}")
    return value


@dataclass(frozen=True)
class GroupSpec:
    """A finite abelian group as a product of cyclic factors."""

    orders: Tuple[int, ...]
    haar_mass: Optional[Fraction] = None

    def __post_init__(self):
        if len(self.orders) == 0:
            raise InvalidInputError("a group needs at least one cyclic factor")
        orders = tuple(_as_positive_int(n, "group order") for n in self.orders)
        object.__setattr__(self, 'orders', orders)
        if self.haar_mass is not None:
            object.__setattr__(self, 'haar_mass', as_weight(self.haar_mass))

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    @property
    def total_mass(self) -> Fraction:
        """Total Haar mass (counting measure when no mass was given)."""
        return Fraction(self.order) if self.haar_mass is None else self.haar_mass

    @property
    def point_mass(self) -> Fraction:
        return self.total_mass / self.order

    @property
    def zero(self) -> GroupElement:
        return (0,) * self.rank

    @cached_property
    def exponent(self) -> int:
        """lcm of the orders; all character phases are multiples of 1/exponent."""
        return math.lcm(*self.orders)

    @cached_property
    def phase_units(self) -> np.ndarray:
        """exponent / N_i per coordinate."""
        return np.array([self.exponent // n for n in self.orders], dtype=np.int64)

    @cached_property
    def element_list(self) -> Tuple[GroupElement, ...]:
        return tuple(product(*(range(n) for n in self.orders)))

    @cached_property
    def element_array(self) -> np.ndarray:
        return np.array(self.element_list, dtype=np.int64).reshape(self.order, self.rank)

    @cached_property
    def _orders_array(self) -> np.ndarray:
        return np.array(self.orders, dtype=np.int64)

    def elements(self) -> List[GroupElement]:
        """All elements in lexicographic order."""
        return list(self.element_list)

    def reduce(self, x: Sequence[int]) -> GroupElement:
        if len(x) != self.rank:
            raise InvalidInputError(
                f"element {tuple(x)} has {len(x)} coordinates, group has {self.rank}")
        coords = []
        for value in x:
            if isinstance(value, bool) or not isinstance(value, Integral):
                if isinstance(value, Real) and float(value).is_integer():
                    value = int(value)
                else:
                    raise InvalidInputError(f"element coordinates must be integers: {tuple(x)}")
            coords.append(int(value))
        return tuple(c % n for c, n in zip(coords, self.orders))

    def add(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return tuple((p + q) % n for p, q, n in zip(a, b, self.orders))

    def neg(self, a: GroupElement) -> GroupElement:
        return tuple((-p) % n for p, n in zip(a, self.orders))

    def sub(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return tuple((p - q) % n for p, q, n in zip(a, b, self.orders))

    def index(self, x: Sequence[int]) -> int:
        """Position of x in the lexicographic enumeration."""
        idx = 0
        for value, n in zip(self.reduce(x), self.orders):
            idx = idx * n + value
        return idx

    def index_array(self, coords: np.ndarray) -> np.ndarray:
        """Vectorized index() for an (..., rank) integer array (reduced first)."""
        coords = np.mod(coords, self._orders_array)
        return np.ravel_multi_index(tuple(np.moveaxis(coords, -1, 0)), self.orders)

    def to_dict(self) -> dict:
        return {'orders': list(self.orders), 'order': self.order}


def make_group(orders: Sequence[int]) -> GroupSpec:
    """Build G = Z_N1 x ... x Z_Nk from its cyclic orders."""
    if isinstance(orders, (str, bytes)) or not isinstance(orders, Iterable):
        raise InvalidInputError(f"orders must be a list of positive integers, got {orders!r}")
    orders = list(orders)
    if not orders:
        raise InvalidInputError("orders must be non-empty")
    return GroupSpec(tuple(orders))


def character_phase(group: GroupSpec, x: Sequence[int], omega: Sequence[int]) -> Fraction:
    """omega(x) as a fraction of a full turn, reduced into [0, 1)."""
    x = group.reduce(x)
    omega = group.reduce(omega)
    turns = sum(Fraction(a * b, n) for a, b, n in zip(x, omega, group.orders))
    return turns - math.floor(turns)


def character(group: GroupSpec, x: Sequence[int], omega: Sequence[int]) -> complex:
    """omega(x) = exp(2 pi i sum_i x_i omega_i / N_i)."""
    turns = character_phase(group, x, omega)
    numerator = turns.numerator * (group.exponent // turns.denominator)
    return unit_phase(numerator, group.exponent)


def character_table(group: GroupSpec) -> np.ndarray:
    """K[a, b] = a(b) over the lexicographic enumeration (symmetric)."""
    elems = group.element_array
    phases = (elems * group.phase_units) @ elems.T
    return unit_phase(phases, group.exponent)


# =========================================================================
# SUBGROUPS
# =========================================================================

@dataclass(frozen=True)
class Subgroup:
    """An enumerated subgroup with a per-point measure weight."""

    ambient: GroupSpec
    generators: Tuple[GroupElement, ...]
    elements: Tuple[GroupElement, ...]
    weight: Fraction = Fraction(1)
    _members: FrozenSet[GroupElement] = field(default=frozenset(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'weight', as_weight(self.weight))
        object.__setattr__(self, '_members', frozenset(self.elements))
        if self.ambient.zero not in self._members:
            raise InvalidInputError("subgroup must contain the identity")

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return tuple(x) in self._members

    @property
    def members(self) -> FrozenSet[GroupElement]:
        return self._members

    @cached_property
    def element_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64).reshape(self.size, self.ambient.rank)

    @cached_property
    def _positions(self) -> Dict[GroupElement, int]:
        return {e: i for i, e in enumerate(self.elements)}

    def position(self, x: GroupElement) -> int:
        """Index of x in the sorted element list."""
        try:
            return self._positions[tuple(x)]
        except KeyError:
            raise ContainmentError(f"{tuple(x)} is not an element of the subgroup") from None

    def is_subgroup_of(self, other: "Subgroup") -> bool:
        return self._members <= other.members

    def with_weight(self, weight) -> "Subgroup":
        return Subgroup(self.ambient, self.generators, self.elements, as_weight(weight))

    def same_elements(self, other: "Subgroup") -> bool:
        return self._members == other.members

    def to_dict(self) -> dict:
        return {
            'orders': list(self.ambient.orders),
            'generators': [list(g) for g in self.generators],
            'elements': [list(e) for e in self.elements],
            'size': self.size,
            'weight': float(self.weight),
            'weight_exact': str(self.weight),
        }


def _close(group: GroupSpec, start: Iterable[GroupElement],
           generators: Sequence[GroupElement]) -> set:
    """Breadth-first closure of `start` under adding generators."""
    seen = set(start)
    queue = deque(seen)
    while queue:
        e = queue.popleft()
        for g in generators:
            nxt = group.add(e, g)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _join_element(group: GroupSpec, members: FrozenSet[GroupElement],
                  x: GroupElement) -> set:
    """Elements of <members, x> for a subgroup `members`: union of cosets m*x + members."""
    result = set(members)
    step = x
    while step not in members:
        result.update(group.add(e, step) for e in members)
        step = group.add(step, x)
    return result


def _build(group: GroupSpec, generators: Sequence[GroupElement], elements: Iterable[GroupElement],
           weight) -> Subgroup:
    return Subgroup(group, tuple(generators), tuple(sorted(elements)), weight)


def subgroup_closure(ambient: GroupSpec, generators: Sequence[Sequence[int]], weight=1) -> Subgroup:
    """Smallest subgroup containing the generators, elements sorted lex."""
    weight = as_weight(weight)
    gens = tuple(ambient.reduce(g) for g in generators)
    elements = _close(ambient, [ambient.zero], gens)
    return _build(ambient, gens, elements, weight)


def subgroup_from_elements(ambient: GroupSpec, elements: Iterable[Sequence[int]], weight=1) -> Subgroup:
    """Wrap a known element set; generators are picked greedily in lex order."""
    weight = as_weight(weight)
    members = {ambient.reduce(e) for e in elements}
    members.add(ambient.zero)
    gens: List[GroupElement] = []
    span = frozenset([ambient.zero])
    for e in sorted(members):
        if e not in span:
            gens.append(e)
            span = frozenset(_join_element(ambient, span, e))
    if span != members:
        raise InvalidInputError("element set is not closed under addition")
    return _build(ambient, gens, members, weight)


def join(sub: Subgroup, x: Sequence[int]) -> Subgroup:
    """<sub, x> with sub's weight."""
    x = sub.ambient.reduce(x)
    if x in sub:
        return sub
    elements = _join_element(sub.ambient, sub.members, x)
    return _build(sub.ambient, sub.generators + (x,), elements, sub.weight)


def trivial_subgroup(ambient: GroupSpec, weight=1) -> Subgroup:
    return subgroup_closure(ambient, [], weight)


def full_subgroup(ambient: GroupSpec, weight=1) -> Subgroup:
    gens = []
    for i in range(ambient.rank):
        unit = [0] * ambient.rank
        unit[i] = 1
        gens.append(unit)
    return subgroup_closure(ambient, gens, weight)


def is_subgroup(group: GroupSpec, elements: Iterable[Sequence[int]]) -> bool:
    """Exhaustive check: identity present, closed under addition and negation."""
    members = {group.reduce(e) for e in elements}
    if group.zero not in members:
        return False
    for a in members:
        if group.neg(a) not in members:
            return False
        for b in members:
            if group.add(a, b) not in members:
                return False
    return True


def enumerate_subgroups(group: GroupSpec, weight=1) -> List[Subgroup]:
    """
    Every subgroup of `group`, found by joining one element at a time
    starting from the trivial subgroup. Sorted by (size, elements).
    """
    weight = as_weight(weight)
    start = trivial_subgroup(group, weight)
    found: Dict[FrozenSet[GroupElement], Subgroup] = {start.members: start}
    frontier = [start]
    while frontier:
        nxt = []
        for sub in frontier:
            for x in group.element_list:
                if x in sub:
                    continue
                members = frozenset(_join_element(group, sub.members, x))
                if members not in found:
                    cand = _build(group, sub.generators + (x,), members, weight)
                    found[members] = cand
                    nxt.append(cand)
        frontier = nxt
    subgroups = sorted(found.values(), key=lambda s: (s.size, s.elements))
    logger.debug(f"{len(subgroups)} subgroups of Z{list(group.orders)}")
    return subgroups


def coset_transversal(ambient_elements: Sequence[Sequence[int]], sub: Subgroup) -> List[GroupElement]:
    """
    One representative per coset of `sub` inside the subgroup spanned by
    ambient_elements, lex-first representative of each coset (so the
    identity comes first).
    """
    group = sub.ambient
    ambient = sorted({group.reduce(a) for a in ambient_elements})
    ambient_set = set(ambient)
    if not sub.members <= ambient_set:
        raise ContainmentError("subgroup is not contained in the ambient set")
    covered = set()
    reps: List[GroupElement] = []
    for a in ambient:
        if a in covered:
            continue
        reps.append(a)
        coset = {group.add(a, e) for e in sub.elements}
        if not coset <= ambient_set:
            raise InvalidInputError("ambient set is not closed under the subgroup action")
        covered.update(coset)
    if len(reps) * sub.size != len(ambient):
        raise InvalidInputError("ambient set is not a union of cosets")
    return reps


# =========================================================================
# MEASURES
# =========================================================================

def _check_ambient(phase: GroupSpec, sub: Subgroup):
    if phase.orders != sub.ambient.orders:
        raise InvalidInputError(
            f"subgroup lives in Z{list(sub.ambient.orders)}, not Z{list(phase.orders)}")


def covolume(phase: GroupSpec, sub: Subgroup) -> Fraction:
    """s(sub) = M / (w * |sub|) with M the total Haar mass of `phase`."""
    _check_ambient(phase, sub)
    return phase.total_mass / (sub.weight * sub.size)


def quotient_point_mass(phase: GroupSpec, sub: Subgroup) -> Fraction:
    """Mass of one coset under the measure that makes Weil's formula hold."""
    _check_ambient(phase, sub)
    cosets = phase.order // sub.size
    return phase.total_mass / (cosets * sub.weight * sub.size)


def weil_verify(phase: GroupSpec, sub: Subgroup, F) -> float:
    """
    |integral over phase of F - sum over cosets mu_Q * sum_sub w * F(chi + lambda)|.
    """
    _check_ambient(phase, sub)
    F = np.asarray(F, dtype=complex).reshape(-1)
    if F.shape[0] != phase.order:
        raise InvalidInputError(f"function has {F.shape[0]} values, phase space has {phase.order}")
    if not np.all(np.isfinite(F)):
        raise InvalidInputError("function values must be finite")

    total = float(phase.point_mass) * F.sum()

    reps = np.array(coset_transversal(phase.element_list, sub), dtype=np.int64)
    shifted = reps[:, None, :] + sub.element_array[None, :, :]
    inner = float(sub.weight) * F[phase.index_array(shifted)].sum(axis=1)
    quotient = float(quotient_point_mass(phase, sub)) * inner.sum()

    residual = float(abs(total - quotient))
    logger.debug(f"Weil residual {residual:.3e} over {len(reps)} cosets")
    return residual


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s | %(levelname)-8s | %(name)-20s | %(message)s')
    g = make_group([6, 6])
    lam = subgroup_closure(g, [(2, 0), (0, 3)])
    print(f"Lambda = {lam.elements}")
    print(f"transversal = {coset_transversal(g.elements(), lam)}")
    print(f"subgroups of Z6 x Z6: {len(enumerate_subgroups(g))}")
