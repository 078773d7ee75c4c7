"""Labeled diagram structures on a finite ground set [k].

The labeled side of the species picture: every structure is an explicit
assignment of roles to the labels 0..k-1, a partition of the labels into
vertices, and (for Feynman structures) a contraction pairing every barred label
with a plain one. Quotienting by relabeling recovers the unlabeled classes of
``diagrams`` with orbit sizes k!/aut, which makes this module the brute-force
oracle for the class enumerators and the closed automorphism formulas.

Roles by flavor:

* reversion: ``source`` (the external u leg), ``ybar`` (a Y vertex),
  ``hbar`` and ``h`` (the ubar leg and the u legs of an H vertex);
* lagrange-good: ``source``, ``gbar`` and ``g`` (legs of an XG vertex);
* composition (pre-Feynman, no contraction): ``sbar`` and ``t`` (the F
  vertex), ``tbar`` and ``u`` (the G vertices).
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Iterator, Optional, Sequence

from sympy.utilities.iterables import multiset_partitions

from .diagrams import (
    CircuitClass,
    CompositionClass,
    Flavor,
    LGTreeClass,
    TreeClass,
    aut_order,
    enumerate_composition_classes,
    enumerate_lg_circuits,
    enumerate_lg_trees,
    enumerate_reversion_trees,
    enumerate_vacuum_circuits,
)
from .exceptions import DomainError, ResourceLimitError

logger = logging.getLogger(__name__)

BAR_ROLES = frozenset({"ybar", "hbar", "gbar", "sbar", "tbar"})
PLAIN_ROLES = frozenset({"source", "h", "g", "t", "u"})

# Default hard cap on the ground-set size; the labeled search is factorial.
DEFAULT_MAX_SIZE = 10

StructureType = tuple[int, int]


@dataclass(frozen=True)
class LabeledStructure:
    """
    Explicit structure on the ground set {0, ..., size-1}.

    ``blocks`` is the vertex partition with every block sorted and the blocks
    sorted by their least label; ``contraction`` lists (bar, plain) pairs
    sorted by bar label and is empty for pre-Feynman structures.
    """

    size: int
    flavor: Flavor
    roles: tuple[str, ...]
    blocks: tuple[tuple[int, ...], ...]
    contraction: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "blocks", tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        )
        object.__setattr__(self, "contraction", tuple(sorted(self.contraction)))

    def labels_with_role(self, role: str) -> list[int]:
        return [x for x, r in enumerate(self.roles) if r == role]

    def bar_of(self, block: Sequence[int]) -> Optional[int]:
        bars = [x for x in block if self.roles[x] in BAR_ROLES]
        return bars[0] if bars else None

    @property
    def vertex_count(self) -> int:
        return len(self.blocks)

    def validate(self) -> None:
        """
        Check the structural constraints.

        Raises:
            DomainError: On overlapping or missing labels, malformed blocks
                or a contraction that is not a bar-to-plain bijection.
        """
        if len(self.roles) != self.size:
            raise DomainError(f"{len(self.roles)} roles for {self.size} labels")
        covered = sorted(x for block in self.blocks for x in block)
        if covered != list(range(self.size)):
            raise DomainError("blocks do not partition the ground set")
        for block in self.blocks:
            bars = [x for x in block if self.roles[x] in BAR_ROLES]
            if [self.roles[x] for x in block] == ["source"]:
                continue
            if len(bars) != 1:
                raise DomainError(f"block {block} must contain exactly one barred label")
            legs = len(block) - 1
            role = self.roles[bars[0]]
            if role == "ybar" and legs != 0:
                raise DomainError(f"Y vertex {block} has legs")
            if role == "hbar" and legs < 2:
                raise DomainError(f"H vertex {block} has fewer than two legs")
            if role == "tbar" and legs < 1:
                raise DomainError(f"G vertex {block} has no legs")
        if self.flavor == "composition":
            return
        bars = {x for x, r in enumerate(self.roles) if r in BAR_ROLES}
        plains = {x for x, r in enumerate(self.roles) if r in PLAIN_ROLES}
        paired_bars = [b for b, _ in self.contraction]
        paired_plains = [p for _, p in self.contraction]
        if sorted(paired_bars) != sorted(bars) or sorted(paired_plains) != sorted(plains):
            raise DomainError("contraction is not a bijection between barred and plain labels")


def _set_partitions(elements: Sequence[int]) -> Iterator[list[list[int]]]:
    if not elements:
        yield []
        return
    for parts in multiset_partitions(len(elements)):
        yield [[elements[i] for i in part] for part in parts]


def _check_size(k: int, max_size: int) -> None:
    if k < 0:
        raise DomainError(f"ground set size must be >= 0, got {k}")
    if k > max_size:
        raise ResourceLimitError(
            f"labeled enumeration on {k} labels exceeds the limit of {max_size}"
        )


def labeled_enumerate(
    k: int,
    flavor: Flavor,
    type_: StructureType = (1, 0),
    max_size: int = DEFAULT_MAX_SIZE,
) -> list[LabeledStructure]:
    """
    Every connected structure of the flavor and type on the ground set [k].

    Args:
        k: Ground set size.
        flavor: ``reversion``, ``lagrange-good`` or ``composition``.
        type_: (number of u sources, number of ubar sources). Reversion and
            Lagrange-Good support (1, 0) trees and (0, 0) vacuum circuits;
            composition takes (1, d), the structures of X-degree d.
        max_size: Guard on k.

    Returns:
        The structures in a deterministic order.

    Raises:
        ResourceLimitError: If k exceeds ``max_size``.
        DomainError: If the flavor/type combination is not supported.
    """
    _check_size(k, max_size)
    if flavor == "composition":
        structures = list(_enumerate_composition(k, type_))
    elif flavor in ("reversion", "lagrange-good"):
        if type_ not in ((1, 0), (0, 0)):
            raise DomainError(f"{flavor} structures of type {type_} are not enumerated")
        structures = list(_enumerate_feynman(k, flavor, type_[0]))
    else:
        raise DomainError(f"unknown flavor {flavor!r}")
    logger.debug("labeled_enumerate(%d, %s, %s): %d structures", k, flavor, type_, len(structures))
    return structures


def _vertex_roles(flavor: Flavor, block: Sequence[int]) -> Optional[list[tuple[int, str, str]]]:
    """Possible (bar label, bar role, leg role) designations of a block."""
    if flavor == "reversion":
        if len(block) == 1:
            return [(block[0], "ybar", "h")]
        if len(block) == 2:
            return None
        return [(x, "hbar", "h") for x in block]
    return [(x, "gbar", "g") for x in block]


def _enumerate_feynman(k: int, flavor: Flavor, n_sources: int) -> Iterator[LabeledStructure]:
    if k == 0:
        if n_sources == 0:
            yield LabeledStructure(0, flavor, (), ())
        return
    labels = list(range(k))
    for sources in combinations(labels, n_sources):
        rest = [x for x in labels if x not in sources]
        for blocks in _set_partitions(rest):
            options = [_vertex_roles(flavor, block) for block in blocks]
            if any(opt is None for opt in options):
                continue
            legs = sum(len(block) - 1 for block in blocks)
            if len(blocks) != n_sources + legs:
                continue
            for choice in product(*options):
                roles = ["source"] * k
                bar_labels = []
                for block, (bar, bar_role, leg_role) in zip(blocks, choice):
                    for x in block:
                        roles[x] = leg_role
                    roles[bar] = bar_role
                    bar_labels.append(bar)
                plain_labels = [x for x in labels if roles[x] in PLAIN_ROLES]
                all_blocks = [[s] for s in sources] + blocks
                for image in permutations(plain_labels):
                    structure = LabeledStructure(
                        k, flavor, tuple(roles), tuple(tuple(b) for b in all_blocks),
                        tuple(zip(bar_labels, image)),
                    )
                    if canonical_class(structure) is not None:
                        yield structure


def _enumerate_composition(k: int, type_: StructureType) -> Iterator[LabeledStructure]:
    n_sources, d = type_
    if n_sources != 1 or d < 1:
        raise DomainError(f"composition structures have type (1, d) with d >= 1, got {type_}")
    twice_m = k - 1 - d
    if twice_m < 2 or twice_m % 2:
        return
    m = twice_m // 2
    if m > d:
        return
    labels = list(range(k))
    for sbar in labels:
        rest = [x for x in labels if x != sbar]
        for ts in combinations(rest, m):
            remaining = [x for x in rest if x not in ts]
            for blocks in _set_partitions(remaining):
                if len(blocks) != m or any(len(b) < 2 for b in blocks):
                    continue
                for bars in product(*blocks):
                    roles = ["u"] * k
                    roles[sbar] = "sbar"
                    for t in ts:
                        roles[t] = "t"
                    for bar in bars:
                        roles[bar] = "tbar"
                    yield LabeledStructure(
                        k, "composition", tuple(roles),
                        ((sbar, *ts), *(tuple(b) for b in blocks)),
                    )


class _VertexGraph:
    """Vertices of a Feynman structure with their parent and child links."""

    def __init__(self, structure: LabeledStructure):
        self.structure = structure
        self.owner = {x: v for v, block in enumerate(structure.blocks) for x in block}
        self.bar = [structure.bar_of(block) for block in structure.blocks]
        self.plain_to_bar = {p: b for b, p in structure.contraction}
        self.bar_to_plain = dict(structure.contraction)

    def legs(self, v: int) -> list[int]:
        return [x for x in self.structure.blocks[v] if x != self.bar[v]]

    def child(self, leg: int) -> int:
        return self.owner[self.plain_to_bar[leg]]

    def parent(self, v: int) -> int:
        return self.owner[self.bar_to_plain[self.bar[v]]]

    def subtree(self, v: int, seen: set[int]):
        if v in seen:
            return None
        seen.add(v)
        kids = []
        for leg in self.legs(v):
            kid = self.subtree(self.child(leg), seen)
            if kid is None:
                return None
            kids.append(kid)
        if self.structure.flavor == "reversion":
            return TreeClass(tuple(kids))
        return LGTreeClass(tuple(kids))


def canonical_class(structure: LabeledStructure):
    """
    Unlabeled class of a structure, or None when it is disconnected.

    Reversion and Lagrange-Good structures map to tree classes (one source)
    or circuit classes (no source); composition structures map to their G
    profile. The empty structure maps to None as well.
    """
    if structure.flavor == "composition":
        sizes = Counter(
            len(block) - 1
            for block in structure.blocks
            if any(structure.roles[x] == "tbar" for x in block)
        )
        return CompositionClass.from_profile(dict(sizes))
    if structure.size == 0:
        return None
    graph = _VertexGraph(structure)
    n_vertices = len(structure.blocks)
    sources = [v for v, b in enumerate(graph.bar) if b is None]
    if sources:
        (source,) = sources
        seen = {source}
        tree = graph.subtree(graph.child(structure.blocks[source][0]), seen)
        if tree is None or len(seen) != n_vertices:
            return None
        return tree
    cycle = _find_cycle(graph, 0)
    seen = set(cycle)
    forward = list(reversed(cycle))
    decorations = []
    for position, v in enumerate(forward):
        nxt = forward[(position + 1) % len(forward)]
        cycle_leg = graph.bar_to_plain[graph.bar[nxt]]
        kids = []
        for leg in graph.legs(v):
            if leg == cycle_leg:
                continue
            kid = graph.subtree(graph.child(leg), seen)
            if kid is None:
                return None
            kids.append(kid)
        decorations.append(tuple(kids))
    if len(seen) != n_vertices:
        return None
    return CircuitClass(tuple(decorations), structure.flavor)


def _find_cycle(graph: _VertexGraph, start: int) -> list[int]:
    order: dict[int, int] = {}
    path = []
    v = start
    while v not in order:
        order[v] = len(path)
        path.append(v)
        v = graph.parent(v)
    return path[order[v]:]


def labeled_aut_order(structure: LabeledStructure) -> int:
    """
    Number of role-preserving label permutations that fix the structure.

    Only permutations inside each role class are tried, so the search is the
    product of the factorials of the role-class sizes.
    """
    by_role: dict[str, list[int]] = {}
    for x, role in enumerate(structure.roles):
        by_role.setdefault(role, []).append(x)
    classes = list(by_role.values())
    blocks = {frozenset(b) for b in structure.blocks}
    contraction = set(structure.contraction)
    count = 0
    for images in product(*(permutations(c) for c in classes)):
        mapping = {}
        for source, image in zip(classes, images):
            mapping.update(zip(source, image))
        if {frozenset(mapping[x] for x in b) for b in blocks} != blocks:
            continue
        if {(mapping[b], mapping[p]) for b, p in contraction} != contraction:
            continue
        count += 1
    return count


def quotient_classes(structures: Sequence[LabeledStructure]) -> dict[str, int]:
    """Orbit sizes: canonical class encoding -> number of labeled structures."""
    counts: Counter = Counter()
    for structure in structures:
        cls = canonical_class(structure)
        counts["" if cls is None else cls.encoding] += 1
    return dict(counts)


def label_count(obj) -> int:
    """Size of the ground set carried by any labeled realization of a class."""
    if isinstance(obj, TreeClass):
        return 1 + _hanging_labels(obj)
    if isinstance(obj, LGTreeClass):
        return 1 + _hanging_labels(obj)
    if isinstance(obj, CircuitClass):
        return sum(
            2 + len(dec) + sum(_hanging_labels(t) for t in dec) for dec in obj.decorations
        )
    if isinstance(obj, CompositionClass):
        return 1 + 2 * obj.m + obj.degree
    raise TypeError(f"not a diagram class: {type(obj).__name__}")


def _hanging_labels(tree) -> int:
    """Labels of a subtree below its parent leg: its vertices and their legs."""
    if isinstance(tree, TreeClass) and tree.is_leaf:
        return 1
    return 1 + tree.arity + sum(_hanging_labels(child) for child in tree.children)


def classes_up_to_size(flavor: Flavor, type_: StructureType, max_k: int) -> list:
    """Unlabeled classes whose labeled realizations have at most ``max_k`` labels."""
    half = max(max_k // 2, 1)
    if flavor == "composition":
        candidates = enumerate_composition_classes(type_[1])
    elif flavor == "reversion":
        candidates = enumerate_reversion_trees(half) if type_ == (1, 0) else enumerate_vacuum_circuits(half)
    elif flavor == "lagrange-good":
        candidates = enumerate_lg_trees(half) if type_ == (1, 0) else enumerate_lg_circuits(half)
    else:
        raise DomainError(f"unknown flavor {flavor!r}")
    return [c for c in candidates if label_count(c) <= max_k]


def hurewitz_sums(
    flavor: Flavor,
    type_: StructureType,
    max_k: int,
    weight: Fraction,
    max_size: int = DEFAULT_MAX_SIZE,
) -> tuple[Fraction, Fraction]:
    """
    Both sides of sum_classes w^k/aut = sum_k (1/k!) sum_{structures on [k]} w^k.

    Returns:
        (class side, labeled side) as exact rationals.
    """
    _check_size(max_k, max_size)
    weight = Fraction(weight)
    class_side = sum(
        (weight ** label_count(c) / aut_order(c) for c in classes_up_to_size(flavor, type_, max_k)),
        Fraction(0),
    )
    labeled_side = Fraction(0)
    for k in range(1, max_k + 1):
        structures = labeled_enumerate(k, flavor, type_, max_size)
        labeled_side += weight**k * len(structures) / math.factorial(k)
    return class_side, labeled_side


def satisfies_vertex_bound(structure: LabeledStructure, ubar_sources: int = 0) -> bool:
    """
    Vertex count of a reversion structure is at most 2 (#Y vertices + #ubar sources).

    Both sides count vertices, i.e. blocks of the partition, not labels: a
    Y vertex is a block holding a ybar label.
    """
    y_vertices = len(structure.labels_with_role("ybar"))
    return structure.vertex_count <= 2 * (y_vertices + ubar_sources)
