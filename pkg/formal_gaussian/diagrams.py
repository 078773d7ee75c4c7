"""Unlabeled diagram classes, their automorphism orders and Feynman amplitudes.

Three grammars are covered:

* composition: one F vertex fed by m G vertices, classified by the profile
  (m_q) of G arities;
* reversion: trees of H vertices (arity >= 2) with Y leaves, and vacuum
  circuits of H vertices decorated by such trees;
* Lagrange-Good: trees of XG vertices of any arity, and circuits of XG
  vertices decorated by such trees.

Every class object is canonical on construction, so isomorphic shapes built in
different orders compare equal. Amplitudes are evaluated by ``FeynmanRules``,
which memoizes subtree values per system.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import chain, combinations_with_replacement, product
from typing import Iterator, Literal, Optional, Sequence, Union

from sympy.utilities.iterables import least_rotation, multiset_permutations, partitions

from .exceptions import DimensionMismatchError, DomainError, IndexRangeError, TruncationError
from .series import (
    Series,
    SeriesMatrix,
    SeriesSystem,
    degree,
    homogeneous_part,
    index_list,
    multiindex_factorial,
    trace,
)
from .wick import CovarianceSpec

logger = logging.getLogger(__name__)

Flavor = Literal["composition", "reversion", "lagrange-good"]
CircuitFlavor = Literal["reversion", "lagrange-good"]


# --- composition -----------------------------------------------------------


@dataclass(frozen=True)
class CompositionClass:
    """Contributing composition shape: one F vertex of arity m fed by G vertices."""

    g_profile: tuple[tuple[int, int], ...]

    def __post_init__(self):
        profile = tuple(sorted((int(q), int(m)) for q, m in self.g_profile if m))
        if not profile or any(q < 1 or m < 0 for q, m in profile):
            raise DomainError(f"invalid G profile {self.g_profile}")
        object.__setattr__(self, "g_profile", profile)

    @classmethod
    def from_profile(cls, profile: dict[int, int]) -> "CompositionClass":
        return cls(tuple(profile.items()))

    @property
    def m(self) -> int:
        """Arity of the F vertex (number of G vertices)."""
        return sum(m for _, m in self.g_profile)

    @property
    def degree(self) -> int:
        """X-degree d = sum of q * m_q."""
        return sum(q * m for q, m in self.g_profile)

    @property
    def arities(self) -> tuple[int, ...]:
        """G arities in nondecreasing order, one entry per G vertex."""
        return tuple(q for q, m in self.g_profile for _ in range(m))

    @property
    def encoding(self) -> str:
        return "F{" + ",".join(f"{q}:{m}" for q, m in self.g_profile) + "}"


def enumerate_composition_classes(d: int) -> list[CompositionClass]:
    """All composition classes of X-degree d, one per integer partition of d."""
    if d < 1:
        raise DomainError(f"composition degree must be >= 1, got {d}")
    return [CompositionClass.from_profile(dict(p)) for p in partitions(d)]


def aut_order_composition(c: CompositionClass) -> int:
    """m! * prod_q (m_q! * (q!)^m_q)."""
    order = math.factorial(c.m)
    for q, m in c.g_profile:
        order *= math.factorial(m) * math.factorial(q) ** m
    return order


# --- rooted trees ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _RootedTree:
    children: tuple = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.children, key=lambda child: child.encoding))
        for child in ordered:
            if type(child) is not type(self):
                raise DomainError(f"cannot hang {type(child).__name__} below {type(self).__name__}")
        object.__setattr__(self, "children", ordered)

    @property
    def encoding(self) -> str:
        raise NotImplementedError

    @property
    def arity(self) -> int:
        return len(self.children)

    def child_multiplicities(self) -> Counter:
        return Counter(self.children)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _RootedTree):
            return NotImplemented
        return type(self) is type(other) and self.encoding == other.encoding

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.encoding))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.encoding})"


class TreeClass(_RootedTree):
    """Reversion tree: a Y leaf, or an H node with at least two subtrees."""

    def __post_init__(self):
        super().__post_init__()
        if len(self.children) == 1:
            raise DomainError("an H node needs at least two children")

    @cached_property
    def encoding(self) -> str:
        if not self.children:
            return "L"
        return "H(" + ",".join(child.encoding for child in self.children) + ")"

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @cached_property
    def leaves(self) -> int:
        return 1 if self.is_leaf else sum(child.leaves for child in self.children)

    @cached_property
    def internal_nodes(self) -> int:
        return 0 if self.is_leaf else 1 + sum(c.internal_nodes for c in self.children)

    @cached_property
    def max_arity(self) -> int:
        return max([self.arity, *(c.max_arity for c in self.children)])


LEAF = TreeClass()


class LGTreeClass(_RootedTree):
    """Lagrange-Good tree: an XG node with any number of subtrees."""

    @cached_property
    def encoding(self) -> str:
        return "G(" + ",".join(child.encoding for child in self.children) + ")"

    @cached_property
    def nodes(self) -> int:
        return 1 + sum(child.nodes for child in self.children)

    @cached_property
    def max_arity(self) -> int:
        return max([self.arity, *(c.max_arity for c in self.children)])


XG_LEAF = LGTreeClass()

Tree = Union[TreeClass, LGTreeClass]


def _tree_size(tree: Tree) -> int:
    return tree.leaves if isinstance(tree, TreeClass) else tree.nodes


def _multisets(pool_by_size: dict[int, list], total: int, min_parts: int) -> Iterator[tuple]:
    """Multisets of pooled objects whose sizes add up to ``total``."""
    if total == 0:
        if min_parts == 0:
            yield ()
        return
    for part in partitions(total):
        part = dict(part)
        if sum(part.values()) < min_parts:
            continue
        if any(not pool_by_size.get(size) for size in part):
            continue
        choices = [
            list(combinations_with_replacement(pool_by_size[size], mult))
            for size, mult in sorted(part.items())
        ]
        for combo in product(*choices):
            yield tuple(chain.from_iterable(combo))


@lru_cache(maxsize=None)
def _reversion_trees(leaves: int) -> tuple[TreeClass, ...]:
    if leaves == 1:
        return (LEAF,)
    pool = {size: list(_reversion_trees(size)) for size in range(1, leaves)}
    return tuple(TreeClass(kids) for kids in _multisets(pool, leaves, 2))


@lru_cache(maxsize=None)
def _lg_trees(nodes: int) -> tuple[LGTreeClass, ...]:
    if nodes == 1:
        return (XG_LEAF,)
    pool = {size: list(_lg_trees(size)) for size in range(1, nodes)}
    return tuple(LGTreeClass(kids) for kids in _multisets(pool, nodes - 1, 0))


def enumerate_reversion_trees(max_leaves: int) -> list[TreeClass]:
    """Canonical reversion trees with at most ``max_leaves`` leaves, by leaf count."""
    if max_leaves < 1:
        raise DomainError(f"max_leaves must be >= 1, got {max_leaves}")
    trees = [t for size in range(1, max_leaves + 1) for t in _reversion_trees(size)]
    logger.debug("enumerate_reversion_trees(%d): %d classes", max_leaves, len(trees))
    return trees


def enumerate_lg_trees(max_nodes: int) -> list[LGTreeClass]:
    """Canonical Lagrange-Good trees with at most ``max_nodes`` XG nodes."""
    if max_nodes < 1:
        raise DomainError(f"max_nodes must be >= 1, got {max_nodes}")
    trees = [t for size in range(1, max_nodes + 1) for t in _lg_trees(size)]
    logger.debug("enumerate_lg_trees(%d): %d classes", max_nodes, len(trees))
    return trees


def _decoration_aut(decoration: Sequence[Tree]) -> int:
    order = 1
    for child, count in Counter(decoration).items():
        order *= math.factorial(count) * aut_order_tree(child) ** count
    return order


@lru_cache(maxsize=None)
def aut_order_tree(t: Tree) -> int:
    """
    Automorphism order of a rooted tree class.

    At every node the children are grouped by class c with multiplicity m_c,
    and the node contributes prod_c aut(c)^m_c * m_c!.
    """
    return _decoration_aut(t.children)


def aut_order_lg_tree(t: LGTreeClass) -> int:
    return aut_order_tree(t)


# --- circuits --------------------------------------------------------------


def _decoration_encoding(decoration: Sequence[Tree]) -> str:
    return "{" + ",".join(tree.encoding for tree in decoration) + "}"


@dataclass(frozen=True, eq=False)
class CircuitClass:
    """
    Oriented cycle of vertices, each decorated by a multiset of hanging trees.

    Reversion circuits carry H vertices, so every decoration is nonempty (the
    vertex has the two cycle legs plus at least one tree leg). Lagrange-Good
    circuits allow empty decorations. The stored rotation is the
    lexicographically least one of the decoration encodings.
    """

    decorations: tuple[tuple[Tree, ...], ...]
    flavor: CircuitFlavor = "reversion"
    _encodings: tuple[str, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.decorations:
            raise DomainError("a circuit needs at least one vertex")
        tree_type = TreeClass if self.flavor == "reversion" else LGTreeClass
        decorations = []
        for decoration in self.decorations:
            ordered = tuple(sorted(decoration, key=lambda tree: tree.encoding))
            if any(type(tree) is not tree_type for tree in ordered):
                raise DomainError(f"{self.flavor} circuits carry {tree_type.__name__} decorations")
            if self.flavor == "reversion" and not ordered:
                raise DomainError("every H vertex on a reversion circuit needs a hanging tree")
            decorations.append(ordered)
        encodings = [_decoration_encoding(dec) for dec in decorations]
        shift = least_rotation(encodings, key=str)
        decorations = decorations[shift:] + decorations[:shift]
        encodings = encodings[shift:] + encodings[:shift]
        object.__setattr__(self, "decorations", tuple(decorations))
        object.__setattr__(self, "_encodings", tuple(encodings))

    @property
    def length(self) -> int:
        return len(self.decorations)

    @property
    def encoding(self) -> str:
        return "C[" + "|".join(self._encodings) + "]"

    @property
    def rotational_symmetry(self) -> int:
        """Number of rotations mapping the decorated cycle to itself."""
        seq = self._encodings
        return sum(1 for k in range(len(seq)) if seq[k:] + seq[:k] == seq)

    @property
    def degree(self) -> int:
        """Y-degree (reversion) or X-degree (Lagrange-Good) of the amplitude."""
        weight = sum(_tree_size(tree) for dec in self.decorations for tree in dec)
        return weight if self.flavor == "reversion" else weight + self.length

    @property
    def max_arity(self) -> int:
        return max(
            [1 + len(dec) for dec in self.decorations]
            + [tree.max_arity for dec in self.decorations for tree in dec]
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CircuitClass):
            return NotImplemented
        return self.flavor == other.flavor and self._encodings == other._encodings

    def __hash__(self) -> int:
        return hash((self.flavor, self._encodings))

    def __repr__(self) -> str:
        return f"CircuitClass({self.encoding}, {self.flavor})"


LGCircuitClass = CircuitClass


def aut_order_circuit(c: CircuitClass) -> int:
    """Rotational symmetry of the decorated cycle times the decoration orders."""
    order = c.rotational_symmetry
    for decoration in c.decorations:
        order *= _decoration_aut(decoration)
    return order


def aut_order_lg_circuit(c: CircuitClass) -> int:
    return aut_order_circuit(c)


def _ordered_compositions(total: int) -> Iterator[list[int]]:
    for part in partitions(total):
        parts = [size for size, mult in sorted(dict(part).items()) for _ in range(mult)]
        yield from multiset_permutations(parts)


def _enumerate_circuits(flavor: CircuitFlavor, max_degree: int) -> list[CircuitClass]:
    if flavor == "reversion":
        pool = {s: list(_reversion_trees(s)) for s in range(1, max_degree + 1)}
        decorations = {w: list(_multisets(pool, w, 1)) for w in range(1, max_degree + 1)}
    else:
        pool = {s: list(_lg_trees(s)) for s in range(1, max_degree)}
        decorations = {w: list(_multisets(pool, w - 1, 0)) for w in range(1, max_degree + 1)}
    seen: dict[CircuitClass, None] = {}
    for total in range(1, max_degree + 1):
        for weights in _ordered_compositions(total):
            for cycle in product(*(decorations[w] for w in weights)):
                seen.setdefault(CircuitClass(tuple(cycle), flavor), None)
    circuits = sorted(seen, key=lambda c: (c.degree, c.encoding))
    logger.debug("enumerate %s circuits(%d): %d classes", flavor, max_degree, len(circuits))
    return circuits


def enumerate_vacuum_circuits(max_leaves: int) -> list[CircuitClass]:
    """Reversion vacuum circuits with at most ``max_leaves`` Y leaves."""
    if max_leaves < 1:
        raise DomainError(f"max_leaves must be >= 1, got {max_leaves}")
    return _enumerate_circuits("reversion", max_leaves)


def enumerate_lg_circuits(max_degree: int) -> list[CircuitClass]:
    """Lagrange-Good circuits of X-degree at most ``max_degree``."""
    if max_degree < 1:
        raise DomainError(f"max_degree must be >= 1, got {max_degree}")
    return _enumerate_circuits("lagrange-good", max_degree)


def canonicalize(obj):
    """
    Canonical representative of a class built from any child or rotation order.

    Rebuilding goes bottom-up, so nested children given in arbitrary order are
    sorted at every level.
    """
    if isinstance(obj, _RootedTree):
        return type(obj)(tuple(canonicalize(child) for child in obj.children))
    if isinstance(obj, CircuitClass):
        return CircuitClass(
            tuple(tuple(canonicalize(t) for t in dec) for dec in obj.decorations), obj.flavor
        )
    if isinstance(obj, CompositionClass):
        return CompositionClass(obj.g_profile)
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


# --- Feynman rules ---------------------------------------------------------


Vector = list[Series]


class FeynmanRules:
    """
    Memoized amplitude evaluation for one vertex system.

    Reversion rules: every vertex of arity p at index a carries -F^{[p]}, each
    line from a u leg of index c to a ubar leg of index a carries A^{-1}[c][a],
    and a leaf is the source Y_a. Lagrange-Good rules: an XG vertex at index a
    carries X_a * G^{[p]}, lines carry the identity.
    """

    def __init__(
        self,
        vertices: SeriesSystem,
        trunc_degree: int,
        flavor: CircuitFlavor,
        propagator: Optional[Sequence[Sequence[Fraction]]] = None,
    ):
        if len(vertices) != vertices.n_vars:
            raise DimensionMismatchError("Feynman rules need a square system")
        self._vertices = vertices
        self._n = len(vertices)
        self._degree = trunc_degree
        self._flavor = flavor
        self._sign = -1 if flavor == "reversion" else 1
        self._propagator = propagator
        self._tensor_cache: dict[tuple[int, int], list[tuple[tuple[int, ...], Fraction]]] = {}
        self._tree_cache: dict[Tree, Vector] = {}

    @classmethod
    def for_reversion(
        cls, F: SeriesSystem, cov: CovarianceSpec, trunc_degree: Optional[int] = None
    ) -> "FeynmanRules":
        degree_ = F.trunc_degree if trunc_degree is None else trunc_degree
        return cls(F, degree_, "reversion", cov.A_inv)

    @classmethod
    def for_lagrange_good(
        cls, G: SeriesSystem, trunc_degree: Optional[int] = None
    ) -> "FeynmanRules":
        return cls(G, G.trunc_degree if trunc_degree is None else trunc_degree, "lagrange-good")

    @property
    def trunc_degree(self) -> int:
        return self._degree

    def _zero(self) -> Series:
        return Series.zero(self._n, self._degree)

    def _variable(self, a: int) -> Series:
        return Series.variable(a, self._n, self._degree)

    def tensor_entries(self, a: int, arity: int) -> list[tuple[tuple[int, ...], Fraction]]:
        """Nonzero signed tensor entries (js, value) of component a and given arity."""
        key = (a, arity)
        cached = self._tensor_cache.get(key)
        if cached is not None:
            return cached
        if arity > self._vertices.trunc_degree:
            raise TruncationError(
                f"vertex of arity {arity} needs tensors above degree {self._vertices.trunc_degree}"
            )
        entries = []
        for alpha, c in self._vertices[a].coeffs.items():
            if sum(alpha) != arity:
                continue
            value = self._sign * c * multiindex_factorial(alpha)
            for js in multiset_permutations(index_list(alpha)):
                entries.append((tuple(js), value))
        self._tensor_cache[key] = entries
        return entries

    def _contract(self, a: int, branches: Sequence[Vector]) -> Series:
        total = self._zero()
        for js, value in self.tensor_entries(a, len(branches)):
            term = Series.constant(value, self._n, self._degree)
            for branch, j in zip(branches, js):
                term = term * branch[j]
                if term.is_zero():
                    break
            total = total + term
        return total

    def _contract_open(self, a: int, branches: Sequence[Vector]) -> Vector:
        row = [self._zero() for _ in range(self._n)]
        for js, value in self.tensor_entries(a, len(branches) + 1):
            term = Series.constant(value, self._n, self._degree)
            for branch, j in zip(branches, js[1:]):
                term = term * branch[j]
                if term.is_zero():
                    break
            row[js[0]] = row[js[0]] + term
        return row

    def _dress(self, values: Vector) -> Vector:
        """Attach the line above a vertex: A^{-1} for reversion, X_a for Lagrange-Good."""
        if self._flavor == "reversion":
            out = []
            for c in range(self._n):
                acc = self._zero()
                for a in range(self._n):
                    weight = self._propagator[c][a]
                    if weight and not values[a].is_zero():
                        acc = acc + values[a] * weight
                out.append(acc)
            return out
        return [self._variable(a) * values[a] for a in range(self._n)]

    def tree(self, t: Tree) -> Vector:
        """Amplitude vector of a rooted tree, indexed by the root line's u index."""
        cached = self._tree_cache.get(t)
        if cached is not None:
            return cached
        if isinstance(t, TreeClass) and t.is_leaf:
            values = [self._variable(a) for a in range(self._n)]
        else:
            branches = [self.tree(child) for child in t.children]
            values = [self._contract(a, branches) for a in range(self._n)]
        result = self._dress(values)
        self._tree_cache[t] = result
        return result

    def vertex_matrix(self, decoration: Sequence[Tree]) -> SeriesMatrix:
        """Dressed transfer matrix K[x][y] of one circuit vertex."""
        branches = [self.tree(t) for t in decoration]
        rows = [self._contract_open(a, branches) for a in range(self._n)]
        columns = [self._dress([rows[a][y] for a in range(self._n)]) for y in range(self._n)]
        return SeriesMatrix([columns[y][x] for y in range(self._n)] for x in range(self._n))

    def circuit(self, c: CircuitClass) -> Series:
        """Trace of the ordered product of vertex matrices around the cycle."""
        product_ = self.vertex_matrix(c.decorations[0])
        for decoration in c.decorations[1:]:
            product_ = product_ @ self.vertex_matrix(decoration)
        return trace(product_)


def amplitude_tree(
    t: TreeClass,
    F: SeriesSystem,
    cov: CovarianceSpec,
    root: int,
    trunc_degree: Optional[int] = None,
) -> Series:
    """Reversion tree amplitude in Y, rooted at component ``root``."""
    if not 0 <= root < len(F):
        raise IndexRangeError(f"root {root} outside [0, {len(F)})")
    return FeynmanRules.for_reversion(F, cov, trunc_degree).tree(t)[root]


def amplitude_vacuum_circuit(
    c: CircuitClass, F: SeriesSystem, cov: CovarianceSpec, trunc_degree: Optional[int] = None
) -> Series:
    return FeynmanRules.for_reversion(F, cov, trunc_degree).circuit(c)


def amplitude_lg_tree(
    t: LGTreeClass, G: SeriesSystem, root: int, trunc_degree: Optional[int] = None
) -> Series:
    """Lagrange-Good tree amplitude in X, rooted at component ``root``."""
    if not 0 <= root < len(G):
        raise IndexRangeError(f"root {root} outside [0, {len(G)})")
    return FeynmanRules.for_lagrange_good(G, trunc_degree).tree(t)[root]


def amplitude_lg_circuit(
    c: CircuitClass, G: SeriesSystem, trunc_degree: Optional[int] = None
) -> Series:
    return FeynmanRules.for_lagrange_good(G, trunc_degree).circuit(c)


def amplitude_composition(
    c: CompositionClass, F: SeriesSystem, G: SeriesSystem, i: int
) -> Series:
    """
    Symmetrized composition amplitude m! * Omega of a class, homogeneous of degree d.

    Omega sums F^{[m]}_{i,a_1..a_m} P^{(q_1)}_{a_1} ... P^{(q_m)}_{a_m} over the
    index lists a, where P^{(q)}_a = q! * (degree-q part of G_a) is the
    contraction of a q-ary G vertex with q external X legs. Dividing by
    ``aut_order_composition`` gives the class's share of (F o G)_i.

    Raises:
        TruncationError: If F or G is not known to the needed order.
    """
    if not 0 <= i < len(F):
        raise IndexRangeError(f"component {i} outside [0, {len(F)})")
    if F.n_vars != len(G):
        raise DimensionMismatchError(
            f"outer system has {F.n_vars} variables, inner system {len(G)} components"
        )
    if c.m > F.trunc_degree or c.degree > G.trunc_degree:
        raise TruncationError(f"class {c.encoding} exceeds the truncation of F or G")
    n_out, limit = G.n_vars, G.trunc_degree
    legs = {
        q: [homogeneous_part(G[a], q) * math.factorial(q) for a in range(len(G))]
        for q, _ in c.g_profile
    }
    arities = c.arities
    omega = Series.zero(n_out, limit)
    for alpha, coefficient in F[i].coeffs.items():
        if degree(alpha) != c.m:
            continue
        value = coefficient * multiindex_factorial(alpha)
        for js in multiset_permutations(index_list(alpha)):
            term = Series.constant(value, n_out, limit)
            for q, j in zip(arities, js):
                term = term * legs[q][j]
                if term.is_zero():
                    break
            omega = omega + term
    return omega * math.factorial(c.m)


def class_degree(obj) -> int:
    """Grading of a class: Y leaves, X nodes, circuit degree or composition degree."""
    if isinstance(obj, TreeClass):
        return obj.leaves
    if isinstance(obj, LGTreeClass):
        return obj.nodes
    if isinstance(obj, (CircuitClass, CompositionClass)):
        return obj.degree
    raise TypeError(f"not a diagram class: {type(obj).__name__}")


def aut_order(obj) -> int:
    """Automorphism order of any diagram class."""
    if isinstance(obj, _RootedTree):
        return aut_order_tree(obj)
    if isinstance(obj, CircuitClass):
        return aut_order_circuit(obj)
    if isinstance(obj, CompositionClass):
        return aut_order_composition(obj)
    raise TypeError(f"not a diagram class: {type(obj).__name__}")
