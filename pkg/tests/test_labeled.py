"""Tests for labeled structures and the orbit-stabilizer oracle."""

import math
from fractions import Fraction

import pytest

from formal_gaussian.diagrams import CompositionClass, aut_order
from formal_gaussian.exceptions import DomainError, ResourceLimitError
from formal_gaussian.labeled import (
    LabeledStructure,
    canonical_class,
    classes_up_to_size,
    hurewitz_sums,
    label_count,
    labeled_aut_order,
    labeled_enumerate,
    quotient_classes,
    satisfies_vertex_bound,
)


def expected_orbits(flavor, type_, k):
    """k!/aut for every class realized on exactly k labels."""
    return {
        c.encoding: math.factorial(k) // aut_order(c)
        for c in classes_up_to_size(flavor, type_, k)
        if label_count(c) == k
    }


class TestEnumeration:
    """Tests for labeled_enumerate and quotient_classes."""

    def test_reversion_cherry(self):
        """Test that H(L,L) has 6!/2 labeled realizations."""
        assert quotient_classes(labeled_enumerate(6, "reversion")) == {"H(L,L)": 360}

    def test_lagrange_good_chain(self):
        assert quotient_classes(labeled_enumerate(4, "lagrange-good")) == {"G(G())": 24}

    def test_composition_single_g_vertex(self):
        structures = labeled_enumerate(5, "composition", (1, 2))
        assert quotient_classes(structures) == {"F{2:1}": 60}

    @pytest.mark.parametrize("k", range(1, 9))
    def test_reversion_trees_match_classes(self, k):
        structures = labeled_enumerate(k, "reversion", (1, 0))
        assert quotient_classes(structures) == expected_orbits("reversion", (1, 0), k)

    @pytest.mark.parametrize("k", range(1, 9))
    def test_reversion_circuits_match_classes(self, k):
        structures = labeled_enumerate(k, "reversion", (0, 0))
        assert quotient_classes(structures) == expected_orbits("reversion", (0, 0), k)

    @pytest.mark.parametrize("k", range(1, 7))
    def test_lagrange_good_match_classes(self, k):
        for type_ in ((1, 0), (0, 0)):
            structures = labeled_enumerate(k, "lagrange-good", type_)
            assert quotient_classes(structures) == expected_orbits("lagrange-good", type_, k)

    @pytest.mark.parametrize("k", range(4, 9))
    def test_composition_matches_classes(self, k):
        for d in range(1, 4):
            structures = labeled_enumerate(k, "composition", (1, d))
            assert quotient_classes(structures) == expected_orbits("composition", (1, d), k)

    def test_every_structure_validates(self):
        for structure in labeled_enumerate(6, "reversion", (0, 0)):
            structure.validate()

    def test_size_guard(self):
        with pytest.raises(ResourceLimitError, match="exceeds the limit"):
            labeled_enumerate(11, "reversion")
        with pytest.raises(ResourceLimitError):
            labeled_enumerate(5, "reversion", max_size=4)

    def test_unsupported_type(self):
        with pytest.raises(DomainError):
            labeled_enumerate(4, "reversion", (2, 0))
        with pytest.raises(DomainError):
            labeled_enumerate(4, "composition", (1, 0))


class TestAutomorphisms:
    """Tests for labeled_aut_order."""

    def test_ten_element_composition_structure(self):
        """Test the pre-Feynman structure with one F block of two t legs and G blocks of 3 and 2 legs."""
        roles = ("sbar", "t", "t", "tbar", "u", "u", "u", "tbar", "u", "u")
        structure = LabeledStructure(
            10, "composition", roles, ((0, 1, 2), (3, 4, 5, 6), (7, 8, 9))
        )
        structure.validate()
        assert labeled_aut_order(structure) == 24
        assert canonical_class(structure) == CompositionClass.from_profile({2: 1, 3: 1})
        assert aut_order(canonical_class(structure)) == 24

    def test_orbit_stabilizer(self):
        """Test aut = k!/orbit size on every reversion tree structure with 8 labels."""
        structures = labeled_enumerate(8, "reversion")
        orbits = quotient_classes(structures)
        for structure in structures[:50]:
            cls = canonical_class(structure)
            assert labeled_aut_order(structure) == math.factorial(8) // orbits[cls.encoding]


class TestValidation:
    """Tests for LabeledStructure.validate."""

    def test_blocks_must_partition(self):
        structure = LabeledStructure(2, "reversion", ("source", "ybar"), ((0,),))
        with pytest.raises(DomainError, match="partition"):
            structure.validate()

    def test_role_count(self):
        structure = LabeledStructure(2, "reversion", ("source",), ((0,), (1,)))
        with pytest.raises(DomainError, match="roles"):
            structure.validate()

    def test_h_vertex_needs_two_legs(self):
        structure = LabeledStructure(
            3, "reversion", ("source", "hbar", "h"), ((0,), (1, 2)), ((1, 0),)
        )
        with pytest.raises(DomainError, match="fewer than two legs"):
            structure.validate()

    def test_contraction_must_be_bijection(self):
        structure = LabeledStructure(2, "reversion", ("source", "ybar"), ((0,), (1,)))
        with pytest.raises(DomainError, match="bijection"):
            structure.validate()

    def test_well_formed_structure(self):
        structure = LabeledStructure(2, "reversion", ("source", "ybar"), ((0,), (1,)), ((1, 0),))
        structure.validate()
        assert canonical_class(structure).encoding == "L"


class TestHurewitz:
    """Tests for the class-side / labeled-side identity."""

    @pytest.mark.parametrize(
        "flavor,type_,max_k",
        [
            ("reversion", (1, 0), 8),
            ("reversion", (0, 0), 8),
            ("lagrange-good", (1, 0), 6),
            ("lagrange-good", (0, 0), 6),
        ],
    )
    def test_sides_agree(self, flavor, type_, max_k):
        class_side, labeled_side = hurewitz_sums(flavor, type_, max_k, Fraction(1, 3))
        assert class_side == labeled_side
        assert class_side > 0

    def test_label_counts(self):
        classes = classes_up_to_size("reversion", (1, 0), 6)
        assert {c.encoding: label_count(c) for c in classes} == {"L": 2, "H(L,L)": 6}
        assert label_count(CompositionClass.from_profile({2: 1, 3: 1})) == 1 + 4 + 5


class TestVertexBound:
    """Tests for the reversion vertex bound."""

    def test_bound_holds_on_all_structures(self):
        for k in range(1, 9):
            for structure in labeled_enumerate(k, "reversion", (1, 0)):
                assert satisfies_vertex_bound(structure)
        for k in range(1, 9):
            for structure in labeled_enumerate(k, "reversion", (0, 0)):
                assert satisfies_vertex_bound(structure)

    def test_bound_counts_ubar_sources(self):
        structure = LabeledStructure(3, "reversion", ("hbar", "h", "h"), ((0, 1, 2),))
        assert not satisfies_vertex_bound(structure)
        assert satisfies_vertex_bound(structure, ubar_sources=1)
