#!/usr/bin/env python3
"""
Unit Tests for Group Core
=========================

Tests finite abelian group arithmetic, characters, subgroup closure,
coset transversals, covolume and Weil's formula.

Usage:
    python test_group_core.py
"""

import cmath
import os
import sys
import unittest
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

# Add parent directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from lattice.errors import ContainmentError, InvalidInputError
from lattice.group_core import (
    as_weight,
    character,
    character_table,
    coset_transversal,
    covolume,
    enumerate_subgroups,
    full_subgroup,
    is_subgroup,
    join,
    make_group,
    quotient_point_mass,
    subgroup_closure,
    subgroup_from_elements,
    trivial_subgroup,
    unit_phase,
    weil_verify,
)
from lattice.phase_space import phase_group


class TestGroupSpec(unittest.TestCase):
    """Test cases for make_group and element arithmetic."""

    def test_orders(self):
        """Test group orders of cyclic products."""
        self.assertEqual(make_group([6]).order, 6)
        self.assertEqual(make_group([2, 3]).order, 6)
        self.assertEqual(make_group([1]).order, 1)

    def test_invalid_orders(self):
        """Test that zero, negative and fractional orders are rejected."""
        for bad in ([0], [-3], [2.5], [], "4"):
            with self.assertRaises(InvalidInputError):
                make_group(bad)

    def test_lex_enumeration(self):
        """Test lexicographic element order and index lookup."""
        group = make_group([2, 3])
        self.assertEqual(group.elements()[:4], [(0, 0), (0, 1), (0, 2), (1, 0)])
        for i, e in enumerate(group.elements()):
            self.assertEqual(group.index(e), i)
        np.testing.assert_array_equal(group.index_array(group.element_array), np.arange(6))

    def test_reduction(self):
        """Test that arithmetic keeps coordinates reduced."""
        group = make_group([2, 3])
        self.assertEqual(group.reduce((-1, 4)), (1, 1))
        self.assertEqual(group.add((1, 2), (1, 2)), (0, 1))
        self.assertEqual(group.neg((1, 1)), (1, 2))
        with self.assertRaises(InvalidInputError):
            group.reduce((1,))

    def test_trivial_group(self):
        """Test the degenerate ambient [1]."""
        group = make_group([1])
        self.assertEqual(group.elements(), [(0,)])
        self.assertEqual(character(group, (0,), (0,)), 1)


class TestCharacters(unittest.TestCase):
    """Test cases for characters and exact phases."""

    def test_examples(self):
        """Test the listed character values."""
        z4 = make_group([4])
        self.assertEqual(character(z4, (1,), (1,)), 1j)
        self.assertEqual(character(z4, (2,), (2,)), 1)
        z23 = make_group([2, 3])
        self.assertAlmostEqual(character(z23, (1, 1), (1, 1)), cmath.exp(5j * cmath.pi / 3), places=12)

    def test_quarter_turns_exact(self):
        """Test that quarter turns come out exact."""
        self.assertEqual(unit_phase(2, 4), -1)
        self.assertEqual(unit_phase(3, 12), 1j)
        self.assertEqual(unit_phase(-1, 4), -1j)

    def test_character_table_unitary(self):
        """Test K K^H = |G| Id and symmetry."""
        group = make_group([2, 3])
        K = character_table(group)
        np.testing.assert_allclose(K, K.T, atol=1e-14)
        np.testing.assert_allclose(K @ K.conj().T, 6 * np.eye(6), atol=1e-12)

    @given(st.lists(st.integers(0, 11), min_size=6, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_bilinearity(self, coords):
        """Test character(x1 + x2, w) = character(x1, w) character(x2, w)."""
        group = make_group([4, 3])
        x1, x2, w = coords[0:2], coords[2:4], coords[4:6]
        lhs = character(group, group.add(group.reduce(x1), group.reduce(x2)), w)
        rhs = character(group, x1, w) * character(group, x2, w)
        self.assertAlmostEqual(lhs, rhs, places=12)
        self.assertAlmostEqual(abs(lhs), 1.0, places=12)
        self.assertEqual(character(group, x1, (0, 0)), 1)


class TestSubgroups(unittest.TestCase):
    """Test cases for closures, joins and enumeration."""

    def test_closure_examples(self):
        """Test the listed closures."""
        lam = subgroup_closure(make_group([6, 6]), [(2, 0), (0, 3)])
        expected = sorted((a, b) for a in (0, 2, 4) for b in (0, 3))
        self.assertEqual(list(lam.elements), expected)
        self.assertEqual(trivial_subgroup(make_group([4, 4])).elements, ((0, 0),))
        self.assertEqual(subgroup_closure(make_group([2, 2]), [(1, 1)]).elements, ((0, 0), (1, 1)))

    def test_weight_validation(self):
        """Test that non-positive weights are rejected and floats become fractions."""
        group = make_group([2, 2])
        for bad in (0, -1, float('nan'), float('inf'), True, "abc"):
            with self.assertRaises(InvalidInputError):
                subgroup_closure(group, [(1, 0)], bad)
        self.assertEqual(as_weight(0.25), Fraction(1, 4))
        self.assertEqual(as_weight("1/3"), Fraction(1, 3))

    def test_closure_is_subgroup(self):
        """Test closure under addition and negation exhaustively."""
        group = make_group([4, 6])
        for gens in ([(1, 2)], [(2, 3), (0, 4)], [(3, 5), (2, 2)]):
            lam = subgroup_closure(group, gens)
            self.assertTrue(is_subgroup(group, lam.elements))
            for a in lam.elements:
                self.assertIn(group.neg(a), lam)
                for b in lam.elements:
                    self.assertIn(group.add(a, b), lam)

    def test_from_elements_and_join(self):
        """Test that element-set construction and joins agree with closure."""
        group = make_group([4, 4])
        lam = subgroup_closure(group, [(2, 0), (0, 2)])
        rebuilt = subgroup_from_elements(group, lam.elements)
        self.assertTrue(rebuilt.same_elements(lam))
        joined = join(lam, (1, 0))
        self.assertEqual(joined.size, 8)
        self.assertTrue(lam.is_subgroup_of(joined))
        with self.assertRaises(InvalidInputError):
            subgroup_from_elements(group, [(1, 0)])

    def test_enumeration_counts(self):
        """Test subgroup counts of small phase spaces."""
        for n, count in ((2, 5), (3, 6), (4, 15), (6, 30)):
            subs = enumerate_subgroups(phase_group(make_group([n])))
            self.assertEqual(len(subs), count, f"Z_{n} x Z_{n}")
            self.assertEqual(len({s.members for s in subs}), count)
            for s in subs:
                self.assertEqual((n * n) % s.size, 0)

    def test_full_subgroup(self):
        """Test the full subgroup covers the ambient group."""
        group = make_group([3, 2])
        self.assertEqual(full_subgroup(group).size, 6)


class TestCosets(unittest.TestCase):
    """Test cases for coset transversals."""

    def test_transversal_example(self):
        """Test 2Z_4 x 2Z_4 inside Z_4 x Z_4."""
        group = make_group([4, 4])
        sub = subgroup_closure(group, [(2, 0), (0, 2)])
        reps = coset_transversal(group.elements(), sub)
        self.assertEqual(len(reps), 4)
        self.assertEqual(reps[0], (0, 0))
        self.assertEqual(set(reps), {(0, 0), (0, 1), (1, 0), (1, 1)})

    def test_trivial_quotient(self):
        """Test ambient = sub gives one representative."""
        group = make_group([4, 4])
        sub = subgroup_closure(group, [(2, 0), (0, 2)])
        self.assertEqual(coset_transversal(sub.elements, sub), [(0, 0)])

    def test_not_contained(self):
        """Test containment errors."""
        group = make_group([4, 4])
        sub = subgroup_closure(group, [(1, 0)])
        ambient = subgroup_closure(group, [(0, 1)])
        with self.assertRaises(ContainmentError):
            coset_transversal(ambient.elements, sub)


class TestMeasures(unittest.TestCase):
    """Test cases for covolume and Weil's formula."""

    def test_covolume_examples(self):
        """Test the listed covolumes."""
        phase6 = phase_group(make_group([6]))
        self.assertEqual(covolume(phase6, subgroup_closure(phase6, [(2, 0), (0, 3)])), 1)
        phase4 = phase_group(make_group([4]))
        self.assertEqual(covolume(phase4, subgroup_closure(phase4, [(1, 0), (0, 2)])), Fraction(1, 2))
        for n in (2, 3, 5):
            phase = phase_group(make_group([n]))
            self.assertEqual(covolume(phase, full_subgroup(phase, Fraction(1, n))), 1)

    def test_quotient_point_mass(self):
        """Test mu_Q = 1 / (|G| w)."""
        phase = phase_group(make_group([6]))
        sub = subgroup_closure(phase, [(2, 0), (0, 3)], Fraction(1, 2))
        self.assertEqual(quotient_point_mass(phase, sub), Fraction(1, 3))

    def test_weil_constant(self):
        """Test F = 1 on the Z_2 phase space with the trivial subgroup."""
        phase = phase_group(make_group([2]))
        self.assertLess(weil_verify(phase, trivial_subgroup(phase), np.ones(4)), 1e-12)

    def test_weil_random(self):
        """Test Weil's formula for random functions and coset indicators."""
        phase = phase_group(make_group([6]))
        rng = np.random.default_rng(11)
        subs = enumerate_subgroups(phase)
        for sub in subs[::3]:
            for _ in range(5):
                F = rng.standard_normal(36) + 1j * rng.standard_normal(36)
                self.assertLess(weil_verify(phase, sub.with_weight(rng.uniform(0.2, 3.0)), F), 1e-10)
        sub = subgroup_closure(phase, [(2, 0), (0, 3)])
        indicator = np.zeros(36)
        for e in sub.elements:
            indicator[phase.index(phase.add(e, (1, 1)))] = 1.0
        self.assertLess(weil_verify(phase, sub, indicator), 1e-10)

    def test_weil_shape_error(self):
        """Test that a wrongly sized function is rejected."""
        phase = phase_group(make_group([2]))
        with self.assertRaises(InvalidInputError):
            weil_verify(phase, trivial_subgroup(phase), np.ones(3))


def run_tests():
    """Run all tests and generate report."""
    print("=" * 70)
    print("GROUP CORE TEST SUITE")
    print("=" * 70)
    print()

    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    for case in (TestGroupSpec, TestCharacters, TestSubgroups, TestCosets, TestMeasures):
        suite.addTests(loader.loadTestsFromTestCase(case))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    print()
    print("=" * 70)
    print("TEST SUMMARY")
    print("=" * 70)
    print(f"Tests run: {result.testsRun}")
    print(f"Successes: {result.testsRun - len(result.failures) - len(result.errors)}")
    print(f"Failures: {len(result.failures)}")
    print(f"Errors: {len(result.errors)}")
    print("=" * 70)

    return 0 if result.wasSuccessful() else 1


if __name__ == '__main__':
    sys.exit(run_tests())
