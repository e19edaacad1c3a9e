#!/usr/bin/env python3
"""
Unit Tests for Frame Construction
=================================

Tests Gram-Schmidt, full-plane tight and dual windows, the window
generators, lattice refinement and the minimal window search.

Usage:
    python test_frame_construction.py
"""

import os
import sys
import unittest

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from lattice.errors import DimensionError, InvalidInputError, LinearDependenceError
from lattice.group_core import enumerate_subgroups, full_subgroup, make_group, subgroup_closure, trivial_subgroup
from lattice.phase_space import PhaseSpace, phase_group
from gabor.gabor_engine import GaborSystem, WindowFamily, frame_bounds
from gabor.frame_construction import (
    CriterionMode,
    WindowKind,
    full_plane_dual,
    full_plane_tight,
    gram_schmidt,
    minimal_window_search,
    next_supergroups,
    random_family,
    refine_until_frame,
    refinement_chain,
    refinement_criterion,
    window_generator,
)


def point_mass_seed(group, d):
    return WindowFamily.from_super(group, list(np.eye(group.order, dtype=complex)[:d]))


class TestGramSchmidt(unittest.TestCase):
    """Test cases for Gram-Schmidt."""

    def test_orthonormal_output(self):
        """Test that the output is orthonormal and spans the input."""
        rng = np.random.default_rng(41)
        raw = [rng.standard_normal(6) + 1j * rng.standard_normal(6) for _ in range(4)]
        basis = np.array(gram_schmidt(raw))
        np.testing.assert_allclose(basis.conj() @ basis.T, np.eye(4), atol=1e-12)
        # first vector keeps its direction
        np.testing.assert_allclose(basis[0], raw[0] / np.linalg.norm(raw[0]), atol=1e-12)

    def test_dependent(self):
        """Test that dependent or zero windows are rejected."""
        with self.assertRaises(LinearDependenceError):
            gram_schmidt([[1, 0, 0], [2, 0, 0]])
        with self.assertRaises(LinearDependenceError):
            gram_schmidt([[0, 0, 0]])
        with self.assertRaises(InvalidInputError):
            gram_schmidt([[np.nan, 0, 0]])


class TestFullPlane(unittest.TestCase):
    """Test cases for full-plane constructions."""

    def test_tight_bounds(self):
        """Test bounds (1, 1) and self-duality for d = 1, 2, 3."""
        for orders in ([4], [2, 3]):
            group = make_group(orders)
            for d in (1, 2, 3):
                result = full_plane_tight(group, d)
                bounds = result.certificate.bounds
                self.assertAlmostEqual(bounds.lower, 1.0, delta=1e-12)
                self.assertAlmostEqual(bounds.upper, 1.0, delta=1e-12)
                self.assertLess(result.certificate.biorthogonality, 1e-12)
                self.assertTrue(result.certificate.neumann_ok)

    def test_seeded_tight(self):
        """Test Gram-Schmidt of random seeds still gives a tight frame."""
        rng = np.random.default_rng(42)
        group = make_group([6])
        seeds = [rng.standard_normal(6) + 1j * rng.standard_normal(6) for _ in range(2)]
        result = full_plane_tight(group, 2, seeds)
        self.assertAlmostEqual(result.certificate.bounds.lower, 1.0, delta=1e-12)
        self.assertAlmostEqual(result.certificate.bounds.upper, 1.0, delta=1e-12)

    def test_tight_errors(self):
        """Test d > |G| and invalid d."""
        group = make_group([4])
        with self.assertRaises(DimensionError):
            full_plane_tight(group, 5)
        for bad in (0, -1, 1.5, True):
            with self.assertRaises(InvalidInputError):
                full_plane_tight(group, bad)
        with self.assertRaises(InvalidInputError):
            full_plane_tight(group, 2, [[1, 0, 0, 0]])

    def test_dual(self):
        """Test h = g / ||g||^2 is a dual over the full plane for 50 random g."""
        rng = np.random.default_rng(43)
        group = make_group([6])
        for _ in range(50):
            g = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            result = full_plane_dual(group, g)
            self.assertLess(result.certificate.identity_deviation, 1e-10)
            self.assertAlmostEqual(np.vdot(result.dual.data[0, 0], g), 1.0, places=12)
        with self.assertRaises(InvalidInputError):
            full_plane_dual(group, np.zeros(6))


class TestWindowGenerators(unittest.TestCase):
    """Test cases for the built-in windows."""

    def test_kinds(self):
        """Test delta, constant, gaussian and random windows."""
        group = make_group([8])
        delta = window_generator('delta', group)
        self.assertEqual(delta[0], 1)
        self.assertEqual(np.count_nonzero(delta), 1)
        constant = window_generator(WindowKind.CONSTANT, group)
        self.assertAlmostEqual(np.linalg.norm(constant), 1.0, places=12)
        gauss = window_generator('discrete_gaussian', group, sigma=2.0)
        self.assertAlmostEqual(np.linalg.norm(gauss), 1.0, places=12)
        # symmetric under t -> -t
        np.testing.assert_allclose(gauss[1:], gauss[1:][::-1], atol=1e-14)
        self.assertEqual(int(np.argmax(np.abs(gauss))), 0)

    def test_every_kind_unit_norm(self):
        """Test that each kind returns a unit-norm window."""
        for orders in ([5], [2, 4]):
            group = make_group(orders)
            for kind in WindowKind:
                window = window_generator(kind, group, sigma=1.5, seed=11)
                self.assertEqual(window.shape, (group.order,))
                self.assertAlmostEqual(np.linalg.norm(window), 1.0, places=12, msg=f"{orders} {kind}")

    def test_random_reproducible(self):
        """Test that a seed fixes the random window."""
        group = make_group([2, 3])
        a = window_generator('random', group, seed=7)
        b = window_generator('random', group, seed=7)
        np.testing.assert_array_equal(a, b)
        self.assertAlmostEqual(np.linalg.norm(a), 1.0, places=12)
        np.testing.assert_array_equal(random_family(group, 2, 3, 5).data, random_family(group, 2, 3, 5).data)

    def test_errors(self):
        """Test missing sigma, missing seed and unknown kinds."""
        group = make_group([4])
        with self.assertRaises(InvalidInputError):
            window_generator('discrete_gaussian', group, sigma=0)
        with self.assertRaises(InvalidInputError):
            window_generator('random', group)
        with self.assertRaises(ValueError):
            window_generator('triangle', group)


class TestRefinement(unittest.TestCase):
    """Test cases for lattice refinement."""

    def test_next_supergroups(self):
        """Test minimal supergroups of the trivial subgroup on the Z_2 phase space."""
        phase = phase_group(make_group([2]))
        options = next_supergroups(trivial_subgroup(phase))
        self.assertEqual(len(options), 3)
        self.assertTrue(all(s.size == 2 for s in options))
        self.assertEqual(next_supergroups(full_subgroup(phase)), [])

    def test_criterion_full_plane(self):
        """Test the criterion vanishes when the adjoint is trivial."""
        space = PhaseSpace(make_group([4]))
        seed = np.eye(4, dtype=complex)[:1]
        self.assertEqual(refinement_criterion(seed, full_subgroup(space.phase), space), 0.0)
        # adjoint of the trivial subgroup is the whole plane: 3 nonzero points with x = 0
        self.assertAlmostEqual(refinement_criterion(seed, trivial_subgroup(space.phase), space), 3.0, places=12)

    def test_chain_monotone(self):
        """Test the chain grows strictly and records indices."""
        space = PhaseSpace(make_group([6]))
        seed = np.eye(6, dtype=complex)[:1]
        lattice = trivial_subgroup(space.phase)
        chain = refinement_chain(seed, lattice, space)
        self.assertEqual(chain[0].index, 1)
        self.assertEqual(chain[-1].lattice.size, 36)
        for prev, step in zip(chain, chain[1:]):
            self.assertTrue(prev.lattice.is_subgroup_of(step.lattice))
            self.assertGreater(step.lattice.size, prev.lattice.size)
            self.assertEqual(step.index, step.lattice.size)

    def test_refine_every_subgroup(self):
        """Test refine_until_frame yields a frame for every Z_4 and Z_6 lattice, d = 1, 2."""
        for N in (4, 6):
            group = make_group([N])
            for sub in enumerate_subgroups(phase_group(group)):
                for d in (1, 2):
                    result = refine_until_frame(point_mass_seed(group, d), sub, mode='criterion')
                    cert = result.certificate
                    self.assertGreater(cert.bounds.lower, 0.0, f"N={N} {sub.generators} d={d}")
                    self.assertTrue(cert.criterion_implies_frame)
                    self.assertLess(cert.identity_deviation, 1.0)
                    self.assertEqual(result.n, result.refined.size // sub.size)
                    self.assertEqual(result.windows.d, d)
                    check = frame_bounds(GaborSystem(result.windows, sub))
                    self.assertTrue(check.holds)

    def test_spectral_mode(self):
        """Test spectral mode stops no later than criterion mode."""
        group = make_group([6])
        rng = np.random.default_rng(44)
        seed = WindowFamily.single(group, window_generator('random', group, seed=int(rng.integers(1000))))
        for sub in enumerate_subgroups(phase_group(group))[::3]:
            spectral = refine_until_frame(seed, sub, mode=CriterionMode.SPECTRAL)
            criterion = refine_until_frame(seed, sub, mode=CriterionMode.CRITERION)
            self.assertTrue(spectral.certificate.bounds.holds)
            self.assertLessEqual(spectral.refined.size, criterion.refined.size)
            self.assertIs(spectral.mode, CriterionMode.SPECTRAL)

    def test_seed_validation(self):
        """Test non-orthonormal seeds, multi-window seeds and foreign lattices."""
        group = make_group([4])
        lattice = trivial_subgroup(phase_group(group))
        with self.assertRaises(InvalidInputError):
            refine_until_frame(WindowFamily.single(group, [2, 0, 0, 0]), lattice)
        with self.assertRaises(InvalidInputError):
            refine_until_frame(WindowFamily(group, np.eye(4)[None, :2, :]), lattice)
        with self.assertRaises(InvalidInputError):
            refine_until_frame(point_mass_seed(group, 1), trivial_subgroup(phase_group(make_group([2]))))


class TestMinimalWindowSearch(unittest.TestCase):
    """Test cases for the heuristic window search."""

    def test_finds_frames(self):
        """Test the search reaches the density limit on easy lattices."""
        z4 = make_group([4])
        lam = subgroup_closure(phase_group(z4), [(1, 0), (0, 2)])
        result = minimal_window_search(z4, lam, 1, seed=3)
        self.assertTrue(result.found)
        self.assertEqual(result.lower_limit, 1)
        self.assertEqual(result.n, 1)

        z2 = make_group([2])
        result = minimal_window_search(z2, trivial_subgroup(phase_group(z2)), 1, seed=3)
        self.assertEqual(result.lower_limit, 2)
        self.assertEqual(result.n, 2)
        self.assertTrue(result.to_dict()['heuristic'])

    def test_reports_failure(self):
        """Test that an exhausted search reports no frame."""
        z2 = make_group([2])
        result = minimal_window_search(z2, trivial_subgroup(phase_group(z2)), 1, trials=0, extra=0)
        self.assertFalse(result.found)
        self.assertIsNone(result.n)
        self.assertIsNone(result.to_dict()['bounds'])


def run_tests():
    """Run all tests and generate report."""
    print("=" * 70)
    print("FRAME CONSTRUCTION TEST SUITE")
    print("=" * 70)
    print()

    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    for case in (TestGramSchmidt, TestFullPlane, TestWindowGenerators, TestRefinement, TestMinimalWindowSearch):
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
