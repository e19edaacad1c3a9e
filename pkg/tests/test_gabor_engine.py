#!/usr/bin/env python3
"""
Unit Tests for the Gabor Engine
===============================

Tests analysis / synthesis, frame operators, frame and Riesz bounds,
canonical dual and tight windows, density conditions and
biorthogonality.

Usage:
    python test_gabor_engine.py
"""

import os
import sys
import unittest
from fractions import Fraction
from unittest import mock

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from config import DESK_SCALE
from lattice.errors import DimensionError, InvalidInputError, NotAFrameError
from lattice.group_core import (
    enumerate_subgroups,
    full_subgroup,
    make_group,
    subgroup_closure,
    trivial_subgroup,
)
from lattice.phase_space import PhaseSpace, inner, phase_group
from gabor.gabor_engine import (
    BoundsKind,
    DensityVerdict,
    GaborSystem,
    WindowFamily,
    analysis,
    bessel_bound,
    biorthogonality_residual,
    canonical_dual,
    canonical_tight,
    commutation_residual,
    density_check,
    dual_pair_residual,
    frame_bounds,
    frame_operator,
    gram_matrix,
    riesz_bounds,
    synthesis,
)


def random_family(group, d, n, rng):
    shape = (d, n, group.order)
    return WindowFamily(group, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def delta(length, at=0):
    out = np.zeros(length, dtype=complex)
    out[at] = 1.0
    return out


class TestWindowFamily(unittest.TestCase):
    """Test cases for WindowFamily layout and validation."""

    def setUp(self):
        """Set up test fixtures."""
        self.group = make_group([4])
        self.rng = np.random.default_rng(1)

    def test_shapes(self):
        """Test d, n and the stacked layout."""
        fam = random_family(self.group, 2, 3, self.rng)
        self.assertEqual((fam.d, fam.n), (2, 3))
        stacked = fam.stacked()
        self.assertEqual(stacked.shape, (3, 8))
        np.testing.assert_array_equal(stacked[1, 4:], fam.data[1, 1])
        back = WindowFamily.from_stacked(self.group, stacked, 2)
        np.testing.assert_array_equal(back.data, fam.data)

    def test_transpose(self):
        """Test the d <-> n swap re-indexes g_{k,j} -> g'_{j,k}."""
        fam = random_family(self.group, 2, 3, self.rng)
        swapped = fam.transpose()
        self.assertEqual((swapped.d, swapped.n), (3, 2))
        np.testing.assert_array_equal(swapped.data[2, 1], fam.data[1, 2])

    def test_invalid(self):
        """Test rejection of bad shapes and non-finite data."""
        with self.assertRaises(InvalidInputError):
            WindowFamily(self.group, np.zeros((1, 1, 3)))
        with self.assertRaises(InvalidInputError):
            WindowFamily(self.group, np.full((1, 1, 4), np.nan))
        with self.assertRaises(InvalidInputError):
            WindowFamily(self.group, np.zeros((1, 4)))

    def test_lattice_mismatch(self):
        """Test that the lattice must live in the windows' phase space."""
        other = phase_group(make_group([2]))
        with self.assertRaises(InvalidInputError):
            GaborSystem(WindowFamily.single(self.group, delta(4)), full_subgroup(other))


class TestOperators(unittest.TestCase):
    """Test cases for analysis, synthesis and frame operators."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(2)
        self.z2 = make_group([2])
        self.phase2 = phase_group(self.z2)

    def test_analysis_examples(self):
        """Test the singleton lattice and the Z_2 full-plane coefficients."""
        g = self.rng.standard_normal(2) + 0j
        f = self.rng.standard_normal(2) + 0j
        single = GaborSystem(WindowFamily.single(self.z2, g), trivial_subgroup(self.phase2))
        np.testing.assert_allclose(analysis(single, f), [[np.vdot(g, f)]], atol=1e-12)

        full = GaborSystem(WindowFamily.single(self.z2, delta(2)), full_subgroup(self.phase2))
        # lattice points in lex order (x, omega): [x = 0]
        np.testing.assert_allclose(analysis(full, delta(2)).reshape(-1), [1, 1, 0, 0], atol=1e-12)

    def test_analysis_linear(self):
        """Test linearity of the analysis operator."""
        group = make_group([6])
        lam = subgroup_closure(phase_group(group), [(2, 0), (0, 3)])
        sys_ = GaborSystem(random_family(group, 2, 3, self.rng), lam)
        f1 = self.rng.standard_normal(12) + 1j * self.rng.standard_normal(12)
        f2 = self.rng.standard_normal(12) + 1j * self.rng.standard_normal(12)
        np.testing.assert_allclose(analysis(sys_, f1 + f2), analysis(sys_, f1) + analysis(sys_, f2), atol=1e-12)

    def test_synthesis(self):
        """Test point coefficients, zero and adjointness."""
        group = make_group([6])
        lam = subgroup_closure(phase_group(group), [(2, 0), (0, 3)], Fraction(3, 2))
        fam = random_family(group, 2, 3, self.rng)
        sys_ = GaborSystem(fam, lam)
        space = PhaseSpace(group)

        c = np.zeros((lam.size, 3), dtype=complex)
        c[4, 2] = 1.0
        expected = 1.5 * np.array([space.tf_shift(lam.elements[4], fam.data[k, 2]) for k in range(2)])
        np.testing.assert_allclose(synthesis(sys_, c), expected, atol=1e-12)
        np.testing.assert_array_equal(synthesis(sys_, np.zeros((lam.size, 3))), np.zeros((2, 6)))

        for _ in range(5):
            c = self.rng.standard_normal((lam.size, 3)) + 1j * self.rng.standard_normal((lam.size, 3))
            f = self.rng.standard_normal(12) + 1j * self.rng.standard_normal(12)
            lhs = np.vdot(f, synthesis(sys_, c).reshape(-1))
            rhs = 1.5 * np.sum(c * analysis(sys_, f).conj())
            self.assertLess(abs(lhs - rhs), 1e-10)

        with self.assertRaises(InvalidInputError):
            synthesis(sys_, np.zeros(5))

    def test_frame_operator_examples(self):
        """Test the listed frame operators."""
        full = GaborSystem(WindowFamily.single(self.z2, delta(2)), full_subgroup(self.phase2))
        np.testing.assert_allclose(frame_operator(full), 2 * np.eye(2), atol=1e-12)

        z4 = make_group([4])
        sparse = subgroup_closure(phase_group(z4), [(2, 0), (0, 2)])
        S = frame_operator(GaborSystem(WindowFamily.single(z4, delta(4)), sparse))
        np.testing.assert_allclose(S, 2 * np.diag([1, 0, 1, 0]), atol=1e-12)

        g = self.rng.standard_normal(4) + 1j * self.rng.standard_normal(4)
        g /= np.linalg.norm(g)
        plane = full_subgroup(phase_group(z4), Fraction(1, 4))
        np.testing.assert_allclose(frame_operator(GaborSystem(WindowFamily.single(z4, g), plane)),
                                   np.eye(4), atol=1e-12)

    def test_hermitian_and_commutation(self):
        """Test S is Hermitian PSD and commutes with the lattice shifts."""
        group = make_group([2, 3])
        for sub in enumerate_subgroups(phase_group(group))[::7]:
            sys_ = GaborSystem(random_family(group, 2, 2, self.rng), sub)
            S = frame_operator(sys_)
            np.testing.assert_allclose(S, S.conj().T, atol=1e-10)
            self.assertGreaterEqual(np.min(np.linalg.eigvalsh(S)), -1e-9)
            self.assertLess(commutation_residual(sys_), 1e-10)


class TestBounds(unittest.TestCase):
    """Test cases for frame, Riesz and Bessel bounds."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(4)
        self.z2 = make_group([2])
        self.phase2 = phase_group(self.z2)
        self.diag = subgroup_closure(self.phase2, [(1, 1)])

    def test_gram_orientation(self):
        """Test Gamma[p, q] = <pi(lambda_q) g, pi(lambda_p) g> entry by entry."""
        group = make_group([4])
        space = PhaseSpace(group)
        lam = subgroup_closure(phase_group(group), [(1, 1)])
        g = self.rng.standard_normal(4) + 1j * self.rng.standard_normal(4)
        gamma = gram_matrix(GaborSystem(WindowFamily.single(group, g), lam))
        for p, a in enumerate(lam.elements):
            for q, b in enumerate(lam.elements):
                self.assertAlmostEqual(gamma[p, q], inner(space.tf_shift(b, g), space.tf_shift(a, g)), places=10)
        # the transpose differs for complex windows
        self.assertGreater(np.max(np.abs(gamma - gamma.T)), 1e-6)

    def test_frame_bounds_examples(self):
        """Test the listed frame bounds."""
        full = GaborSystem(WindowFamily.single(self.z2, delta(2)), full_subgroup(self.phase2))
        report = frame_bounds(full)
        self.assertAlmostEqual(report.lower, 2.0, places=12)
        self.assertAlmostEqual(report.upper, 2.0, places=12)
        self.assertTrue(report.is_tight)
        self.assertIs(report.kind, BoundsKind.FRAME)

        z4 = make_group([4])
        sparse = subgroup_closure(phase_group(z4), [(2, 0), (0, 2)])
        report = frame_bounds(GaborSystem(WindowFamily.single(z4, delta(4)), sparse))
        self.assertAlmostEqual(report.lower, 0.0, places=12)
        self.assertFalse(report.holds)

        report = frame_bounds(GaborSystem(WindowFamily.single(self.z2, delta(2)), self.diag))
        self.assertAlmostEqual(report.lower, 1.0, places=12)
        self.assertAlmostEqual(report.upper, 1.0, places=12)

    def test_spectrum_sorted(self):
        """Test the BoundsReport invariants."""
        group = make_group([6])
        lam = subgroup_closure(phase_group(group), [(1, 0), (0, 2)])
        report = frame_bounds(GaborSystem(random_family(group, 1, 2, self.rng), lam))
        self.assertEqual(report.spectrum, sorted(report.spectrum))
        self.assertEqual(report.lower, report.spectrum[0])
        self.assertEqual(report.upper, report.spectrum[-1])
        self.assertLessEqual(0.0, report.lower)

    def test_riesz_examples(self):
        """Test the listed Riesz bounds."""
        g = self.rng.standard_normal(2) + 1j * self.rng.standard_normal(2)
        single = GaborSystem(WindowFamily.single(self.z2, g), trivial_subgroup(self.phase2))
        report = riesz_bounds(single, reference_covolume=1)
        norm2 = float(np.vdot(g, g).real)
        self.assertAlmostEqual(report.lower, norm2, places=12)
        self.assertAlmostEqual(report.upper, norm2, places=12)

        report = riesz_bounds(GaborSystem(WindowFamily.single(self.z2, delta(2)), self.diag), 1)
        self.assertAlmostEqual(report.lower, 1.0, places=12)
        self.assertAlmostEqual(report.upper, 1.0, places=12)
        self.assertIs(report.kind, BoundsKind.RIESZ)

        with self.assertRaises(InvalidInputError):
            riesz_bounds(single, reference_covolume=-1)

    def test_riesz_scaled_orthonormal(self):
        """Test orthonormal atoms scaled by sqrt(s) give Riesz bounds (1, 1)."""
        s = 0.25
        g = np.sqrt(s) * delta(2)
        report = riesz_bounds(GaborSystem(WindowFamily.single(self.z2, g), self.diag), reference_covolume=s)
        self.assertAlmostEqual(report.lower, 1.0, places=12)
        self.assertAlmostEqual(report.upper, 1.0, places=12)

    def test_bessel_bound(self):
        """Test the Bessel bound equals the top of the frame spectrum."""
        group = make_group([4])
        lam = subgroup_closure(phase_group(group), [(1, 0), (0, 2)], Fraction(2, 3))
        sys_ = GaborSystem(random_family(group, 2, 3, self.rng), lam)
        self.assertAlmostEqual(bessel_bound(sys_), frame_bounds(sys_).upper, places=9)
        zero = GaborSystem(WindowFamily(group, np.zeros((1, 1, 4))), lam)
        self.assertEqual(bessel_bound(zero), 0.0)

    def test_full_plane_tightness(self):
        """Test S = ||g||^2 Id over the full plane with weight 1/|G|."""
        group = make_group([6])
        plane = full_subgroup(phase_group(group), Fraction(1, 6))
        for _ in range(50):
            g = self.rng.standard_normal(6) + 1j * self.rng.standard_normal(6)
            S = frame_operator(GaborSystem(WindowFamily.single(group, g), plane))
            np.testing.assert_allclose(S, np.vdot(g, g).real * np.eye(6), atol=1e-12 * max(1.0, np.vdot(g, g).real))

    def test_desk_scale(self):
        """Test the operator dimension cap."""
        group = make_group([4])
        sys_ = GaborSystem(WindowFamily.single(group, delta(4)), full_subgroup(phase_group(group)))
        with mock.patch.dict(DESK_SCALE, {'max_operator_dim': 3}):
            with self.assertRaises(DimensionError):
                frame_bounds(sys_)


class TestDuals(unittest.TestCase):
    """Test cases for canonical dual and tight windows."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(6)

    def test_full_plane_dual(self):
        """Test dual = delta_0 / 2 for the Z_2 full plane."""
        z2 = make_group([2])
        sys_ = GaborSystem(WindowFamily.single(z2, delta(2)), full_subgroup(phase_group(z2)))
        np.testing.assert_allclose(canonical_dual(sys_).data[0, 0], delta(2) / 2, atol=1e-12)

    def test_tight_input(self):
        """Test dual = g / c when S = c Id."""
        group = make_group([4])
        g = self.rng.standard_normal(4) + 1j * self.rng.standard_normal(4)
        sys_ = GaborSystem(WindowFamily.single(group, g), full_subgroup(phase_group(group)))
        c = 4 * np.vdot(g, g).real
        np.testing.assert_allclose(canonical_dual(sys_).data[0, 0], g / c, atol=1e-12)

    def test_dual_and_tight_random(self):
        """Test D_h C_g = Id and tight bounds (1, 1) on random frames."""
        group = make_group([6])
        lam = subgroup_closure(phase_group(group), [(1, 0), (0, 3)])
        for d, n in ((1, 1), (1, 2), (2, 2), (2, 3)):
            sys_ = GaborSystem(random_family(group, d, n, self.rng), lam)
            self.assertTrue(frame_bounds(sys_).holds)
            dual = canonical_dual(sys_)
            self.assertLess(dual_pair_residual(sys_, dual), 1e-9)
            tight = frame_bounds(sys_.with_windows(canonical_tight(sys_)))
            self.assertAlmostEqual(tight.lower, 1.0, delta=1e-9)
            self.assertAlmostEqual(tight.upper, 1.0, delta=1e-9)

    def test_not_a_frame(self):
        """Test that dual and tight refuse non-frames."""
        z4 = make_group([4])
        sparse = subgroup_closure(phase_group(z4), [(2, 0), (0, 2)])
        sys_ = GaborSystem(WindowFamily.single(z4, delta(4)), sparse)
        with self.assertRaises(NotAFrameError):
            canonical_dual(sys_)
        with self.assertRaises(NotAFrameError):
            canonical_tight(sys_)


class TestDensity(unittest.TestCase):
    """Test cases for the density conditions."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(8)

    def test_frame_impossible(self):
        """Test the singleton lattice on Z_2."""
        z2 = make_group([2])
        report = density_check(GaborSystem(WindowFamily.single(z2, delta(2)), trivial_subgroup(phase_group(z2))))
        self.assertIs(report.verdict, DensityVerdict.FRAME_IMPOSSIBLE)
        self.assertFalse(report.condition('frame_density').holds)
        self.assertEqual(report.counting_covolume, 2)

    def test_norm_brackets(self):
        """Test A s d <= ||g||^2 <= B s d on the self-adjoint Z_6 lattice."""
        z6 = make_group([6])
        lam = subgroup_closure(phase_group(z6), [(2, 0), (0, 3)])
        sys_ = GaborSystem(random_family(z6, 1, 1, self.rng), lam)
        report = density_check(sys_)
        self.assertTrue(report.condition('frame_norm_bracket').holds)
        self.assertTrue(report.condition('riesz_norm_bracket').holds)
        self.assertTrue(report.basis_candidate)
        self.assertIs(report.verdict, DensityVerdict.OPEN)

    def test_frame_and_riesz_force_basis(self):
        """Test that frame and Riesz together only happen when d s = n."""
        group = make_group([4])
        seen = 0
        for sub in enumerate_subgroups(phase_group(group)):
            for d, n in ((1, 1), (1, 2), (2, 1), (2, 2)):
                sys_ = GaborSystem(random_family(group, d, n, self.rng), sub)
                if frame_bounds(sys_).holds and riesz_bounds(sys_).holds:
                    seen += 1
                    self.assertEqual(Fraction(4, sub.size) * d, n)
        self.assertGreater(seen, 0)

    def test_density_obstruction_exhaustive(self):
        """Test A = 0 whenever s d > n over every group of order <= 8."""
        wide = ((1, 1), (2, 1), (2, 3), (3, 2))
        narrow = ((1, 1), (2, 1))
        cases = [([2], wide), ([3], wide), ([4], wide), ([5], wide), ([6], wide), ([7], wide),
                 ([8], wide), ([2, 2], wide), ([2, 4], narrow), ([2, 2, 2], narrow)]
        total = 0
        for orders, shapes in cases:
            group = make_group(orders)
            checked = 0
            for sub in enumerate_subgroups(phase_group(group)):
                s = Fraction(group.order, sub.size)
                for d, n in shapes:
                    if s * d <= n:
                        continue
                    report = frame_bounds(GaborSystem(random_family(group, d, n, self.rng), sub))
                    self.assertFalse(report.holds, f"{orders} {sub.generators} d={d} n={n}")
                    self.assertLess(report.lower, 1e-9 * max(1.0, report.upper))
                    checked += 1
            # the trivial lattice alone gives s d > n for (1, 1)
            self.assertGreater(checked, 0, f"{orders}")
            total += checked
        self.assertGreater(total, 1000)


class TestBiorthogonality(unittest.TestCase):
    """Test cases for biorthogonality residuals."""

    def test_orthonormal_system(self):
        """Test g = h = delta_0 over {(0,0),(1,1)} on Z_2."""
        z2 = make_group([2])
        diag = subgroup_closure(phase_group(z2), [(1, 1)])
        fam = WindowFamily.single(z2, delta(2))
        self.assertLess(biorthogonality_residual(fam, fam, diag), 1e-14)

    def test_brute_force(self):
        """Test the residual against an explicit table."""
        rng = np.random.default_rng(10)
        group = make_group([4])
        space = PhaseSpace(group)
        adj = subgroup_closure(space.phase, [(2, 0)])
        g = random_family(group, 2, 2, rng)
        h = random_family(group, 2, 2, rng)
        worst = 0.0
        for a_i, a in enumerate(adj.elements):
            for j in range(2):
                for b_i, b in enumerate(adj.elements):
                    for jp in range(2):
                        value = sum(np.vdot(space.tf_shift(b, h.data[k, jp]), space.tf_shift(a, g.data[k, j]))
                                    for k in range(2))
                        target = 1.0 if (a_i, j) == (b_i, jp) else 0.0
                        worst = max(worst, abs(value - target))
        self.assertAlmostEqual(biorthogonality_residual(g, h, adj), worst, places=10)

    def test_shape_mismatch(self):
        """Test that families of different shapes are rejected."""
        group = make_group([2])
        adj = trivial_subgroup(phase_group(group))
        with self.assertRaises(InvalidInputError):
            biorthogonality_residual(WindowFamily(group, np.ones((1, 2, 2))),
                                     WindowFamily(group, np.ones((2, 1, 2))), adj)


def run_tests():
    """Run all tests and generate report."""
    print("=" * 70)
    print("GABOR ENGINE TEST SUITE")
    print("=" * 70)
    print()

    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    for case in (TestWindowFamily, TestOperators, TestBounds, TestDuals, TestDensity, TestBiorthogonality):
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
