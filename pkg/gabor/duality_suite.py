#!/usr/bin/env python3
"""
Duality Verifiers
=================

Residual computations for the duality results of multi-window super
Gabor analysis over finite groups:

    - Janssen function psi and its symplectic Fourier transform
      (closed form vs transform, periodization restricted to the adjoint)
    - fundamental identity of Gabor analysis (FIGA)
    - Wexler-Raz biorthogonality for dual pairs
    - frame over Lambda  <->  Riesz sequence over the adjoint (d <-> n swap)
    - Bessel bounds over Lambda and over the adjoint

Every check returns a residual; pass/fail verdicts use relative
thresholds from config.TOLERANCE_CONFIG.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from config import TOLERANCE_CONFIG
from lattice.errors import InvalidInputError
from lattice.group_core import Subgroup, coset_transversal, quotient_point_mass
from lattice.phase_space import PhaseSpace
from gabor.gabor_engine import (
    GaborSystem,
    WindowFamily,
    bessel_bound,
    frame_bounds,
    frame_operator,
    riesz_bounds,
)

logger = logging.getLogger("duality_suite")


class Verdict(Enum):
    """Outcome of a verification."""
    PASS = "pass"
    FAIL = "fail"


# =========================================================================
# HELPERS
# =========================================================================

def _signal_blocks(f, group_order: int, d: int, what: str) -> np.ndarray:
    arr = np.asarray(f, dtype=complex)
    if arr.size != d * group_order:
        raise InvalidInputError(f"{what} must live on G x Z_{d} ({d * group_order} entries), got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} contains NaN or Inf")
    return arr.reshape(d, group_order)


def _check_windows(g: WindowFamily, h: WindowFamily):
    if not g.same_shape(h):
        raise InvalidInputError(f"window shapes differ: {g.shape} vs {h.shape}")


def _cross_stft(space: PhaseSpace, a: np.ndarray, b: np.ndarray, points) -> np.ndarray:
    """T[p, i, l] = <a_i, pi(chi_p) b_l> for rows a_i, b_l."""
    shifted = space.shift_atoms(points, b)
    return np.einsum('it,plt->pil', a, shifted.conj())


def _window_correlation(space: PhaseSpace, g: WindowFamily, h: WindowFamily, points) -> np.ndarray:
    """W[p, k, l] = sum_j <pi(chi_p) h_{l,j}, g_{k,j}>."""
    shifted = space.shift_atoms(points, h.data)
    return np.einsum('kjt,pljt->pkl', g.data.conj(), shifted)


# =========================================================================
# JANSSEN FUNCTION AND FIGA
# =========================================================================

def janssen_psi(f1, f2, g: WindowFamily, h: WindowFamily) -> Tuple[np.ndarray, np.ndarray]:
    """
    psi(chi) = sum_j (C_g f1)(chi, j) conj((C_h f2)(chi, j)) on the whole phase
    space, and its symplectic Fourier transform in closed form:

        F_s psi(chi) = sum_{k,l} <f1_k, pi(chi) f2_l> sum_j <pi(chi) h_{l,j}, g_{k,j}>
    """
    _check_windows(g, h)
    space = PhaseSpace(g.group)
    L, d = g.group.order, g.d
    f1 = _signal_blocks(f1, L, d, "f1")
    f2 = _signal_blocks(f2, L, d, "f2")
    points = space.phase.element_array

    atoms_g = space.shift_atoms(points, g.data.transpose(1, 0, 2)).reshape(len(points), g.n, -1)
    atoms_h = space.shift_atoms(points, h.data.transpose(1, 0, 2)).reshape(len(points), h.n, -1)
    cg = atoms_g.conj() @ f1.reshape(-1)
    ch = atoms_h.conj() @ f2.reshape(-1)
    psi = np.sum(cg * ch.conj(), axis=1)

    signal_part = _cross_stft(space, f1, f2, points)
    window_part = _window_correlation(space, g, h, points)
    closed = np.einsum('pkl,pkl->p', signal_part, window_part)
    return psi, closed


def janssen_displayed(f1, f2, g: WindowFamily, h: WindowFamily, points=None) -> np.ndarray:
    """
    sum_{k,l} <pi(chi) f1_k, f2_l> sum_j <h_{l,j}, pi(chi) g_{k,j}>, which is the
    closed form of janssen_psi evaluated at -chi.
    """
    _check_windows(g, h)
    space = PhaseSpace(g.group)
    L, d = g.group.order, g.d
    f1 = _signal_blocks(f1, L, d, "f1")
    f2 = _signal_blocks(f2, L, d, "f2")
    if points is None:
        points = space.phase.element_array
    signal_part = _cross_stft(space, f2, f1, points).conj().transpose(0, 2, 1)
    window_part = _window_correlation(space, h, g, points).conj().transpose(0, 2, 1)
    return np.einsum('pkl,pkl->p', signal_part, window_part)


def janssen_residual(f1, f2, g: WindowFamily, h: WindowFamily) -> float:
    """max |closed form - F_s(psi)| over the phase space."""
    psi, closed = janssen_psi(f1, f2, g, h)
    transformed = PhaseSpace(g.group).symplectic_fourier(psi)
    return float(np.max(np.abs(closed - transformed)))


def periodization_residual(f1, f2, g: WindowFamily, h: WindowFamily, lattice: Subgroup) -> float:
    """
    The quotient Fourier transform of the Lambda-periodization of psi,
    evaluated on the adjoint, against F_s psi restricted to the adjoint.
    """
    space = PhaseSpace(g.group)
    psi, closed = janssen_psi(f1, f2, g, h)
    adjoint = space.adjoint_subgroup(lattice)
    phase = space.phase

    reps = np.array(coset_transversal(phase.element_list, lattice), dtype=np.int64)
    shifted = reps[:, None, :] + lattice.element_array[None, :, :]
    periodized = float(lattice.weight) * psi[phase.index_array(shifted)].sum(axis=1)

    mu_q = float(quotient_point_mass(phase, lattice))
    kernel = space.cocycle_matrix(reps, adjoint.element_array, symplectic=True)
    quotient_transform = mu_q * (periodized @ kernel)
    restricted = closed[space.indices(adjoint)]
    return float(np.max(np.abs(quotient_transform - restricted)))


def figa_residual(f1, f2, g: WindowFamily, h: WindowFamily, lattice: Subgroup) -> float:
    """
    |w sum_{lambda, j} C_g f1 conj(C_h f2) - (1/s) sum_{adjoint} sum_{k,l}
    <pi(a) f1_k, f2_l> sum_j <h_{l,j}, pi(a) g_{k,j}>|.
    """
    _check_windows(g, h)
    sys_g = GaborSystem(g, lattice)
    sys_h = GaborSystem(h, lattice)
    L, d = g.group.order, g.d
    f1 = _signal_blocks(f1, L, d, "f1").reshape(-1)
    f2 = _signal_blocks(f2, L, d, "f2").reshape(-1)

    cg = sys_g.synthesis_matrix.T.conj() @ f1
    ch = sys_h.synthesis_matrix.T.conj() @ f2
    lhs = float(lattice.weight) * np.sum(cg * ch.conj())

    adjoint = sys_g.space.adjoint_subgroup(lattice)
    displayed = janssen_displayed(f1, f2, g, h, adjoint.element_array)
    rhs = float(adjoint.weight) * displayed.sum()

    residual = float(abs(lhs - rhs))
    logger.debug(f"FIGA lhs={lhs:.6g} rhs={rhs:.6g} residual={residual:.3e}")
    return residual


# =========================================================================
# WEXLER-RAZ
# =========================================================================

@dataclass
class WexlerRazReport:
    """Wexler-Raz residual with the cross-checked mixed frame operator."""

    residual: float
    is_dual_pair: bool
    covolume: Fraction
    mixed_operator_residual: float
    tolerance: float

    def __iter__(self):
        # unpacks as (residual, is_dual_pair)
        yield self.residual
        yield self.is_dual_pair

    def to_dict(self) -> dict:
        return {
            'residual': self.residual,
            'is_dual_pair': self.is_dual_pair,
            'covolume': float(self.covolume),
            'mixed_operator_residual': self.mixed_operator_residual,
            'tolerance': self.tolerance,
        }


def wexler_raz_table(g: WindowFamily, h: WindowFamily, lattice: Subgroup) -> np.ndarray:
    """T[a, k, l] = sum_j <h_{l,j}, pi(a) g_{k,j}> over the adjoint subgroup."""
    _check_windows(g, h)
    space = PhaseSpace(g.group)
    adjoint = space.adjoint_subgroup(lattice)
    shifted = space.shift_atoms(adjoint.element_array, g.data)
    return np.einsum('ljt,pkjt->pkl', h.data, shifted.conj())


def wexler_raz_check(g: WindowFamily, h: WindowFamily, lattice: Subgroup,
                     tolerance: Optional[float] = None) -> WexlerRazReport:
    """Deviation of the Wexler-Raz sums from s(Lambda) * delta."""
    tol = TOLERANCE_CONFIG['wexler_raz'] if tolerance is None else tolerance
    table = wexler_raz_table(g, h, lattice)
    s = PhaseSpace(g.group).covolume(lattice)
    target = np.zeros_like(table)
    target[0] = float(s) * np.eye(g.d)
    residual = float(np.max(np.abs(table - target)))

    sys_g = GaborSystem(g, lattice)
    mixed = frame_operator(sys_g, GaborSystem(h, lattice))
    mixed_residual = float(linalg.norm(mixed - np.eye(sys_g.signal_dim), 2))

    is_dual = residual < tol
    logger.info(f"Wexler-Raz residual {residual:.3e}, ||S_gh - Id|| {mixed_residual:.3e} -> "
                f"{'dual pair' if is_dual else 'not dual'}")
    return WexlerRazReport(residual, is_dual, s, mixed_residual, tol)


# =========================================================================
# FRAME / RIESZ DUALITY
# =========================================================================

@dataclass
class DualityCertificate:
    """Frame bounds over Lambda against Riesz bounds over the adjoint."""

    frame_bounds: Tuple[float, float]
    riesz_bounds: Tuple[float, float]
    covolume: Fraction
    max_deviation: float
    verdict: Verdict
    frame_holds: bool
    riesz_holds: bool

    @property
    def degenerate_agree(self) -> bool:
        """A = 0 exactly when A_R = 0."""
        return self.frame_holds == self.riesz_holds

    def to_dict(self) -> dict:
        return {
            'frame_bounds': list(self.frame_bounds),
            'riesz_bounds': list(self.riesz_bounds),
            'covolume': float(self.covolume),
            'covolume_exact': str(self.covolume),
            'max_deviation': self.max_deviation,
            'verdict': self.verdict.value,
            'frame_holds': self.frame_holds,
            'riesz_holds': self.riesz_holds,
        }


def adjoint_system(sys: GaborSystem) -> GaborSystem:
    """Transposed windows over the adjoint subgroup (weight 1/s)."""
    adjoint = sys.space.adjoint_subgroup(sys.lattice)
    return GaborSystem(sys.windows.transpose(), adjoint)


def duality_certificate(sys: GaborSystem, tolerance: Optional[float] = None) -> DualityCertificate:
    """Compare frame bounds over Lambda with Riesz bounds over the adjoint."""
    s = sys.covolume
    frame = frame_bounds(sys, tolerance)
    riesz = riesz_bounds(adjoint_system(sys), reference_covolume=s, tolerance=tolerance)
    deviation = max(abs(riesz.lower - frame.lower), abs(riesz.upper - frame.upper))
    passed = deviation < TOLERANCE_CONFIG['duality_relative'] * max(1.0, frame.upper)
    if frame.holds != riesz.holds:
        passed = False
    cert = DualityCertificate(
        frame_bounds=(frame.lower, frame.upper),
        riesz_bounds=(riesz.lower, riesz.upper),
        covolume=s,
        max_deviation=float(deviation),
        verdict=Verdict.PASS if passed else Verdict.FAIL,
        frame_holds=frame.holds,
        riesz_holds=riesz.holds,
    )
    logger.info(f"duality certificate: A={frame.lower:.6g} B={frame.upper:.6g} "
                f"A_R={riesz.lower:.6g} B_R={riesz.upper:.6g} -> {cert.verdict.value}")
    return cert


@dataclass
class BesselDuality:
    """Optimal Bessel bounds on both sides of the duality."""

    frame_side: float
    adjoint_side: float
    residual: float

    def __iter__(self):
        yield self.frame_side
        yield self.adjoint_side
        yield self.residual

    @property
    def agrees(self) -> bool:
        return self.residual < TOLERANCE_CONFIG['bessel_relative'] * max(1.0, self.frame_side)

    def to_dict(self) -> dict:
        return {
            'bessel_frame_side': self.frame_side,
            'bessel_adjoint_side': self.adjoint_side,
            'residual': self.residual,
            'agrees': self.agrees,
        }


def bessel_duality_check(g: WindowFamily, lattice: Subgroup) -> BesselDuality:
    """Bessel bound over Lambda vs over the adjoint (d <-> n swapped, weight 1/s)."""
    sys = GaborSystem(g, lattice)
    frame_side = bessel_bound(sys)
    adjoint_side = bessel_bound(adjoint_system(sys))
    return BesselDuality(frame_side, adjoint_side, float(abs(frame_side - adjoint_side)))
