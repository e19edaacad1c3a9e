#!/usr/bin/env python3
"""
Multi-Window Super Gabor Engine
===============================

n-multi-window d-super Gabor systems over a subgroup Lambda of G x G^:
analysis / synthesis / (mixed) frame operators, optimal frame and Riesz
bounds, canonical dual and tight windows, density obstructions and
biorthogonality.

Layouts:
    windows      data[k][j][t]   (super index k, window index j, group index t)
    signals      f[k][t]         on G x Z_d
    coefficients c[p][j]         lattice point p (lex) outer, window j inner
    operators    act on C^{|G| d}, k outer, t inner

All operators are dense matrices; brute force is the reference.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import List, Optional

import numpy as np
from scipy import linalg

from config import DESK_SCALE, TOLERANCE_CONFIG
from lattice.errors import DimensionError, InvalidInputError, NotAFrameError
from lattice.group_core import GroupSpec, Subgroup
from lattice.phase_space import PhaseSpace, as_signal

logger = logging.getLogger("gabor_engine")

# =========================================================================
# DATA TYPES
# =========================================================================


@dataclass(eq=False)
class WindowFamily:
    """Gabor atoms g_{k,j}: d super components times n windows, each a signal on G."""

    group: GroupSpec
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 3:
            raise InvalidInputError(f"window data must be indexed [k][j][t], got shape {data.shape}")
        d, n, length = data.shape
        if d < 1 or n < 1:
            raise InvalidInputError(f"need d, n >= 1, got d={d}, n={n}")
        if length != self.group.order:
            raise InvalidInputError(f"windows have length {length}, group has order {self.group.order}")
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("window data contains NaN or Inf")
        self.data = data

    @classmethod
    def single(cls, group: GroupSpec, g) -> "WindowFamily":
        return cls(group, as_signal(g, group.order, "window").reshape(1, 1, -1))

    @classmethod
    def from_columns(cls, group: GroupSpec, windows) -> "WindowFamily":
        """n windows of one component each (d = 1)."""
        rows = np.array([as_signal(w, group.order, "window") for w in windows])
        return cls(group, rows[None, :, :])

    @classmethod
    def from_super(cls, group: GroupSpec, components) -> "WindowFamily":
        """One window with d super components (n = 1)."""
        rows = np.array([as_signal(w, group.order, "window") for w in components])
        return cls(group, rows[:, None, :])

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def window(self, j: int) -> np.ndarray:
        """Super window j as a (d, |G|) array."""
        return self.data[:, j, :]

    def stacked(self) -> np.ndarray:
        """(n, d |G|): window j as one vector of the d-fold direct sum."""
        return self.data.transpose(1, 0, 2).reshape(self.n, -1)

    @classmethod
    def from_stacked(cls, group: GroupSpec, stacked: np.ndarray, d: int) -> "WindowFamily":
        n = stacked.shape[0]
        return cls(group, stacked.reshape(n, d, group.order).transpose(1, 0, 2))

    def transpose(self) -> "WindowFamily":
        """Swap the roles of d and n: g'_{j,k} = g_{k,j}."""
        return WindowFamily(self.group, self.data.transpose(1, 0, 2))

    def scaled(self, factor) -> "WindowFamily":
        return WindowFamily(self.group, self.data * factor)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2))

    def same_shape(self, other: "WindowFamily") -> bool:
        return self.group.orders == other.group.orders and self.data.shape == other.data.shape

    def to_dict(self) -> dict:
        return {
            'd': self.d,
            'n': self.n,
            'data': [[[[float(v.real), float(v.imag)] for v in vec] for vec in row] for row in self.data],
        }


@dataclass(eq=False)
class GaborSystem:
    """Windows shifted along a subgroup of the phase space."""

    windows: WindowFamily
    lattice: Subgroup

    def __post_init__(self):
        orders = self.windows.group.orders
        if self.lattice.ambient.orders != orders + orders:
            raise InvalidInputError(
                f"lattice lives in Z{list(self.lattice.ambient.orders)}, windows on Z{list(orders)}")

    @cached_property
    def space(self) -> PhaseSpace:
        return PhaseSpace(self.windows.group)

    @property
    def weight(self) -> Fraction:
        return self.lattice.weight

    @property
    def covolume(self) -> Fraction:
        return self.space.covolume(self.lattice)

    @property
    def signal_dim(self) -> int:
        return self.windows.group.order * self.windows.d

    @property
    def coefficient_dim(self) -> int:
        return self.lattice.size * self.windows.n

    @cached_property
    def synthesis_matrix(self) -> np.ndarray:
        """(|G| d, |Lambda| n); column (p, j) is the stacked atom pi(lambda_p) g_{., j}."""
        check_desk_scale(self)
        atoms = self.space.shift_atoms(self.lattice.element_array, self.windows.data.transpose(1, 0, 2))
        return atoms.reshape(self.coefficient_dim, self.signal_dim).T

    def with_windows(self, windows: WindowFamily) -> "GaborSystem":
        return GaborSystem(windows, self.lattice)


class BoundsKind(Enum):
    """Which inequality a BoundsReport describes."""
    FRAME = "frame"
    RIESZ = "riesz"
    BESSEL = "bessel"


@dataclass
class BoundsReport:
    """Optimal bounds with the spectrum they came from."""

    lower: float
    upper: float
    spectrum: List[float]
    kind: BoundsKind
    holds: bool
    tolerance: float = TOLERANCE_CONFIG['frame_relative']

    @property
    def is_tight(self) -> bool:
        return self.holds and abs(self.upper - self.lower) <= 1e-9 * max(1.0, self.upper)

    def to_dict(self, include_spectrum: bool = True) -> dict:
        out = {
            'kind': self.kind.value,
            'lower': self.lower,
            'upper': self.upper,
            'holds': self.holds,
            'tight': self.is_tight,
        }
        if include_spectrum:
            out['spectrum'] = list(self.spectrum)
        return out


def check_desk_scale(sys: GaborSystem):
    limit = DESK_SCALE['max_operator_dim']
    if sys.signal_dim > limit or sys.coefficient_dim > limit:
        raise DimensionError(
            f"operator dimensions {sys.signal_dim} x {sys.coefficient_dim} exceed desk scale {limit}")


def _bounds(eigenvalues: np.ndarray, kind: BoundsKind, tolerance: Optional[float]) -> BoundsReport:
    tol = TOLERANCE_CONFIG['frame_relative'] if tolerance is None else tolerance
    spectrum = np.clip(np.sort(np.real(eigenvalues)), 0.0, None)
    lower, upper = float(spectrum[0]), float(spectrum[-1])
    holds = upper > 0.0 and lower > tol * upper
    return BoundsReport(lower, upper, [float(v) for v in spectrum], kind, holds, tol)


# =========================================================================
# OPERATORS
# =========================================================================

def _signal_vector(sys: GaborSystem, f) -> np.ndarray:
    arr = np.asarray(f, dtype=complex).reshape(-1)
    if arr.shape[0] != sys.signal_dim:
        raise InvalidInputError(f"signal must have {sys.signal_dim} entries (d x |G|), got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("signal contains NaN or Inf")
    return arr


def analysis(sys: GaborSystem, f) -> np.ndarray:
    """C f (lambda, j) = sum_k <f_k, pi(lambda) g_{k,j}>, shape (|Lambda|, n)."""
    vec = _signal_vector(sys, f)
    coeffs = sys.synthesis_matrix.T.conj() @ vec
    return coeffs.reshape(sys.lattice.size, sys.windows.n)


def synthesis(sys: GaborSystem, c) -> np.ndarray:
    """D c = w sum_{lambda, j} c(lambda, j) pi(lambda) g_{., j}, shape (d, |G|)."""
    coeffs = np.asarray(c, dtype=complex).reshape(-1)
    if coeffs.shape[0] != sys.coefficient_dim:
        raise InvalidInputError(
            f"coefficients must have {sys.coefficient_dim} entries (|Lambda| x n), got {coeffs.shape[0]}")
    out = float(sys.weight) * (sys.synthesis_matrix @ coeffs)
    return out.reshape(sys.windows.d, sys.windows.group.order)


def _check_pair(sys_g: GaborSystem, sys_h: GaborSystem):
    if not sys_g.windows.same_shape(sys_h.windows):
        raise InvalidInputError("mixed frame operator needs windows of the same shape")
    if not sys_g.lattice.same_elements(sys_h.lattice) or sys_g.weight != sys_h.weight:
        raise InvalidInputError("mixed frame operator needs the same lattice and weight")


def frame_operator(sys_g: GaborSystem, sys_h: Optional[GaborSystem] = None) -> np.ndarray:
    """S_{g,h} = D_h C_g = w sum_{lambda, j} (pi(lambda) h_j)(pi(lambda) g_j)^*."""
    if sys_h is None:
        sys_h = sys_g
    else:
        _check_pair(sys_g, sys_h)
    G = sys_g.synthesis_matrix
    H = sys_h.synthesis_matrix
    return float(sys_g.weight) * (H @ G.conj().T)


def frame_bounds(sys: GaborSystem, tolerance: Optional[float] = None) -> BoundsReport:
    """Extreme eigenvalues of the frame operator."""
    S = frame_operator(sys)
    S = (S + S.conj().T) / 2
    report = _bounds(linalg.eigvalsh(S), BoundsKind.FRAME, tolerance)
    logger.debug(f"frame bounds A={report.lower:.6g} B={report.upper:.6g} holds={report.holds}")
    return report


def bessel_bound(sys: GaborSystem) -> float:
    """Optimal Bessel bound: the largest eigenvalue of S (= w * ||D||^2)."""
    G = sys.synthesis_matrix
    if not np.any(G):
        return 0.0
    return float(sys.weight) * float(linalg.norm(G, 2)) ** 2


def gram_matrix(sys: GaborSystem) -> np.ndarray:
    """Gamma[(a, k), (b, l)] = <atom_{b,l}, atom_{a,k}> over lattice points and windows."""
    G = sys.synthesis_matrix
    return G.conj().T @ G


def riesz_bounds(sys: GaborSystem, reference_covolume=None,
                 tolerance: Optional[float] = None) -> BoundsReport:
    """
    Spectrum of the Gram matrix divided by the reference covolume s.

    With the default s = 1/w this is the Riesz spectrum of the system with
    its own coefficient measure. Passing s(Lambda) for a system over the
    adjoint subgroup makes the extremes equal the frame bounds over Lambda.
    """
    if reference_covolume is None:
        s = 1 / float(sys.weight)
    else:
        s = float(reference_covolume)
        if not np.isfinite(s) or s <= 0:
            raise InvalidInputError(f"reference covolume must be > 0, got {reference_covolume!r}")
    Gamma = gram_matrix(sys)
    Gamma = (Gamma + Gamma.conj().T) / 2
    report = _bounds(linalg.eigvalsh(Gamma) / s, BoundsKind.RIESZ, tolerance)
    logger.debug(f"riesz bounds A={report.lower:.6g} B={report.upper:.6g} holds={report.holds}")
    return report


# =========================================================================
# DUAL AND TIGHT WINDOWS
# =========================================================================

def _require_frame(sys: GaborSystem, tolerance: Optional[float]):
    report = frame_bounds(sys, tolerance)
    if not report.holds:
        raise NotAFrameError(
            f"not a frame: A={report.lower:.3e}, B={report.upper:.3e} (relative tolerance {report.tolerance:g})")
    return report


def canonical_dual(sys: GaborSystem, tolerance: Optional[float] = None) -> WindowFamily:
    """h_j = S^{-1} g_j."""
    _require_frame(sys, tolerance)
    S = frame_operator(sys)
    S = (S + S.conj().T) / 2
    stacked = sys.windows.stacked()
    dual = linalg.solve(S, stacked.T, assume_a='her').T
    return WindowFamily.from_stacked(sys.windows.group, dual, sys.windows.d)


def canonical_tight(sys: GaborSystem, tolerance: Optional[float] = None) -> WindowFamily:
    """S^{-1/2} g_j; no eigenvalue is clamped."""
    _require_frame(sys, tolerance)
    S = frame_operator(sys)
    values, vectors = linalg.eigh((S + S.conj().T) / 2)
    inv_sqrt = (vectors * (1.0 / np.sqrt(values))) @ vectors.conj().T
    tight = (inv_sqrt @ sys.windows.stacked().T).T
    return WindowFamily.from_stacked(sys.windows.group, tight, sys.windows.d)


def dual_pair_residual(sys: GaborSystem, dual: WindowFamily) -> float:
    """max(||D_h C_g - Id||, ||D_g C_h - Id||) in operator norm."""
    sys_h = sys.with_windows(dual)
    identity = np.eye(sys.signal_dim)
    forward = linalg.norm(frame_operator(sys, sys_h) - identity, 2)
    backward = linalg.norm(frame_operator(sys_h, sys) - identity, 2)
    return float(max(forward, backward))


def commutation_residual(sys: GaborSystem) -> float:
    """max over lambda of ||S (pi(lambda) + ... + pi(lambda)) - (...) S||."""
    S = frame_operator(sys)
    worst = 0.0
    eye_d = np.eye(sys.windows.d)
    for lam in sys.lattice.elements:
        shift = np.kron(eye_d, sys.space.tf_shift_matrix(lam))
        worst = max(worst, float(np.max(np.abs(S @ shift - shift @ S))))
    return worst


def biorthogonality_residual(g: WindowFamily, h: WindowFamily, adjoint: Subgroup) -> float:
    """max |sum_k <pi(a) g_{k,j}, pi(b) h_{k,j'}> - delta_{(a,j),(b,j')}| over the subgroup."""
    if not g.same_shape(h):
        raise InvalidInputError("biorthogonality needs windows of the same shape")
    G = GaborSystem(g, adjoint).synthesis_matrix
    H = GaborSystem(h, adjoint).synthesis_matrix
    table = G.T @ H.conj()
    return float(np.max(np.abs(table - np.eye(table.shape[0]))))


# =========================================================================
# DENSITY
# =========================================================================

class DensityVerdict(Enum):
    """What the necessary density conditions imply."""
    FRAME_IMPOSSIBLE = "frame impossible"
    RIESZ_IMPOSSIBLE = "Riesz impossible"
    OPEN = "open"


@dataclass
class DensityCondition:
    """One necessary condition and whether it holds."""
    name: str
    holds: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {'name': self.name, 'holds': self.holds, 'detail': self.detail}


@dataclass
class DensityReport:
    """Necessary conditions for frames / Riesz sequences and the implied verdict."""

    counting_covolume: Fraction
    d: int
    n: int
    conditions: List[DensityCondition] = field(default_factory=list)
    verdict: DensityVerdict = DensityVerdict.OPEN
    basis_candidate: bool = False

    def condition(self, name: str) -> DensityCondition:
        for cond in self.conditions:
            if cond.name == name:
                return cond
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            'counting_covolume': float(self.counting_covolume),
            'counting_covolume_exact': str(self.counting_covolume),
            'd': self.d,
            'n': self.n,
            'verdict': self.verdict.value,
            'basis_candidate': self.basis_candidate,
            'conditions': [c.to_dict() for c in self.conditions],
        }


def _bracket(lower: float, value: float, upper: float) -> bool:
    slack = 1e-9 * max(1.0, abs(upper))
    return lower - slack <= value <= upper + slack


def density_check(sys: GaborSystem, tolerance: Optional[float] = None) -> DensityReport:
    """Evaluate the necessary density conditions for frames and Riesz sequences."""
    group = sys.windows.group
    d, n = sys.windows.d, sys.windows.n
    s_count = Fraction(group.order, sys.lattice.size)
    density = s_count * d
    report = DensityReport(counting_covolume=s_count, d=d, n=n)

    rank = int(np.linalg.matrix_rank(sys.synthesis_matrix))
    report.conditions.append(DensityCondition(
        'frame_density', density <= n, f"s(Lambda) d = {density} vs n = {n}"))
    report.conditions.append(DensityCondition(
        'frame_rank', rank >= sys.signal_dim, f"rank {rank} vs |G| d = {sys.signal_dim}"))
    report.conditions.append(DensityCondition(
        'riesz_density', density >= n, f"s(Lambda) d = {density} vs n = {n}"))
    report.conditions.append(DensityCondition(
        'riesz_rank', rank >= sys.coefficient_dim, f"rank {rank} vs |Lambda| n = {sys.coefficient_dim}"))

    norm2 = sys.windows.norm_squared()
    frame = frame_bounds(sys, tolerance)
    if frame.holds:
        sd = float(sys.covolume) * d
        report.conditions.append(DensityCondition(
            'frame_norm_bracket', _bracket(frame.lower * sd, norm2, frame.upper * sd),
            f"A s d = {frame.lower * sd:.6g} <= ||g||^2 = {norm2:.6g} <= B s d = {frame.upper * sd:.6g}"))
    riesz = riesz_bounds(sys, tolerance=tolerance)
    if riesz.holds:
        weighted = float(sys.weight) * norm2
        report.conditions.append(DensityCondition(
            'riesz_norm_bracket', _bracket(riesz.lower * n, weighted, riesz.upper * n),
            f"A n = {riesz.lower * n:.6g} <= w ||g||^2 = {weighted:.6g} <= B n = {riesz.upper * n:.6g}"))

    frame_blocked = not (report.condition('frame_density').holds and report.condition('frame_rank').holds)
    riesz_blocked = not (report.condition('riesz_density').holds and report.condition('riesz_rank').holds)
    if frame_blocked:
        report.verdict = DensityVerdict.FRAME_IMPOSSIBLE
    elif riesz_blocked:
        report.verdict = DensityVerdict.RIESZ_IMPOSSIBLE
    report.basis_candidate = density == n
    logger.info(f"density check: s d = {density}, n = {n} -> {report.verdict.value}"
                f"{' (basis candidate)' if report.basis_candidate else ''}")
    return report


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s | %(levelname)-8s | %(name)-20s | %(message)s')
    from lattice.group_core import make_group, subgroup_closure
    from lattice.phase_space import phase_group

    G = make_group([2])
    lam = subgroup_closure(phase_group(G), [(1, 1)])
    system = GaborSystem(WindowFamily.single(G, [1, 0]), lam)
    print(frame_bounds(system).to_dict())
    print(density_check(system).to_dict())
