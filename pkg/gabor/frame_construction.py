#!/usr/bin/env python3
"""
Frame Construction
==================

Constructive existence of multi-window super Gabor frames:

    - Gram-Schmidt window preparation
    - tight (and dual) windows for the full phase space
    - lattice refinement: walk a chain of supergroups of Lambda until the
      adjoint is sparse enough, then spread the seed over a coset
      transversal to obtain n = [Lambda_N : Lambda] windows over Lambda
    - window generators (delta, constant, discrete gaussian, random)
    - a heuristic search for small window counts
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Integral
from typing import List, Optional

import numpy as np
from scipy import linalg

from config import CONSTRUCTION_CONFIG, TOLERANCE_CONFIG
from lattice.errors import DimensionError, InvalidInputError, LinearDependenceError
from lattice.group_core import (
    GroupSpec,
    Subgroup,
    coset_transversal,
    covolume,
    full_subgroup,
    join,
)
from lattice.phase_space import PhaseSpace, as_signal
from gabor.gabor_engine import (
    BoundsReport,
    GaborSystem,
    WindowFamily,
    frame_bounds,
    frame_operator,
)

logger = logging.getLogger("frame_construction")


# =========================================================================
# GRAM-SCHMIDT
# =========================================================================

def gram_schmidt(windows, tolerance: Optional[float] = None) -> List[np.ndarray]:
    """Orthonormalize in order (modified Gram-Schmidt, one re-orthogonalization pass)."""
    tol = TOLERANCE_CONFIG['gram_schmidt'] if tolerance is None else tolerance
    basis: List[np.ndarray] = []
    for idx, w in enumerate(windows):
        v = np.array(w, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise InvalidInputError(f"window {idx} contains NaN or Inf")
        original = np.linalg.norm(v)
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        remaining = np.linalg.norm(v)
        if original == 0 or remaining <= tol * original:
            raise LinearDependenceError(f"window {idx} lies in the span of the previous windows")
        basis.append(v / remaining)
    return basis


# =========================================================================
# CERTIFICATES
# =========================================================================

@dataclass
class ConstructionCertificate:
    """Evidence that a constructed family is a frame."""

    bounds: BoundsReport
    identity_deviation: float              # ||Id - S||_op
    criterion_value: Optional[float] = None
    criterion_bound: Optional[float] = None
    biorthogonality: Optional[float] = None

    @property
    def neumann_ok(self) -> bool:
        return self.identity_deviation < 1.0

    @property
    def criterion_implies_frame(self) -> Optional[bool]:
        """d * criterion < 1 bounds ||Id - S|| below 1."""
        if self.criterion_bound is None:
            return None
        return self.criterion_bound < 1.0

    def to_dict(self) -> dict:
        out = {
            'bounds': self.bounds.to_dict(include_spectrum=False),
            'identity_deviation': self.identity_deviation,
            'neumann_ok': self.neumann_ok,
        }
        if self.criterion_value is not None:
            out['criterion_value'] = self.criterion_value
            out['criterion_bound'] = self.criterion_bound
        if self.biorthogonality is not None:
            out['biorthogonality_residual'] = self.biorthogonality
        return out


def _identity_deviation(sys: GaborSystem) -> float:
    S = frame_operator(sys)
    return float(linalg.norm(np.eye(sys.signal_dim) - S, 2))


# =========================================================================
# FULL PHASE SPACE
# =========================================================================

@dataclass
class FullPlaneResult:
    """Windows over the full phase space with weight 1/|G|."""

    windows: WindowFamily
    lattice: Subgroup
    certificate: ConstructionCertificate
    dual: Optional[WindowFamily] = None

    def to_dict(self) -> dict:
        out = {
            'windows': self.windows.to_dict(),
            'lattice_size': self.lattice.size,
            'weight': str(self.lattice.weight),
            'certificate': self.certificate.to_dict(),
        }
        if self.dual is not None:
            out['dual'] = self.dual.to_dict()
        return out


def full_plane_tight(group: GroupSpec, d: int, seed_windows=None) -> FullPlaneResult:
    """
    d orthonormal windows (Gram-Schmidt of seed_windows, default the first d
    point masses) form a tight frame with bounds (1, 1) over the full phase
    space with weight 1/|G|; they are their own dual, <g_k, g_k'> = delta.
    """
    if isinstance(d, bool) or not isinstance(d, Integral) or d < 1:
        raise InvalidInputError(f"d must be a positive integer, got {d!r}")
    if d > group.order:
        raise DimensionError(f"d = {d} exceeds |G| = {group.order}")
    d = int(d)
    if seed_windows is None:
        seed_windows = list(np.eye(group.order, dtype=complex)[:d])
    if len(seed_windows) != d:
        raise InvalidInputError(f"expected {d} seed windows, got {len(seed_windows)}")
    components = gram_schmidt([as_signal(w, group.order, "seed window") for w in seed_windows])

    windows = WindowFamily.from_super(group, components)
    space = PhaseSpace(group)
    lattice = full_subgroup(space.phase, Fraction(1, group.order))
    sys = GaborSystem(windows, lattice)
    stacked = np.array(components)
    biorth = float(np.max(np.abs(stacked.conj() @ stacked.T - np.eye(d))))
    cert = ConstructionCertificate(frame_bounds(sys), _identity_deviation(sys), biorthogonality=biorth)
    logger.info(f"full-plane tight frame: d={d}, bounds ({cert.bounds.lower:.6g}, {cert.bounds.upper:.6g})")
    return FullPlaneResult(windows, lattice, cert, dual=windows)


def full_plane_dual(group: GroupSpec, g) -> FullPlaneResult:
    """Any nonzero g with h = g / ||g||^2 (so <g, h> = 1) is a dual pair over the full plane."""
    g = as_signal(g, group.order, "window")
    norm2 = float(np.vdot(g, g).real)
    if norm2 == 0:
        raise InvalidInputError("window must be non-zero")
    windows = WindowFamily.single(group, g)
    dual = WindowFamily.single(group, g / norm2)
    lattice = full_subgroup(PhaseSpace(group).phase, Fraction(1, group.order))
    sys = GaborSystem(windows, lattice)
    S_gh = frame_operator(sys, GaborSystem(dual, lattice))
    deviation = float(linalg.norm(np.eye(group.order) - S_gh, 2))
    cert = ConstructionCertificate(frame_bounds(sys), deviation)
    return FullPlaneResult(windows, lattice, cert, dual=dual)


# =========================================================================
# WINDOW GENERATORS
# =========================================================================

class WindowKind(Enum):
    """Built-in window shapes."""
    DELTA = "delta"
    CONSTANT = "constant"
    DISCRETE_GAUSSIAN = "discrete_gaussian"
    RANDOM = "random"


def _periodized_gaussian(N: int, sigma: float, tail: float) -> np.ndarray:
    """sum over m of exp(-pi (t + m N)^2 / sigma^2), truncated at a relative tail."""
    t = np.arange(N, dtype=float)
    # centre on 0 so the profile is symmetric under t -> -t mod N
    values = np.exp(-np.pi * t ** 2 / sigma ** 2)
    m = 1
    while True:
        near = np.exp(-np.pi * (t - m * N) ** 2 / sigma ** 2) + np.exp(-np.pi * (t + m * N) ** 2 / sigma ** 2)
        values = values + near
        if np.max(near) <= tail * np.max(values):
            break
        m += 1
    return values


def window_generator(kind, group: GroupSpec, sigma: Optional[float] = None,
                     seed: Optional[int] = None) -> np.ndarray:
    """Unit-norm window on G; the random kind is fixed by its seed."""
    kind = WindowKind(kind) if not isinstance(kind, WindowKind) else kind
    L = group.order
    if kind is WindowKind.DELTA:
        out = np.zeros(L, dtype=complex)
        out[0] = 1.0
        return out
    if kind is WindowKind.CONSTANT:
        return np.full(L, 1.0 / math.sqrt(L), dtype=complex)
    if kind is WindowKind.DISCRETE_GAUSSIAN:
        if sigma is None or not np.isfinite(sigma) or sigma <= 0:
            raise InvalidInputError(f"sigma must be > 0, got {sigma!r}")
        tail = CONSTRUCTION_CONFIG['gaussian_tail']
        profile = np.ones(1)
        for N in group.orders:
            profile = np.multiply.outer(profile, _periodized_gaussian(N, float(sigma), tail))
        out = profile.reshape(-1).astype(complex)
        return out / np.linalg.norm(out)
    # random
    if seed is None:
        raise InvalidInputError("random windows need a seed")
    rng = np.random.default_rng(int(seed) % 2 ** 64)
    out = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    return out / np.linalg.norm(out)


def random_family(group: GroupSpec, d: int, n: int, seed: int) -> WindowFamily:
    """d x n independent complex normal windows from one seeded generator."""
    rng = np.random.default_rng(int(seed) % 2 ** 64)
    shape = (d, n, group.order)
    return WindowFamily(group, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


# =========================================================================
# LATTICE REFINEMENT
# =========================================================================

class CriterionMode(Enum):
    """Stopping rule of the refinement chain."""
    CRITERION = "criterion"   # sum over the adjoint minus 0 below 1/d
    SPECTRAL = "spectral"     # stop as soon as the assembled system is a frame


@dataclass
class ChainStep:
    """One subgroup of the refinement chain and its criterion value."""

    lattice: Subgroup
    criterion: float
    index: int                 # [Lambda_N : Lambda]

    def to_dict(self) -> dict:
        return {'size': self.lattice.size, 'index': self.index, 'criterion': self.criterion,
                'generators': [list(g) for g in self.lattice.generators]}


@dataclass
class RefinementResult:
    """Output of refine_until_frame."""

    windows: WindowFamily
    refined: Subgroup
    lattice: Subgroup
    certificate: ConstructionCertificate
    chain: List[ChainStep] = field(default_factory=list)
    mode: CriterionMode = CriterionMode.CRITERION

    @property
    def n(self) -> int:
        return self.windows.n

    def __iter__(self):
        yield self.windows
        yield self.refined
        yield self.certificate

    def to_dict(self) -> dict:
        return {
            'mode': self.mode.value,
            'n': self.n,
            'd': self.windows.d,
            'refined_lattice': self.refined.to_dict(),
            'chain': [step.to_dict() for step in self.chain],
            'certificate': self.certificate.to_dict(),
            'windows': self.windows.to_dict(),
        }


def refinement_criterion(seed: np.ndarray, lattice: Subgroup, space: PhaseSpace) -> float:
    """max over (k, k') of sum over adjoint minus 0 of |<g_k, pi(a) g_k'>|."""
    adjoint = space.adjoint_subgroup(lattice)
    points = adjoint.element_array[1:]
    if len(points) == 0:
        return 0.0
    shifted = space.shift_atoms(points, seed)                      # (P, d, L)
    table = np.abs(np.einsum('kt,plt->pkl', seed, shifted.conj()))
    return float(np.max(table.sum(axis=0)))


def next_supergroups(lattice: Subgroup) -> List[Subgroup]:
    """Supergroups <lattice, chi> of minimal index, deduplicated, ordered by generator."""
    candidates = {}
    best = None
    for chi in lattice.ambient.element_list:
        if chi in lattice:
            continue
        cand = join(lattice, chi)
        if best is not None and cand.size > best:
            continue
        if best is None or cand.size < best:
            best = cand.size
            candidates = {}
        candidates.setdefault(cand.members, cand)
    return list(candidates.values())


def refinement_chain(seed: np.ndarray, lattice: Subgroup, space: PhaseSpace,
                     stop=None) -> List[ChainStep]:
    """
    Lambda = Lambda_1 < Lambda_2 < ... up to the full phase space. Each step
    takes a minimal-index supergroup, preferring the smallest criterion value
    (ties broken by the lex order of the added generator). The walk ends when
    `stop(step)` is true or the full phase space is reached.
    """
    base = lattice.size
    current = lattice
    steps = [ChainStep(current, refinement_criterion(seed, current, space), 1)]
    while True:
        step = steps[-1]
        if stop is not None and stop(step):
            break
        if current.size == space.phase.order:
            break
        options = [(refinement_criterion(seed, cand, space), cand) for cand in next_supergroups(current)]
        value, current = min(options, key=lambda item: (item[0], item[1].generators[-1]))
        steps.append(ChainStep(current, value, current.size // base))
        logger.debug(f"refined to |Lambda_N|={current.size}, criterion {value:.6g}")
    return steps


def assemble_windows(seed: np.ndarray, lattice: Subgroup, refined: Subgroup,
                     space: PhaseSpace) -> WindowFamily:
    """h_{k,j} = pi(chi_j) sqrt(s(refined)) g_k over a transversal of refined / lattice."""
    weighted = refined.with_weight(lattice.weight)
    scale = math.sqrt(float(covolume(space.phase, weighted)))
    reps = coset_transversal(refined.elements, lattice)
    shifted = space.shift_atoms(reps, scale * seed)                 # (n, d, L)
    return WindowFamily(space.group, shifted.transpose(1, 0, 2))


def _validate_seed(seed: WindowFamily) -> np.ndarray:
    if seed.n != 1:
        raise InvalidInputError(f"seed must have one window (n = 1), got n = {seed.n}")
    components = seed.data[:, 0, :]
    gram = components.conj() @ components.T
    deviation = float(np.max(np.abs(gram - np.eye(seed.d))))
    if deviation > TOLERANCE_CONFIG['orthonormal']:
        raise InvalidInputError(f"seed components are not orthonormal (deviation {deviation:.3e})")
    return components


def refine_until_frame(seed: WindowFamily, lattice: Subgroup, mode=None,
                       tolerance: Optional[float] = None) -> RefinementResult:
    """
    Refine Lambda until the seed's adjoint correlations are small, then
    assemble n = [Lambda_N : Lambda] windows over Lambda.

    In criterion mode the stop rule is max_{k,k'} sum_{a != 0} |<g_k, pi(a) g_k'>| < 1/d,
    which forces ||Id - S|| < 1. Spectral mode stops at the first Lambda_N
    whose assembled system is a frame.
    """
    mode = CriterionMode(mode or CONSTRUCTION_CONFIG['criterion_mode'])
    components = _validate_seed(seed)
    space = PhaseSpace(seed.group)
    if lattice.ambient.orders != space.phase.orders:
        raise InvalidInputError("lattice does not live in the phase space of the seed's group")
    d = seed.d

    if mode is CriterionMode.CRITERION:
        def stop(step):
            return step.criterion < 1.0 / d
    else:
        def stop(step):
            windows = assemble_windows(components, lattice, step.lattice, space)
            return frame_bounds(GaborSystem(windows, lattice), tolerance).holds

    chain = refinement_chain(components, lattice, space, stop)
    refined = chain[-1].lattice
    windows = assemble_windows(components, lattice, refined, space)
    sys = GaborSystem(windows, lattice)
    criterion = chain[-1].criterion
    cert = ConstructionCertificate(
        bounds=frame_bounds(sys, tolerance),
        identity_deviation=_identity_deviation(sys),
        criterion_value=criterion,
        criterion_bound=d * criterion,
    )
    logger.info(f"refine_until_frame ({mode.value}): |Lambda|={lattice.size} -> |Lambda_N|={refined.size}, "
                f"n={windows.n}, A={cert.bounds.lower:.6g}, ||Id - S||={cert.identity_deviation:.6g}")
    return RefinementResult(windows, refined, lattice, cert, chain, mode)


# =========================================================================
# MINIMAL WINDOW SEARCH (HEURISTIC)
# =========================================================================

@dataclass
class WindowSearchResult:
    """Smallest window count for which a random draw gave a frame, if any."""

    lower_limit: int
    n: Optional[int]
    windows: Optional[WindowFamily]
    bounds: Optional[BoundsReport]
    trials: int

    @property
    def found(self) -> bool:
        return self.n is not None

    def to_dict(self) -> dict:
        return {
            'heuristic': True,
            'lower_limit': self.lower_limit,
            'n': self.n,
            'found': self.found,
            'trials': self.trials,
            'bounds': self.bounds.to_dict(include_spectrum=False) if self.bounds else None,
        }


def minimal_window_search(group: GroupSpec, lattice: Subgroup, d: int, seed: int = 0,
                          trials: Optional[int] = None, extra: Optional[int] = None,
                          tolerance: Optional[float] = None) -> WindowSearchResult:
    """
    Try random windows for n = ceil(d * s(Lambda)) upwards (counting
    weight). Heuristic: failure for a given n says nothing about existence.
    """
    trials = CONSTRUCTION_CONFIG['search_trials'] if trials is None else trials
    extra = CONSTRUCTION_CONFIG['search_extra_windows'] if extra is None else extra
    lower = math.ceil(Fraction(group.order * d, lattice.size))
    rng = np.random.default_rng(int(seed) % 2 ** 64)
    attempts = 0
    for n in range(lower, lower + extra + 1):
        for _ in range(trials):
            attempts += 1
            windows = random_family(group, d, n, int(rng.integers(0, 2 ** 63)))
            bounds = frame_bounds(GaborSystem(windows, lattice), tolerance)
            if bounds.holds:
                logger.info(f"minimal window search: frame with n={n} (lower limit {lower}) "
                            f"after {attempts} draws")
                return WindowSearchResult(lower, n, windows, bounds, attempts)
    logger.warning(f"minimal window search found no frame for n in [{lower}, {lower + extra}]")
    return WindowSearchResult(lower, None, None, None, attempts)
