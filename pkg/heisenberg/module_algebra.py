#!/usr/bin/env python3
"""
Heisenberg Module Algebra
=========================

Twisted group algebras on Lambda (side A, cocycle c) and on its adjoint
(side B, cocycle conj(c)), the A-/B-valued inner products on signals,
traces, the block (matrix-valued) inner products for multi-window super
families, module norms and idempotent checks.

Coefficient functions carry their lattice's weight implicitly:
represent() and twisted_convolve() both multiply by lattice.weight, which
is w on Lambda and 1/s(Lambda) on an adjoint built by adjoint_subgroup().

Side B is a right module: rep(b1 # b2) = rep(b2) rep(b1), so
f . (b1 # b2) = (f . b1) . b2.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from typing import List, Optional

import numpy as np
from scipy import linalg

from config import DESK_SCALE, TOLERANCE_CONFIG
from lattice.errors import InvalidInputError
from lattice.group_core import GroupSpec, Subgroup, subgroup_from_elements, unit_phase
from lattice.phase_space import PhaseSpace, as_signal
from gabor.gabor_engine import GaborSystem, WindowFamily, frame_bounds

logger = logging.getLogger("module_algebra")


class Side(Enum):
    """Which twisted algebra a coefficient function belongs to."""
    A = "A"   # on Lambda, cocycle c, represented by pi(lambda)
    B = "B"   # on the adjoint, cocycle conj(c), represented by pi(lambda)^*


# =========================================================================
# LATTICE TABLES
# =========================================================================

class _LatticeTables:
    """Difference, negation and cocycle tables of one lattice."""

    def __init__(self, lattice: Subgroup):
        self.lattice = lattice
        self.space = PhaseSpace.of(lattice)
        phase = lattice.ambient
        group = self.space.group
        elems = lattice.element_array
        lookup = np.full(phase.order, -1, dtype=np.int64)
        lookup[phase.index_array(elems)] = np.arange(lattice.size)
        # diff[i, i'] = position of lambda_i - lambda_i'
        self.diff = lookup[phase.index_array(elems[:, None, :] - elems[None, :, :])]
        self.neg = lookup[phase.index_array(-elems)]
        self.zero = int(lookup[phase.index(phase.zero)])

        k = group.rank
        xs = elems[:, :k] * group.phase_units
        ws = elems[:, k:]
        # twist[i, i'] = c(lambda_i', lambda_i - lambda_i') = conj(omega_{i - i'}(x_{i'}))
        diff_w = ws[:, None, :] - ws[None, :, :]
        self.twist = unit_phase(-np.einsum('bk,abk->ab', xs, diff_w), group.exponent)
        # c(lambda, lambda)
        self.self_cocycle = unit_phase(-np.einsum('ak,ak->a', xs, ws), group.exponent)

    @classmethod
    def of(cls, lattice: Subgroup) -> "_LatticeTables":
        return lattice_tables(lattice.ambient, lattice.elements)

    @cached_property
    def shift_matrices(self) -> np.ndarray:
        """pi(lambda) for every lattice element, shape (|Lambda|, |G|, |G|)."""
        return np.array([self.space.tf_shift_matrix(e) for e in self.lattice.elements])


@lru_cache(maxsize=DESK_SCALE['lattice_cache_size'])
def lattice_tables(ambient: GroupSpec, elements: tuple) -> _LatticeTables:
    """Tables for the lattice with these elements; weight does not enter them."""
    return _LatticeTables(subgroup_from_elements(ambient, elements))


# =========================================================================
# TWISTED COEFFICIENTS
# =========================================================================

@dataclass(eq=False)
class TwistedCoefficients:
    """An element of the twisted algebra on `lattice`, in coefficient form."""

    lattice: Subgroup
    values: np.ndarray
    side: Side = Side.A

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).reshape(-1)
        if values.shape[0] != self.lattice.size:
            raise InvalidInputError(
                f"coefficients need {self.lattice.size} values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("coefficients contain NaN or Inf")
        self.values = values

    @classmethod
    def delta(cls, lattice: Subgroup, point, side: Side = Side.A) -> "TwistedCoefficients":
        values = np.zeros(lattice.size, dtype=complex)
        values[lattice.position(lattice.ambient.reduce(point))] = 1.0
        return cls(lattice, values, side)

    @classmethod
    def zeros(cls, lattice: Subgroup, side: Side = Side.A) -> "TwistedCoefficients":
        return cls(lattice, np.zeros(lattice.size, dtype=complex), side)

    def at(self, point) -> complex:
        return complex(self.values[self.lattice.position(self.lattice.ambient.reduce(point))])

    def _compatible(self, other: "TwistedCoefficients"):
        if self.side != other.side:
            raise InvalidInputError(f"cannot combine side {self.side.value} with side {other.side.value}")
        if not self.lattice.same_elements(other.lattice) or self.lattice.weight != other.lattice.weight:
            raise InvalidInputError("coefficients live on different lattices")

    def __add__(self, other: "TwistedCoefficients") -> "TwistedCoefficients":
        self._compatible(other)
        return TwistedCoefficients(self.lattice, self.values + other.values, self.side)

    def __sub__(self, other: "TwistedCoefficients") -> "TwistedCoefficients":
        self._compatible(other)
        return TwistedCoefficients(self.lattice, self.values - other.values, self.side)

    def __mul__(self, scalar) -> "TwistedCoefficients":
        return TwistedCoefficients(self.lattice, self.values * scalar, self.side)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_dict(self) -> dict:
        return {
            'side': self.side.value,
            'elements': [list(e) for e in self.lattice.elements],
            'values': [[float(v.real), float(v.imag)] for v in self.values],
        }


def twisted_convolve(F1: TwistedCoefficients, F2: TwistedCoefficients) -> TwistedCoefficients:
    """(F1 # F2)(l) = w sum_l' F1(l') F2(l - l') c(l', l - l')  (conj(c) on side B)."""
    F1._compatible(F2)
    tables = _LatticeTables.of(F1.lattice)
    twist = tables.twist if F1.side is Side.A else tables.twist.conj()
    terms = F1.values[None, :] * F2.values[tables.diff] * twist
    return TwistedCoefficients(F1.lattice, float(F1.lattice.weight) * terms.sum(axis=1), F1.side)


def twisted_involution(F: TwistedCoefficients) -> TwistedCoefficients:
    """A: F*(l) = c(l,l) conj(F(-l));  B: F*(l) = conj(c(l,l) F(-l))."""
    tables = _LatticeTables.of(F.lattice)
    flipped = F.values[tables.neg]
    if F.side is Side.A:
        values = tables.self_cocycle * flipped.conj()
    else:
        values = (tables.self_cocycle * flipped).conj()
    return TwistedCoefficients(F.lattice, values, F.side)


def represent(F: TwistedCoefficients) -> np.ndarray:
    """A: w sum a(l) pi(l);  B: weight * sum b(l) pi(l)^*."""
    tables = _LatticeTables.of(F.lattice)
    shifts = tables.shift_matrices
    if F.side is Side.B:
        shifts = shifts.conj().transpose(0, 2, 1)
    return float(F.lattice.weight) * np.einsum('p,pab->ab', F.values, shifts)


def left_action(F: TwistedCoefficients, h) -> np.ndarray:
    """F . h for side A."""
    if F.side is not Side.A:
        raise InvalidInputError("left action needs a side-A element")
    return represent(F) @ np.asarray(h, dtype=complex)


def right_action(f, b: TwistedCoefficients) -> np.ndarray:
    """f . b = (1/s) sum b(l) pi(l)^* f for side B."""
    if b.side is not Side.B:
        raise InvalidInputError("right action needs a side-B element")
    return represent(b) @ np.asarray(f, dtype=complex)


def trace_A(F: TwistedCoefficients) -> complex:
    """Value at the identity."""
    return complex(F.values[_LatticeTables.of(F.lattice).zero])


def trace_B(F: TwistedCoefficients) -> complex:
    return trace_A(F)


# =========================================================================
# INNER PRODUCTS
# =========================================================================

def _pair(space: PhaseSpace, f, g):
    return as_signal(f, space.size, "f"), as_signal(g, space.size, "g")


def lhs_inner(f, g, lattice: Subgroup) -> TwistedCoefficients:
    """<f, g>_Lambda with coefficients a(l) = <f, pi(l) g>."""
    space = PhaseSpace.of(lattice)
    f, g = _pair(space, f, g)
    atoms = space.shift_atoms(lattice.element_array, g)
    return TwistedCoefficients(lattice, atoms.conj() @ f, Side.A)


def rhs_inner(f, g, adjoint: Subgroup) -> TwistedCoefficients:
    """<f, g>_adjoint with coefficients b(l) = <g, pi(l)^* f>."""
    space = PhaseSpace.of(adjoint)
    f, g = _pair(space, f, g)
    tables = _LatticeTables.of(adjoint)
    adj_atoms = np.einsum('pba,b->pa', tables.shift_matrices.conj(), f)
    return TwistedCoefficients(adjoint, adj_atoms.conj() @ g, Side.B)


def associativity_residual(f, g, h, lattice: Subgroup) -> float:
    """||<f,g>_Lambda . h - f . <g,h>_adjoint||_2."""
    adjoint = PhaseSpace.of(lattice).adjoint_subgroup(lattice)
    left = left_action(lhs_inner(f, g, lattice), h)
    right = right_action(f, rhs_inner(g, h, adjoint))
    return float(np.linalg.norm(left - right))


# =========================================================================
# BLOCK INNER PRODUCTS
# =========================================================================

@dataclass(eq=False)
class BlockInnerProduct:
    """
    Matrix-valued inner product. Side A: an n x n grid repeated d times
    along the diagonal, acting from the left. Side B: a d x d grid
    repeated n times, acting from the right. Signals on G x Z_d x Z_n
    are laid out k outer, j middle, t inner.
    """

    d: int
    n: int
    side: Side
    blocks: List[List[TwistedCoefficients]]
    _realized: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def grid_size(self) -> int:
        return self.n if self.side is Side.A else self.d

    @property
    def replicas(self) -> int:
        return self.d if self.side is Side.A else self.n

    @property
    def group_order(self) -> int:
        return PhaseSpace.of(self.blocks[0][0].lattice).size

    def block_operator(self) -> np.ndarray:
        """
        One diagonal block of the realized action.

        A: acts on (h_{k,j})_j for fixed k, entry (j, j') = rep(A_{j,j'}).
        B: acts on (h_{k,j})_k for fixed j, entry (k, k') = rep(B_{k',k}).
        """
        size, L = self.grid_size, self.group_order
        op = np.zeros((size * L, size * L), dtype=complex)
        for r in range(size):
            for c in range(size):
                coeffs = self.blocks[r][c] if self.side is Side.A else self.blocks[c][r]
                op[r * L:(r + 1) * L, c * L:(c + 1) * L] = represent(coeffs)
        return op

    def realize(self) -> np.ndarray:
        """Full operator on C^{|G| d n} (cached)."""
        if self._realized is None:
            block = self.block_operator()
            L = self.group_order
            full = np.kron(np.eye(self.replicas), block)
            if self.side is Side.B:
                # the B block acts along k for each j; reorder (j, k, t) -> (k, j, t)
                perm = _layout_permutation(self.d, self.n, L)
                full = full[np.ix_(perm, perm)]
            self._realized = full
        return self._realized

    def apply(self, family: WindowFamily) -> WindowFamily:
        vec = family.data.reshape(-1)
        return WindowFamily(family.group, (self.realize() @ vec).reshape(family.shape))

    def trace(self) -> complex:
        """Normalized trace: the replicated diagonal divided by the replica count, i.e. one grid diagonal."""
        return complex(sum(trace_A(self.blocks[i][i]) for i in range(self.grid_size)))


def _layout_permutation(d: int, n: int, L: int) -> np.ndarray:
    """perm[(k, j, t)] = index of (j, k, t) in the j-outer layout."""
    k, j, t = np.meshgrid(np.arange(d), np.arange(n), np.arange(L), indexing='ij')
    return ((j * d + k) * L + t).reshape(-1)


def _check_families(f: WindowFamily, g: WindowFamily):
    if not f.same_shape(g):
        raise InvalidInputError(f"families differ in shape: {f.shape} vs {g.shape}")


def matrix_lhs(f: WindowFamily, g: WindowFamily, lattice: Subgroup) -> BlockInnerProduct:
    """A_{j,j'} = sum_k <f_{k,j}, g_{k,j'}>_Lambda."""
    _check_families(f, g)
    d, n = f.d, f.n
    blocks = []
    for j in range(n):
        row = []
        for jp in range(n):
            total = TwistedCoefficients.zeros(lattice, Side.A)
            for k in range(d):
                total = total + lhs_inner(f.data[k, j], g.data[k, jp], lattice)
            row.append(total)
        blocks.append(row)
    return BlockInnerProduct(d, n, Side.A, blocks)


def matrix_rhs(f: WindowFamily, g: WindowFamily, lattice: Subgroup) -> BlockInnerProduct:
    """B_{k',k} = sum_j <f_{k',j}, g_{k,j}>_adjoint, built over the adjoint of `lattice`."""
    _check_families(f, g)
    adjoint = PhaseSpace.of(lattice).adjoint_subgroup(lattice)
    d, n = f.d, f.n
    blocks = []
    for kp in range(d):
        row = []
        for k in range(d):
            total = TwistedCoefficients.zeros(adjoint, Side.B)
            for j in range(n):
                total = total + rhs_inner(f.data[kp, j], g.data[k, j], adjoint)
            row.append(total)
        blocks.append(row)
    return BlockInnerProduct(d, n, Side.B, blocks)


def block_associativity_residual(f: WindowFamily, g: WindowFamily, h: WindowFamily,
                                 lattice: Subgroup) -> float:
    """||<f,g>_M(A) . h - f . <g,h>_M(B)||_2."""
    left = matrix_lhs(f, g, lattice).apply(h)
    right = matrix_rhs(g, h, lattice).apply(f)
    return float(np.linalg.norm(left.data - right.data))


def family_inner(f: WindowFamily, g: WindowFamily) -> complex:
    """<f, g> on G x Z_d x Z_n."""
    return complex(np.vdot(g.data, f.data))


# =========================================================================
# IDEMPOTENTS AND NORMS
# =========================================================================

def idempotent_residual(P) -> float:
    """||P^2 - P|| in operator norm."""
    if isinstance(P, BlockInnerProduct):
        P = P.block_operator()
    P = np.asarray(P, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InvalidInputError(f"idempotent check needs a square operator, got shape {P.shape}")
    return float(linalg.norm(P @ P - P, 2))


def range_residual(g: WindowFamily, h: WindowFamily, lattice: Subgroup) -> float:
    """
    Compare range(P), P the A block of matrix_lhs(g, h), with the span of the
    adjoint-system vectors (pi(a)^* g_{k,j})_j: ||PQ - Q|| + ||QP - P||.
    """
    P = matrix_lhs(g, h, lattice).block_operator()
    adjoint = PhaseSpace.of(lattice).adjoint_subgroup(lattice)
    tables = _LatticeTables.of(adjoint)
    # vectors indexed by (a, k), each the stack over j of pi(a)^* g_{k,j}
    vectors = np.einsum('pba,kjb->pkja', tables.shift_matrices.conj(), g.data)
    basis = vectors.reshape(adjoint.size * g.d, -1).T
    Q = np.zeros_like(P)
    if np.any(basis):
        ortho = linalg.orth(basis)
        Q = ortho @ ortho.conj().T
    return float(linalg.norm(P @ Q - Q, 2) + linalg.norm(Q @ P - P, 2))


def module_norm(g: WindowFamily, lattice: Subgroup) -> float:
    """||g||_Lambda = ||<g, g>_M(A)||_op^{1/2}."""
    block = matrix_lhs(g, g, lattice).block_operator()
    top = float(np.max(linalg.eigvalsh((block + block.conj().T) / 2)))
    return float(np.sqrt(max(top, 0.0)))


def module_norm_adjoint(g: WindowFamily, lattice: Subgroup) -> float:
    """||g||_adjoint = ||<g, g>_M(B)||_op^{1/2}."""
    block = matrix_rhs(g, g, lattice).block_operator()
    top = float(np.max(linalg.eigvalsh((block + block.conj().T) / 2)))
    return float(np.sqrt(max(top, 0.0)))


@dataclass
class ModuleNormReport:
    """Both module norms of a family and whether they agree."""

    lhs_norm: float
    rhs_norm: float
    discrepancy: float
    flagged: bool

    def to_dict(self) -> dict:
        return {
            'module_norm': self.lhs_norm,
            'module_norm_adjoint': self.rhs_norm,
            'bessel_bound': self.lhs_norm ** 2,
            'discrepancy': self.discrepancy,
            'flagged': self.flagged,
        }


def module_norm_report(g: WindowFamily, lattice: Subgroup) -> ModuleNormReport:
    """Compute both module norms; a mismatch is logged, not raised."""
    lhs = module_norm(g, lattice)
    rhs = module_norm_adjoint(g, lattice)
    discrepancy = abs(lhs ** 2 - rhs ** 2)
    flagged = discrepancy > TOLERANCE_CONFIG['module_norm'] * max(1.0, lhs ** 2)
    if flagged:
        logger.warning(f"module norms disagree: {lhs:.12g} vs {rhs:.12g} (|diff^2| {discrepancy:.3e})")
    return ModuleNormReport(lhs, rhs, discrepancy, flagged)


# =========================================================================
# MODULE FRAMES
# =========================================================================

@dataclass
class ModuleFrameEnergy:
    """Trace of sum_j <f,g_j> # <g_j,f> against the frame bracket."""

    energy: float
    lower: float
    upper: float
    within_bounds: bool

    def to_dict(self) -> dict:
        return {'energy': self.energy, 'lower': self.lower, 'upper': self.upper,
                'within_bounds': self.within_bounds}


def module_frame_energy(f, windows: WindowFamily, lattice: Subgroup) -> ModuleFrameEnergy:
    """
    tr_A(sum_j <f, g_j>_Lambda # <g_j, f>_Lambda) for a d = 1 family, checked
    against A ||f||^2 and B ||f||^2.
    """
    if windows.d != 1:
        raise InvalidInputError("module frame energy is defined for d = 1 families")
    total = TwistedCoefficients.zeros(lattice, Side.A)
    for j in range(windows.n):
        g = windows.data[0, j]
        total = total + twisted_convolve(lhs_inner(f, g, lattice), lhs_inner(g, f, lattice))
    energy = float(np.real(trace_A(total)))
    bounds = frame_bounds(GaborSystem(windows, lattice))
    norm2 = float(np.vdot(f, f).real)
    slack = 1e-9 * max(1.0, bounds.upper * norm2)
    lower, upper = bounds.lower * norm2, bounds.upper * norm2
    return ModuleFrameEnergy(energy, lower, upper, lower - slack <= energy <= upper + slack)


def resolution_residual(f, g: WindowFamily, h: WindowFamily, lattice: Subgroup) -> float:
    """
    ||f - sum_j sum_k' <f_k', g_{k',j}>_Lambda . h_{., j}||, the module
    reconstruction of f (on G x Z_d) from the pair (g, h).
    """
    _check_families(g, h)
    L, d = g.group.order, g.d
    f = np.asarray(f, dtype=complex).reshape(d, L)
    rebuilt = np.zeros_like(f)
    for j in range(g.n):
        coeffs = TwistedCoefficients.zeros(lattice, Side.A)
        for kp in range(d):
            coeffs = coeffs + lhs_inner(f[kp], g.data[kp, j], lattice)
        op = represent(coeffs)
        for k in range(d):
            rebuilt[k] += op @ h.data[k, j]
    return float(np.linalg.norm(f - rebuilt))
