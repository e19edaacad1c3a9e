#!/usr/bin/env python3
"""
Phase Space G x G^
==================

Time-frequency shifts pi(x, omega) = E_omega T_x, the cocycle and its
symplectic version, the short-time Fourier transform, the symplectic
Fourier transform and adjoint subgroups.

A phase point chi = (x, omega) is stored as one flat tuple
(x_1..x_k, omega_1..omega_k), i.e. an element of phase_group(G). Phase
functions are complex vectors of length |G|^2 in lex order of those
tuples (x outer, omega inner).

All phase comparisons are done on integer numerators modulo the group
exponent, so c_s(chi, lambda) = 1 is an exact test.
"""

import logging
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from lattice.errors import InvalidInputError
from lattice.group_core import (
    GroupElement,
    GroupSpec,
    Subgroup,
    character_table,
    covolume,
    subgroup_from_elements,
    unit_phase,
)

logger = logging.getLogger("phase_space")

PhasePoint = Tuple[int, ...]


def phase_group(group: GroupSpec) -> GroupSpec:
    """G x G^ with total Haar mass |G| (point mass 1/|G|)."""
    return GroupSpec(group.orders + group.orders, haar_mass=Fraction(group.order))


def as_signal(values, length: int, what: str = "signal") -> np.ndarray:
    """Validate a complex vector of the given length with finite entries."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise InvalidInputError(f"{what} must have length {length}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} contains NaN or Inf")
    return arr


def inner(f, g) -> complex:
    """<f, g> = sum f * conj(g)."""
    return complex(np.vdot(g, f))


class PhaseSpace:
    """Time-frequency analysis on the phase space of a finite abelian group."""

    def __init__(self, group: GroupSpec):
        self.group = group
        self.phase = phase_group(group)
        self.size = group.order
        self._rank = group.rank
        self._exponent = group.exponent
        self._units = group.phase_units
        self._characters = None
        self._all_shifts = None

    @classmethod
    def from_phase_group(cls, phase: GroupSpec) -> "PhaseSpace":
        k, rem = divmod(phase.rank, 2)
        if rem or phase.orders[:k] != phase.orders[k:]:
            raise InvalidInputError(f"Z{list(phase.orders)} is not a phase space G x G^")
        return cls(GroupSpec(phase.orders[:k]))

    @classmethod
    def of(cls, sub: Subgroup) -> "PhaseSpace":
        return cls.from_phase_group(sub.ambient)

    def __repr__(self):
        return f"PhaseSpace(Z{list(self.group.orders)})"

    # ---------------------------------------------------------------------
    # points
    # ---------------------------------------------------------------------

    def point(self, x: Sequence[int], omega: Sequence[int]) -> PhasePoint:
        return self.group.reduce(x) + self.group.reduce(omega)

    def check_point(self, chi: Sequence[int]) -> PhasePoint:
        if len(chi) != 2 * self._rank:
            raise InvalidInputError(
                f"phase point {tuple(chi)} does not belong to the phase space of Z{list(self.group.orders)}")
        return self.phase.reduce(chi)

    def split(self, chi: Sequence[int]) -> Tuple[GroupElement, GroupElement]:
        chi = self.check_point(chi)
        return chi[:self._rank], chi[self._rank:]

    def points(self) -> list:
        return self.phase.elements()

    def _as_points(self, points) -> np.ndarray:
        arr = np.asarray(points, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.shape[-1] != 2 * self._rank:
            raise InvalidInputError(f"phase points must have {2 * self._rank} coordinates")
        return arr

    def _pairing(self, xs: np.ndarray, ws: np.ndarray) -> np.ndarray:
        """Integer numerators of omega(x) for all pairs (rows of xs, rows of ws)."""
        return np.mod((xs * self._units) @ ws.T, self._exponent)

    # ---------------------------------------------------------------------
    # cocycles
    # ---------------------------------------------------------------------

    def cocycle_units(self, chi1, chi2) -> int:
        x1, _ = self.split(chi1)
        _, w2 = self.split(chi2)
        return int(-np.dot(np.multiply(x1, self._units), w2)) % self._exponent

    def cocycle(self, chi1, chi2) -> complex:
        """c(chi1, chi2) = conj(omega2(x1))."""
        return unit_phase(self.cocycle_units(chi1, chi2), self._exponent)

    def symplectic_units(self, chi1, chi2) -> int:
        x1, w1 = self.split(chi1)
        x2, w2 = self.split(chi2)
        value = -np.dot(np.multiply(x1, self._units), w2) + np.dot(np.multiply(x2, self._units), w1)
        return int(value) % self._exponent

    def symplectic_cocycle(self, chi1, chi2) -> complex:
        """c_s(chi1, chi2) = c(chi1, chi2) * conj(c(chi2, chi1))."""
        return unit_phase(self.symplectic_units(chi1, chi2), self._exponent)

    def cocycle_matrix(self, rows, cols, symplectic: bool = False) -> np.ndarray:
        """c(rows[a], cols[b]) (or c_s) for arrays of phase points."""
        rows = self._as_points(rows)
        cols = self._as_points(cols)
        k = self._rank
        units = -self._pairing(rows[:, :k], cols[:, k:])
        if symplectic:
            units = units + self._pairing(rows[:, k:], cols[:, :k])
        return unit_phase(units, self._exponent)

    # ---------------------------------------------------------------------
    # time-frequency shifts
    # ---------------------------------------------------------------------

    def _shift_tables(self, points: np.ndarray):
        k = self._rank
        elems = self.group.element_array
        source = self.group.index_array(elems[None, :, :] - points[:, None, :k])
        phases = unit_phase(self._pairing(points[:, k:], elems), self._exponent)
        return source, np.atleast_2d(phases)

    def shift_atoms(self, points, windows) -> np.ndarray:
        """
        pi(chi) applied to every window, for every point.

        windows has shape (..., |G|); the result has shape (P, ..., |G|).
        """
        points = self._as_points(points)
        windows = np.asarray(windows, dtype=complex)
        if windows.shape[-1] != self.size:
            raise InvalidInputError(f"windows must have trailing length {self.size}")
        source, phases = self._shift_tables(points)
        moved = np.moveaxis(windows[..., source], -2, 0)
        shape = (points.shape[0],) + (1,) * (windows.ndim - 1) + (self.size,)
        return moved * phases.reshape(shape)

    def tf_shift(self, chi, f) -> np.ndarray:
        """(pi(chi) f)(t) = omega(t) f(t - x)."""
        chi = self.check_point(chi)
        f = as_signal(f, self.size)
        return self.shift_atoms([chi], f)[0]

    def tf_shift_matrix(self, chi) -> np.ndarray:
        chi = self.check_point(chi)
        source, phases = self._shift_tables(np.array([chi], dtype=np.int64))
        matrix = np.zeros((self.size, self.size), dtype=complex)
        matrix[np.arange(self.size), source[0]] = phases[0]
        return matrix

    def tf_shift_adjoint_matrix(self, chi) -> np.ndarray:
        return self.tf_shift_matrix(chi).conj().T

    # ---------------------------------------------------------------------
    # transforms
    # ---------------------------------------------------------------------

    def all_shifts(self, g) -> np.ndarray:
        """pi(chi) g for every phase point, rows in lex order."""
        return self.shift_atoms(self.phase.element_array, as_signal(g, self.size, "window"))

    def stft(self, g, f) -> np.ndarray:
        """V_g f(chi) = <f, pi(chi) g> over the whole phase space."""
        f = as_signal(f, self.size)
        return self.all_shifts(g).conj() @ f

    def moyal_residual(self, f1, f2, g, h) -> float:
        """|<V_g f1, V_h f2> - <f1, f2><h, g>| with the phase-space point mass 1/|G|."""
        lhs = np.vdot(self.stft(h, f2), self.stft(g, f1)) / self.size
        rhs = inner(f1, f2) * inner(h, g)
        return float(abs(lhs - rhs))

    @property
    def characters(self) -> np.ndarray:
        if self._characters is None:
            self._characters = character_table(self.group)
        return self._characters

    def symplectic_fourier(self, F) -> np.ndarray:
        """F_s F(chi) = (1/|G|) sum_eta F(eta) c_s(eta, chi); an involution."""
        F = as_signal(F, self.phase.order, "phase-space function")
        table = F.reshape(self.size, self.size)
        K = self.characters
        transformed = (K.conj() @ table @ K).T / self.size
        return transformed.reshape(-1)

    # ---------------------------------------------------------------------
    # subgroups
    # ---------------------------------------------------------------------

    def indices(self, sub: Subgroup) -> np.ndarray:
        """Positions of the subgroup's elements in the phase-space enumeration."""
        self._check_lattice(sub)
        return self.phase.index_array(sub.element_array)

    def _check_lattice(self, sub: Subgroup):
        if sub.ambient.orders != self.phase.orders:
            raise InvalidInputError(
                f"subgroup lives in Z{list(sub.ambient.orders)}, not in the phase space "
                f"of Z{list(self.group.orders)}")

    def covolume(self, sub: Subgroup) -> Fraction:
        self._check_lattice(sub)
        return covolume(self.phase, sub)

    def adjoint_subgroup(self, sub: Subgroup) -> Subgroup:
        """
        All chi with c_s(chi, lambda) = 1 for every generator of `sub`,
        weighted by 1/s(sub).
        """
        self._check_lattice(sub)
        candidates = self.phase.element_array
        if sub.generators:
            k = self._rank
            gens = np.array(sub.generators, dtype=np.int64)
            units = (-self._pairing(candidates[:, :k], gens[:, k:])
                     + self._pairing(gens[:, :k], candidates[:, k:]).T)
            keep = np.all(np.mod(units, self._exponent) == 0, axis=1)
            candidates = candidates[keep]
        weight = 1 / self.covolume(sub)
        adjoint = subgroup_from_elements(self.phase, [tuple(int(v) for v in c) for c in candidates], weight)
        logger.debug(f"adjoint of |Lambda|={sub.size} has {adjoint.size} points, weight {weight}")
        return adjoint

    def poisson_residual(self, F, sub: Subgroup) -> float:
        """|w sum_Lambda F - (1/s) sum_adjoint F_s F|."""
        F = as_signal(F, self.phase.order, "phase-space function")
        adjoint = self.adjoint_subgroup(sub)
        lhs = float(sub.weight) * F[self.indices(sub)].sum()
        rhs = float(adjoint.weight) * self.symplectic_fourier(F)[self.indices(adjoint)].sum()
        return float(abs(lhs - rhs))


def cocycle(space: PhaseSpace, chi1, chi2) -> complex:
    return space.cocycle(chi1, chi2)


def symplectic_cocycle(space: PhaseSpace, chi1, chi2) -> complex:
    return space.symplectic_cocycle(chi1, chi2)


def adjoint_subgroup(sub: Subgroup) -> Subgroup:
    return PhaseSpace.of(sub).adjoint_subgroup(sub)
