#!/usr/bin/env python3
"""
Error types shared by every gdl module.

Library code raises these; only the command-line entry point turns them
into exit codes (InvalidInputError -> 2, anything else -> 3).
"""


class GdlError(Exception):
    """Base class for all gdl failures."""

    exit_code = 3


class InvalidInputError(GdlError):
    """Malformed orders, weights, shapes, documents or non-finite data."""

    exit_code = 2


class ContainmentError(InvalidInputError):
    """A subgroup is not contained in the ambient set it was paired with."""


class LinearDependenceError(InvalidInputError):
    """Gram-Schmidt met a vector inside the span of its predecessors."""


class DimensionError(InvalidInputError):
    """Requested dimension exceeds what the group (or desk scale) allows."""


class NumericFailure(GdlError):
    """A computation could not be carried out, e.g. a non-frame passed to dual."""


class NotAFrameError(NumericFailure):
    """The frame operator is not invertible within tolerance."""
