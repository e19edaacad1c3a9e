#!/usr/bin/env python3
"""
Spectrogram Emission
====================

Writes |V_g f| over the phase space as

    - a binary 16-bit PGM (P5): width |G| (x axis), height |G| (omega axis),
      pixel = round(65535 * |V_g f| / max), big-endian samples
    - a CSV of the raw magnitudes, rows in lex order (x outer, omega inner)
    - optionally a PNG rendered with matplotlib's Agg canvas
"""

import logging
import pathlib
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from config import IO_CONFIG
from lattice.errors import InvalidInputError
from lattice.group_core import GroupSpec
from lattice.phase_space import PhaseSpace, as_signal

logger = logging.getLogger("spectrogram")

PGM_MAXVAL = 65535


@dataclass
class SpectrogramFiles:
    """Paths written by emit_spectrogram and the peak magnitude."""

    pgm: pathlib.Path
    csv: pathlib.Path
    png: Optional[pathlib.Path]
    max_magnitude: float
    width: int
    height: int

    def to_dict(self) -> dict:
        return {
            'pgm': str(self.pgm),
            'csv': str(self.csv),
            'png': str(self.png) if self.png else None,
            'max_magnitude': self.max_magnitude,
            'width': self.width,
            'height': self.height,
        }


def magnitude_table(group: GroupSpec, g, f) -> np.ndarray:
    """|V_g f| as an array indexed [x, omega]."""
    space = PhaseSpace(group)
    g = as_signal(g, group.order, "window")
    f = as_signal(f, group.order, "signal")
    return np.abs(space.stft(g, f)).reshape(group.order, group.order)


def pgm_pixels(magnitudes: np.ndarray) -> np.ndarray:
    """Quantize to 16 bits; rows are omega, columns are x. All zeros when max is 0."""
    image = np.asarray(magnitudes, dtype=float).T
    peak = float(image.max()) if image.size else 0.0
    if peak <= 0.0:
        return np.zeros(image.shape, dtype=np.uint16)
    return np.rint(PGM_MAXVAL * image / peak).astype(np.uint16)


def write_pgm(path: pathlib.Path, pixels: np.ndarray):
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n{PGM_MAXVAL}\n".encode('ascii')
    path.write_bytes(header + pixels.astype('>u2').tobytes())


def write_csv(path: pathlib.Path, group: GroupSpec, magnitudes: np.ndarray):
    elements = group.element_array
    L = group.order
    rows = {
        'x_index': np.repeat(np.arange(L), L),
        'omega_index': np.tile(np.arange(L), L),
    }
    for i in range(group.rank):
        rows[f'x{i}'] = np.repeat(elements[:, i], L)
    for i in range(group.rank):
        rows[f'omega{i}'] = np.tile(elements[:, i], L)
    rows['magnitude'] = np.asarray(magnitudes, dtype=float).reshape(-1)
    df = pd.DataFrame(rows)
    df.to_csv(path, index=False, float_format=f"%.{IO_CONFIG['float_digits']}g")


def write_png(path: pathlib.Path, magnitudes: np.ndarray, title: str = ""):
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    fig = Figure(figsize=(5, 4))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    image = ax.imshow(np.asarray(magnitudes).T, origin='lower', aspect='auto',
                      cmap='gray', interpolation='nearest')
    ax.set_xlabel('x (lex index)')
    ax.set_ylabel('omega (lex index)')
    if title:
        ax.set_title(title)
    fig.colorbar(image, ax=ax, label='|V_g f|')
    fig.savefig(path, dpi=100)


def emit_spectrogram(group: GroupSpec, g, f, path, png: bool = False) -> SpectrogramFiles:
    """
    Write the PGM to `path` and the CSV next to it (same stem, .csv).
    With png=True a rendered .png is written as well.
    """
    path = pathlib.Path(path)
    # the CSV and PNG share the stem, so the image path cannot use their suffixes
    if path.suffix.lower() in ('.csv', '.png'):
        raise InvalidInputError(f"spectrogram path {path} would collide with its {path.suffix} companion")
    magnitudes = magnitude_table(group, g, f)
    pixels = pgm_pixels(magnitudes)
    csv_path = path.with_suffix('.csv')
    png_path = path.with_suffix('.png') if png else None
    try:
        write_pgm(path, pixels)
        write_csv(csv_path, group, magnitudes)
        if png_path is not None:
            write_png(png_path, magnitudes, title=f"|V_g f| on Z{list(group.orders)}")
    except OSError as exc:
        raise InvalidInputError(f"cannot write spectrogram to {path}: {exc}") from exc
    peak = float(magnitudes.max())
    logger.info(f"spectrogram {pixels.shape[1]}x{pixels.shape[0]} written to {path} (max {peak:.6g})")
    return SpectrogramFiles(path, csv_path, png_path, peak, pixels.shape[1], pixels.shape[0])
