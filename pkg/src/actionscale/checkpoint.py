"""Binary wave-function checkpoints (``QPS1`` format).

Layout, little-endian throughout::

    b"QPS1" | u32 n_points | f64 q_min | f64 q_max | f64 hbar | f64 T | n_points x (f64 re, f64 im)
"""
from __future__ import annotations

import struct
import warnings
from pathlib import Path

import numpy as np

from .grid import Grid
from .states import WaveFunction

MAGIC = b"QPS1"
_HEADER = struct.Struct("<4sIdddd")
#: Largest norm deviation accepted when loading a checkpoint.
LOAD_NORM_TOL = 1e-8


class CheckpointError(ValueError):
    pass


class ProvenanceWarning(UserWarning):
    """A checkpoint disagrees with the run configuration; the file value is used."""


def dumps(psi: WaveFunction, T: float) -> bytes:
    g = psi.grid
    head = _HEADER.pack(MAGIC, g.n_points, g.q_min, g.q_max, g.hbar, float(T))
    return head + np.ascontiguousarray(psi.amplitudes, dtype="<c16").tobytes()


def loads(data: bytes, *, expected_hbar: float | None = None, source: str = "<bytes>"
          ) -> tuple[WaveFunction, float]:
    if len(data) < _HEADER.size:
        raise CheckpointError(f"{source}: file too short for a QPS1 header ({len(data)} bytes)")
    magic, n, q_min, q_max, hbar, T = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = _HEADER.size + 16 * n
    if len(data) != expected:
        raise CheckpointError(
            f"{source}: size mismatch, header announces {n} points ({expected} bytes) "
            f"but file has {len(data)} bytes")
    try:
        grid = Grid(n, q_min, q_max, hbar)
    except ValueError as exc:
        raise CheckpointError(f"{source}: invalid grid header ({exc})") from None
    amp = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).astype(complex)
    norm = float(np.sum(np.abs(amp) ** 2) * grid.dq)
    if abs(norm - 1.0) > LOAD_NORM_TOL:
        raise CheckpointError(f"{source}: norm {norm!r} deviates from 1 by more than {LOAD_NORM_TOL:g}")
    if expected_hbar is not None and hbar != expected_hbar:
        warnings.warn(f"{source}: checkpoint hbar = {hbar!r} differs from configured "
                      f"{expected_hbar!r}; using the file value", ProvenanceWarning, stacklevel=2)
    return WaveFunction(grid, amp, norm_tol=LOAD_NORM_TOL), T


def save_state(path, psi: WaveFunction, T: float):
    Path(path).write_bytes(dumps(psi, T))


def load_state(path, *, expected_hbar: float | None = None) -> tuple[WaveFunction, float]:
    """Read a checkpoint; returns ``(psi, T)``."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from None
    return loads(data, expected_hbar=expected_hbar, source=str(path))
