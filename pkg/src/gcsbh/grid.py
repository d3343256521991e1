"""Discrete coherent-state bases from von Neumann lattices.

Each mode gets a square lattice ``z0_j + beta*(m + i n)`` of Glauber
coherent-state labels centred on the initial parameters ``z0 = xi0``.
A multi-mode lattice point is mapped to an SU(M) state by normalizing
the label vector, ``xi = z / |z|``.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .coherent import GCSParams, overlap_base

VON_NEUMANN_SPACING = math.sqrt(math.pi)
DUPLICATE_THRESHOLD = 1.0 - 1e-12


class GridMode(str, Enum):
    RANDOM = "random"
    DIAGONAL = "diagonal"


class SpacingWarning(UserWarning):
    pass


def default_extent(M: int, N: int, mode) -> int:
    """Smallest half-width P with at least 4N candidate index tuples."""
    exponent = 2 * M if GridMode(mode) is GridMode.RANDOM else 2
    P = 0
    while (2 * P + 1) ** exponent < 4 * N:
        P += 1
    return P


@dataclass
class GridSpec:
    M: int
    S: int
    center: GCSParams
    N: int = 1
    beta: float = VON_NEUMANN_SPACING
    mode: GridMode = GridMode.RANDOM
    seed: int = 0
    extent: int | None = None

    def __post_init__(self):
        self.mode = GridMode(self.mode)
        if not isinstance(self.center, GCSParams):
            self.center = GCSParams(self.center, self.S)
        if self.center.M != self.M:
            raise ValueError(f"center has {self.center.M} modes, expected {self.M}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.beta > 0:
            raise ValueError(f"grid spacing must be positive, got {self.beta}")
        if self.beta > VON_NEUMANN_SPACING * (1 + 1e-12):
            warnings.warn(f"spacing {self.beta:.4g} exceeds sqrt(pi); the lattice "
                          "may not be complete", SpacingWarning, stacklevel=3)
        if self.extent is None:
            self.extent = default_extent(self.M, self.N, self.mode)
        if self.extent < 0:
            raise ValueError("extent must be >= 0")
        if self.N > self.capacity:
            raise ValueError(f"N={self.N} exceeds the {self.capacity} available "
                             f"lattice points for extent {self.extent}")

    @property
    def capacity(self) -> int:
        side = (2 * self.extent + 1) ** 2
        return side ** self.M if self.mode is GridMode.RANDOM else side


@dataclass(frozen=True, eq=False)
class GlauberPoint:
    """Multi-mode lattice point ``z`` with its integer labels (M, 2)."""

    z: np.ndarray
    indices: tuple = field(default=())


def _candidate_indices(spec: GridSpec):
    """Index tuples of shape (M, 2) in draw order, origin first."""
    P, M = spec.extent, spec.M
    origin = ((0, 0),) * M
    yield origin
    if spec.mode is GridMode.DIAGONAL:
        pairs = [(m, n) for m in range(-P, P + 1) for n in range(-P, P + 1)
                 if (m, n) != (0, 0)]
        pairs.sort(key=lambda mn: (mn[0] ** 2 + mn[1] ** 2, mn))
        for mn in pairs:
            yield (mn,) * M
        return
    rng = np.random.default_rng(spec.seed)
    seen = {origin}
    total = spec.capacity
    while len(seen) < total:
        draw = rng.integers(-P, P + 1, size=(M, 2))
        key = tuple(map(tuple, draw.tolist()))
        if key in seen:
            continue
        seen.add(key)
        yield key


def _point(spec, key):
    lab = np.asarray(key, dtype=float)
    z = spec.center.xi + spec.beta * (lab[:, 0] + 1j * lab[:, 1])
    return GlauberPoint(z=z, indices=key)


def build_lattice(spec: GridSpec):
    """The first ``spec.N`` lattice points in draw order (origin first)."""
    out = []
    for key in _candidate_indices(spec):
        out.append(_point(spec, key))
        if len(out) == spec.N:
            break
    return out


def to_gcs(point, S: int) -> GCSParams:
    z = np.asarray(getattr(point, "z", point), dtype=complex)
    norm = math.sqrt(float(np.vdot(z, z).real))
    if norm == 0.0:
        raise ValueError("lattice point at the origin has no SU(M) image")
    return GCSParams(z / norm, S)


def bloch_coordinates(xi) -> tuple[float, float]:
    """Polar and azimuthal angle of a two-mode state with the global phase removed."""
    v = np.asarray(getattr(xi, "xi", xi), dtype=complex)
    if v.size != 2:
        raise ValueError("Bloch coordinates need exactly two modes")
    v = v / np.linalg.norm(v)
    theta = 2.0 * math.acos(min(1.0, abs(v[0])))
    if abs(v[1]) == 0.0:
        return theta, 0.0
    phi = (np.angle(v[1]) - (np.angle(v[0]) if abs(v[0]) > 0 else 0.0)) % (2 * math.pi)
    return theta, float(phi)


def sample_ensemble(spec: GridSpec):
    """``spec.N`` distinct normalized states, the centre first.

    Lattice points at ``z = 0`` and points whose image duplicates an
    accepted state (up to phase) are skipped and replaced by the next
    candidate.
    """
    S = spec.S
    center = GCSParams(spec.center.xi / np.linalg.norm(spec.center.xi), S)
    accepted = [center.xi]
    for key in _candidate_indices(spec):
        if len(accepted) == spec.N:
            break
        try:
            g = to_gcs(_point(spec, key), S)
        except ValueError:
            continue
        ov = np.abs(np.asarray(accepted).conj() @ g.xi) ** S
        if np.any(ov > DUPLICATE_THRESHOLD):
            continue
        accepted.append(g.xi)
    if len(accepted) < spec.N:
        raise ValueError(f"lattice exhausted after {len(accepted)} distinct states, "
                         f"{spec.N} requested")
    return [GCSParams(x, S) for x in accepted]


def gram_matrix(states) -> np.ndarray:
    xi = np.vstack([s.xi for s in states])
    return overlap_base(xi) ** states[0].S


def gram_condition(states) -> float:
    w = np.linalg.eigvalsh(gram_matrix(states))
    return float(w[-1] / w[0]) if w[0] > 0 else math.inf


def export_states_csv(states, path):
    """One row per (basis index, mode index) with the real and imaginary amplitude."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["basis_index", "mode_index", "re_xi", "im_xi"])
        for k, s in enumerate(states):
            for m, x in enumerate(s.xi):
                w.writerow([k, m, format(x.real, ".17g"), format(x.imag, ".17g")])
    return Path(path)


def export_bloch_csv(states, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["basis_index", "theta", "phi"])
        for k, s in enumerate(states):
            theta, phi = bloch_coordinates(s)
            w.writerow([k, format(theta, ".17g"), format(phi, ".17g")])
    return Path(path)
