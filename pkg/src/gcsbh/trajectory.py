"""Time series containers and their on-disk formats."""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class PropagationError(RuntimeError):
    """Integration failed; ``t`` is the time reached and ``diagnostics`` any extra state."""

    def __init__(self, message, t, diagnostics=None):
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t
        self.diagnostics = diagnostics or {}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class Trajectory:
    """Recorded states and observables on an increasing time grid.

    ``snapshots`` holds whatever state object the propagator produced
    (Fock amplitude vectors or ensemble copies).
    """

    M: int
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    norm: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    populations: list = field(default_factory=list)
    discarded_directions: list = field(default_factory=list)
    max_xi_norm_drift: list = field(default_factory=list)

    def append(self, t, snapshot, norm, energy, populations,
               discarded_directions=0, max_xi_norm_drift=0.0):
        if self.times and t <= self.times[-1]:
            raise ValueError("trajectory times must be strictly increasing")
        self.times.append(float(t))
        self.snapshots.append(snapshot)
        self.norm.append(float(norm))
        self.energy.append(float(energy))
        self.populations.append(np.asarray(populations, dtype=float))
        self.discarded_directions.append(int(discarded_directions))
        self.max_xi_norm_drift.append(float(max_xi_norm_drift))

    def __len__(self):
        return len(self.times)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times)

    @property
    def pops(self) -> np.ndarray:
        """(n_times, M) array of mode populations."""
        return np.vstack(self.populations)

    def norm_drift(self) -> float:
        n = np.asarray(self.norm)
        return float(np.max(np.abs(n - n[0])))

    def energy_drift(self) -> float:
        """Largest ``|E(t) - E(0)| / |E(0)|`` (absolute drift if ``E(0) == 0``)."""
        e = np.asarray(self.energy)
        scale = abs(e[0]) if e[0] != 0 else 1.0
        return float(np.max(np.abs(e - e[0])) / scale)

    def header(self):
        return (["t", "norm", "energy"]
                + [f"n{i + 1}" for i in range(self.M)]
                + ["discarded_directions", "max_xi_norm_drift"])

    def rows(self):
        for i, t in enumerate(self.times):
            yield ([fmt(t), fmt(self.norm[i]), fmt(self.energy[i])]
                   + [fmt(p) for p in self.populations[i]]
                   + [str(self.discarded_directions[i]), fmt(self.max_xi_norm_drift[i])])

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.header())
            writer.writerows(self.rows())
        return path


def read_trajectory_csv(path):
    """Load a trajectory CSV into a dict of column name -> float array."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    data = data.reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def population_columns(table):
    keys = sorted((k for k in table if k.startswith("n") and k[1:].isdigit()),
                  key=lambda k: int(k[1:]))
    return np.column_stack([table[k] for k in keys])


# little-endian: M, S, N as int64 then t as float64
_SNAPSHOT_HEADER = struct.Struct("<qqqd")


def write_snapshot(path, M, S, t, A, xi):
    """Binary restart file: header then interleaved (Re, Im) of A and of xi.

    ``xi`` has shape (N, M) and is written mode-major (all basis states
    for mode 1, then mode 2, ...), matching the unknown-vector layout.
    """
    A = np.asarray(A, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    N = A.size
    payload = np.concatenate([A, xi.T.reshape(-1)])
    inter = np.empty(2 * payload.size, dtype="<f8")
    inter[0::2] = payload.real
    inter[1::2] = payload.imag
    with Path(path).open("wb") as fh:
        fh.write(_SNAPSHOT_HEADER.pack(M, S, N, float(t)))
        fh.write(inter.tobytes())


def read_snapshot(path):
    """Inverse of :func:`write_snapshot`; returns ``(M, S, t, A, xi)``."""
    raw = Path(path).read_bytes()
    M, S, N, t = _SNAPSHOT_HEADER.unpack_from(raw)
    inter = np.frombuffer(raw, dtype="<f8", offset=_SNAPSHOT_HEADER.size)
    expected = 2 * N * (M + 1)
    if inter.size != expected:
        raise ValueError(f"snapshot payload has {inter.size} floats, expected {expected}")
    payload = inter[0::2] + 1j * inter[1::2]
    A = payload[:N].copy()
    xi = payload[N:].reshape(M, N).T.copy()
    return M, S, t, A, xi
