"""Bose-Hubbard chain in the fixed-particle-number Fock sector.

This module is the exact reference: enumeration of occupation vectors,
sparse Hamiltonian assembly and an adaptive Runge-Kutta propagator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .integrate import METHODS, integrate_on_grid
from .trajectory import Trajectory

#: refuse exact propagation above this sector size unless forced
ORACLE_DIMENSION_CAP = 10**6

_INDEX_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class HamiltonianParams:
    """Constants of the driven Bose-Hubbard chain.

    The hopping is ``J(t) = J0 + J1*cos(omega*t)``; sites are numbered
    1..M so the trap term uses ``(j - j0)**2`` with 1-based ``j``.
    """

    M: int
    S: int
    J0: float = 1.0
    J1: float = 0.0
    omega: float = 0.0
    U: float = 0.0
    K: float = 0.0
    j0: float | None = None

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"M must be >= 2, got {self.M}")
        if self.S < 1:
            raise ValueError(f"S must be >= 1, got {self.S}")
        if self.j0 is None:
            object.__setattr__(self, "j0", (self.M + 1) / 2)

    def hopping(self, t: float) -> float:
        return self.J0 + self.J1 * math.cos(self.omega * t)

    @property
    def autonomous(self) -> bool:
        return self.J1 == 0.0

    @property
    def trap_weights(self) -> np.ndarray:
        """``(j - j0)**2`` for j = 1..M."""
        return (np.arange(1, self.M + 1) - self.j0) ** 2

    @property
    def lam(self) -> float:
        """Regime parameter U*S/J0."""
        return self.U * self.S / self.J0


def fock_dimension(M: int, S: int) -> int:
    """Number of ways to distribute S bosons over M modes, C(M+S-1, S)."""
    if M < 1 or S < 0:
        raise ValueError(f"need M >= 1 and S >= 0, got M={M}, S={S}")
    dim = math.comb(M + S - 1, S)
    if dim > _INDEX_MAX:
        raise OverflowError(f"Fock dimension for M={M}, S={S} exceeds int64")
    return dim


@dataclass
class FockBasis:
    """Occupation vectors of the fixed-S sector in lexicographically descending order."""

    M: int
    S: int
    states: np.ndarray  # (dim, M) int
    index: dict = field(repr=False)

    def __len__(self):
        return len(self.states)

    def lookup(self, occupation) -> int:
        return self.index[tuple(int(n) for n in occupation)]


def _compositions(M, S):
    if M == 1:
        yield (S,)
        return
    for first in range(S, -1, -1):
        for rest in _compositions(M - 1, S - first):
            yield (first,) + rest


def enumerate_fock_basis(M: int, S: int) -> FockBasis:
    dim = fock_dimension(M, S)
    states = np.array(list(_compositions(M, S)), dtype=np.int64).reshape(dim, M)
    index = {tuple(row): i for i, row in enumerate(states.tolist())}
    return FockBasis(M=M, S=S, states=states, index=index)


def _check_basis(params, basis):
    if basis.M != params.M or basis.S != params.S:
        raise ValueError(
            f"basis is for (M={basis.M}, S={basis.S}) but params have "
            f"(M={params.M}, S={params.S})"
        )


def hopping_operator(basis: FockBasis) -> sparse.csr_matrix:
    """Sparse matrix of ``-sum_j (a_j^+ a_{j+1} + h.c.)`` with open ends."""
    states = basis.states
    rows, cols, vals = [], [], []
    for j in range(basis.M - 1):
        # a_j^+ a_{j+1}: move one boson from site j+1 to site j
        src = np.nonzero(states[:, j + 1] > 0)[0]
        for s in src:
            n = states[s]
            target = n.copy()
            target[j] += 1
            target[j + 1] -= 1
            d = basis.index[tuple(target.tolist())]
            amp = -math.sqrt((n[j] + 1) * n[j + 1])
            rows += [d, s]
            cols += [s, d]
            vals += [amp, amp]
    dim = len(basis)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=float)


def diagonal_terms(params: HamiltonianParams, basis: FockBasis) -> np.ndarray:
    """On-site interaction plus trap energy of every occupation vector."""
    _check_basis(params, basis)
    n = basis.states.astype(float)
    onsite = 0.5 * params.U * np.sum(n * (n - 1), axis=1)
    trap = 0.5 * params.K * n @ params.trap_weights
    return onsite + trap


def build_hamiltonian(params: HamiltonianParams, basis: FockBasis, t: float = 0.0):
    """Sparse CSR Hamiltonian of the chain at time ``t``."""
    _check_basis(params, basis)
    hop = hopping_operator(basis)
    diag = sparse.diags(diagonal_terms(params, basis), format="csr")
    return (params.hopping(t) * hop + diag).tocsr()


class _FockGenerator:
    """H(t) split into a static diagonal and a time-scaled hopping block."""

    def __init__(self, params, basis):
        self.params = params
        self.hop = hopping_operator(basis)
        self.diag = diagonal_terms(params, basis)
        self._static = None
        if params.autonomous:
            self._static = (params.J0 * self.hop + sparse.diags(self.diag)).tocsr()

    def apply(self, psi, t):
        if self._static is not None:
            return self._static @ psi
        return self.params.hopping(t) * (self.hop @ psi) + self.diag * psi


def fock_populations(state: np.ndarray, basis: FockBasis) -> np.ndarray:
    """``<n_i>/S`` for every mode, divided by the squared norm of ``state``."""
    prob = np.abs(np.asarray(state)) ** 2
    norm = prob.sum()
    if norm == 0.0:
        return np.zeros(basis.M)
    return (prob @ basis.states) / (basis.S * norm)


def fock_energy(state, params, basis, t=0.0, hamiltonian=None):
    H = build_hamiltonian(params, basis, t) if hamiltonian is None else hamiltonian
    return float(np.real(np.vdot(state, H @ state)) / np.vdot(state, state).real)


def fock_unit_vector(basis: FockBasis, occupation) -> np.ndarray:
    psi = np.zeros(len(basis), dtype=complex)
    psi[basis.lookup(occupation)] = 1.0
    return psi


def propagate_fock(
    initial,
    params: HamiltonianParams,
    t_grid,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    basis: FockBasis | None = None,
    force: bool = False,
    method: str = "DOP853",
) -> Trajectory:
    """Integrate ``i dPsi/dt = H(t) Psi`` in the full Fock sector.

    Observables recorded on ``t_grid``: squared norm, energy, and the
    mode populations ``<n_i>/S``.  ``method`` is ``"DOP853"`` (8th
    order, default) or ``"RK45"``.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {sorted(METHODS)}")
    dim = fock_dimension(params.M, params.S)
    if dim > ORACLE_DIMENSION_CAP and not force:
        raise ValueError(
            f"Fock dimension {dim} exceeds the oracle cap {ORACLE_DIMENSION_CAP}; "
            "pass force=True to propagate anyway"
        )
    if basis is None:
        basis = enumerate_fock_basis(params.M, params.S)
    _check_basis(params, basis)
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.shape != (dim,):
        raise ValueError(f"initial state has shape {psi0.shape}, expected ({dim},)")
    if abs(np.vdot(psi0, psi0).real - 1.0) > 1e-12:
        raise ValueError("initial Fock state must be normalized to 1e-12")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")

    gen = _FockGenerator(params, basis)

    def rhs(t, psi):
        return -1j * gen.apply(psi, t)

    amps, _ = integrate_on_grid(rhs, t_grid, psi0, rtol, atol, method=METHODS[method])

    traj = Trajectory(M=params.M)
    for t, psi in zip(t_grid, amps):
        H_psi = gen.apply(psi, t)
        norm = np.vdot(psi, psi).real
        traj.append(
            float(t),
            psi,
            norm=norm,
            energy=np.vdot(psi, H_psi).real / norm,
            populations=fock_populations(psi, basis),
        )
    return traj
