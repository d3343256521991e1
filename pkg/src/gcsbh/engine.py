"""Variational equations of motion for a multi-configuration coherent-state ansatz.

The unknowns are ``u = (A_1..A_N, xi_{1,1}..xi_{N,1}, ..., xi_{1,M}..xi_{N,M})``,
i.e. all coefficients followed by one block per mode.  Their time
derivatives solve the Hermitian system

    [[X, Y], [Y^+, Z]] du/dt = -i (R1, R2)

whose left-hand side is the Gram matrix of the tangent vectors
``d|Psi>/du`` and whose right-hand side collects ``dH/du*`` with
``H = <Psi|H|Psi>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .coherent import (
    GCSEnsemble,
    overlap_powers,
    ensemble_norm,
    energy_expectation,
    gcs_populations,
    hamiltonian_matrix,
    overlap_base,
)
from .integrate import METHODS, integrate_on_grid
from .model import HamiltonianParams
from .trajectory import PropagationError, Trajectory


REGULARIZATIONS = ("tikhonov", "cutoff")


@dataclass
class EngineConfig:
    """Integrator and regularization settings.

    ``regularization`` selects how the (generally singular) tangent system
    is inverted: ``"tikhonov"`` adds ``reg_epsilon * max(diag)`` to the
    diagonal, ``"cutoff"`` drops eigen-directions below
    ``reg_epsilon * max|eigenvalue|``.  ``fix_gauge`` removes the radial
    part of each ``d xi_k/dt`` along the exact null direction
    ``(xi_k, -S A_k)``, which leaves ``d|Psi>/dt`` untouched and keeps
    ``sum_i |xi_ki|**2`` constant.
    """

    reg_epsilon: float = 1e-10
    regularization: str = "tikhonov"
    fix_gauge: bool = True
    rtol: float = 1e-8
    atol: float = 1e-10
    # "RK45" or "DOP853"; the latter pays off when fast phases force small steps
    integrator: str = "RK45"
    max_step: float = math.inf
    record_stride: int = 1
    # eigen-decompose at record times to report the discarded-direction count
    count_discarded: bool = True
    # abort when |<Psi|Psi>(t) / <Psi|Psi>(0) - 1| exceeds this
    norm_drift_limit: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.reg_epsilon < 1.0:
            raise ValueError("reg_epsilon must lie in (0, 1)")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.regularization not in REGULARIZATIONS:
            raise ValueError(f"regularization must be one of {REGULARIZATIONS}")
        if self.integrator not in METHODS:
            raise ValueError(f"integrator must be one of {sorted(METHODS)}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass
class TangentSystem:
    lhs: np.ndarray
    rhs: np.ndarray
    N: int
    M: int

    @property
    def X(self):
        return self.lhs[: self.N, : self.N]

    @property
    def Y(self):
        return self.lhs[: self.N, self.N:]

    @property
    def Z(self):
        return self.lhs[self.N:, self.N:]


def pack(ens: GCSEnsemble) -> np.ndarray:
    return np.concatenate([ens.A, ens.xi.T.reshape(-1)])


def unpack(u, N, M, S) -> GCSEnsemble:
    return GCSEnsemble(u[N:].reshape(M, N).T, u[:N], S)


def _neighbour_sum(xi):
    """``xi[:, m+1] + xi[:, m-1]`` with out-of-chain terms dropped."""
    out = np.zeros_like(xi)
    out[:, :-1] += xi[:, 1:]
    out[:, 1:] += xi[:, :-1]
    return out


def energy_gradient(ens: GCSEnsemble, params: HamiltonianParams, t: float, cache=None):
    """``(dH/dA*, dH/dxi*)`` of the energy functional, shapes (N,) and (N, M).

    ``cache`` may hold the overlap powers from ``overlap_powers``.
    """
    S, xi, A = ens.S, ens.xi, ens.A
    xc = xi.conj()
    pw = overlap_powers(overlap_base(xi), S) if cache is None else cache
    J = params.hopping(t)
    w = params.trap_weights
    rho = np.outer(A.conj(), A)

    R1 = hamiltonian_matrix(xi, S, params, t, powers=pw) @ A

    R2 = np.zeros_like(xi)
    if S >= 1:
        PX1 = rho * pw[S - 1]
        R2 += -J * S * (PX1 @ _neighbour_sum(xi))
        R2 += 0.5 * params.K * S * (PX1 @ xi) * w
    if S >= 2:
        PX2 = rho * pw[S - 2]
        hop = xc[:, :-1] @ xi[:, 1:].T + xc[:, 1:] @ xi[:, :-1].T
        trap = (xc * w) @ xi.T
        R2 += -J * S * (S - 1) * ((PX2 * hop) @ xi)
        R2 += 0.5 * params.K * S * (S - 1) * ((PX2 * trap) @ xi)
        R2 += params.U * S * (S - 1) * xc * (PX2 @ xi**2)
    if S >= 3 and params.U != 0.0:
        PX3 = rho * pw[S - 3]
        inter = (xc**2) @ (xi**2).T
        R2 += 0.5 * params.U * S * (S - 1) * (S - 2) * ((PX3 * inter) @ xi)
    return R1, R2


def assemble_blocks(ens: GCSEnsemble, params: HamiltonianParams, t: float = 0.0) -> TangentSystem:
    """Left- and right-hand side of the linear system for ``du/dt``."""
    S, N, M = ens.S, ens.N, ens.M
    xi, A = ens.xi, ens.A
    if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(A))):
        raise ValueError("ensemble has non-finite parameters")
    pw = overlap_powers(overlap_base(xi), S)
    rho = np.outer(A.conj(), A)
    X = pw[S]
    lhs = np.empty((N * (M + 1), N * (M + 1)), dtype=complex)
    lhs[:N, :N] = X
    if S >= 1:
        X1 = pw[S - 1]
        # Y[k, (m, j)] = S conj(xi_km) A_j X1_kj
        Y = S * xi.conj().T[:, :, None] * (A[None, :] * X1)[None, :, :]
        Y = Y.transpose(1, 0, 2).reshape(N, M * N)
        lhs[:N, N:] = Y
        lhs[N:, :N] = Y.conj().T
        diag = S * rho * X1
        PX2 = S * (S - 1) * rho * pw[S - 2] if S >= 2 else None
        xc = xi.conj()
        for m in range(M):
            # Z[(m, k), (n, j)] = rho_kj (delta_mn S X1_kj + S(S-1) X2_kj conj(xi_kn) xi_jm)
            rows = slice(N + m * N, N + (m + 1) * N)
            if PX2 is None:
                lhs[rows, N:] = 0.0
            else:
                block = PX2[:, None, :] * xc[:, :, None] * xi[None, None, :, m]
                lhs[rows, N:] = block.reshape(N, M * N)
            lhs[rows, N + m * N:N + (m + 1) * N] += diag
    else:
        lhs[:N, N:] = 0.0
        lhs[N:, :N] = 0.0
        lhs[N:, N:] = 0.0

    R1, R2 = energy_gradient(ens, params, t, cache=pw)
    rhs = -1j * np.concatenate([R1, R2.T.reshape(-1)])
    for name, block in (("X", lhs[:N, :N]), ("Y", lhs[:N, N:]),
                        ("Z", lhs[N:, N:]), ("R", rhs)):
        if not np.all(np.isfinite(block)):
            raise ValueError(f"non-finite entries in block {name}")
    return TangentSystem(lhs=lhs, rhs=rhs, N=N, M=M)


def regularized_solve(sys: TangentSystem, cfg: EngineConfig | None = None, count: bool = True):
    """Regularized solution of the tangent system.

    Returns ``(udot, discarded)``.  ``discarded`` is the number of
    eigen-directions of the left-hand side below the regularization
    scale: dropped ones for ``"cutoff"``, damped ones for ``"tikhonov"``
    (only computed there when ``count`` is true, otherwise ``None``).
    """
    cfg = cfg or EngineConfig()
    L = sys.lhs
    if cfg.regularization == "cutoff":
        w, V = np.linalg.eigh(L)
        wmax = np.max(np.abs(w))
        if not wmax > 0.0:
            raise np.linalg.LinAlgError("tangent system is entirely below the cutoff")
        keep = np.abs(w) >= cfg.reg_epsilon * wmax
        Vk = V[:, keep]
        udot = Vk @ ((Vk.conj().T @ sys.rhs) / w[keep])
        return udot, int(w.size - np.count_nonzero(keep))

    scale = np.max(np.abs(np.diagonal(L)))
    if not scale > 0.0:
        raise np.linalg.LinAlgError("tangent system is identically zero")
    shift = cfg.reg_epsilon * scale
    shifted = L.copy()
    shifted[np.diag_indices_from(shifted)] += shift
    try:
        udot = cho_solve(cho_factor(shifted, lower=True, overwrite_a=True, check_finite=False),
                         sys.rhs, check_finite=False)
    except np.linalg.LinAlgError:
        shifted = L.copy()
        shifted[np.diag_indices_from(shifted)] += shift
        udot = np.linalg.solve(shifted, sys.rhs)
    discarded = None
    if count:
        discarded = int(np.count_nonzero(np.linalg.eigvalsh(L) < shift))
    return udot, discarded


def fix_gauge(udot, ens: GCSEnsemble):
    """Add the null-space component that makes ``Re(xi_k^+ dxi_k/dt) = 0``."""
    N, M, S = ens.N, ens.M, ens.S
    xdot = udot[N:].reshape(M, N).T
    c = -np.real(np.sum(ens.xi.conj() * xdot, axis=1)) / np.sum(np.abs(ens.xi) ** 2, axis=1)
    out = udot.copy()
    out[:N] -= S * c * ens.A
    out[N:] += (c[:, None] * ens.xi).T.reshape(-1)
    return out


def time_derivative(ens, params, t, cfg=None, count=True):
    """``(du/dt, discarded)`` of the variational flow at ``(ens, t)``."""
    cfg = cfg or EngineConfig()
    udot, discarded = regularized_solve(assemble_blocks(ens, params, t), cfg, count)
    if cfg.fix_gauge:
        udot = fix_gauge(udot, ens)
    return udot, discarded


def _observe(ens, params, t):
    return dict(
        norm=ensemble_norm(ens),
        energy=energy_expectation(ens, params, t),
        populations=gcs_populations(ens),
        max_xi_norm_drift=ens.xi_norm_drift(),
    )


def propagate_gcs(ens: GCSEnsemble, params: HamiltonianParams, t_grid,
                  cfg: EngineConfig | None = None) -> Trajectory:
    """Integrate the variational equations and record observables on ``t_grid``."""
    cfg = cfg or EngineConfig()
    if ens.M != params.M or ens.S != params.S:
        raise ValueError("ensemble does not match the Hamiltonian's (M, S)")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be a strictly increasing 1-d array")
    norm0 = ensemble_norm(ens)
    if norm0 < 1e-6:
        raise ValueError(f"initial ensemble norm {norm0:.3e} below 1e-6")
    N, M, S = ens.N, ens.M, ens.S
    reached = {"t": float(t_grid[0])}

    def rhs(t, u):
        if not np.all(np.isfinite(u)):
            raise PropagationError("NaN in variational parameters", t, {"snapshot": u.copy()})
        udot, _ = time_derivative(unpack(u, N, M, S), params, t, cfg, count=False)
        return udot

    def check(t, u):
        cur = unpack(u, N, M, S)
        if not np.all(np.isfinite(u)):
            raise PropagationError("NaN in variational parameters", t, {"snapshot": u.copy()})
        reached["t"] = float(t)
        norm = ensemble_norm(cur)
        if abs(norm / norm0 - 1.0) > cfg.norm_drift_limit:
            raise PropagationError(f"ensemble norm drifted to {norm:.6g}", t,
                                   {"snapshot": u.copy(), "norm": norm})

    try:
        ys, _ = integrate_on_grid(rhs, t_grid, pack(ens), cfg.rtol, cfg.atol,
                                  cfg.max_step, on_step=check,
                                  method=METHODS[cfg.integrator])
    except np.linalg.LinAlgError as exc:
        raise PropagationError(str(exc), reached["t"]) from exc
    ts = t_grid
    traj = Trajectory(M=M)
    for i, (t, u) in enumerate(zip(ts, ys)):
        cur = unpack(u, N, M, S)
        obs = _observe(cur, params, t)
        discarded = -1
        if cfg.count_discarded:
            _, discarded = regularized_solve(assemble_blocks(cur, params, t), cfg)
        snap = cur if i % cfg.record_stride == 0 else None
        traj.append(float(t), snap, discarded_directions=discarded, **obs)
    return traj
