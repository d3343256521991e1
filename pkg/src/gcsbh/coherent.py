"""SU(M) coherent states ``(sum_i xi_i a_i^+)^S |0> / sqrt(S!)`` and their algebra.

Everything here reduces to powers of the single-particle overlap
``sum_i conj(eta_i) xi_i``: the overlap of two S-boson states is its
S-th power, and the (S-1), (S-2), (S-3)-boson overlaps that appear in
matrix elements of ladder operators are the lower powers.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .model import FockBasis, HamiltonianParams, fock_dimension

NORM_TOLERANCE = 1e-9


class ProjectionWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class GCSParams:
    """One coherent state: complex amplitudes ``xi`` over M modes, S bosons."""

    xi: np.ndarray
    S: int

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=complex).ravel())
        if self.S < 0:
            raise ValueError("S must be nonnegative")

    @property
    def M(self) -> int:
        return self.xi.size

    def norm_error(self) -> float:
        return abs(float(np.vdot(self.xi, self.xi).real) - 1.0)

    def is_normalized(self, tol=NORM_TOLERANCE) -> bool:
        return self.norm_error() <= tol


class GCSEnsemble:
    """Superposition ``sum_k A_k |S, xi_k>`` of N coherent states.

    Parameters are stored as an (N, M) array ``xi`` and a length-N
    vector ``A``; ``basis`` gives the per-state view.
    """

    def __init__(self, xi, A, S: int):
        xi = np.array(xi, dtype=complex, ndmin=2)
        A = np.array(A, dtype=complex).ravel()
        if xi.shape[0] != A.size:
            raise ValueError(f"{xi.shape[0]} basis states but {A.size} coefficients")
        if xi.shape[0] == 0:
            raise ValueError("ensemble needs at least one basis state")
        self.xi = xi
        self.A = A
        self.S = int(S)

    @classmethod
    def from_states(cls, basis, coeffs=None):
        basis = list(basis)
        S = {b.S for b in basis}
        M = {b.M for b in basis}
        if len(S) != 1 or len(M) != 1:
            raise ValueError("all basis states must share S and M")
        if coeffs is None:
            coeffs = np.zeros(len(basis), dtype=complex)
            coeffs[0] = 1.0
        return cls(np.vstack([b.xi for b in basis]), coeffs, S.pop())

    @property
    def N(self) -> int:
        return self.A.size

    @property
    def M(self) -> int:
        return self.xi.shape[1]

    @property
    def basis(self):
        return [GCSParams(row, self.S) for row in self.xi]

    @property
    def coeffs(self):
        return self.A

    def copy(self):
        return GCSEnsemble(self.xi.copy(), self.A.copy(), self.S)

    def xi_norm_drift(self) -> float:
        return float(np.max(np.abs(np.sum(np.abs(self.xi) ** 2, axis=1) - 1.0)))


def _power(z, p):
    # integer powers only; numpy handles 0**0 == 1
    if p < 0:
        raise ValueError(f"negative overlap power {p}")
    return np.power(z, p)


def overlap_powers(base, S: int, lowest: int = 3) -> dict:
    """``{S - q: base**(S - q)}`` for ``q = 0..min(lowest, S)``.

    One ``np.power`` for the smallest exponent, the rest by repeated
    multiplication, which is much cheaper than separate complex powers.
    """
    k = min(lowest, S)
    p = _power(base, S - k)
    out = {S - k: p}
    for e in range(S - k + 1, S + 1):
        p = p * base
        out[e] = p
    return out


def single_overlap(eta, xi):
    """``sum_i conj(eta_i) xi_i`` for two amplitude vectors."""
    return np.vdot(eta, xi)


def gcs_overlap(eta: GCSParams, xi: GCSParams, order: int = 0) -> complex:
    """Overlap of the (S - order)-boson states built from ``eta`` and ``xi``."""
    if eta.S != xi.S:
        raise ValueError("states have different boson numbers")
    if eta.M != xi.M:
        raise ValueError("states have different mode numbers")
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be 0..3, got {order}")
    if order > xi.S:
        raise ValueError(f"order {order} exceeds boson number {xi.S}")
    return complex(_power(single_overlap(eta.xi, xi.xi), xi.S - order))


def overlap_base(xi) -> np.ndarray:
    """Matrix of single-particle overlaps ``B[k, j] = sum_i conj(xi[k, i]) xi[j, i]``."""
    return xi.conj() @ xi.T


def log_multinomial_sqrt(basis: FockBasis) -> np.ndarray:
    """``log sqrt(S! / prod n_i!)`` for every occupation vector."""
    return 0.5 * (gammaln(basis.S + 1) - gammaln(basis.states + 1.0).sum(axis=1))


def gcs_to_fock(xi: GCSParams, basis: FockBasis) -> np.ndarray:
    """Fock-sector amplitudes ``sqrt(S!/prod n_i!) prod xi_i**n_i``."""
    if xi.M != basis.M or xi.S != basis.S:
        raise ValueError("coherent state does not match the Fock basis")
    weight = np.exp(log_multinomial_sqrt(basis))
    mono = np.prod(np.power(xi.xi[None, :], basis.states), axis=1)
    return weight * mono


def ensemble_to_fock(ens: GCSEnsemble, basis: FockBasis) -> np.ndarray:
    weight = np.exp(log_multinomial_sqrt(basis))
    # (N, dim) monomials
    mono = np.prod(np.power(ens.xi[:, None, :], basis.states[None, :, :]), axis=2)
    return (ens.A @ mono) * weight


def _check_mode(m, M):
    if not 0 <= m < M:
        raise IndexError(f"mode index {m} outside 0..{M - 1}")


def transition_element(eta: GCSParams, xi: GCSParams, j: int, k: int) -> complex:
    """``<eta| a_j^+ a_k |xi>`` with zero-based mode indices."""
    _check_mode(j, xi.M)
    _check_mode(k, xi.M)
    if xi.S == 0:
        return 0j
    return xi.S * np.conj(eta.xi[j]) * xi.xi[k] * gcs_overlap(eta, xi, 1)


def ensemble_norm(ens: GCSEnsemble) -> float:
    X = _power(overlap_base(ens.xi), ens.S)
    val = np.vdot(ens.A, X @ ens.A)
    if abs(val.imag) > 1e-10 * max(abs(val.real), 1e-300):
        raise ArithmeticError(f"ensemble norm has imaginary part {val.imag:.3e}")
    return float(val.real)


def _checked_norm(ens):
    norm = ensemble_norm(ens)
    if norm < 1e-14:
        raise ValueError(f"degenerate ensemble, norm {norm:.3e}")
    return norm


def gcs_populations(ens: GCSEnsemble) -> np.ndarray:
    """Mode populations ``<n_i>/S`` of the normalized superposition."""
    norm = _checked_norm(ens)
    S = ens.S
    rho = np.outer(ens.A.conj(), ens.A)
    X1 = _power(overlap_base(ens.xi), S - 1)
    W = rho * X1
    # sum_kj W_kj conj(xi_ki) xi_ji
    pops = np.einsum("kj,ki,ji->i", W, ens.xi.conj(), ens.xi).real
    return pops / norm


def hamiltonian_matrix(xi, S: int, params: HamiltonianParams, t: float = 0.0,
                       powers=None) -> np.ndarray:
    """``H[k, j] = <xi_k| H(t) |xi_j>`` between the basis states of an ensemble.

    ``powers`` may carry precomputed overlap powers from ``overlap_powers``.
    """
    base = overlap_base(xi)
    if powers is None:
        powers = overlap_powers(base, S, lowest=2)
    xc = xi.conj()
    J = params.hopping(t)
    H = np.zeros_like(base)
    if S >= 1:
        X1 = powers[S - 1]
        hop = xc[:, :-1] @ xi[:, 1:].T + xc[:, 1:] @ xi[:, :-1].T
        trap = (xc * params.trap_weights) @ xi.T
        H += S * (-J * hop + 0.5 * params.K * trap) * X1
    if S >= 2 and params.U != 0.0:
        X2 = powers[S - 2]
        H += 0.5 * params.U * S * (S - 1) * ((xc**2) @ (xi**2).T) * X2
    return H


def energy_expectation(ens: GCSEnsemble, params: HamiltonianParams, t: float = 0.0) -> float:
    norm = _checked_norm(ens)
    H = hamiltonian_matrix(ens.xi, ens.S, params, t)
    return float(np.vdot(ens.A, H @ ens.A).real / norm)


def pinv_hermitian(mat, cutoff_ratio):
    """Spectral pseudo-inverse of a Hermitian matrix.

    Eigenvalues with modulus below ``cutoff_ratio * max|eigenvalue|`` are
    dropped. Returns ``(eigvals, eigvecs, keep_mask)``.
    """
    w, V = np.linalg.eigh(mat)
    wmax = np.max(np.abs(w))
    keep = np.abs(w) >= cutoff_ratio * wmax
    return w, V, keep


def project_state(target, basis_set, reg: float = 1e-10, basis: FockBasis | None = None,
                  threshold: float = 1e-3):
    """Least-squares coefficients of ``target`` in the span of ``basis_set``.

    Solves ``X A = b`` with ``b_k = <xi_k|target>`` through a spectral
    pseudo-inverse of the overlap matrix ``X``. Returns ``(A, residual)``
    where ``residual`` is the norm of ``target - sum_k A_k |xi_k>``; a
    :class:`ProjectionWarning` is issued if it exceeds ``threshold``.
    """
    basis_set = list(basis_set)
    if not basis_set:
        raise ValueError("basis_set is empty")
    ens = GCSEnsemble.from_states(basis_set)
    if basis is None:
        from .model import enumerate_fock_basis
        basis = enumerate_fock_basis(ens.M, ens.S)
    target = np.asarray(target, dtype=complex)
    if target.shape != (fock_dimension(ens.M, ens.S),):
        raise ValueError("target does not live in the Fock sector of the basis")
    vecs = np.vstack([gcs_to_fock(b, basis) for b in basis_set])  # (N, dim)
    X = vecs.conj() @ vecs.T
    b = vecs.conj() @ target
    w, V, keep = pinv_hermitian(X, reg)
    A = V[:, keep] @ ((V[:, keep].conj().T @ b) / w[keep])
    residual = float(np.linalg.norm(target - A @ vecs))
    if residual > threshold:
        warnings.warn(f"projection residual {residual:.3e} exceeds {threshold:.1e}",
                      ProjectionWarning, stacklevel=2)
    return A, residual
