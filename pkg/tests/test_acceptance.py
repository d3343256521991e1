"""End-to-end acceptance checks; each prints one PASS/FAIL line in the summary.

The six-mode check is gated by a wall-clock budget (seconds) read from
``GCSBH_SIX_MODE_BUDGET`` (default 3600).  When the estimated cost exceeds
it the check is not run and is reported as a failure with the estimate.
"""
import math
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from gcsbh.coherent import (
    GCSEnsemble,
    GCSParams,
    energy_expectation,
    gcs_overlap,
    gcs_populations,
    transition_element,
)
from gcsbh.engine import EngineConfig, assemble_blocks, pack, propagate_gcs, time_derivative
from gcsbh.model import HamiltonianParams, fock_dimension
from gcsbh.scenarios import initial_ensemble, load_preset, run_scenario
from oracles import TensorSpace, ensemble_tensor, random_xi

pytestmark = pytest.mark.slow

SP = math.sqrt(math.pi)
_RUNS = {}


def report(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, detail


def scenario(key, preset, **overrides):
    """Run a preset once per session with the exact oracle attached."""
    if key not in _RUNS:
        cfg = load_preset(preset, run_oracle="on", **overrides)
        _RUNS[key] = run_scenario(cfg, write=False)
    return _RUNS[key]


def dev(res, modes=slice(0, 1)):
    return float(np.abs(res.trajectory.pops[:, modes] - res.oracle.pops[:, modes]).max())


def returns_near_start(pop, tol=0.05):
    """Number of times ``pop`` comes back within ``tol`` of its start after leaving."""
    near = np.abs(pop - pop[0]) <= tol
    count, away = 0, False
    for flag in near[1:]:
        if not flag:
            away = True
        elif away:
            count += 1
            away = False
    return count


def test_criterion_1_fock_dimensions():
    table = {(2, 50): 51, (3, 20): 231, (4, 30): 5456, (6, 20): 53130, (2, 200): 201}
    got = {k: fock_dimension(*k) for k in table}
    report(1, got == table, f"dimensions {got}")


def test_criterion_2_algebraic_oracle_suite():
    rng = np.random.default_rng(2024)
    worst = dict(overlap=0.0, transition=0.0, populations=0.0, energy=0.0)
    spaces = {}
    for _ in range(200):
        M, S, N = int(rng.integers(2, 4)), int(rng.integers(1, 7)), int(rng.integers(1, 4))
        space = spaces.setdefault((M, S), TensorSpace(M, S))
        eta, xi = random_xi(rng, M, zeros=True), random_xi(rng, M, zeros=True)
        ve, vx = space.coherent(eta), space.coherent(xi)
        ge, gx = GCSParams(eta, S), GCSParams(xi, S)
        worst["overlap"] = max(worst["overlap"], abs(gcs_overlap(ge, gx) - np.vdot(ve, vx)))
        j, k = int(rng.integers(M)), int(rng.integers(M))
        ref = np.vdot(ve, space.a[j].T @ space.a[k] @ vx)
        worst["transition"] = max(worst["transition"], abs(transition_element(ge, gx, j, k) - ref))

        xis = np.array([random_xi(rng, M, zeros=True) for _ in range(N)])
        A = rng.normal(size=N) + 1j * rng.normal(size=N)
        ens = GCSEnsemble(xis, A, S)
        psi = ensemble_tensor(space, xis, A)
        nrm = np.vdot(psi, psi).real
        pops = np.array([np.vdot(psi, space.n(i) @ psi).real for i in range(M)]) / (S * nrm)
        worst["populations"] = max(worst["populations"], np.abs(gcs_populations(ens) - pops).max())
        p = HamiltonianParams(M=M, S=S, J0=rng.uniform(0.5, 1.5), J1=rng.uniform(0, 0.5),
                              omega=rng.uniform(0, 7), U=rng.uniform(0, 1), K=rng.uniform(0, 0.5))
        t = rng.uniform(0, 3)
        E = np.vdot(psi, space.hamiltonian(p, t) @ psi).real / nrm
        worst["energy"] = max(worst["energy"], abs(energy_expectation(ens, p, t) - E) / max(1, abs(E)))
    ok = all(v <= 1e-10 for v in worst.values())
    report(2, ok, "max errors " + ", ".join(f"{k}={v:.1e}" for k, v in worst.items()))


def test_criterion_3_two_mode_driven():
    n25 = scenario("2m-25", "two-mode-driven")
    n1 = scenario("2m-1", "two-mode-mean-field")
    d25, d1 = dev(n25), dev(n1)
    report(3, d25 <= 0.01 and d1 > 0.05,
           f"N=25 max|dn1|={d25:.2e} (<=0.01), N=1 max|dn1|={d1:.3f} (>0.05), "
           f"wall {n25.wall_time:.0f}s")


def test_criterion_4_three_mode_gcs():
    a = scenario("3m-50", "three-mode-gcs")
    b = scenario("3m-100", "three-mode-gcs", N=100)
    mutual = float(np.abs(a.trajectory.pops[:, 0] - b.trajectory.pops[:, 0]).max())
    da, db = dev(a), dev(b)
    report(4, max(mutual, da, db) <= 0.01,
           f"N=50 vs exact {da:.2e}, N=100 vs exact {db:.2e}, N=50 vs N=100 {mutual:.2e}")


def test_criterion_5_rabi_josephson():
    rabi = scenario("rabi", "rabi", n_samples=201)
    jos = scenario("jos", "three-mode-josephson", n_samples=201)
    dr, dj = dev(rabi, slice(None)), dev(jos, slice(None))
    rr = returns_near_start(rabi.trajectory.pops[:, 0])
    rj = returns_near_start(jos.trajectory.pops[:, 0])
    ok = dr <= 0.02 and dj <= 0.02 and rr >= 2 and rj < 2
    report(5, ok, f"all-mode max dev Rabi {dr:.2e}, Josephson {dj:.2e} (<=0.02); "
                  f"returns to start Rabi {rr} (>=2), Josephson {rj} (<2)")


def test_criterion_6_grid_spacing():
    fine50 = scenario("d50-4", "two-mode-diagonal-50")
    coarse50 = scenario("d50-1", "two-mode-diagonal-50", beta=SP)
    fine200 = scenario("d200-8", "two-mode-diagonal-200")
    coarse200 = scenario("d200-4", "two-mode-diagonal-200", beta=SP / 4)
    a, b, c, d = dev(fine50), dev(coarse50), dev(fine200), dev(coarse200)
    ok = a <= 0.01 and b > a and c <= 0.01 and d > c
    report(6, ok, f"S=50: beta=sqrt(pi)/4 {a:.2e}, sqrt(pi) {b:.2e}; "
                  f"S=200: sqrt(pi)/8 {c:.2e}, sqrt(pi)/4 {d:.2e}")


def _six_mode_estimate(N, beta):
    """Seconds for a full six-mode run: measured cost of one derivative times
    the evaluation count per unit time observed for this model."""
    cfg = load_preset("six-mode", N=N, beta=beta)
    ens, _ = initial_ensemble(cfg)
    t0 = time.perf_counter()
    time_derivative(ens, cfg.model, 0.0, cfg.engine, count=False)
    per_eval = time.perf_counter() - t0
    evals_per_time = 2650.0
    return per_eval * evals_per_time * cfg.t_final


def test_criterion_7_six_mode():
    pcount = load_preset("six-mode").parameter_count
    count_ok = pcount == 3500 and pcount < fock_dimension(6, 20) / 10
    budget = float(os.environ.get("GCSBH_SIX_MODE_BUDGET", "3600"))
    est = _six_mode_estimate(500, SP / 32) + _six_mode_estimate(800, SP)
    if est > budget:
        report(7, False, f"parameter count {pcount} < 5313: {count_ok}; propagation not run, "
                         f"estimated {est / 3600:.1f} h exceeds budget {budget:.0f} s")
    a = scenario("6m-500", "six-mode")
    b = scenario("6m-800", "six-mode-von-neumann")
    mutual = float(np.abs(a.trajectory.pops[:, 0] - b.trajectory.pops[:, 0]).max())
    drifts = [r.trajectory.norm_drift() for r in (a, b)] + [r.trajectory.energy_drift() for r in (a, b)]
    ok = count_ok and mutual <= 0.02 and max(drifts) <= 1e-5
    report(7, ok, f"N=500 vs N=800 {mutual:.2e} (<=0.02), max drift {max(drifts):.1e}, "
                  f"parameters {pcount}; vs exact {dev(a):.2e} / {dev(b):.2e}")


AUTONOMOUS = ("3m-50", "3m-100", "rabi", "jos", "6m-500", "6m-800")


def test_criterion_8_conservation():
    runs = {k: _RUNS[k] for k in AUTONOMOUS if k in _RUNS}
    if "3m-50" not in runs:
        runs["3m-50"] = scenario("3m-50", "three-mode-gcs")
    worst = {}
    for k, r in runs.items():
        tr = r.trajectory
        worst[k] = (tr.norm_drift(), tr.energy_drift(), max(tr.max_xi_norm_drift))
    ok = all(max(v) <= 1e-6 for v in worst.values())
    detail = "; ".join(f"{k}: norm {v[0]:.1e} energy {v[1]:.1e} xi {v[2]:.1e}"
                       for k, v in worst.items())
    report(8, ok, detail)


def test_criterion_9_tangent_structure():
    rng = np.random.default_rng(99)
    herm, psd = 0.0, 0.0
    for _ in range(100):
        M, S, N = int(rng.integers(2, 7)), int(rng.integers(1, 41)), int(rng.integers(1, 9))
        xis = np.array([random_xi(rng, M, zeros=True) for _ in range(N)])
        A = rng.normal(size=N) + 1j * rng.normal(size=N)
        p = HamiltonianParams(M=M, S=S, J1=0.3, omega=1.0, U=rng.uniform(0, 1), K=0.1)
        sys = assemble_blocks(GCSEnsemble(xis, A, S), p, rng.uniform(0, 2))
        L = sys.lhs
        herm = max(herm, np.abs(L - L.conj().T).max() / np.abs(L).max())
        psd = min(psd, np.linalg.eigvalsh(sys.X).min())

    # central-difference residual of i L du/dt = R along a propagated trajectory
    ens = GCSEnsemble(np.array([random_xi(rng, 3, zeros=True) for _ in range(3)]),
                      rng.normal(size=3) + 1j * rng.normal(size=3), 4)
    p = HamiltonianParams(M=3, S=4, U=0.3, K=0.1)
    h = 1e-3
    traj = propagate_gcs(ens, p, [0.0, 0.4 - h, 0.4, 0.4 + h], EngineConfig(rtol=1e-11, atol=1e-13))
    fd = (pack(traj.snapshots[3]) - pack(traj.snapshots[1])) / (2 * h)
    sysm = assemble_blocks(traj.snapshots[2], p, 0.4)
    res = np.linalg.norm(sysm.lhs @ fd - sysm.rhs) / np.linalg.norm(sysm.rhs)
    ok = herm <= 1e-10 and psd >= -1e-10 and res < 1e-5
    report(9, ok, f"hermiticity {herm:.1e}, min eig X {psd:.1e}, residual {res:.1e}")
