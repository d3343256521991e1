"""Scenario configuration, bundled presets and the single-run / sweep drivers."""
from __future__ import annotations

import ast
import csv
import dataclasses
import math
import operator
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .coherent import GCSEnsemble, GCSParams, gcs_to_fock, project_state
from .engine import EngineConfig, propagate_gcs
from .grid import GridMode, GridSpec, export_bloch_csv, export_states_csv, sample_ensemble
from .model import (
    ORACLE_DIMENSION_CAP,
    HamiltonianParams,
    enumerate_fock_basis,
    fock_dimension,
    fock_unit_vector,
    propagate_fock,
)
from .trajectory import fmt, write_snapshot

SQRT_PI = math.sqrt(math.pi)


class ConfigError(ValueError):
    """Every problem found while validating a configuration."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ScenarioConfig:
    model: HamiltonianParams
    grid: GridSpec
    initial_xi: np.ndarray | None = None
    initial_fock: tuple | None = None
    engine: EngineConfig = field(default_factory=EngineConfig)
    t_final: float = 10.0
    n_samples: int = 101
    run_oracle: str = "auto"
    output_dir: Path = Path("out")
    name: str = "scenario"

    @property
    def t_grid(self):
        return np.linspace(0.0, self.t_final, self.n_samples)

    @property
    def lam(self):
        return self.model.lam

    @property
    def parameter_count(self):
        return (self.model.M + 1) * self.grid.N


@dataclass
class SweepConfig:
    base: ScenarioConfig
    sweep_N: list
    sweep_beta: list

    def __post_init__(self):
        if not self.sweep_N or not self.sweep_beta:
            raise ConfigError(["sweep_N and sweep_beta must be nonempty"])


@dataclass
class ScenarioResult:
    name: str
    paths: dict
    trajectory: object
    oracle: object = None
    max_oracle_deviation: float | None = None
    projection_residual: float | None = None
    wall_time: float = 0.0
    notices: list = field(default_factory=list)


# -- numeric expressions in config files ---------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "i": 1j, "j": 1j}
_FUNCS = {"sqrt": np.emath.sqrt, "cos": np.cos, "sin": np.sin, "exp": np.exp}


def parse_number(value):
    """Numbers, or strings such as ``"-sqrt(0.7)"``, ``"sqrt(pi)/4"``, ``"i*sqrt(2)/2"``."""
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return value
    if not isinstance(value, str):
        raise ValueError(f"expected a number, got {value!r}")
    text = value.strip()
    try:
        return complex(text.replace(" ", "")) if "j" in text and "(" not in text else float(text)
    except ValueError:
        pass

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return complex(_FUNCS[node.func.id](ev(node.args[0])))
        raise ValueError(f"unsupported expression {value!r}")

    result = ev(ast.parse(text, mode="eval"))
    if isinstance(result, complex) and result.imag == 0:
        return result.real
    return result


# -- presets -------------------------------------------------------------------

def _two_mode_xi():
    return np.array([-math.sqrt(0.7), math.sqrt(0.3)], dtype=complex)


def _half_i_xi(M):
    xi = np.zeros(M, dtype=complex)
    xi[0], xi[1] = math.sqrt(2) / 2, 1j * math.sqrt(2) / 2
    return xi


def _two_mode_driven(S=50, N=25, beta=SQRT_PI, mode="random", extent=None, name=None):
    """Fig. 3: driven two-mode chain, J(t) = 1 + 0.5 cos(2 pi t), U = 0.1."""
    model = HamiltonianParams(M=2, S=S, J0=1.0, J1=0.5, omega=2 * math.pi, U=0.1)
    return dict(model=model, initial_xi=_two_mode_xi(), N=N, beta=beta, mode=mode,
                extent=extent, t_final=10.0, name=name)


def preset_two_mode_driven():
    """Fig. 3, dotted line: N=25 states from a random von Neumann grid."""
    return _two_mode_driven(name="two-mode-driven")


def preset_two_mode_driven_n50():
    """Fig. 3, dash-dotted line: N=50."""
    return _two_mode_driven(N=50, name="two-mode-driven-n50")


def preset_two_mode_driven_n15():
    """Fig. 3, dashed line: N=15."""
    return _two_mode_driven(N=15, name="two-mode-driven-n15")


def preset_two_mode_mean_field():
    """Fig. 3, solid line: a single time-dependent state (N=1)."""
    return _two_mode_driven(N=1, name="two-mode-mean-field")


def preset_two_mode_diagonal_50():
    """Fig. 9: diagonal 5x5 grid (N=25), spacing sqrt(pi)/4, S=50."""
    return _two_mode_driven(N=25, beta=SQRT_PI / 4, mode="diagonal", extent=2,
                            name="two-mode-diagonal-50")


def preset_two_mode_diagonal_200():
    """Fig. 10: diagonal 9x9 grid (N=81), spacing sqrt(pi)/8, S=200."""
    return _two_mode_driven(S=200, N=81, beta=SQRT_PI / 8, mode="diagonal", extent=4,
                            name="two-mode-diagonal-200")


def preset_three_mode_gcs():
    """Fig. 4 (first three-mode figure): initial (sqrt2/2, i sqrt2/2, 0), U=0.1, N=50."""
    model = HamiltonianParams(M=3, S=20, U=0.1)
    return dict(model=model, initial_xi=_half_i_xi(3), N=50, beta=SQRT_PI, mode="random",
                t_final=10.0, name="three-mode-gcs")


def preset_rabi():
    """Fig. 5 (Rabi regime, Lambda=0.6): all 20 bosons in mode 1, U=0.03, N=50."""
    model = HamiltonianParams(M=3, S=20, U=0.03)
    return dict(model=model, initial_fock=(20, 0, 0), N=50, beta=SQRT_PI, mode="random",
                t_final=10.0, name="rabi")


def preset_three_mode_josephson():
    """Fig. 6 (Josephson regime, Lambda=4): all 20 bosons in mode 1, U=0.2, N=50."""
    model = HamiltonianParams(M=3, S=20, U=0.2)
    return dict(model=model, initial_fock=(20, 0, 0), N=50, beta=SQRT_PI, mode="random",
                t_final=10.0, name="three-mode-josephson")


def preset_four_mode():
    """Fig. 12: M=4, S=30, random grid with spacing sqrt(pi)/32, N=169."""
    model = HamiltonianParams(M=4, S=30, U=0.1)
    xi = np.array([-math.sqrt(0.7), math.sqrt(0.3), 0, 0], dtype=complex)
    return dict(model=model, initial_xi=xi, N=169, beta=SQRT_PI / 32, mode="random",
                t_final=10.0, name="four-mode")


def preset_four_mode_diagonal():
    """Fig. 11: M=4, S=30, diagonal 13x13 grid (N=169), spacing sqrt(pi)/32."""
    d = preset_four_mode()
    d.update(mode="diagonal", extent=6, name="four-mode-diagonal")
    return d


def preset_six_mode():
    """Fig. 8: M=6, S=20, random grid with spacing sqrt(pi)/32, N=500."""
    model = HamiltonianParams(M=6, S=20, U=0.1)
    return dict(model=model, initial_xi=_half_i_xi(6), N=500, beta=SQRT_PI / 32,
                mode="random", t_final=4.0, name="six-mode")


def preset_six_mode_von_neumann():
    """Fig. 7, dash-dotted line: M=6, S=20, von Neumann spacing sqrt(pi), N=800."""
    d = preset_six_mode()
    d.update(N=800, beta=SQRT_PI, name="six-mode-von-neumann")
    return d


PRESETS = {
    "two-mode-driven": preset_two_mode_driven,
    "two-mode-driven-n15": preset_two_mode_driven_n15,
    "two-mode-driven-n50": preset_two_mode_driven_n50,
    "two-mode-mean-field": preset_two_mode_mean_field,
    "two-mode-diagonal-50": preset_two_mode_diagonal_50,
    "two-mode-diagonal-200": preset_two_mode_diagonal_200,
    "three-mode-gcs": preset_three_mode_gcs,
    "rabi": preset_rabi,
    "three-mode-josephson": preset_three_mode_josephson,
    "four-mode": preset_four_mode,
    "four-mode-diagonal": preset_four_mode_diagonal,
    "six-mode": preset_six_mode,
    "six-mode-von-neumann": preset_six_mode_von_neumann,
}

SWEEP_PRESETS = {
    # Fig. 9
    "spacing-two-mode-50": ("two-mode-diagonal-50", [25],
                            [SQRT_PI, SQRT_PI / 3, SQRT_PI / 4, SQRT_PI / 8]),
    # Fig. 10
    "spacing-two-mode-200": ("two-mode-diagonal-200", [81],
                             [SQRT_PI, SQRT_PI / 4, SQRT_PI / 8, SQRT_PI / 16]),
    # Fig. 11
    "spacing-four-mode-diagonal": ("four-mode-diagonal", [169],
                                   [SQRT_PI, SQRT_PI / 4, SQRT_PI / 16, SQRT_PI / 32]),
    # Fig. 12
    "spacing-four-mode": ("four-mode", [169],
                          [SQRT_PI, SQRT_PI / 4, SQRT_PI / 16, SQRT_PI / 32, SQRT_PI / 64]),
}


# -- validation ----------------------------------------------------------------

_MODEL_KEYS = {"M", "S", "J0", "J1", "omega", "U", "K", "j0"}
_GRID_KEYS = {"N", "beta", "grid_mode", "seed", "extent"}
_ENGINE_KEYS = {f.name for f in dataclasses.fields(EngineConfig)}
_RUN_KEYS = {"t_final", "n_samples", "run_oracle", "output_dir", "name"}
_INITIAL_KEYS = {"initial_xi", "initial_fock"}
KNOWN_KEYS = ({"preset"} | _MODEL_KEYS | _GRID_KEYS | _ENGINE_KEYS | _RUN_KEYS
              | _INITIAL_KEYS | {"sweep_N", "sweep_beta"})
REQUIRED_KEYS = ("M", "S", "U", "N", "t_final", "initial_xi | initial_fock")


def preset_mapping(name):
    """Flat key/value view of a bundled preset."""
    if name not in PRESETS:
        raise ConfigError([f"unknown preset {name!r}; choose from {sorted(PRESETS)}"])
    d = PRESETS[name]()
    m = d["model"]
    flat = {k: getattr(m, k) for k in _MODEL_KEYS}
    flat.update(N=d["N"], beta=d["beta"], grid_mode=d["mode"], t_final=d["t_final"],
                name=d["name"])
    if d.get("extent") is not None:
        flat["extent"] = d["extent"]
    if d.get("initial_xi") is not None:
        flat["initial_xi"] = list(d["initial_xi"])
    if d.get("initial_fock") is not None:
        flat["initial_fock"] = list(d["initial_fock"])
    return flat


def load_mapping(raw):
    if raw is None:
        return {}
    if isinstance(raw, dict):
        return dict(raw)
    if isinstance(raw, Path):
        raw = raw.read_text()
    data = yaml.safe_load(raw)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(["configuration must be a flat key/value mapping"])
    return data


def validate_config(raw, **overrides) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from flat key/value text or a mapping.

    Keys named in ``overrides`` replace those in ``raw``; a ``preset``
    key supplies defaults for everything else.  All problems are
    collected and raised together as a :class:`ConfigError`.
    """
    data = load_mapping(raw)
    data.update({k: v for k, v in overrides.items() if v is not None})
    errors = []
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        errors.append(f"unknown keys: {', '.join(unknown)}")
    if "preset" in data:
        try:
            merged = preset_mapping(data["preset"])
        except ConfigError as exc:
            raise ConfigError(errors + exc.errors) from None
        if "initial_xi" in data or "initial_fock" in data:
            merged.pop("initial_xi", None)
            merged.pop("initial_fock", None)
        merged.update({k: v for k, v in data.items() if k != "preset"})
        data = merged

    missing = [k for k in ("M", "S", "U", "N", "t_final") if k not in data]
    if "initial_xi" not in data and "initial_fock" not in data:
        missing.append("initial_xi | initial_fock")
    if missing:
        errors.append(f"missing required keys: {', '.join(missing)}")
    if "initial_xi" in data and "initial_fock" in data:
        errors.append("give either initial_xi or initial_fock, not both")

    def get(key, kind, default=None):
        if key not in data:
            return default
        val = data[key]
        try:
            if kind is int:
                if isinstance(val, bool) or (isinstance(val, float) and not val.is_integer()):
                    raise ValueError
                return int(val)
            if kind is float:
                num = parse_number(val)
                if isinstance(num, complex):
                    raise ValueError
                return float(num)
            return kind(val)
        except (TypeError, ValueError):
            errors.append(f"{key}: expected {kind.__name__}, got {val!r}")
            return default

    M = get("M", int)
    S = get("S", int)
    model_kw = dict(J0=get("J0", float, 1.0), J1=get("J1", float, 0.0),
                    omega=get("omega", float, 0.0), U=get("U", float, 0.0),
                    K=get("K", float, 0.0), j0=get("j0", float))
    N = get("N", int)
    beta = get("beta", float, SQRT_PI)
    seed = get("seed", int, 0)
    extent = get("extent", int)
    t_final = get("t_final", float)
    n_samples = get("n_samples", int, 101)
    run_oracle = str(data.get("run_oracle", "auto"))
    grid_mode = str(data.get("grid_mode", "random"))
    engine_kw = {}
    for f in dataclasses.fields(EngineConfig):
        if f.name in data:
            kind = {bool: bool, int: int, str: str}.get(type(f.default), float)
            engine_kw[f.name] = data[f.name] if kind in (bool, str) else get(f.name, kind)

    if M is not None and M < 2:
        errors.append(f"M: must be >= 2, got {M}")
    if S is not None and S < 1:
        errors.append(f"S: must be >= 1, got {S}")
    if N is not None and N < 1:
        errors.append(f"N: must be >= 1, got {N}")
    if t_final is not None and not t_final > 0:
        errors.append(f"t_final: must be positive, got {t_final}")
    if n_samples is not None and n_samples < 2:
        errors.append(f"n_samples: must be >= 2, got {n_samples}")
    if run_oracle not in ("auto", "on", "off"):
        errors.append(f"run_oracle: must be auto, on or off, got {run_oracle!r}")
    if grid_mode not in ("random", "diagonal"):
        errors.append(f"grid_mode: must be random or diagonal, got {grid_mode!r}")
    if beta is not None and not beta > 0:
        errors.append(f"beta: must be positive, got {beta}")

    initial_xi = initial_fock = None
    if "initial_xi" in data:
        try:
            initial_xi = np.array([complex(parse_number(v)) for v in data["initial_xi"]])
            if M is not None and initial_xi.size != M:
                errors.append(f"initial_xi: has {initial_xi.size} entries, expected M={M}")
            elif abs(np.vdot(initial_xi, initial_xi).real - 1.0) > 1e-9:
                errors.append("initial_xi: must satisfy sum |xi_i|^2 = 1")
        except (TypeError, ValueError) as exc:
            errors.append(f"initial_xi: {exc}")
    if "initial_fock" in data:
        try:
            initial_fock = tuple(int(v) for v in data["initial_fock"])
            if M is not None and len(initial_fock) != M:
                errors.append(f"initial_fock: has {len(initial_fock)} entries, expected M={M}")
            if any(n < 0 for n in initial_fock):
                errors.append("initial_fock: occupations must be nonnegative")
            if S is not None and sum(initial_fock) != S:
                errors.append(f"initial_fock: occupations sum to {sum(initial_fock)}, expected S={S}")
        except (TypeError, ValueError) as exc:
            errors.append(f"initial_fock: {exc}")

    if errors:
        raise ConfigError(errors)

    try:
        model = HamiltonianParams(M=M, S=S, **model_kw)
        engine = EngineConfig(**engine_kw)
        center = initial_xi if initial_xi is not None else fock_center(initial_fock)
        grid = GridSpec(M=M, S=S, center=GCSParams(center, S), N=N, beta=beta,
                        mode=GridMode(grid_mode), seed=seed, extent=extent)
    except (TypeError, ValueError) as exc:
        raise ConfigError([str(exc)]) from None
    return ScenarioConfig(
        model=model, grid=grid, initial_xi=initial_xi, initial_fock=initial_fock,
        engine=engine, t_final=t_final, n_samples=n_samples, run_oracle=run_oracle,
        output_dir=Path(data.get("output_dir", "out")), name=str(data.get("name", "scenario")),
    )


def fock_center(occupation):
    """Coherent state with the same mode populations as a Fock state."""
    n = np.asarray(occupation, dtype=float)
    return np.sqrt(n / n.sum()).astype(complex)


def load_preset(name, **overrides) -> ScenarioConfig:
    return validate_config({"preset": name}, **overrides)


# -- running -------------------------------------------------------------------

def initial_ensemble(cfg: ScenarioConfig, fock_basis=None):
    """Sample the basis and set the coefficients.

    Returns ``(ensemble, residual)``; ``residual`` is None when the
    initial state is the grid centre (coefficients ``(1, 0, ..., 0)``).
    """
    states = sample_ensemble(cfg.grid)
    S = cfg.model.S
    if cfg.initial_fock is None:
        return GCSEnsemble.from_states(states), None
    n = np.asarray(cfg.initial_fock)
    if np.count_nonzero(n) == 1:
        # a single occupied mode is itself the centre coherent state
        return GCSEnsemble.from_states(states), None
    if fock_basis is None:
        fock_basis = enumerate_fock_basis(cfg.model.M, S)
    target = fock_unit_vector(fock_basis, cfg.initial_fock)
    A, residual = project_state(target, states, reg=cfg.engine.reg_epsilon, basis=fock_basis)
    return GCSEnsemble.from_states(states, A), residual


def _oracle_initial(cfg, basis):
    if cfg.initial_fock is not None:
        return fock_unit_vector(basis, cfg.initial_fock)
    return gcs_to_fock(GCSParams(cfg.initial_xi, cfg.model.S), basis)


def oracle_allowed(cfg: ScenarioConfig):
    dim = fock_dimension(cfg.model.M, cfg.model.S)
    if cfg.run_oracle == "off":
        return False, None
    if cfg.run_oracle == "on":
        return True, None
    if dim > ORACLE_DIMENSION_CAP:
        return False, f"oracle skipped: Fock dimension {dim} exceeds cap {ORACLE_DIMENSION_CAP}"
    return True, None


def write_comparison(path, gcs_traj, oracle_traj):
    diff = np.abs(gcs_traj.pops - oracle_traj.pops)
    M = diff.shape[1]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"abs_dn{i + 1}" for i in range(M)] + ["max_abs_dn"])
        for t, row in zip(gcs_traj.times, diff):
            w.writerow([fmt(t)] + [fmt(v) for v in row] + [fmt(row.max())])
    return float(diff.max())


def run_scenario(cfg: ScenarioConfig, write: bool = True) -> ScenarioResult:
    """Sample, initialize, propagate and (optionally) compare with the exact oracle."""
    t0 = time.perf_counter()
    notices = []
    out = Path(cfg.output_dir)
    do_oracle, why = oracle_allowed(cfg)
    if why:
        notices.append(why)
    need_fock = do_oracle or (cfg.initial_fock is not None
                              and np.count_nonzero(cfg.initial_fock) > 1)
    basis = enumerate_fock_basis(cfg.model.M, cfg.model.S) if need_fock else None
    ens, residual = initial_ensemble(cfg, basis)
    traj = propagate_gcs(ens, cfg.model, cfg.t_grid, cfg.engine)
    paths = {}
    if write:
        out.mkdir(parents=True, exist_ok=True)
        paths["trajectory"] = traj.to_csv(out / f"{cfg.name}_gcs.csv")
        paths["basis"] = export_states_csv(ens.basis, out / f"{cfg.name}_basis.csv")
        if cfg.model.M == 2:
            paths["bloch"] = export_bloch_csv(ens.basis, out / f"{cfg.name}_bloch.csv")
        last = traj.snapshots[-1]
        if last is not None:
            paths["snapshot"] = out / f"{cfg.name}_final.bin"
            write_snapshot(paths["snapshot"], cfg.model.M, cfg.model.S, traj.times[-1],
                           last.A, last.xi)
    oracle = None
    deviation = None
    if do_oracle:
        oracle = propagate_fock(_oracle_initial(cfg, basis), cfg.model, cfg.t_grid,
                                basis=basis, force=cfg.run_oracle == "on")
        if write:
            paths["oracle"] = oracle.to_csv(out / f"{cfg.name}_fock.csv")
            deviation = write_comparison(out / f"{cfg.name}_compare.csv", traj, oracle)
            paths["compare"] = out / f"{cfg.name}_compare.csv"
        else:
            deviation = float(np.abs(traj.pops - oracle.pops).max())
    return ScenarioResult(name=cfg.name, paths=paths, trajectory=traj, oracle=oracle,
                          max_oracle_deviation=deviation, projection_residual=residual,
                          wall_time=time.perf_counter() - t0, notices=notices)


def _sweep_cell(args):
    cfg, N, beta = args
    cell = dataclasses.replace(
        cfg, grid=dataclasses.replace(cfg.grid, N=N, beta=beta,
                                      extent=cfg.grid.extent if cfg.grid.mode is GridMode.DIAGONAL else None),
        name=f"{cfg.name}_N{N}_beta{beta:.6g}",
    )
    t0 = time.perf_counter()
    try:
        res = run_scenario(cell, write=False)
        return dict(N=N, beta=beta, pops=res.trajectory.pops,
                    oracle_pops=None if res.oracle is None else res.oracle.pops,
                    max_oracle_deviation=res.max_oracle_deviation,
                    wall_time=time.perf_counter() - t0, error="")
    except Exception as exc:  # one failed cell must not stop the sweep
        return dict(N=N, beta=beta, pops=None, oracle_pops=None, max_oracle_deviation=None,
                    wall_time=time.perf_counter() - t0, error=f"{type(exc).__name__}: {exc}")


def run_sweep(cfg: SweepConfig, workers: int = 1, write: bool = True):
    """Run every (N, beta) pair and summarize deviations.

    For each beta, ``max_dev_vs_largest_N`` compares each run against the
    run with the largest N at that spacing.  Returns the list of row dicts.
    """
    cells = [(cfg.base, N, beta) for beta in cfg.sweep_beta for N in cfg.sweep_N]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(c) for c in cells]
    largest = max(cfg.sweep_N)
    ref = {r["beta"]: r["pops"] for r in results if r["N"] == largest}
    rows = []
    for r in results:
        dev = None
        if r["pops"] is not None and ref.get(r["beta"]) is not None:
            dev = float(np.abs(r["pops"] - ref[r["beta"]]).max())
        rows.append(dict(N=r["N"], beta=r["beta"], max_dev_vs_largest_N=dev,
                         max_oracle_deviation=r["max_oracle_deviation"],
                         wall_time=r["wall_time"], error=r["error"], pops=r["pops"]))
    if write:
        out = Path(cfg.base.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / f"{cfg.base.name}_sweep.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "beta", "max_dev_vs_largest_N", "max_oracle_deviation",
                        "wall_time", "error"])
            for r in rows:
                w.writerow([r["N"], fmt(r["beta"]),
                            "" if r["max_dev_vs_largest_N"] is None else fmt(r["max_dev_vs_largest_N"]),
                            "" if r["max_oracle_deviation"] is None else fmt(r["max_oracle_deviation"]),
                            fmt(r["wall_time"]), r["error"]])
    return rows


def sweep_flags(rows):
    """Spacings where the largest-N run deviates more than the smallest-N one."""
    flagged = []
    for beta in sorted({r["beta"] for r in rows}):
        cells = sorted((r for r in rows if r["beta"] == beta), key=lambda r: r["N"])
        lo, hi = cells[0], cells[-1]
        if lo["max_oracle_deviation"] is not None and hi["max_oracle_deviation"] is not None:
            if hi["max_oracle_deviation"] > lo["max_oracle_deviation"]:
                flagged.append(beta)
    return flagged


def load_sweep_preset(name, **overrides) -> SweepConfig:
    if name not in SWEEP_PRESETS:
        raise ConfigError([f"unknown sweep preset {name!r}; choose from {sorted(SWEEP_PRESETS)}"])
    base, Ns, betas = SWEEP_PRESETS[name]
    cfg = load_preset(base, **overrides)
    cfg.name = name
    return SweepConfig(base=cfg, sweep_N=list(Ns), sweep_beta=list(betas))


def validate_sweep_config(raw, **overrides) -> SweepConfig:
    data = load_mapping(raw)
    Ns = data.pop("sweep_N", None)
    betas = data.pop("sweep_beta", None)
    errors = []
    if not Ns:
        errors.append("missing required key: sweep_N")
    if not betas:
        errors.append("missing required key: sweep_beta")
    try:
        base = validate_config(data, **overrides)
    except ConfigError as exc:
        errors = exc.errors + errors
        base = None
    if errors:
        raise ConfigError(errors)
    try:
        Ns = [int(n) for n in Ns]
        betas = [float(parse_number(b)) for b in betas]
    except (TypeError, ValueError) as exc:
        raise ConfigError([f"sweep lists: {exc}"]) from None
    return SweepConfig(base=base, sweep_N=Ns, sweep_beta=betas)
