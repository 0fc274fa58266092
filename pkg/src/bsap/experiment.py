"""Coupling-grid experiment driver and flat-file outputs.

Grid axes are the coupling ratios ``jx_ratio = J^x/J^z`` and
``jy_ratio = J^y/J^x``, both in [0, 1], so the standing ordering
``|J^z| >= |J^x| >= |J^y|`` holds at every cell by construction.

Level addressing in records:

* branched method: ``n`` is the starting-level index (0 or 1), ``parity`` the
  global-spin-flip sector, and ``level_rank`` the target's rank among the
  dense spectrum's degenerate clusters *restricted to that parity sector*
  (rank 0 = sector ground; the weight-2 flow reconstructs ranks 1, 2, ...).
* ap-baseline method: ``parity`` is recorded as 0 and ``n`` as -1; the rank
  counts whole clusters of the dense spectrum from the bottom, and the
  initial state is the matching eigenstate of the non-degenerate field start.

CSV schema (fixed): header ``jx_ratio,jy_ratio,parity,n,level_rank,steps,
error,energy_estimate,wall_time_ms``, rows sorted by (jx_ratio, jy_ratio,
parity, level_rank), UTF-8, LF endings.  All physics columns are
reproducible from (config, seed); wall_time_ms is measured honestly and is
the one column excluded from reproducibility comparisons.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .adiabatic import Schedule, SpectralFlow, evolve, preparation_error, spectral_flow
from .errors import ConfigError, ResourceLimitError
from .hamiltonians import (
    SCHEDULES,
    EigenSolution,
    build_h0_ap,
    build_h0_bsap,
    build_xyz,
    dense_eigensolve,
    expectation,
)
from .mcvqe import (
    build_subspace_matrix,
    diagonalize_subspace,
    pipeline_basis_state,
    reconstructed_state,
)
from .statevector import StateVector, basis_state
from .subspace import branch_dimension, enumerate_branch

CSV_HEADER = "jx_ratio,jy_ratio,parity,n,level_rank,steps,error,energy_estimate,wall_time_ms"
SWEEP_QUBIT_LIMIT = 12


@dataclass(frozen=True)
class LevelRequest:
    level_n: int
    parity: int
    level_rank: int


@dataclass(frozen=True)
class RunRecord:
    jx_ratio: float
    jy_ratio: float
    parity: int
    level_n: int
    level_rank: int
    steps: int
    error: float
    energy_estimate: float
    wall_time_ms: int


@dataclass(frozen=True)
class ExperimentConfig:
    L: int
    method: str = "bsap"
    grid_points: int = 21
    jx_ratio_range: tuple[float, float] = (0.0, 1.0)
    jy_ratio_range: tuple[float, float] = (0.0, 1.0)
    jz: float = 1.0
    num_steps: int | None = None
    step_duration: float = 0.25
    schedule_function: str = "linear"
    stepping_mode: str = "trotter"
    levels: tuple[LevelRequest, ...] = (LevelRequest(0, 1, 0),)
    cluster_tolerance: float | None = None
    seed: int = 0
    workers: int = 1
    out: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "jx_ratio_range", tuple(self.jx_ratio_range))
        object.__setattr__(self, "jy_ratio_range", tuple(self.jy_ratio_range))

    @property
    def steps(self) -> int:
        return self.num_steps if self.num_steps is not None else self.L // 2

    def schedule(self, num_steps: int | None = None) -> Schedule:
        return Schedule(
            num_steps=num_steps if num_steps is not None else self.steps,
            step_duration=self.step_duration,
            schedule_function=self.schedule_function,
            stepping_mode=self.stepping_mode,
        )


def validate_config(config: ExperimentConfig) -> ExperimentConfig:
    """Full validation; returns the config with normalized level requests."""
    L = config.L
    if L < 4 or L % 2:
        raise ConfigError(f"L must be an even integer >= 4, got {L}")
    if L > SWEEP_QUBIT_LIMIT:
        raise ResourceLimitError(
            f"sweeps are limited to L <= {SWEEP_QUBIT_LIMIT} (dense oracle), got L={L}"
        )
    if config.method not in ("bsap", "ap-baseline"):
        raise ConfigError(f"method must be 'bsap' or 'ap-baseline', got {config.method!r}")
    if config.grid_points < 2:
        raise ConfigError(f"grid_points must be >= 2, got {config.grid_points}")
    for name, rng in (("jx_ratio_range", config.jx_ratio_range),
                      ("jy_ratio_range", config.jy_ratio_range)):
        if len(rng) != 2 or not (0.0 <= rng[0] <= rng[1] <= 1.0):
            raise ConfigError(
                f"{name} must be an ordered pair inside [0, 1], got {rng!r} "
                "(the coupling-ordering convention fails outside)"
            )
    if not config.jz > 0:
        raise ConfigError(f"jz must be positive (ferromagnetic convention), got {config.jz}")
    if config.num_steps is not None and config.num_steps < 1:
        raise ConfigError(f"num_steps must be >= 1, got {config.num_steps}")
    if not config.step_duration > 0:
        raise ConfigError(f"step_duration must be positive, got {config.step_duration}")
    if config.schedule_function not in SCHEDULES:
        raise ConfigError(
            f"unknown schedule {config.schedule_function!r}; choose from {sorted(SCHEDULES)}"
        )
    if config.stepping_mode not in ("trotter", "exact"):
        raise ConfigError(f"stepping_mode must be 'trotter' or 'exact', got {config.stepping_mode!r}")
    if not config.levels:
        raise ConfigError("at least one level request is required")
    if config.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {config.workers}")
    normalized = []
    for req in config.levels:
        if config.method == "bsap":
            if req.level_n >= 2:
                raise ConfigError(
                    f"level n={req.level_n} exploration is not constructed in this artifact "
                    "(n must be 0 or 1)"
                )
            if req.level_n not in (0, 1):
                raise ConfigError(f"level n must be 0 or 1, got {req.level_n}")
            if req.parity not in (1, -1):
                raise ConfigError(f"parity must be +1 or -1, got {req.parity}")
            if req.level_n == 0 and req.level_rank != 0:
                raise ConfigError("the n=0 flow prepares the sector ground (level_rank 0)")
            if req.level_n == 1 and not 1 <= req.level_rank <= branch_dimension(L, 1):
                raise ConfigError(
                    f"the n=1 flow reconstructs sector ranks 1..{branch_dimension(L, 1)}, "
                    f"got {req.level_rank}"
                )
            normalized.append(req)
        else:
            if not 0 <= req.level_rank < (1 << L):
                raise ConfigError(f"level_rank {req.level_rank} out of range")
            normalized.append(LevelRequest(-1, 0, req.level_rank))
    return replace(config, levels=tuple(normalized))


# --- config (de)serialization ----------------------------------------------------

_CONFIG_FIELDS = {
    "L", "method", "grid_points", "jx_ratio_range", "jy_ratio_range", "jz",
    "num_steps", "step_duration", "schedule_function", "stepping_mode",
    "levels", "cluster_tolerance", "seed", "workers", "out",
}


def config_from_dict(data: dict) -> ExperimentConfig:
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if "L" not in data:
        raise ConfigError("config requires the ring size L")
    kwargs = dict(data)
    if "levels" in kwargs:
        try:
            kwargs["levels"] = tuple(
                LevelRequest(int(n), int(p), int(r)) for n, p, r in kwargs["levels"]
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"levels entries must be [n, parity, rank] triples: {exc}") from None
    for key in ("jx_ratio_range", "jy_ratio_range"):
        if key in kwargs:
            kwargs[key] = tuple(float(x) for x in kwargs[key])
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a JSON object")
    return config_from_dict(data)


def config_to_dict(config: ExperimentConfig) -> dict:
    data = asdict(config)
    data["levels"] = [[r.level_n, r.parity, r.level_rank] for r in config.levels]
    data["jx_ratio_range"] = list(config.jx_ratio_range)
    data["jy_ratio_range"] = list(config.jy_ratio_range)
    return data


# --- sector-aware target selection ------------------------------------------------

def cluster_parity_dimensions(sol: EigenSolution) -> list[tuple[int, int]]:
    """Per cluster: dimensions of the (+1, -1) global-spin-flip subsectors.

    Uses the trace of the flip operator over the cluster projector, which is
    basis-independent inside each degenerate cluster.
    """
    dims = []
    for lo, hi in sol.clusters:
        block = sol.eigenvectors[:, lo:hi]
        trace = float(np.real(np.sum(np.conj(block) * block[::-1, :])))
        size = hi - lo
        d_plus = 0.5 * (size + trace)
        if abs(d_plus - round(d_plus)) > 1e-3:
            raise RuntimeError(
                f"cluster parity content is not integral (trace {trace:.6f}); "
                "the flip symmetry seems broken for this Hamiltonian"
            )
        dims.append((int(round(d_plus)), size - int(round(d_plus))))
    return dims


def sector_cluster_index(sol: EigenSolution, parity: int, rank: int) -> int:
    """Cluster holding the rank-th parity-sector eigenstate (ascending)."""
    cumulative = 0
    for cluster, (d_plus, d_minus) in enumerate(cluster_parity_dimensions(sol)):
        d = d_plus if parity > 0 else d_minus
        if cumulative <= rank < cumulative + d:
            return cluster
        cumulative += d
    raise ValueError(f"sector rank {rank} exceeds the parity-{parity:+d} sector size")


# --- per-cell execution -----------------------------------------------------------

def _bsap_cell(
    config: ExperimentConfig, jx_ratio: float, jy_ratio: float
) -> list[RunRecord]:
    L = config.L
    jx = config.jz * jx_ratio
    jy = jx * jy_ratio
    ht = build_xyz(L, jx, jy, config.jz)
    h0 = build_h0_bsap(L, config.jz)
    sol = dense_eigensolve(ht, config.cluster_tolerance)
    sched = config.schedule()
    records = []
    by_parity: dict[int, list[LevelRequest]] = {}
    for req in config.levels:
        by_parity.setdefault(req.parity, []).append(req)
    for parity, requests in sorted(by_parity.items()):
        n0_requests = [r for r in requests if r.level_n == 0]
        n1_requests = [r for r in requests if r.level_n == 1]
        if n0_requests:
            t0 = time.perf_counter()
            prepared = pipeline_basis_state(tuple([0] * L), parity, h0, ht, sched)
            cluster = sector_cluster_index(sol, parity, 0)
            error = preparation_error(prepared, ht, cluster, solution=sol)
            energy = expectation(prepared, ht)
            elapsed = int(1000 * (time.perf_counter() - t0))
            records.append(
                RunRecord(jx_ratio, jy_ratio, parity, 0, 0, sched.num_steps,
                          error, energy, elapsed)
            )
        if n1_requests:
            t0 = time.perf_counter()
            branch = enumerate_branch(L, 1, "W")
            mat = build_subspace_matrix(branch, parity, h0, ht, sched)
            pairs = diagonalize_subspace(mat)
            shared_ms = int(1000 * (time.perf_counter() - t0) / len(n1_requests))
            for req in n1_requests:
                t1 = time.perf_counter()
                pair = pairs[req.level_rank - 1]
                state = reconstructed_state(mat, pair)
                cluster = sector_cluster_index(sol, parity, req.level_rank)
                error = preparation_error(state, ht, cluster, solution=sol)
                elapsed = shared_ms + int(1000 * (time.perf_counter() - t1))
                records.append(
                    RunRecord(jx_ratio, jy_ratio, parity, 1, req.level_rank,
                              sched.num_steps, error, pair.energy, elapsed)
                )
    return records


def ap_initial_state(L: int, jz: float, rank: int) -> StateVector:
    """The rank-th lowest eigenstate of the non-degenerate field start."""
    idx = np.arange(1 << L, dtype=np.int64)
    energies = np.zeros(1 << L, dtype=np.float64)
    for i in range(L):
        energies -= (jz / (1 << i)) * (1.0 - 2.0 * ((idx >> i) & 1))
    order = np.argsort(energies, kind="stable")
    return basis_state(L, int(order[rank]))


def _ap_cell(
    config: ExperimentConfig, jx_ratio: float, jy_ratio: float
) -> list[RunRecord]:
    L = config.L
    jx = config.jz * jx_ratio
    jy = jx * jy_ratio
    ht = build_xyz(L, jx, jy, config.jz)
    h0 = build_h0_ap(L, config.jz)
    sol = dense_eigensolve(ht, config.cluster_tolerance)
    sched = config.schedule()
    records = []
    for req in config.levels:
        t0 = time.perf_counter()
        initial = ap_initial_state(L, config.jz, req.level_rank)
        evolved = evolve(initial, h0, ht, sched)
        if req.level_rank >= sol.num_clusters:
            raise ConfigError(
                f"level_rank {req.level_rank} exceeds the {sol.num_clusters} spectrum clusters"
            )
        error = preparation_error(evolved, ht, req.level_rank, solution=sol)
        energy = expectation(evolved, ht)
        elapsed = int(1000 * (time.perf_counter() - t0))
        records.append(
            RunRecord(jx_ratio, jy_ratio, 0, -1, req.level_rank, sched.num_steps,
                      error, energy, elapsed)
        )
    return records


def run_cell(config: ExperimentConfig, jx_ratio: float, jy_ratio: float) -> list[RunRecord]:
    if config.method == "bsap":
        return _bsap_cell(config, jx_ratio, jy_ratio)
    return _ap_cell(config, jx_ratio, jy_ratio)


def _cell_worker(args: tuple[dict, float, float]) -> list[RunRecord]:
    config_data, jx_ratio, jy_ratio = args
    config = config_from_dict(config_data)
    return run_cell(config, jx_ratio, jy_ratio)


def grid_ratios(config: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    xs = np.linspace(*config.jx_ratio_range, config.grid_points)
    ys = np.linspace(*config.jy_ratio_range, config.grid_points)
    return xs, ys


def sort_records(records: list[RunRecord]) -> list[RunRecord]:
    return sorted(
        records,
        key=lambda r: (r.jx_ratio, r.jy_ratio, r.parity, r.level_rank, r.level_n),
    )


def run_sweep(config: ExperimentConfig) -> list[RunRecord]:
    """Execute every grid cell and return records in canonical order."""
    config = validate_config(config)
    xs, ys = grid_ratios(config)
    cells = [(float(rx), float(ry)) for rx in xs for ry in ys]
    records: list[RunRecord] = []
    if config.workers > 1:
        payload = config_to_dict(config)
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for cell_records in pool.map(
                _cell_worker, [(payload, rx, ry) for rx, ry in cells], chunksize=4
            ):
                records.extend(cell_records)
    else:
        for rx, ry in cells:
            records.extend(run_cell(config, rx, ry))
    return sort_records(records)


# --- flat-file outputs ------------------------------------------------------------

def record_to_row(record: RunRecord) -> str:
    return ",".join(
        [
            repr(float(record.jx_ratio)),
            repr(float(record.jy_ratio)),
            str(record.parity),
            str(record.level_n),
            str(record.level_rank),
            str(record.steps),
            repr(float(record.error)),
            repr(float(record.energy_estimate)),
            str(record.wall_time_ms),
        ]
    )


def write_csv(records: list[RunRecord], path: str | Path, append: bool = False) -> Path:
    path = Path(path)
    lines = [record_to_row(r) for r in records]
    if append and path.exists():
        body = "".join(line + "\n" for line in lines)
        with path.open("a", encoding="utf-8", newline="") as fh:
            fh.write(body)
    else:
        body = CSV_HEADER + "\n" + "".join(line + "\n" for line in lines)
        path.write_text(body, encoding="utf-8", newline="")
    return path


def read_csv(path: str | Path) -> list[RunRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path} does not carry the expected result header")
    records = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        records.append(
            RunRecord(
                float(parts[0]), float(parts[1]), int(parts[2]), int(parts[3]),
                int(parts[4]), int(parts[5]), float(parts[6]), float(parts[7]),
                int(parts[8]),
            )
        )
    return records


def write_json_bundle(
    config: ExperimentConfig, records: list[RunRecord], path: str | Path
) -> Path:
    path = Path(path)
    bundle = {
        "config": config_to_dict(config),
        "records": [asdict(r) for r in records],
    }
    path.write_text(json.dumps(bundle, indent=2) + "\n", encoding="utf-8")
    return path


SPECTRUM_HEADER = "s,eigenvalue_index,eigenvalue,cluster_id"


def write_spectrum_csv(flow: SpectralFlow, path: str | Path) -> Path:
    path = Path(path)
    lines = [SPECTRUM_HEADER]
    for k, s in enumerate(flow.s_grid):
        for idx in range(flow.eigenvalue_tracks.shape[1]):
            lines.append(
                ",".join(
                    [
                        repr(float(s)),
                        str(idx),
                        repr(float(flow.eigenvalue_tracks[k, idx])),
                        str(int(flow.cluster_ids[k, idx])),
                    ]
                )
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")
    return path


# --- command entry points -----------------------------------------------------------

def cmd_spectrum(
    config: ExperimentConfig,
    jx_ratio: float,
    jy_ratio: float,
    s_points: int = 41,
) -> SpectralFlow:
    """Spectral flow at one coupling point; writes the CSV when out is set."""
    config = validate_config(config)
    jx = config.jz * jx_ratio
    jy = jx * jy_ratio
    ht = build_xyz(config.L, jx, jy, config.jz)
    h0 = (
        build_h0_bsap(config.L, config.jz)
        if config.method == "bsap"
        else build_h0_ap(config.L, config.jz)
    )
    flow = spectral_flow(
        h0, ht, config.schedule_function, s_points,
        cluster_tolerance=config.cluster_tolerance,
    )
    if config.out:
        write_spectrum_csv(flow, config.out)
    return flow


def cmd_prepare(
    config: ExperimentConfig, jx_ratio: float, jy_ratio: float
) -> list[RunRecord]:
    """Single-cell run; appends to the output CSV when configured."""
    config = validate_config(config)
    records = sort_records(run_cell(config, jx_ratio, jy_ratio))
    if config.out:
        out = Path(config.out)
        write_csv(records, out, append=out.exists())
    return records


def cmd_sweep(config: ExperimentConfig) -> list[RunRecord]:
    records = run_sweep(config)
    if config.out:
        write_csv(records, config.out)
    return records


def cmd_ap_baseline(config: ExperimentConfig) -> list[RunRecord]:
    if config.method != "ap-baseline":
        config = replace(config, method="ap-baseline")
    return cmd_sweep(config)
