"""Experiment configuration, figure presets, and CSV emission.

Configs come from flat ``key = value`` text (newline- or comma-separated) or
directly from CLI flags; unknown keys and out-of-range values are rejected
with the offending key named.  Results are plain tables keyed by the ramp
position s and written as deterministic CSV: UTF-8, LF endings, '.' decimal,
17 significant digits (enough for bit-exact float round-trips).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .closed_dynamics import IntegratorOptions, evolve_closed
from .hamiltonians import ISING, XXZ, AnnealSchedule, ProblemKind
from .open_dynamics import (
    GammaMode,
    SpectralDensity,
    evolve_adiabatic_me,
    evolve_gksl,
)
from .spectrum import sweep_spectrum
from .spin_algebra import CollectiveBasis

OUTPUT_DIR_ENV = "SPINANNEAL_OUTPUT_DIR"

MODES = ("spectrum", "closed", "open")
NOISE_KINDS = ("none", "redfield", "gksl")


class ConfigError(ValueError):
    """A configuration document or flag set failed validation."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: what to run and with which physical/numerical knobs."""

    mode: str
    problem: str
    n_qubits: int = 2
    delta: float = 1.5
    alpha: float = 100.0
    t_anneal: float = 1000.0
    n_points: int = 101
    n_samples: int = 101
    noise: str = "none"
    eta: float = 0.1
    t_env: float = 1.0
    omega_c: float = 20.0
    epsilon: float = 1e-7
    gamma_mode: str = "kms"
    rtol: float = 1e-8
    atol: float = 1e-10
    output: str | None = None

    def schedule(self) -> AnnealSchedule:
        problem = ProblemKind(self.problem, self.delta)
        return AnnealSchedule(
            basis=CollectiveBasis(self.n_qubits), t_anneal=self.t_anneal,
            alpha=self.alpha, problem=problem,
        )

    def spectral_density(self) -> SpectralDensity:
        return SpectralDensity(
            t_env=self.t_env, mode=GammaMode(self.gamma_mode), eta=self.eta,
            omega_c=self.omega_c, epsilon=self.epsilon,
        )

    def integrator_options(self) -> IntegratorOptions:
        return IntegratorOptions(rtol=self.rtol, atol=self.atol)


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}

_RANGE_CHECKS = {
    "mode": lambda v: v in MODES,
    "problem": lambda v: v in (ISING, XXZ),
    "n_qubits": lambda v: v >= 1,
    "alpha": lambda v: v >= 0,
    "t_anneal": lambda v: v > 0,
    "n_points": lambda v: v >= 2,
    "n_samples": lambda v: v >= 2,
    "noise": lambda v: v in NOISE_KINDS,
    "eta": lambda v: v >= 0,
    "t_env": lambda v: v > 0,
    "omega_c": lambda v: v > 0,
    "epsilon": lambda v: v > 0,
    "gamma_mode": lambda v: v in ("kms", "literal"),
    "rtol": lambda v: v > 0,
    "atol": lambda v: v > 0,
}


def _coerce(key: str, raw: str):
    typ = _FIELD_TYPES[key]
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from exc
    return raw.strip()


def validate_config(config: ExperimentConfig) -> ExperimentConfig:
    """Range-check every field; cross-field rules for the open mode."""
    for key, ok in _RANGE_CHECKS.items():
        val = getattr(config, key)
        if not ok(val):
            raise ConfigError(f"{key}: value {val!r} out of range")
    if config.mode == "open" and config.noise == "none":
        raise ConfigError("noise: open mode requires redfield or gksl")
    return config


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Build a validated config from flat key=value text plus keyword overrides.

    Pairs may be separated by newlines or commas; '#' starts a comment.
    Overrides (e.g. CLI flags) win over file values.
    """
    values: dict = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        for chunk in line.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "=" not in chunk:
                raise ConfigError(f"malformed entry {chunk!r}; expected key=value")
            key, raw = (part.strip() for part in chunk.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown key {key!r}")
            values[key] = _coerce(key, raw) if key != "output" else raw
    for key, val in overrides.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}")
        if val is not None:
            values[key] = val
    missing = [key for key in ("mode", "problem") if key not in values]
    if missing:
        raise ConfigError(f"missing required field(s): {', '.join(missing)}")
    try:
        config = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return validate_config(config)


@dataclass(frozen=True)
class ResultTable:
    """Column-labeled rows keyed by the ramp position s."""

    columns: list[str]
    rows: np.ndarray  # shape (n_rows, n_columns)


def run_experiment(config: ExperimentConfig) -> ResultTable:
    """Execute one config and tabulate its mode-specific observables."""
    validate_config(config)
    schedule = config.schedule()
    if config.mode == "spectrum":
        sweep = sweep_spectrum(schedule, config.n_points)
        dim = schedule.basis.dim
        columns = (["s"] + [f"level_{j}" for j in range(dim)]
                   + [f"sector_{j}" for j in range(dim)])
        rows = np.array([
            [snap.s, *snap.eigenvalues, *snap.sector.astype(float)]
            for snap in sweep.snapshots
        ])
        return ResultTable(columns, rows)

    opts = config.integrator_options()
    if config.mode == "closed":
        traj = evolve_closed(schedule, opts=opts, n_samples=config.n_samples)
        columns = ["s", "energy", "parity", "fidelity_ground"]
        rows = np.column_stack([
            traj.times / schedule.t_anneal, traj.energy, traj.parity.real,
            traj.fidelity_ground,
        ])
        return ResultTable(columns, rows)

    if config.noise == "redfield":
        traj = evolve_adiabatic_me(
            schedule, config.spectral_density(), opts=opts,
            n_samples=config.n_samples,
        )
    else:
        traj = evolve_gksl(
            schedule, t_env=config.t_env, eta=config.eta, opts=opts,
            n_samples=config.n_samples,
        )
    columns = ["s", "energy", "ground_population", "trace_error", "min_eig"]
    rows = np.column_stack([
        traj.times / schedule.t_anneal, traj.energy, traj.ground_population,
        traj.trace_error, traj.min_eigenvalue,
    ])
    return ResultTable(columns, rows)


def write_csv(table: ResultTable, path: str | Path) -> None:
    """Write a table as deterministic CSV (see module docstring for the format)."""
    path = Path(path)
    lines = [",".join(table.columns)]
    for row in np.atleast_2d(table.rows):
        if row.size:
            lines.append(",".join(f"{val:.17g}" for val in row))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _preset_members() -> dict[str, list[ExperimentConfig]]:
    def spectrum(problem, alpha, n=2):
        return ExperimentConfig(mode="spectrum", problem=problem, n_qubits=n, alpha=alpha)

    def closed(problem, n=2):
        return ExperimentConfig(mode="closed", problem=problem, n_qubits=n, alpha=100.0)

    def redfield(problem, t_env, n=2):
        return ExperimentConfig(mode="open", problem=problem, n_qubits=n,
                                alpha=100.0, noise="redfield", t_env=t_env)

    def gksl(problem, t_env, n=2):
        return ExperimentConfig(mode="open", problem=problem, n_qubits=n,
                                alpha=100.0, noise="gksl", t_env=t_env)

    return {
        "fig2": [spectrum(ISING, alpha=0.0)],
        "fig3": [closed(ISING)],
        "fig4": [redfield(ISING, t) for t in (1.0, 10.0, 100.0)],
        "fig5": [closed(XXZ)],
        "fig6": [redfield(XXZ, t) for t in (1.0, 10.0, 100.0)],
        "figB-ising": [gksl(ISING, t) for t in (0.1, 1.0, 10.0, 100.0, 1000.0)],
        "figB-xxz": [gksl(XXZ, t) for t in (0.1, 1.0, 10.0, 100.0, 1000.0)],
        "figC-ising": [closed(ISING, n=6)] + [redfield(ISING, t, n=6)
                                              for t in (1.0, 10.0, 100.0)],
        "figC-xxz": [closed(XXZ, n=6)] + [redfield(XXZ, t, n=6)
                                          for t in (10.0, 1000.0)],
    }


FIGURE_IDS = tuple(_preset_members())


def preset(figure_id: str) -> list[ExperimentConfig]:
    """Frozen member configs for one figure id (see FIGURE_IDS)."""
    table = _preset_members()
    if figure_id not in table:
        raise ConfigError(
            f"unknown figure id {figure_id!r}; valid ids: {', '.join(table)}"
        )
    return table[figure_id]


def _member_filename(figure_id: str, config: ExperimentConfig, n_members: int) -> str:
    if n_members == 1:
        return f"{figure_id}.csv"
    if config.mode == "closed":
        return f"{figure_id}_closed.csv"
    return f"{figure_id}_tenv{config.t_env:g}.csv"


def output_directory(explicit: str | Path | None = None) -> Path:
    """Resolve the output directory: explicit arg, then env override, then cwd."""
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def run_figure(figure_id: str, out_dir: str | Path | None = None) -> list[Path]:
    """Run every member config of a figure preset and write one CSV per member.

    Members are independent and run concurrently; each file is written whole
    by its own worker, so outputs never interleave.
    """
    members = preset(figure_id)
    directory = output_directory(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / _member_filename(figure_id, cfg, len(members))
             for cfg in members]

    def worker(arg):
        cfg, path = arg
        write_csv(run_experiment(cfg), path)
        return path

    if len(members) == 1:
        return [worker((members[0], paths[0]))]
    with ThreadPoolExecutor(max_workers=min(4, len(members))) as pool:
        return list(pool.map(worker, zip(members, paths)))
