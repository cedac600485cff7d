"""Run configuration, figure presets, sweeps and CSV/JSON serialization."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .algebra import SystemParams, density_from_pure
from .coefficients import write_coefficient_csv
from .master import IntegrationError, IntegratorConfig, evolve
from .observables import concurrence, purity, sanity_monitor
from .pseudomode import pseudomode_reference
from .stochastic import EnsembleConfig, ensemble_average

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "NMQUBITS_OUTPUT_DIR"
METHODS = ("exact", "approx", "lindblad", "qsd", "pseudomode")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INTEGRATION = 3

_S2 = 1 / np.sqrt(2)
_S3 = 1 / np.sqrt(3)
STATE_PRESETS = {
    "state10": (0, 1, 0, 0),
    "bell_phi": (_S2, 0, 0, _S2),
    "bell_psi": (0, _S2, _S2, 0),
    "state11": (1, 0, 0, 0),
    "plus_all": (0.5, 0.5, 0.5, 0.5),
    "no11": (0, _S3, _S3, _S3),
}

# Window long enough for the |10> run to settle to 1e-4 (slowest rate ~0.25).
FIG12_T_FINAL = 40.0
# gamma = 0.1 runs relax slowly; 200 reaches the steady regime for kappa = 2.
FIG345_T_FINAL = 200.0

SANITY_TRACE = 1e-8
SANITY_MIN_EIG = -1e-6
SANITY_HERM = 1e-10


class ParseError(ValueError):
    """Malformed configuration input."""


class ValidationError(ValueError):
    """Configuration is well-formed but physically or numerically invalid."""


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    initial_state: str | tuple
    psi0: np.ndarray = field(compare=False)
    method: str = "exact"
    t_final: float = 15.0
    dt_out: float = 15.0 / 400
    integrator: IntegratorConfig = IntegratorConfig()
    ensemble: EnsembleConfig | None = None
    output_dir: Path = Path("out")
    name: str = "run"
    dump_coefficients: bool = False
    preset: str | None = None

    @property
    def out_grid(self) -> np.ndarray:
        n = int(round(self.t_final / self.dt_out))
        return np.linspace(0.0, n * self.dt_out, n + 1)

    def to_dict(self) -> dict[str, Any]:
        state = (self.initial_state if isinstance(self.initial_state, str)
                 else [str(complex(c)) for c in self.initial_state])
        return {
            "preset": self.preset,
            "name": self.name,
            "params": dataclasses.asdict(self.params),
            "initial_state": state,
            "psi0": [[c.real, c.imag] for c in self.psi0],
            "method": self.method,
            "t_final": self.t_final,
            "dt_out": self.dt_out,
            "integrator": dataclasses.asdict(self.integrator),
            "ensemble": dataclasses.asdict(self.ensemble) if self.ensemble else None,
            "output_dir": str(self.output_dir),
        }


def resolve_state(state, unnormalized: bool = False) -> np.ndarray:
    """Named preset or four amplitudes on |11>, |10>, |01>, |00>."""
    if isinstance(state, str):
        if state not in STATE_PRESETS:
            raise ValidationError(f"unknown initial state preset {state!r}; "
                                  f"choose from {sorted(STATE_PRESETS)}")
        return np.array(STATE_PRESETS[state], dtype=complex)
    try:
        amps = np.array([complex(str(c).replace(" ", "")) if isinstance(c, str)
                         else complex(c) for c in state], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"cannot read amplitudes {state!r}: {exc}") from None
    if amps.shape != (4,):
        raise ValidationError(f"initial state needs 4 amplitudes, got {len(amps)}")
    if not np.all(np.isfinite(amps)):
        raise ValidationError("initial state amplitudes must be finite")
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ValidationError("initial state is the zero vector")
    return amps if unnormalized else amps / norm


def _fig_run(name, preset, state, method, t_final, gamma=1.0, omega=0.5, kappa=1.0):
    p = SystemParams.symmetric(gamma=gamma, omega=omega, kappa=kappa, j_xy=0.7, j_z=0.3)
    return RunConfig(params=p, initial_state=state, psi0=resolve_state(state),
                     method=method, t_final=t_final, dt_out=t_final / 400,
                     name=name, preset=preset)


def figure_preset(name: str) -> list[RunConfig]:
    """Run configurations reproducing one of the five figure parameter sets."""
    runs = []
    if name == "fig1":
        for state in ("state10", "bell_phi", "bell_psi", "state11"):
            runs.append(_fig_run(f"fig1_{state}_exact", name, state, "exact",
                                 FIG12_T_FINAL))
    elif name == "fig2":
        runs.append(_fig_run("fig2_state10_exact", name, "state10", "exact",
                             FIG12_T_FINAL))
    elif name == "fig3":
        for gamma in (0.1, 1.0):
            for omega in (0.5, 2.0):
                for method in ("exact", "approx"):
                    runs.append(_fig_run(f"fig3_g{gamma:g}_w{omega:g}_{method}", name,
                                         "plus_all", method, FIG345_T_FINAL,
                                         gamma=gamma, omega=omega, kappa=1.0))
    elif name in ("fig4", "fig5"):
        state = "plus_all" if name == "fig4" else "no11"
        for method in ("exact", "approx"):
            runs.append(_fig_run(f"{name}_{state}_{method}", name, state, method,
                                 FIG345_T_FINAL, gamma=0.1, omega=0.5, kappa=2.0))
    else:
        raise ValidationError(f"unknown preset {name!r}; choose fig1..fig5")
    return runs


# ---------------------------------------------------------------- parsing

_TOP_KEYS = {"preset", "params", "initial_state", "unnormalized", "method",
             "t_final", "dt_out", "integrator", "ensemble", "output_dir", "name",
             "dump_coefficients"}
_PARAM_KEYS = {f.name for f in dataclasses.fields(SystemParams)} | {"omega", "kappa"}
_INTEGRATOR_KEYS = {f.name for f in dataclasses.fields(IntegratorConfig)}
_ENSEMBLE_KEYS = {f.name for f in dataclasses.fields(EnsembleConfig)}
_NESTED = {"params": _PARAM_KEYS, "integrator": _INTEGRATOR_KEYS,
           "ensemble": _ENSEMBLE_KEYS}


def _key_lines(text: str) -> dict[tuple, int]:
    """Map key paths to 1-based line numbers using the YAML node tree."""
    lines: dict[tuple, int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = (*path, k.value)
                lines[key] = k.start_mark.line + 1
                walk(v, key)

    walk(yaml.compose(text), ())
    return lines


def _load_yaml(text: str, source: str) -> tuple[dict, dict]:
    try:
        data = yaml.safe_load(text)
        lines = _key_lines(text) if data else {}
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ParseError(f"{where}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ParseError(f"{source}: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be a mapping")
    for key, value in data.items():
        if key not in _TOP_KEYS:
            raise ParseError(f"{source}:{lines.get((key,), '?')}: unknown key {key!r}")
        if key in _NESTED:
            if not isinstance(value, dict):
                raise ParseError(f"{source}:{lines.get((key,), '?')}: "
                                 f"{key!r} must be a mapping")
            for sub in value:
                if sub not in _NESTED[key]:
                    raise ParseError(f"{source}:{lines.get((key, sub), '?')}: "
                                     f"unknown key {key}.{sub}")
    return data, lines


def _number(value, field_name, kind=float):
    if isinstance(value, bool):
        raise ValidationError(f"{field_name} must be a number, got {value!r}")
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{field_name} must be a number, got {value!r}") from None
    if kind is float and not np.isfinite(out):
        raise ValidationError(f"{field_name} must be finite")
    return out


def _params_from(raw: dict, base: SystemParams | None) -> SystemParams:
    values = dataclasses.asdict(base) if base else {
        "omega_a": 0.5, "omega_b": 0.5, "j_xy": 0.7, "j_z": 0.3,
        "kappa_a": 1.0, "kappa_b": 1.0, "gamma": 1.0}
    if "omega" in raw:
        values["omega_a"] = values["omega_b"] = _number(raw["omega"], "params.omega")
    if "kappa" in raw:
        values["kappa_a"] = values["kappa_b"] = _number(raw["kappa"], "params.kappa")
    for key, v in raw.items():
        if key not in ("omega", "kappa"):
            values[key] = _number(v, f"params.{key}")
    try:
        return SystemParams(**values)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _apply(base: RunConfig, raw: dict, multi: bool) -> RunConfig:
    changes: dict[str, Any] = {}
    if "params" in raw:
        changes["params"] = _params_from(raw["params"], base.params)
    if "initial_state" in raw:
        state = raw["initial_state"]
        if state is None or (not isinstance(state, str) and len(state) == 0):
            raise ValidationError("initial_state is empty")
        changes["initial_state"] = state if isinstance(state, str) else tuple(state)
        changes["psi0"] = resolve_state(state, bool(raw.get("unnormalized", False)))
    if "method" in raw:
        if raw["method"] not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {raw['method']!r}")
        changes["method"] = raw["method"]
    if "t_final" in raw:
        changes["t_final"] = _number(raw["t_final"], "t_final")
        if "dt_out" not in raw:
            changes["dt_out"] = changes["t_final"] / 400
    if "dt_out" in raw:
        changes["dt_out"] = _number(raw["dt_out"], "dt_out")
    if "integrator" in raw:
        fields_ = dataclasses.asdict(base.integrator)
        fields_.update(raw["integrator"])
        try:
            changes["integrator"] = IntegratorConfig(**fields_)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"integrator: {exc}") from None
    if "ensemble" in raw and raw["ensemble"] is not None:
        fields_ = dataclasses.asdict(base.ensemble or EnsembleConfig())
        fields_.update(raw["ensemble"])
        try:
            changes["ensemble"] = EnsembleConfig(
                n_traj=_number(fields_["n_traj"], "ensemble.n_traj", int),
                seed=_number(fields_["seed"], "ensemble.seed", int),
                dt=_number(fields_["dt"], "ensemble.dt"))
        except ValueError as exc:
            raise ValidationError(f"ensemble: {exc}") from None
    if "output_dir" in raw:
        changes["output_dir"] = Path(raw["output_dir"])
    if "name" in raw and not multi:
        changes["name"] = str(raw["name"])
    if "dump_coefficients" in raw:
        changes["dump_coefficients"] = bool(raw["dump_coefficients"])
    cfg = replace(base, **changes)
    if multi and ("method" in raw or "params" in raw):
        suffix = f"_{cfg.method}" if "method" in raw else ""
        stem = base.name.rsplit("_", 1)[0] if "method" in raw else base.name
        cfg = replace(cfg, name=stem + suffix)
    return cfg


def _validate(cfg: RunConfig) -> RunConfig:
    if not cfg.t_final >= 0:
        raise ValidationError("t_final must be non-negative")
    if not cfg.dt_out > 0:
        raise ValidationError("dt_out must be positive")
    if cfg.method == "qsd":
        if not cfg.params.is_symmetric:
            raise ValidationError("qsd requires omega_a == omega_b and kappa_a == kappa_b")
        if cfg.ensemble is None:
            cfg = replace(cfg, ensemble=EnsembleConfig())
    return cfg


def parse_config(path: str | os.PathLike | None = None, *, text: str | None = None,
                 overrides: dict | None = None, preset: str | None = None) -> list[RunConfig]:
    """Resolve a configuration file plus flag overrides into run configs.

    A preset (from the file or the ``preset`` argument) expands to one config
    per figure run; other keys then override every run. Flags in
    ``overrides`` win over file values; ``$NMQUBITS_OUTPUT_DIR`` overrides
    the file's output directory but not an explicit flag.

    Raises
    ------
    ParseError
        For malformed YAML or unknown keys, with ``file:line`` context.
    ValidationError
        For invalid values (gamma <= 0, empty or non-finite state, ...).
    """
    raw: dict = {}
    if path is not None or text is not None:
        source = str(path) if path is not None else "<config>"
        if text is None:
            try:
                text = Path(path).read_text()
            except OSError as exc:
                raise ParseError(f"{source}: {exc.strerror}") from None
        raw, _ = _load_yaml(text, source)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    for key in overrides:
        if key not in _TOP_KEYS:
            raise ParseError(f"unknown override {key!r}")

    preset = preset or overrides.pop("preset", None) or raw.pop("preset", None)
    raw.pop("preset", None)
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        raw["output_dir"] = env_dir
    merged = dict(raw)
    for key, value in overrides.items():
        if key in _NESTED and key in merged:
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value

    if preset:
        bases = figure_preset(preset)
        return [_validate(_apply(b, merged, multi=True)) for b in bases]

    if "params" not in merged and "initial_state" not in merged:
        raise ValidationError("a config needs a preset or params/initial_state")
    base = RunConfig(params=_params_from({}, None), initial_state="state10",
                     psi0=resolve_state("state10"))
    merged.setdefault("params", {})
    return [_validate(_apply(base, merged, multi=False))]


# ---------------------------------------------------------------- running

CSV_ELEMENTS = [(i, j) for i in range(4) for j in range(i, 4)]
CSV_HEADER = (["t"] + [f"{part}_rho_{i + 1}{j + 1}" for i, j in CSV_ELEMENTS
                       for part in ("re", "im")]
              + ["purity", "concurrence", "trace", "min_eig"])


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def format_rows(t, rho, check_trace: bool = True) -> tuple[list[str], int]:
    """CSV lines for a density-matrix time series and the count of rows
    failing the sanity thresholds.

    Ensemble averages conserve the trace only statistically, so
    ``check_trace=False`` skips that threshold for them.
    """
    lines = [",".join(CSV_HEADER)]
    bad = 0
    for ti, r in zip(t, rho):
        s = sanity_monitor(r)
        if ((check_trace and abs(s.trace - 1) > SANITY_TRACE) or s.min_eig < SANITY_MIN_EIG
                or s.herm_defect > SANITY_HERM):
            bad += 1
        vals = [_fmt(ti)]
        for i, j in CSV_ELEMENTS:
            vals += [_fmt(r[i, j].real), _fmt(r[i, j].imag)]
        vals += [_fmt(purity(r)), _fmt(concurrence(r)), _fmt(s.trace), _fmt(s.min_eig)]
        lines.append(",".join(vals))
    return lines, bad


def simulate(cfg: RunConfig) -> dict[str, Any]:
    """Run one configuration in memory; returns times, states and extras."""
    grid = cfg.out_grid
    rho0 = density_from_pure(cfg.psi0)
    extra: dict[str, Any] = {}
    if cfg.method in ("exact", "approx", "lindblad"):
        res = evolve(rho0, cfg.params, cfg.method, float(grid[-1]), grid, cfg.integrator)
        extra.update(n_steps=res.n_steps, n_rhs=res.n_rhs,
                     max_herm_drift=res.max_herm_drift)
        return {"t": grid, "rho": res.rho, "coeffs": res.coeffs, "extra": extra}
    if cfg.method == "pseudomode":
        return {"t": grid, "rho": pseudomode_reference(cfg.params, rho0, grid),
                "coeffs": None, "extra": extra}
    if cfg.method == "qsd":
        ens = cfg.ensemble or EnsembleConfig()
        # trajectory dt must divide the output spacing
        sub = max(1, int(np.ceil(cfg.dt_out / ens.dt - 1e-9)))
        ens = replace(ens, dt=cfg.dt_out / sub)
        res = ensemble_average(cfg.params, cfg.psi0, ens, grid)
        extra.update(max_trace_drift=float(res.trace_drift.max()),
                     n_traj=ens.n_traj, seed=ens.seed, traj_dt=ens.dt)
        return {"t": grid, "rho": res.rho, "coeffs": None, "extra": extra}
    raise ValidationError(f"unknown method {cfg.method!r}")


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def output_paths(cfg: RunConfig) -> tuple[Path, Path]:
    return cfg.output_dir / f"{cfg.name}.csv", cfg.output_dir / f"{cfg.name}.json"


def run(cfg: RunConfig) -> int:
    """Simulate and write ``<name>.csv`` and ``<name>.json``.

    Returns 0 on success, 2 on validation failure and 3 on integration
    failure. Partial files are removed on failure.
    """
    csv_path, json_path = output_paths(cfg)
    written: list[Path] = []
    start = time.perf_counter()
    try:
        cfg = _validate(cfg)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        out = simulate(cfg)
        lines, bad = format_rows(out["t"], out["rho"], cfg.method != "qsd")
        _atomic_write(csv_path, "\n".join(lines) + "\n")
        written.append(csv_path)
        if cfg.dump_coefficients and out["coeffs"] is not None:
            coeff_path = cfg.output_dir / f"{cfg.name}_coefficients.csv"
            written.append(coeff_path)
            write_coefficient_csv(coeff_path, out["t"], out["coeffs"])
        if bad:
            log.warning("%s: %d rows outside sanity thresholds", cfg.name, bad)
        meta = {
            "version": __version__,
            "config": cfg.to_dict(),
            "runtime_seconds": time.perf_counter() - start,
            "time_window": {"t_final": cfg.t_final, "chosen_by": "implementation"},
            "sanity_violations": bad,
            "diagnostics": out["extra"],
            "csv": csv_path.name,
        }
        _atomic_write(json_path, json.dumps(meta, indent=2, default=str) + "\n")
        written.append(json_path)
    except ValidationError as exc:
        log.error("%s: %s", cfg.name, exc)
        _cleanup(written)
        return EXIT_VALIDATION
    except (IntegrationError, FloatingPointError, RuntimeError) as exc:
        log.error("%s: integration failed: %s", cfg.name, exc)
        _cleanup(written)
        return EXIT_INTEGRATION
    except BaseException:
        _cleanup(written)
        raise
    return EXIT_OK


def _cleanup(paths):
    for p in paths:
        Path(p).unlink(missing_ok=True)


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepOutcome:
    value: float
    status: int
    config: RunConfig


def _with_param(base: RunConfig, axis: str, value: float) -> RunConfig:
    values = dataclasses.asdict(base.params)
    if axis == "omega":
        values["omega_a"] = values["omega_b"] = value
    elif axis == "kappa":
        values["kappa_a"] = values["kappa_b"] = value
    elif axis in values:
        values[axis] = value
    else:
        raise ValidationError(f"sweep axis {axis!r} is not a parameter name")
    try:
        params = SystemParams(**values)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    return replace(base, params=params, name=f"{base.name}_{axis}{value:g}")


def sweep(base: RunConfig, axis: str, values, workers: int = 1) -> list[SweepOutcome]:
    """One independent run per value; a failing run does not stop the others."""
    if axis not in _PARAM_KEYS:
        raise ValidationError(f"sweep axis {axis!r} is not a parameter name")
    configs = []
    outcomes: dict[int, SweepOutcome] = {}
    for i, v in enumerate(values):
        try:
            configs.append((i, _with_param(base, axis, float(v))))
        except ValidationError as exc:
            log.error("sweep %s=%s: %s", axis, v, exc)
            outcomes[i] = SweepOutcome(float(v), EXIT_VALIDATION, base)
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            statuses = list(pool.map(run, [c for _, c in configs]))
    else:
        statuses = [run(c) for _, c in configs]
    for (i, c), status in zip(configs, statuses):
        outcomes[i] = SweepOutcome(float(list(values)[i]), status, c)
    return [outcomes[i] for i in sorted(outcomes)]


def aggregate_status(statuses) -> int:
    return max(statuses, default=EXIT_OK)
