"""Run configuration: flat ``key = value`` text files and series CSV I/O.

The config format is deliberately plain: one ``key = value`` per line,
``#`` starts a comment, lists are comma-separated.  Unknown keys are
errors, every key has a documented default, and parse/format round-trips
are lossless.  Series files are CSV with the fixed header
``n,t,min,max,energy,increment`` and 17-significant-digit decimals, which
reproduce float64 exactly on read-back.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigError
from .grid import GridField, PeriodicGrid, load_snapshot
from .physics import FKind, ModelParams, NonlinearSpec, pvism_potential
from .spectral import LongRangeOp, load_symbol_csv
from .stepping import StepRecord

SERIES_HEADER = "n,t,min,max,energy,increment"


@dataclass(frozen=True)
class RunConfig:
    """Everything one simulation needs, with defaults for every field.

    Numeric defaults are the 1D coarsening setup (omega = 0.3, gamma = 500,
    M = 2000, kappa = 2000, tau = 1e-3 on [-1, 1) with 256 points and
    interface width 10h).
    """

    epsilon: float = 0.078125
    gamma: float = 500.0
    M: float = 2000.0
    omega: float = 0.3
    kappa: float = 2000.0
    tau: float = 1e-3
    N: tuple[int, ...] = (256,)
    X: tuple[float, ...] = (1.0,)
    T: float = 10.0
    tol: float = 1e-3
    f: str = "cubic"
    extension: bool = False
    operator: str = "inverse_laplacian"
    op_gamma_len: float = 0.1
    op_delta: float = 1.0
    op_symbol_file: str = ""
    pvism_solutes: tuple[float, ...] = ()
    seed: int = 0
    initial: str = "random"
    initial_value: float = 0.5
    initial_file: str = ""
    blocks: int = 8
    lo: float = 0.0
    hi: float = 0.8
    snapshot_times: tuple[float, ...] = ()
    monitor_every: int = 1
    scale: str = "desk"
    out: str = ""

    # --- builders -------------------------------------------------------

    def build_grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.N, self.X)

    def build_params(self) -> ModelParams:
        return ModelParams(
            epsilon=self.epsilon,
            gamma=self.gamma,
            M=self.M,
            omega=self.omega,
            kappa=self.kappa,
            tau=self.tau,
        )

    def build_spec(self) -> NonlinearSpec:
        kind = FKind.CUBIC_HERMITE if self.f == "cubic" else FKind.LINEAR
        return NonlinearSpec(kind, use_extension=self.extension)

    def build_op(self) -> LongRangeOp:
        if self.pvism_solutes:
            return LongRangeOp.none()
        if self.operator == "inverse_laplacian":
            return LongRangeOp.inverse_laplacian(self.gamma)
        if self.operator == "helmholtz":
            return LongRangeOp.helmholtz(self.op_gamma_len, self.gamma)
        if self.operator == "garnet_film":
            return LongRangeOp.garnet_film(self.op_delta, self.gamma)
        if self.operator == "custom":
            if not self.op_symbol_file:
                raise ConfigError("operator = custom needs op_symbol_file")
            return LongRangeOp.custom(load_symbol_csv(self.op_symbol_file), self.gamma)
        return LongRangeOp.none()

    def build_potential(self, grid: PeriodicGrid) -> GridField | None:
        if not self.pvism_solutes:
            return None
        return pvism_potential(grid, self.pvism_solutes)

    def build_initial(self, grid: PeriodicGrid) -> GridField:
        from .experiments import initial_random_piecewise, initial_tanh_disk

        if self.initial == "random":
            return initial_random_piecewise(grid, self.lo, self.hi, self.blocks, self.seed)
        if self.initial == "disk":
            return initial_tanh_disk(grid, self.omega, self.epsilon)
        if self.initial == "constant":
            return GridField.constant(grid, self.initial_value)
        if not self.initial_file:
            raise ConfigError("initial = file needs initial_file")
        phi, _ = load_snapshot(self.initial_file)
        if phi.grid != grid:
            raise ConfigError(
                f"initial_file grid {phi.grid.sizes} does not match config N = {self.N}"
            )
        return phi


_CHOICES = {
    "f": ("cubic", "linear"),
    "operator": ("inverse_laplacian", "helmholtz", "garnet_film", "custom", "none"),
    "initial": ("random", "disk", "constant", "file"),
    "scale": ("desk", "paper"),
}

# Config-file key -> dataclass field (dots are not valid identifiers).
_KEY_TO_FIELD = {"pvism.solutes": "pvism_solutes"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}


def _parse_scalar(key, text, py_type, lineno):
    try:
        if py_type is bool:
            if text not in ("true", "false"):
                raise ValueError
            return text == "true"
        if py_type is int:
            return int(text)
        if py_type is float:
            value = float(text)
            if not np.isfinite(value):
                raise ValueError
            return value
        return text
    except ValueError:
        raise ConfigError(
            f"line {lineno}: key '{key}' expects {py_type.__name__}, got '{text}'"
        ) from None


def _parse_list(key, text, item_type, lineno):
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    if not body.strip():
        return ()
    return tuple(
        _parse_scalar(key, piece.strip(), item_type, lineno)
        for piece in body.split(",")
    )


_LIST_ITEM_TYPES = {"N": int, "X": float, "pvism_solutes": float, "snapshot_times": float}


def _validate(cfg: RunConfig) -> RunConfig:
    if not (0.0 < cfg.omega < 1.0):
        raise ConfigError(f"omega must lie in (0, 1), got {cfg.omega}")
    if cfg.tau <= 0.0:
        raise ConfigError(f"tau must be positive, got {cfg.tau}")
    if cfg.epsilon <= 0.0:
        raise ConfigError(f"epsilon must be positive, got {cfg.epsilon}")
    if cfg.gamma < 0.0 or cfg.M < 0.0 or cfg.kappa < 0.0:
        raise ConfigError("gamma, M and kappa must be >= 0")
    if cfg.T <= 0.0:
        raise ConfigError(f"T must be positive, got {cfg.T}")
    if cfg.tol < 0.0:
        raise ConfigError(f"tol must be >= 0, got {cfg.tol}")
    if len(cfg.N) not in (1, 2) or len(cfg.N) != len(cfg.X):
        raise ConfigError(f"N and X must both have 1 or 2 entries, got N={cfg.N}, X={cfg.X}")
    for n in cfg.N:
        if n < 4 or n % 2 != 0:
            raise ConfigError(f"N entries must be even integers >= 4, got {n}")
    for x in cfg.X:
        if x <= 0.0:
            raise ConfigError(f"X entries must be positive, got {x}")
    if cfg.monitor_every < 1:
        raise ConfigError(f"monitor_every must be >= 1, got {cfg.monitor_every}")
    if cfg.blocks < 1:
        raise ConfigError(f"blocks must be >= 1, got {cfg.blocks}")
    for key, choices in _CHOICES.items():
        if getattr(cfg, key) not in choices:
            raise ConfigError(f"{key} must be one of {choices}, got '{getattr(cfg, key)}'")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` text into a validated :class:`RunConfig`."""
    field_types = {f.name: f for f in fields(RunConfig)}
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        name = _KEY_TO_FIELD.get(key, key)
        if name not in field_types:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if name in _LIST_ITEM_TYPES:
            updates[name] = _parse_list(key, value, _LIST_ITEM_TYPES[name], lineno)
        else:
            default = getattr(RunConfig, name)
            updates[name] = _parse_scalar(key, value, type(default), lineno)
    return _validate(replace(RunConfig(), **updates))


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def format_config(cfg: RunConfig) -> str:
    """Serialize a config so that ``parse_config(format_config(c)) == c``."""
    lines = []
    for f in fields(RunConfig):
        key = _FIELD_TO_KEY.get(f.name, f.name)
        lines.append(f"{key} = {_format_value(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def write_series(path, records) -> None:
    """Write step records as CSV under the fixed header."""
    lines = [SERIES_HEADER]
    for r in records:
        lines.append(
            f"{r.n},{r.t:.17g},{r.phi_min:.17g},{r.phi_max:.17g},"
            f"{r.energy:.17g},{r.increment:.17g}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_series(path) -> list[StepRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != SERIES_HEADER:
            raise ConfigError(f"{path}: expected header '{SERIES_HEADER}', got '{header}'")
        records = []
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ConfigError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
            try:
                records.append(
                    StepRecord(
                        n=int(parts[0]),
                        t=float(parts[1]),
                        phi_min=float(parts[2]),
                        phi_max=float(parts[3]),
                        energy=float(parts[4]),
                        increment=float(parts[5]),
                    )
                )
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: malformed row") from exc
    return records
