"""Discrete Laplacian, its zero-mean inverse, and spectral long-range operators.

The Laplacian is the second-order central difference stencil with periodic
wrap.  On a periodic grid the DFT diagonalizes it exactly: mode (j, k) has
eigenvalue

    -lambda(j, k),  lambda(j, k) = (4/h1^2) sin^2(pi j / N1)
                                 + (4/h2^2) sin^2(pi k / N2) >= 0,

so solves reduce to a forward transform, a division by the stencil symbol,
and an inverse transform.  The DFT is used only as a diagonalizer of the
finite-difference operator; there is no spectral differentiation and no
dealiasing (nonlinear terms are evaluated pointwise in real space).

Long-range interaction operators are described by a nonnegative Fourier
multiplier: the inverse of the negative Laplacian (zero mode projected out),
the Helmholtz resolvent (I - l^2 Lap)^-1, the thin-film symbol
(1 - exp(-delta |k|)) / (delta |k|) in physical wavenumbers k = pi m / X,
or an explicit per-mode table.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import GridField, PeriodicGrid


class OpKind(enum.Enum):
    INVERSE_LAPLACIAN = "inverse_laplacian"
    HELMHOLTZ = "helmholtz"
    GARNET_FILM = "garnet_film"
    CUSTOM_SYMBOL = "custom"
    NONE = "none"


@dataclass(frozen=True)
class LongRangeOp:
    """Spectral-multiplier description of a long-range interaction operator.

    ``strength`` records the coupling coefficient carried with the operator
    description; the dynamics and the stability conditions take the coupling
    from ``ModelParams.gamma``, which is the single runtime authority.
    Multiplier application itself is always bare (coefficient-free).
    """

    kind: OpKind
    strength: float = 1.0
    gamma_len: float = 0.0   # Helmholtz screening length
    delta: float = 0.0       # relative film thickness
    symbol: dict | None = field(default=None, hash=False)

    def __post_init__(self):
        if self.strength < 0.0:
            raise ConfigError("operator strength must be >= 0")
        if self.kind is OpKind.HELMHOLTZ and self.gamma_len <= 0.0:
            raise ConfigError("helmholtz operator needs a positive length")
        if self.kind is OpKind.GARNET_FILM and self.delta <= 0.0:
            raise ConfigError("garnet film operator needs a positive thickness")
        if self.kind is OpKind.CUSTOM_SYMBOL:
            if not self.symbol:
                raise ConfigError("custom operator needs a non-empty symbol table")
            for mode, value in self.symbol.items():
                if not np.isfinite(value) or value < 0.0:
                    raise ConfigError(
                        f"custom symbol must be finite and >= 0, got {value} at mode {mode}"
                    )

    @classmethod
    def inverse_laplacian(cls, strength: float = 1.0) -> "LongRangeOp":
        return cls(OpKind.INVERSE_LAPLACIAN, strength=strength)

    @classmethod
    def helmholtz(cls, gamma_len: float, strength: float = 1.0) -> "LongRangeOp":
        return cls(OpKind.HELMHOLTZ, strength=strength, gamma_len=gamma_len)

    @classmethod
    def garnet_film(cls, delta: float, strength: float = 1.0) -> "LongRangeOp":
        return cls(OpKind.GARNET_FILM, strength=strength, delta=delta)

    @classmethod
    def custom(cls, symbol: dict, strength: float = 1.0) -> "LongRangeOp":
        normalized = {}
        for mode, value in symbol.items():
            key = (int(mode),) if np.isscalar(mode) else tuple(int(m) for m in mode)
            normalized[key] = float(value)
        return cls(OpKind.CUSTOM_SYMBOL, strength=strength, symbol=normalized)

    @classmethod
    def none(cls) -> "LongRangeOp":
        return cls(OpKind.NONE)


_symbol_cache: dict = {}
_multiplier_cache: dict = {}
_cache_lock = threading.Lock()


def _grid_key(grid: PeriodicGrid):
    return (grid.sizes, grid.half_extents)


def stencil_symbol(grid: PeriodicGrid) -> np.ndarray:
    """Symbol of -Lap_h over the real-FFT mode layout (all entries >= 0)."""
    key = _grid_key(grid)
    with _cache_lock:
        cached = _symbol_cache.get(key)
    if cached is not None:
        return cached
    h = grid.spacings
    n = grid.sizes
    if grid.dim == 1:
        j = np.arange(n[0] // 2 + 1)
        lam = (4.0 / h[0] ** 2) * np.sin(np.pi * j / n[0]) ** 2
    else:
        j1 = np.arange(n[0])[:, None]
        j2 = np.arange(n[1] // 2 + 1)[None, :]
        lam = (4.0 / h[0] ** 2) * np.sin(np.pi * j1 / n[0]) ** 2 \
            + (4.0 / h[1] ** 2) * np.sin(np.pi * j2 / n[1]) ** 2
    lam.setflags(write=False)
    with _cache_lock:
        _symbol_cache[key] = lam
    return lam


def _wavenumber_magnitude(grid: PeriodicGrid) -> np.ndarray:
    """|k| with k_i = pi * m_i / X_i over the real-FFT mode layout."""
    n = grid.sizes
    x = grid.half_extents
    if grid.dim == 1:
        m = np.arange(n[0] // 2 + 1)
        return np.pi * m / x[0]
    m1 = (np.fft.fftfreq(n[0]) * n[0])[:, None]
    m2 = np.arange(n[1] // 2 + 1)[None, :]
    return np.sqrt((np.pi * m1 / x[0]) ** 2 + (np.pi * m2 / x[1]) ** 2)


def _wrap_mode(m: int, n: int) -> int:
    return (m + n // 2) % n - n // 2


def _custom_multiplier(op: LongRangeOp, grid: PeriodicGrid) -> np.ndarray:
    n = grid.sizes
    table = op.symbol

    def lookup(mode):
        try:
            return table[mode]
        except KeyError:
            raise ConfigError(f"custom symbol table has no entry for mode {mode}") from None

    if grid.dim == 1:
        modes = [(_wrap_mode(m, n[0]),) for m in range(n[0])]
    else:
        modes = [
            (_wrap_mode(m1, n[0]), _wrap_mode(m2, n[1]))
            for m1 in range(n[0])
            for m2 in range(n[1])
        ]
    for mode in modes:
        value = lookup(mode)
        mirrored = tuple(_wrap_mode(-m, nn) for m, nn in zip(mode, n))
        if lookup(mirrored) != value:
            raise ConfigError(
                f"custom symbol is not even: value at {mode} differs from {mirrored}"
            )
    if grid.dim == 1:
        return np.array([lookup((_wrap_mode(m, n[0]),)) for m in range(n[0] // 2 + 1)])
    m1s = [int(m) for m in np.fft.fftfreq(n[0]) * n[0]]
    m2s = [_wrap_mode(m, n[1]) for m in range(n[1] // 2 + 1)]
    return np.array([[lookup((m1, m2)) for m2 in m2s] for m1 in m1s])


def multiplier_array(op: LongRangeOp, grid: PeriodicGrid) -> np.ndarray:
    """Fourier multiplier of ``op`` over the real-FFT mode layout."""
    if op.kind is OpKind.NONE:
        raise ConfigError("cannot apply a long-range operator of kind 'none'")
    if op.kind is OpKind.CUSTOM_SYMBOL:
        # Table lookups are validated per grid; not worth caching.
        return _custom_multiplier(op, grid)
    key = (op.kind, op.gamma_len, op.delta, _grid_key(grid))
    with _cache_lock:
        cached = _multiplier_cache.get(key)
    if cached is not None:
        return cached
    if op.kind is OpKind.INVERSE_LAPLACIAN:
        lam = stencil_symbol(grid)
        with np.errstate(divide="ignore"):
            mult = np.where(lam > 0.0, 1.0 / np.where(lam > 0.0, lam, 1.0), 0.0)
    elif op.kind is OpKind.HELMHOLTZ:
        mult = 1.0 / (1.0 + op.gamma_len ** 2 * stencil_symbol(grid))
    else:
        kmag = _wavenumber_magnitude(grid)
        dk = op.delta * kmag
        with np.errstate(divide="ignore", invalid="ignore"):
            mult = np.where(dk > 0.0, -np.expm1(-dk) / np.where(dk > 0.0, dk, 1.0), 1.0)
    mult.setflags(write=False)
    with _cache_lock:
        _multiplier_cache[key] = mult
    return mult


def _apply_multiplier(values: np.ndarray, mult: np.ndarray, shape) -> np.ndarray:
    axes = tuple(range(len(shape)))
    spectrum = np.fft.rfftn(values, axes=axes)
    spectrum *= mult
    return np.fft.irfftn(spectrum, s=shape, axes=axes)


def apply_laplacian(a: GridField) -> GridField:
    """Standard 3-point (1D) / 5-point (2D) periodic Laplacian stencil."""
    v = a.values
    h = a.grid.spacings
    out = (np.roll(v, 1, axis=0) + np.roll(v, -1, axis=0) - 2.0 * v) / h[0] ** 2
    if a.grid.dim == 2:
        out = out + (np.roll(v, 1, axis=1) + np.roll(v, -1, axis=1) - 2.0 * v) / h[1] ** 2
    return a.with_values(out)


def laplacian_array(values: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Raw-array stencil application used by inner loops."""
    h = grid.spacings
    out = (np.roll(values, 1, axis=0) + np.roll(values, -1, axis=0) - 2.0 * values) / h[0] ** 2
    if grid.dim == 2:
        out = out + (
            np.roll(values, 1, axis=1) + np.roll(values, -1, axis=1) - 2.0 * values
        ) / h[1] ** 2
    return out


def apply_inv_neg_laplacian(a: GridField) -> GridField:
    """Zero-mean solution u of -Lap_h u = a - mean(a).

    The input's mean component is projected out by zeroing the zero mode,
    so the operator is well defined on arbitrary fields and its output
    always has zero mean.
    """
    mult = multiplier_array(LongRangeOp.inverse_laplacian(), a.grid)
    return a.with_values(_apply_multiplier(a.values, mult, a.grid.shape))


def apply_long_range(op: LongRangeOp, a: GridField) -> GridField:
    """Apply the bare spectral multiplier of ``op`` to a field."""
    mult = multiplier_array(op, a.grid)
    return a.with_values(_apply_multiplier(a.values, mult, a.grid.shape))


def estimate_linf_norm(op: LongRangeOp, grid: PeriodicGrid) -> float:
    """Max-norm of the operator, estimated from one impulse response.

    The operator matrix G (with the zero-mean projection built into the
    inverse-Laplacian symbol) is circulant, so all absolute row sums agree
    and the max-to-max norm is the absolute sum of the response to a single
    unit impulse.
    """
    impulse = np.zeros(grid.shape)
    impulse[(0,) * grid.dim] = 1.0
    mult = multiplier_array(op, grid)
    response = _apply_multiplier(impulse, mult, grid.shape)
    return float(np.sum(np.abs(response)))


def load_symbol_csv(path) -> dict:
    """Read a custom symbol table from CSV lines ``k1[,k2],value``."""
    table = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) not in (2, 3):
                raise ConfigError(f"{path}:{lineno}: expected 'k1[,k2],value'")
            try:
                mode = tuple(int(p) for p in parts[:-1])
                value = float(parts[-1])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: malformed symbol entry") from exc
            table[mode] = value
    if not table:
        raise ConfigError(f"{path}: empty symbol table")
    return table
