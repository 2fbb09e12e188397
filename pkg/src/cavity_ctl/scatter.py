"""Exact per-frequency scattering on a layer stack via propagation matrices.

Each uniform region carries forward/backward plane-wave amplitudes (A, B)
such that the field is A*exp(+i*k*n*(x - x_ref)) + B*exp(-i*k*n*(x - x_ref)),
with x_ref the region's left boundary (the first interface for the left
lead, the last interface for the right lead).  A 2x2 transfer matrix maps
the coefficient pair on the left of a slice to the pair on its right.

Conventions
-----------
* Angular frequencies are dimensionless multiples of omega0, so the vacuum
  wavenumber is k = 2*pi*omega in lambda0 units.
* Interface matrices enforce continuity of the field and of (1/mu_r) times
  its derivative; amplitudes are field amplitudes, flux weights enter only
  through |r|^2/|t|^2 accounting.
* Scattering amplitudes returned by :func:`stack_scattering` use reference
  planes at the stack's outer faces.  Sampled mode fields instead use a
  global phase origin at x = 0: the incident wave is exp(+i*k*x) for left
  incidence and exp(-i*k*x) for right incidence.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, NumericDegeneracyError, ResolutionError)
from .media import Layer, LayerStack, Medium, VACUUM

TWO_PI = 2.0 * math.pi

#: Minimum samples per local wavelength accepted by mode_field.
MIN_SAMPLES_PER_WAVELENGTH = 16

#: Default samples per (lambda0 / n_r) used by build_x_grid.
DEFAULT_SAMPLES_PER_WAVELENGTH = 32


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 complex map from (forward, backward) amplitudes on the left of a
    slice to those on its right."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex

    @classmethod
    def identity(cls) -> "TransferMatrix":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @classmethod
    def from_array(cls, m: np.ndarray) -> "TransferMatrix":
        return cls(complex(m[0, 0]), complex(m[0, 1]),
                   complex(m[1, 0]), complex(m[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]],
                        dtype=complex)

    @property
    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )


@dataclass(frozen=True)
class ScatteringAmplitudes:
    """Complex reflection/transmission amplitudes for both incidence sides,
    reference planes at the stack's outer faces."""

    omega: float
    r_left: complex
    t_left: complex
    r_right: complex
    t_right: complex

    @property
    def reflectance(self) -> float:
        return abs(self.r_left) ** 2

    @property
    def transmittance(self) -> float:
        return abs(self.t_left) ** 2


@dataclass(frozen=True)
class ModeField:
    """Sampled scattering state at one frequency."""

    omega: float
    grid: np.ndarray
    values: np.ndarray
    incidence: str


def interface_matrix(left: Layer | Medium, right: Layer | Medium,
                     omega: float = 0.0) -> TransferMatrix:
    """Matrix enforcing the matching conditions at a boundary between two
    media (continuity of the field and of (1/mu_r) d/dx).  The matching is
    frequency independent; omega is accepted for signature uniformity."""
    q = left.admittance / right.admittance
    a = 0.5 * (1.0 + q)
    b = 0.5 * (1.0 - q)
    return TransferMatrix(a, b, b, a)


def layer_matrix(layer: Layer, omega: float) -> TransferMatrix:
    """Diagonal phase accumulation across a uniform slab."""
    theta = TWO_PI * omega * layer.n_r * layer.thickness
    return TransferMatrix(cmath.exp(1j * theta), 0j, 0j,
                          cmath.exp(-1j * theta))


def total_matrix(stack: LayerStack, omega: float) -> TransferMatrix:
    """Transfer matrix of the whole stack, vacuum lead to vacuum lead,
    composed in geometric (left to right) order."""
    m = TransferMatrix.identity()
    prev: Layer | Medium = VACUUM
    for layer in stack.layers:
        m = interface_matrix(prev, layer, omega) @ m
        m = layer_matrix(layer, omega) @ m
        prev = layer
    if stack.layers:
        m = interface_matrix(prev, VACUUM, omega) @ m
    return m


def amplitudes_from_matrix(m: TransferMatrix, omega: float
                           ) -> ScatteringAmplitudes:
    """Extract r, t for both incidence directions from a total matrix."""
    if abs(m.m22) < 1e-300:
        raise NumericDegeneracyError(
            "transfer matrix element m22 vanished; lossless real-index "
            "stacks cannot produce this at real frequency")
    return ScatteringAmplitudes(
        omega=omega,
        r_left=-m.m21 / m.m22,
        t_left=m.det / m.m22,
        r_right=m.m12 / m.m22,
        t_right=1.0 / m.m22,
    )


def stack_scattering(stack: LayerStack, omega: float) -> ScatteringAmplitudes:
    """Scattering amplitudes of the stack at one frequency (omega > 0)."""
    if omega <= 0.0:
        raise DomainError("omega must be positive")
    return amplitudes_from_matrix(total_matrix(stack, omega), omega)


# ---------------------------------------------------------------------------
# Batched internals: arrays over a frequency axis.

def _batch_identity(n: int) -> np.ndarray:
    m = np.zeros((n, 2, 2), dtype=complex)
    m[:, 0, 0] = 1.0
    m[:, 1, 1] = 1.0
    return m


def _batch_total(stack: LayerStack, omegas: np.ndarray) -> np.ndarray:
    m = _batch_identity(len(omegas))
    prev: Layer | Medium = VACUUM
    for layer in stack.layers:
        iface = interface_matrix(prev, layer).as_array()
        m = iface @ m
        theta = TWO_PI * omegas * layer.n_r * layer.thickness
        d = np.zeros_like(m)
        d[:, 0, 0] = np.exp(1j * theta)
        d[:, 1, 1] = np.exp(-1j * theta)
        m = d @ m
        prev = layer
    if stack.layers:
        m = interface_matrix(prev, VACUUM).as_array() @ m
    return m


def _batch_amplitudes(m: np.ndarray) -> dict[str, np.ndarray]:
    m22 = m[:, 1, 1]
    if np.any(np.abs(m22) < 1e-300):
        raise NumericDegeneracyError("transfer matrix element m22 vanished")
    det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    return {
        "r_left": -m[:, 1, 0] / m22,
        "t_left": det / m22,
        "r_right": m[:, 0, 1] / m22,
        "t_right": 1.0 / m22,
    }


def _region_media(stack: LayerStack) -> list[Layer | Medium]:
    return [VACUUM, *stack.layers, VACUUM]


def _region_refs(stack: LayerStack) -> list[float]:
    ifaces = stack.interfaces
    return [ifaces[0], *ifaces[:-1], ifaces[-1]]


def _region_coefficients(stack: LayerStack, omegas: np.ndarray,
                         incidence: str) -> list[tuple[np.ndarray, np.ndarray]]:
    """(A, B) coefficient arrays for every region (left lead, each layer,
    right lead), global phase origin at x = 0."""
    if incidence not in ("left", "right"):
        raise DomainError(f"incidence must be 'left' or 'right', "
                          f"got {incidence!r}")
    amps = _batch_amplitudes(_batch_total(stack, omegas))
    k = TWO_PI * omegas
    if incidence == "left":
        a0 = np.exp(1j * k * stack.x_first)
        b0 = amps["r_left"] * a0
    else:
        b_inc = np.exp(-1j * k * stack.x_last)
        a0 = np.zeros_like(b_inc)
        b0 = amps["t_right"] * b_inc

    coeffs = [(a0, b0)]
    v = np.stack([a0, b0], axis=-1)[..., None]          # (n, 2, 1)
    prev: Layer | Medium = VACUUM
    for layer in stack.layers:
        v = interface_matrix(prev, layer).as_array() @ v
        coeffs.append((v[:, 0, 0].copy(), v[:, 1, 0].copy()))
        theta = TWO_PI * omegas * layer.n_r * layer.thickness
        d = np.zeros((len(omegas), 2, 2), dtype=complex)
        d[:, 0, 0] = np.exp(1j * theta)
        d[:, 1, 1] = np.exp(-1j * theta)
        v = d @ v
        prev = layer
    if stack.layers:
        v = interface_matrix(prev, VACUUM).as_array() @ v
        coeffs.append((v[:, 0, 0].copy(), v[:, 1, 0].copy()))
    return coeffs


def _region_index(stack: LayerStack, x: np.ndarray) -> np.ndarray:
    """Region id per sample: 0 = left lead, i = layer i, last = right lead."""
    if not stack.layers:
        return np.zeros(len(x), dtype=int)
    return np.searchsorted(np.asarray(stack.interfaces), x, side="right")


def _mode_matrix(stack: LayerStack, omegas: np.ndarray, x: np.ndarray,
                 incidence: str) -> np.ndarray:
    """Mode fields phi_omega(x) for all omegas, shape (n_omega, n_x)."""
    coeffs = _region_coefficients(stack, omegas, incidence)
    media = _region_media(stack)
    refs = _region_refs(stack)
    region = _region_index(stack, x)
    out = np.empty((len(omegas), len(x)), dtype=complex)
    for rid in np.unique(region):
        mask = region == rid
        n_r = media[rid].n_r
        a, b = coeffs[rid]
        phase = np.outer(TWO_PI * omegas * n_r, x[mask] - refs[rid])
        fwd = np.exp(1j * phase)
        out[:, mask] = a[:, None] * fwd + b[:, None] / fwd
    return out


def check_grid_resolution(stack: LayerStack, grid: np.ndarray,
                          omega: float) -> None:
    """Require at least MIN_SAMPLES_PER_WAVELENGTH samples per local
    wavelength for sample pairs lying inside one region, at frequency
    omega (units of omega0)."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ResolutionError("grid needs at least two samples")
    if np.any(np.diff(grid) <= 0.0):
        raise ResolutionError("grid positions must be strictly increasing")
    region = _region_index(stack, grid)
    media = _region_media(stack)
    spacing = np.diff(grid)
    interior = region[:-1] == region[1:]
    for rid in np.unique(region):
        mask = interior & (region[:-1] == rid)
        if not np.any(mask):
            continue
        h_max = spacing[mask].max()
        lam_local = 1.0 / (media[rid].n_r * omega)
        if h_max > lam_local / MIN_SAMPLES_PER_WAVELENGTH + 1e-12:
            raise ResolutionError(
                f"grid spacing {h_max:.4g} in region {rid} exceeds "
                f"{lam_local / MIN_SAMPLES_PER_WAVELENGTH:.4g} "
                f"(1/{MIN_SAMPLES_PER_WAVELENGTH} local wavelength at "
                f"omega={omega:g})")


def mode_field(stack: LayerStack, omega: float, grid: np.ndarray,
               incidence: str = "left") -> ModeField:
    """Unit-amplitude scattering state sampled on the given grid.

    Far-lead asymptotics in the global convention: exp(ikx) + r_g exp(-ikx)
    on the incidence side and t_g exp(ikx) on the far side (mirrored for
    right incidence), where r_g, t_g fold in the outer-face positions.
    """
    if omega <= 0.0:
        raise DomainError("omega must be positive")
    grid = np.asarray(grid, dtype=float)
    check_grid_resolution(stack, grid, omega)
    values = _mode_matrix(stack, np.array([omega]), grid, incidence)[0]
    return ModeField(omega=omega, grid=grid, values=values,
                     incidence=incidence)


def layer_amplitudes(stack: LayerStack, omega: float, incidence: str = "left"
                     ) -> list[tuple[complex, complex]]:
    """Per-region (A, B) coefficient pairs at one frequency, ordered left
    lead, layers, right lead; referenced at each region's left boundary."""
    coeffs = _region_coefficients(stack, np.array([float(omega)]), incidence)
    return [(complex(a[0]), complex(b[0])) for a, b in coeffs]


def build_x_grid(stack: LayerStack, x_min: float, x_max: float,
                 samples_per_wavelength: float = DEFAULT_SAMPLES_PER_WAVELENGTH
                 ) -> np.ndarray:
    """Region-wise uniform grid over [x_min, x_max] with
    samples_per_wavelength points per (lambda0 / n_r) in each medium."""
    if not x_min < x_max:
        raise DomainError("x_min must be below x_max")
    if samples_per_wavelength <= 0:
        raise DomainError("samples_per_wavelength must be positive")
    boundaries = [x_min]
    for pos in stack.interfaces if stack.layers else ():
        if x_min < pos < x_max:
            boundaries.append(pos)
    boundaries.append(x_max)
    media = _region_media(stack)
    pieces = []
    for lo, hi in zip(boundaries[:-1], boundaries[1:]):
        mid = 0.5 * (lo + hi)
        rid = int(_region_index(stack, np.array([mid]))[0])
        h = 1.0 / (samples_per_wavelength * media[rid].n_r)
        n = max(2, int(math.ceil((hi - lo) / h)) + 1)
        pieces.append(np.linspace(lo, hi, n))
    grid = np.concatenate(pieces)
    keep = np.ones(len(grid), dtype=bool)
    keep[1:] = np.diff(grid) > 1e-12
    return grid[keep]
