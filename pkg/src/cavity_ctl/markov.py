"""Subregion distinguishability measures for pairs of field trajectories.

Two trajectories restricted to a spatial region are compared through the
overlap integrals p_ij(t) = integral over the region of
conj(Psi_i(x,t)) * Psi_j(x,t) dx.  The distance

    D(t) = sqrt(p11^2 + p22^2 - 2*|p12|^2) / sqrt(2)

is bounded by 1 for unit-normalized trajectories and decreases
monotonically when the region's dynamics can be described without
information flowing back in.  The accumulated positive variation of D is
the non-Markovian content ID(t); it is computed as a positive-increment
sum rather than through a pointwise derivative, which is exact for
piecewise-linear D and robust at kinks where pulses cross region edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridMismatchError, NumericInconsistencyError
from .media import RegionSpec
from .pulse import SpaceTimeField

_RADICAND_FLOOR = -1e-12


@dataclass(frozen=True)
class OverlapMatrix:
    """Region overlaps of two trajectories at one time."""

    t: float
    p11: float
    p22: float
    p12: complex


@dataclass(frozen=True)
class DistanceSeries:
    """Distance D(t) for a named region, sampled on a time grid."""

    t_grid: np.ndarray
    D: np.ndarray
    region: RegionSpec
    tau_m: float | None = None


@dataclass(frozen=True)
class NonMarkovSeries:
    """Accumulated positive variation of D(t)."""

    t_grid: np.ndarray
    ID: np.ndarray

    @property
    def total(self) -> float:
        return float(self.ID[-1])


def _region_mask(x: np.ndarray, region: RegionSpec) -> np.ndarray:
    tol = 1e-9
    if region.x_lo < x[0] - tol or region.x_hi > x[-1] + tol:
        raise DomainError(
            f"region {region.name!r} is outside the spatial window")
    mask = (x >= region.x_lo - tol) & (x <= region.x_hi + tol)
    if mask.sum() < 2:
        raise DomainError(
            f"region {region.name!r} contains fewer than two grid samples")
    return mask


def _check_same_grids(field1: SpaceTimeField, field2: SpaceTimeField) -> None:
    if (field1.x_grid.shape != field2.x_grid.shape
            or field1.t_grid.shape != field2.t_grid.shape
            or np.max(np.abs(field1.x_grid - field2.x_grid)) > 1e-12
            or np.max(np.abs(field1.t_grid - field2.t_grid)) > 1e-12):
        raise GridMismatchError("trajectories must share space/time grids")


def overlap_matrix(field1: SpaceTimeField, field2: SpaceTimeField,
                   region: RegionSpec, t: float) -> OverlapMatrix:
    """Trapezoid quadrature of the three region overlaps at one time."""
    _check_same_grids(field1, field2)
    idx = field1.time_index(t)
    mask = _region_mask(field1.x_grid, region)
    x = field1.x_grid[mask]
    a = field1.values[idx, mask]
    b = field2.values[idx, mask]
    p11 = float(np.trapezoid(np.abs(a) ** 2, x))
    p22 = float(np.trapezoid(np.abs(b) ** 2, x))
    p12 = complex(np.trapezoid(np.conj(a) * b, x))
    return OverlapMatrix(t=float(field1.t_grid[idx]), p11=p11, p22=p22,
                         p12=p12)


def hs_distance(p: OverlapMatrix) -> float:
    """Distance from one overlap matrix; tiny negative radicands from
    rounding are clamped, anything worse signals an inconsistency."""
    radicand = p.p11 ** 2 + p.p22 ** 2 - 2.0 * abs(p.p12) ** 2
    scale = max(1.0, p.p11 ** 2, p.p22 ** 2)
    if radicand < _RADICAND_FLOOR * scale:
        raise NumericInconsistencyError(
            f"negative radicand {radicand:g} in the distance at t={p.t:g}")
    return math.sqrt(max(0.0, radicand) / 2.0)


def distance_series(field1: SpaceTimeField, field2: SpaceTimeField,
                    region: RegionSpec, t_grid: np.ndarray | None = None,
                    tau_m: float | None = None) -> DistanceSeries:
    """D(t) over the trajectories' time grid (or a subset of it)."""
    _check_same_grids(field1, field2)
    mask = _region_mask(field1.x_grid, region)
    x = field1.x_grid[mask]
    if t_grid is None:
        t_grid = field1.t_grid
        idx = np.arange(len(t_grid))
    else:
        t_grid = np.asarray(t_grid, dtype=float)
        idx = np.array([field1.time_index(t) for t in t_grid])
    a = field1.values[np.ix_(idx, np.flatnonzero(mask))]
    b = field2.values[np.ix_(idx, np.flatnonzero(mask))]
    p11 = np.trapezoid(np.abs(a) ** 2, x, axis=1)
    p22 = np.trapezoid(np.abs(b) ** 2, x, axis=1)
    p12 = np.trapezoid(np.conj(a) * b, x, axis=1)
    radicand = p11 ** 2 + p22 ** 2 - 2.0 * np.abs(p12) ** 2
    scale = np.maximum(1.0, np.maximum(p11, p22) ** 2)
    if np.any(radicand < _RADICAND_FLOOR * scale):
        raise NumericInconsistencyError("negative radicand in the distance")
    d = np.sqrt(np.maximum(radicand, 0.0) / 2.0)
    return DistanceSeries(t_grid=np.array(t_grid), D=d, region=region,
                          tau_m=tau_m)


def nonmarkov_content(series: DistanceSeries) -> NonMarkovSeries:
    """Accumulated positive increments of D along the time grid."""
    if len(series.t_grid) < 2:
        raise DomainError("need at least two time samples")
    rises = np.maximum(np.diff(series.D), 0.0)
    content = np.concatenate([[0.0], np.cumsum(rises)])
    return NonMarkovSeries(t_grid=np.array(series.t_grid), ID=content)
