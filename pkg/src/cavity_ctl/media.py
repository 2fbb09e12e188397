"""Units, dielectric layer geometry, resonator builder, and named regions.

All internal quantities are in natural units: lengths in multiples of the
carrier wavelength (lambda0 = 1), times in multiples of the carrier period
(tau0 = 1), so the vacuum speed of light is c = 1 and the carrier angular
frequency is omega0 = 2*pi.  Angular frequencies passed between modules are
dimensionless multiples of omega0.  SI conversion happens only at the I/O
boundary through :class:`UnitSystem`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GeometryError

#: Vacuum speed of light in natural units (lambda0 per tau0).
C_NATURAL = 1.0

#: Carrier angular frequency in natural units (rad per tau0).
OMEGA0_NATURAL = 2.0 * math.pi

_SPEED_OF_LIGHT_SI = 299_792_458.0    # m/s
_HBAR_SI = 1.054_571_817e-34          # J s
_EV_SI = 1.602_176_634e-19            # J


@dataclass(frozen=True)
class UnitSystem:
    """SI anchors for the natural unit system.

    Defaults correspond to a 1500 nm carrier with a 5 fs period.
    """

    lambda0_SI: float = 1.5e-6
    tau0_SI: float = 5e-15

    def __post_init__(self):
        if self.lambda0_SI <= 0.0 or self.tau0_SI <= 0.0:
            raise GeometryError("unit scales must be positive")

    @property
    def omega0_SI(self) -> float:
        """Carrier angular frequency in rad/s."""
        return 2.0 * math.pi / self.tau0_SI

    @property
    def photon_energy_eV(self) -> float:
        return _HBAR_SI * self.omega0_SI / _EV_SI

    @property
    def c_SI(self) -> float:
        """Propagation speed implied by the unit pair, m/s."""
        return self.lambda0_SI / self.tau0_SI

    @property
    def c_relative_error(self) -> float:
        return abs(self.c_SI - _SPEED_OF_LIGHT_SI) / _SPEED_OF_LIGHT_SI

    def time_fs(self, t: float) -> float:
        """Convert a time in tau0 units to femtoseconds."""
        return t * self.tau0_SI * 1e15

    def length_nm(self, x: float) -> float:
        """Convert a length in lambda0 units to nanometres."""
        return x * self.lambda0_SI * 1e9


@dataclass(frozen=True)
class Medium:
    """Uniform lossless dielectric characterized by real eps_r and mu_r."""

    eps_r: float = 1.0
    mu_r: float = 1.0

    def __post_init__(self):
        if self.eps_r <= 0.0 or self.mu_r <= 0.0:
            raise GeometryError("eps_r and mu_r must be positive")

    @property
    def n_r(self) -> float:
        return math.sqrt(self.eps_r * self.mu_r)

    @property
    def admittance(self) -> float:
        """Wave admittance ratio n_r / mu_r = sqrt(eps_r / mu_r)."""
        return math.sqrt(self.eps_r / self.mu_r)


VACUUM = Medium()


@dataclass(frozen=True)
class Layer:
    """Slab of uniform dielectric.  Thickness in lambda0 units."""

    thickness: float
    eps_r: float
    mu_r: float = 1.0

    def __post_init__(self):
        if self.thickness <= 0.0:
            raise GeometryError("layer thickness must be positive")
        if self.eps_r <= 0.0 or self.mu_r <= 0.0:
            raise GeometryError("eps_r and mu_r must be positive")

    @property
    def n_r(self) -> float:
        return math.sqrt(self.eps_r * self.mu_r)

    @property
    def admittance(self) -> float:
        return math.sqrt(self.eps_r / self.mu_r)

    @property
    def medium(self) -> Medium:
        return Medium(self.eps_r, self.mu_r)


@dataclass(frozen=True)
class LayerStack:
    """Ordered piecewise-constant dielectric profile with vacuum leads.

    The stack occupies [origin, origin + total_thickness]; both leads are
    semi-infinite vacuum.  An empty layer tuple is a valid (trivial) stack.
    """

    origin: float = 0.0
    layers: tuple[Layer, ...] = ()

    def __post_init__(self):
        # Layer validation already guarantees strictly increasing interfaces.
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def interfaces(self) -> tuple[float, ...]:
        """Interface positions, length = len(layers) + 1 (or 1 if empty)."""
        pos = [self.origin]
        for layer in self.layers:
            pos.append(pos[-1] + layer.thickness)
        return tuple(pos)

    @property
    def total_thickness(self) -> float:
        return sum(layer.thickness for layer in self.layers)

    @property
    def x_first(self) -> float:
        return self.origin

    @property
    def x_last(self) -> float:
        return self.origin + self.total_thickness

    @property
    def max_index(self) -> float:
        return max((layer.n_r for layer in self.layers), default=1.0)


@dataclass(frozen=True)
class RegionSpec:
    """Named spatial interval [x_lo, x_hi] in lambda0 units."""

    name: str
    x_lo: float
    x_hi: float

    def __post_init__(self):
        if not self.x_lo < self.x_hi:
            raise GeometryError(
                f"region {self.name!r}: x_lo must be below x_hi")

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo


@dataclass(frozen=True)
class FabryPerotSpec:
    """Symmetric two-mirror resonator: quarter-wave mirrors of index n_r
    enclosing a vacuum cavity of length L_B, with lead regions A and C.
    """

    n_r: float
    L_B: float
    L_A: float
    L_C: float

    def __post_init__(self):
        if self.n_r < 1.0:
            raise GeometryError("mirror index n_r must be >= 1")
        for name in ("L_B", "L_A", "L_C"):
            if getattr(self, name) <= 0.0:
                raise GeometryError(f"{name} must be positive")

    @property
    def mirror_thickness(self) -> float:
        """Quarter-wave mirror thickness lambda0 / (4 n_r)."""
        return 1.0 / (4.0 * self.n_r)


def build_fabry_perot(spec: FabryPerotSpec) -> LayerStack:
    """Build the stack [mirror, vacuum cavity, mirror] with origin at the
    left mirror's outer face, so region A occupies [-L_A, 0].

    Nonmagnetic mirrors: eps_r = n_r**2, mu_r = 1.
    """
    mirror = Layer(spec.mirror_thickness, spec.n_r ** 2, 1.0)
    cavity = Layer(spec.L_B, 1.0, 1.0)
    return LayerStack(origin=0.0, layers=(mirror, cavity, mirror))


def default_regions(stack: LayerStack, spec: FabryPerotSpec
                    ) -> tuple[RegionSpec, ...]:
    """Regions A, B, B', C for a stack built by :func:`build_fabry_perot`.

    A and C abut the mirror outer faces; B is the open cavity between the
    inner faces; B' is the left half of B adjacent to the left mirror.  The
    mirrors themselves belong to no region.
    """
    left_outer = stack.x_first
    left_inner = left_outer + spec.mirror_thickness
    right_inner = left_inner + spec.L_B
    right_outer = right_inner + spec.mirror_thickness
    return (
        RegionSpec("A", left_outer - spec.L_A, left_outer),
        RegionSpec("B", left_inner, right_inner),
        RegionSpec("B'", left_inner, left_inner + spec.L_B / 2.0),
        RegionSpec("C", right_outer, right_outer + spec.L_C),
    )
