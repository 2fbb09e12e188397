"""Closed-form resonance theory and the resonant ray-trace oracle.

The ray model mirrors the stepwise picture of cavity ring-down: at the
carrier frequency a quarter-wave mirror reflects with amplitude -r and
transmits with amplitude i*t, so a pulse crossing both mirrors picks up
(i*t)**2 = -t**2 and each intracavity round trip contributes r**2.  The
model assumes a cavity whose optical length is an integer number of
carrier wavelengths (transit phase factor +1) and treats delays on a grid
of half round trips.  Only relative phases are observable; the absolute
sign convention is fixed by the -r / i*t bookkeeping above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DomainError, ModelDomainError, UndefinedQualityFactorError
from .media import OMEGA0_NATURAL, FabryPerotSpec

if TYPE_CHECKING:   # pragma: no cover
    from .control import ControlSchedule


@dataclass(frozen=True)
class ResonanceConstants:
    """Ring-down constants of a symmetric two-mirror resonator.

    tau_rt: cavity round-trip time 2*L_B/c.
    tau_q:  ring-down time of the stored energy, from the decay factor
            r**4 per round trip (two mirror reflections).
    quality: omega0 * tau_q.
    gamma:  linewidth 1/tau_q.
    """

    tau_rt: float
    tau_q: float
    quality: float
    gamma: float


@dataclass(frozen=True)
class RayEvent:
    """One emitted pulse of the resonant ray-trace model."""

    time: float
    side: str          # "left" | "right"
    amplitude: complex

    @property
    def energy(self) -> float:
        return abs(self.amplitude) ** 2


def mirror_transmission(n_r: float, L_m: float, lam: float) -> float:
    """Flux transmission |t|^2 of a single dielectric slab of index n_r and
    thickness L_m at vacuum wavelength lam (lambda0 units)."""
    if n_r < 1.0:
        raise DomainError("n_r must be >= 1")
    if L_m <= 0.0 or lam <= 0.0:
        raise DomainError("L_m and lam must be positive")
    k1 = 2.0 * math.pi / lam
    k2 = 2.0 * math.pi * n_r / lam
    contrast = (k1 ** 2 - k2 ** 2) / (2.0 * k1 * k2)
    return 1.0 / (1.0 + contrast ** 2 * math.sin(k2 * L_m) ** 2)


def resonance_constants(spec: FabryPerotSpec) -> ResonanceConstants:
    """Round-trip time, ring-down time, and quality factor of the resonator.

    The stored energy drops by r**4 per round trip, so
    exp(-tau_rt / tau_q) = r**4 with r the single-mirror reflection
    magnitude at the carrier.
    """
    tau_rt = 2.0 * spec.L_B
    transmission = mirror_transmission(spec.n_r, spec.mirror_thickness, 1.0)
    r = math.sqrt(max(0.0, 1.0 - transmission))
    if r == 0.0:
        raise UndefinedQualityFactorError(
            "mirrors do not reflect at the carrier; quality factor undefined")
    tau_q = -tau_rt / (4.0 * math.log(r))
    return ResonanceConstants(tau_rt=tau_rt, tau_q=tau_q,
                              quality=OMEGA0_NATURAL * tau_q,
                              gamma=1.0 / tau_q)


def lorentzian_spectrum(omega, omega0, gamma, s0):
    """Steady-state energy density spectrum S0 / ((w - w0)^2 + (G/2)^2)."""
    if gamma <= 0.0:
        raise DomainError("gamma must be positive")
    omega = np.asarray(omega, dtype=float)
    out = s0 / ((omega - omega0) ** 2 + (gamma / 2.0) ** 2)
    return float(out) if out.ndim == 0 else out


def geometric_sum(a: complex, x: complex, n: int) -> float:
    """|a * (1 - x**n) / (1 - x)|**2, the detector readout of an n-term
    geometric pulse train; the x = 1 limit evaluates to |a*n|**2."""
    if n < 1:
        raise DomainError("n must be >= 1")
    a = complex(a)
    x = complex(x)
    if x == 1.0:
        return abs(a * n) ** 2
    return abs(a * (1.0 - x ** n) / (1.0 - x)) ** 2


def weighted_sum(a_seq: Sequence[complex], x: complex) -> float:
    """|sum_n a_n x**n|**2 for an arbitrary finite coefficient sequence."""
    if len(a_seq) == 0:
        raise DomainError("coefficient sequence must be non-empty")
    acc = 0j
    for a_n in reversed(list(a_seq)):
        acc = acc * complex(x) + complex(a_n)
    return abs(acc) ** 2


# ---------------------------------------------------------------------------
# Resonant ray trace

def _series_slots(scale: complex, shift: int, direction: str, r: float,
                  t: float, k_max: int):
    """Events of a single incident pulse: prompt reflection on its own side,
    through pulses on the far side, re-emissions back on its own side."""
    near = direction
    far = "right" if direction == "left" else "left"
    through = -(t ** 2)
    yield shift, near, scale * (-r)
    for k in range(k_max):
        decay = r ** (2 * k)
        yield shift + 1 + 2 * k, far, scale * through * decay
        yield shift + 2 + 2 * k, near, scale * (r * t ** 2) * decay


def _relative_slot(delay: float, tau_rt: float, direction: str) -> int:
    """Half-round-trip slot at which an injection first meets a mirror.

    Right-incident members launch one cavity length beyond the far mirror,
    so they arrive half a round trip after their nominal delay.
    """
    m = delay / tau_rt
    if abs(m - round(m)) > 1e-9:
        raise ModelDomainError(
            f"injection delay {delay:g} is not a multiple of the round-trip "
            f"time {tau_rt:g}")
    base = 2 * int(round(m))
    return base + 1 if direction == "right" else base


def raytrace(r: float, t: float, schedule: "ControlSchedule",
             n_events: int) -> list[RayEvent]:
    """On-resonance pulse-train model for a unit lead pulse plus the control
    injections of `schedule`.  Time zero is the lead's arrival at the left
    mirror; events are returned chronologically, coincident contributions
    summed, negligible (cancelled) ones dropped."""
    if not 0.0 <= r < 1.0:
        raise DomainError("need 0 <= r < 1")
    if abs(r ** 2 + t ** 2 - 1.0) > 1e-9:
        raise DomainError("flux mismatch: require r^2 + t^2 = 1")
    if n_events < 1:
        raise DomainError("n_events must be >= 1")
    tau_rt = schedule.tau_rt
    sources: list[tuple[complex, int, str]] = [(1.0 + 0j, 0, "left")]
    for inj in schedule.injections:
        rel_scale = complex(inj.scale) / complex(schedule.lead_scale)
        rel_delay = inj.delay - schedule.lead_delay
        slot = _relative_slot(rel_delay, tau_rt, inj.direction)
        sources.append((rel_scale, slot, inj.direction))

    # Superpose only slots every source's series has reached, so exact
    # cancellations stay exact and no lone series tails leak through.
    max_shift = max(slot for _, slot, _ in sources)
    horizon = 2 * (n_events + 2) + max_shift
    slot_amp: dict[tuple[int, str], complex] = {}
    for scale, shift, direction in sources:
        k_max = (horizon - shift) // 2 + 2
        for slot, side, amp in _series_slots(scale, shift, direction,
                                             r, t, k_max):
            if slot <= horizon:
                slot_amp[(slot, side)] = slot_amp.get((slot, side), 0j) + amp

    peak = max(abs(a) for a in slot_amp.values())
    events = [RayEvent(time=slot * tau_rt / 2.0, side=side, amplitude=amp)
              for (slot, side), amp in slot_amp.items()
              if abs(amp) > 1e-12 * peak]
    events.sort(key=lambda ev: (ev.time, ev.side))
    return events[:n_events]


def coherent_train_energy(events: Sequence[RayEvent], side: str,
                          count: int | None = None) -> float:
    """Readout of an integrating detector that accumulates the field of the
    first `count` pulses emitted on one side: |sum of amplitudes|**2."""
    amps = [ev.amplitude for ev in events if ev.side == side]
    if count is not None:
        amps = amps[:count]
    return abs(sum(amps)) ** 2


def cavity_transit_amplitudes(r: float, t: float,
                              schedule: "ControlSchedule",
                              n_transits: int) -> list[float]:
    """Intracavity amplitude magnitude after each mirror event, from the
    same ray bookkeeping as :func:`raytrace`.  Entry k is the amplitude of
    the pulse leaving the k-th mirror encounter (k = 0 is the lead entering
    the cavity)."""
    if n_transits < 1:
        raise DomainError("n_transits must be >= 1")
    tau_rt = schedule.tau_rt
    arrivals: dict[int, complex] = {0: 1.0 + 0j}
    for inj in schedule.injections:
        slot = _relative_slot(inj.delay - schedule.lead_delay, tau_rt,
                              inj.direction)
        rel = complex(inj.scale) / complex(schedule.lead_scale)
        arrivals[slot] = arrivals.get(slot, 0j) + rel

    out: list[float] = []
    w = 0j                      # amplitude heading away from the last face
    for slot in range(n_transits):
        u = w                   # arrives at this slot's face (transit sign +1)
        w = (-r) * u + 1j * t * arrivals.get(slot, 0j)
        out.append(abs(w))
    return out
