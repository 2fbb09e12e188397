"""Coherent-control schedules: ring-down truncation and energy confinement.

Control pulses copy the lead envelope exactly and differ only by a complex
scale, a delay, and (for confinement) the incidence side.  On resonance a
single left-incident copy with amplitude -r**(2N) relative to the lead,
delayed by N round trips, cancels every transmitted pulse after the N-th:
its own ring-down series lines up with the tail of the lead's series with
opposite sign.

Confinement instead cancels the leakage leaving each mirror at each
half round trip.  Pair k consists of a reverse (right-incident) member
that cancels the pulse exiting the right mirror and a forward member that
cancels the pulse exiting the left mirror; the intracavity amplitude then
grows by 1/r per cavity transit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analytic import ResonanceConstants
from .errors import DomainError, ModelDomainError
from .media import LayerStack
from .pulse import LEFT, RIGHT, PulseInjection


@dataclass(frozen=True)
class ControlSchedule:
    """Ordered control injections (excluding the lead) plus the lead's
    reference scale/delay and the round-trip time they are phased against.

    Delays relative to the lead must be non-negative integer multiples of
    tau_rt (zero occurs only for reverse-propagating confinement members,
    which launch from the far side together with the lead).
    """

    injections: tuple[PulseInjection, ...]
    intent: str
    tau_rt: float
    lead_delay: float = 0.0
    lead_scale: complex = 1.0 + 0j

    def __post_init__(self):
        object.__setattr__(self, "injections", tuple(self.injections))
        if self.tau_rt <= 0.0:
            raise DomainError("tau_rt must be positive")
        for i, inj in enumerate(self.injections):
            rel = inj.delay - self.lead_delay
            m = rel / self.tau_rt
            if abs(m - round(m)) > 1e-9 or round(m) < 0:
                raise ModelDomainError(
                    f"injection {i}: delay {inj.delay:g} is not a "
                    f"non-negative integer multiple of tau_rt "
                    f"{self.tau_rt:g} past the lead delay")

    @classmethod
    def none(cls, tau_rt: float, lead_delay: float = 0.0,
             lead_scale: complex = 1.0 + 0j) -> "ControlSchedule":
        """Empty schedule (uncontrolled run) carrying timing references."""
        return cls(injections=(), intent="none", tau_rt=tau_rt,
                   lead_delay=lead_delay, lead_scale=lead_scale)


def design_truncation(res: ResonanceConstants, r: float, n_round_trips: int,
                      lead: PulseInjection) -> ControlSchedule:
    """Cancel the transmitted train after `n_round_trips` pulses: one
    control copy of the lead with scale -r**(2N) and delay N*tau_rt."""
    if n_round_trips < 1:
        raise DomainError("n_round_trips must be >= 1")
    if not 0.0 <= r < 1.0:
        raise DomainError("need 0 <= r < 1")
    inj = PulseInjection(
        envelope=lead.envelope,
        scale=-(r ** (2 * n_round_trips)) * complex(lead.scale),
        delay=lead.delay + n_round_trips * res.tau_rt,
        direction=lead.direction,
        center0=lead.center0,
    )
    return ControlSchedule(injections=(inj,),
                           intent=f"truncate({n_round_trips})",
                           tau_rt=res.tau_rt, lead_delay=lead.delay,
                           lead_scale=complex(lead.scale))


def _transit_sign(cavity_length: float) -> float:
    """Carrier phase factor per cavity transit, +/-1 for resonant lengths."""
    doubled = 2.0 * cavity_length
    if abs(doubled - round(doubled)) > 1e-9:
        raise DomainError(
            f"cavity length {cavity_length:g} is not resonant at the "
            f"carrier (need a multiple of lambda0/2)")
    return -1.0 if round(doubled) % 2 else 1.0


def design_confinement(res: ResonanceConstants, r: float, t: float,
                       n_pairs: int, lead: PulseInjection,
                       stack: LayerStack) -> ControlSchedule:
    """Confine energy in the cavity for `n_pairs` round trips by cancelling
    the leakage exiting each mirror.

    Pair k holds a right-incident member of amplitude -p * t**2 / r**(2k+1)
    arriving at the right mirror at (k + 1/2) round trips after the lead
    (launched one cavity length beyond the right mirror, delay k*tau_rt)
    and a left-incident member of amplitude +t**2 / r**(2k+2) delayed by
    (k+1) round trips; p is the carrier sign per transit.  The intracavity
    amplitude then grows by 1/r per transit.
    """
    if n_pairs < 1:
        raise DomainError("n_pairs must be >= 1")
    if not 0.0 < r < 1.0 or t <= 0.0:
        raise DomainError("need 0 < r < 1 and t > 0")
    if abs(r ** 2 + t ** 2 - 1.0) > 1e-9:
        raise DomainError("flux mismatch: require r^2 + t^2 = 1")
    if lead.direction != LEFT:
        raise DomainError("confinement design assumes a left-incident lead")
    if len(stack.layers) != 3 or stack.layers[0] != stack.layers[2]:
        raise DomainError(
            "confinement design requires the symmetric two-mirror stack")
    cavity_length = stack.layers[1].thickness
    p = _transit_sign(cavity_length)
    lead_scale = complex(lead.scale)
    # Launch position giving the same mirror-face arrival amplitude
    # convention as the lead: one cavity length beyond the right mirror,
    # at the lead's standoff distance.
    standoff = stack.x_first - lead.center0
    if standoff <= 0.0:
        raise DomainError("lead must launch left of the stack")
    reverse_center0 = stack.x_last + standoff + cavity_length

    members: list[PulseInjection] = []
    for k in range(n_pairs):
        members.append(PulseInjection(
            envelope=lead.envelope,
            scale=-p * (t ** 2 / r ** (2 * k + 1)) * lead_scale,
            delay=lead.delay + k * res.tau_rt,
            direction=RIGHT,
            center0=reverse_center0,
        ))
        members.append(PulseInjection(
            envelope=lead.envelope,
            scale=(t ** 2 / r ** (2 * k + 2)) * lead_scale,
            delay=lead.delay + (k + 1) * res.tau_rt,
            direction=LEFT,
            center0=lead.center0,
        ))
    return ControlSchedule(injections=tuple(members),
                           intent=f"confine({n_pairs})",
                           tau_rt=res.tau_rt, lead_delay=lead.delay,
                           lead_scale=lead_scale)
