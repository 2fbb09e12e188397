"""Declarative scenario configs (TOML) and their validation guards.

A scenario pins everything a run needs: geometry, pulse parameters,
control schedule, space/time/frequency grids, and the requested outputs.
Identical configs hash identically; the hash is stamped into every output
header so results can be traced back to their inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import control as control_mod
from .analytic import ResonanceConstants, mirror_transmission, \
    resonance_constants
from .control import ControlSchedule
from .errors import ConfigError, DomainError
from .media import (FabryPerotSpec, Layer, LayerStack, RegionSpec,
                    UnitSystem, build_fabry_perot, default_regions)
from .pulse import (LEFT, RIGHT, FrequencyGrid, PulseInjection,
                    SpectralEnvelope, apply_injection, make_frequency_grid,
                    smoothed_rect_spectrum, _check_launch)
from .scatter import check_grid_resolution

_DIRECTIONS = {"left": LEFT, "left-incident": LEFT,
               "right": RIGHT, "right-incident": RIGHT}


@dataclass(frozen=True)
class Scenario:
    """Fully parsed and validated run description."""

    path: Path
    raw: dict
    content_hash: str
    units: UnitSystem
    stack: LayerStack
    fp_spec: FabryPerotSpec | None
    regions: dict[str, RegionSpec]
    frequency_grid: FrequencyGrid
    envelope: SpectralEnvelope
    lead: PulseInjection
    schedule: ControlSchedule | None
    x_min: float
    x_max: float
    samples_per_wavelength: float
    t_max: float
    dt: float
    outputs: dict
    measure: dict

    @property
    def t_grid(self) -> np.ndarray:
        return np.arange(0.0, self.t_max, self.dt)

    def x_grid(self) -> np.ndarray:
        from .scatter import build_x_grid
        return build_x_grid(self.stack, self.x_min, self.x_max,
                            self.samples_per_wavelength)

    def injections(self, trajectory_delay: float = 0.0
                   ) -> tuple[PulseInjection, ...]:
        """Lead plus scheduled controls, all shifted earlier/later by the
        trajectory delay (used for the delayed measure trajectory)."""
        items = [self.lead]
        if self.schedule is not None:
            items.extend(self.schedule.injections)
        if trajectory_delay == 0.0:
            return tuple(items)
        return tuple(PulseInjection(envelope=i.envelope, scale=i.scale,
                                    delay=i.delay + trajectory_delay,
                                    direction=i.direction, center0=i.center0)
                     for i in items)

    @property
    def resonance(self) -> ResonanceConstants | None:
        if self.fp_spec is None:
            return None
        return resonance_constants(self.fp_spec)


def _hash_config(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"),
                       default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


_REQUIRED = object()


def _get(table: dict, key: str, section: str, default=_REQUIRED):
    if key in table:
        return table[key]
    if default is _REQUIRED:
        raise ConfigError(f"config missing key '{key}' in [{section}]")
    return default


def _parse_media(raw: dict):
    media = raw.get("media")
    if not isinstance(media, dict):
        raise ConfigError("config missing [media] table")
    lambda0_nm = float(media.get("lambda0_nm", 1500.0))
    tau0_fs = float(media.get("tau0_fs", 5.0))
    units = UnitSystem(lambda0_SI=lambda0_nm * 1e-9, tau0_SI=tau0_fs * 1e-15)

    fp_spec = None
    regions: dict[str, RegionSpec] = {}
    if "layers" in media:
        layers = tuple(
            Layer(float(_get(item, "thickness_lambda0", "media.layers")),
                  float(item.get("eps_r", 1.0)),
                  float(item.get("mu_r", 1.0)))
            for item in media["layers"])
        stack = LayerStack(origin=float(media.get("origin_lambda0", 0.0)),
                           layers=layers)
    else:
        n_r = _get(media, "n_r", "media")
        L_B = _get(media, "L_B_lambda0", "media")
        L_A = _get(media, "L_A_lambda0", "media")
        L_C = _get(media, "L_C_lambda0", "media")
        fp_spec = FabryPerotSpec(n_r=float(n_r), L_B=float(L_B),
                                 L_A=float(L_A), L_C=float(L_C))
        stack = build_fabry_perot(fp_spec)
        regions = {r.name: r for r in default_regions(stack, fp_spec)}
    for item in media.get("regions", ()):
        r = RegionSpec(str(_get(item, "name", "media.regions")),
                       float(_get(item, "x_lo_lambda0", "media.regions")),
                       float(_get(item, "x_hi_lambda0", "media.regions")))
        regions[r.name] = r
    return units, stack, fp_spec, regions


def _parse_direction(value, section: str) -> str:
    key = str(value).lower()
    if key not in _DIRECTIONS:
        raise ConfigError(f"unknown direction {value!r} in [{section}]")
    return _DIRECTIONS[key]


def _parse_pulse(raw: dict, t_max: float):
    table = raw.get("pulse")
    if not isinstance(table, dict):
        raise ConfigError("config missing [pulse] table")
    if "T0_omega0" in table:
        T0 = float(table["T0_omega0"]) / (2.0 * math.pi)
    elif "T0_tau0" in table:
        T0 = float(table["T0_tau0"])
    else:
        raise ConfigError("config missing key 'T0_omega0' (or 'T0_tau0') "
                          "in [pulse]")
    d_omega_r = float(table.get("d_omega_r_omega0", 0.25))
    n_omega = int(table.get("n_omega", 4096))
    center0 = float(_get(table, "center0_lambda0", "pulse"))
    direction = _parse_direction(table.get("direction", "left-incident"),
                                 "pulse")
    scale = complex(float(table.get("scale_re", 1.0)),
                    float(table.get("scale_im", 0.0)))
    delay = float(table.get("delay_tau0", 0.0))
    grid = make_frequency_grid(1.0, d_omega_r, n_omega, t_max)
    envelope = smoothed_rect_spectrum(grid, 1.0, T0, d_omega_r)
    lead = apply_injection(envelope, scale, delay, direction, center0)
    return grid, envelope, lead


def _mirror_r_t(fp_spec: FabryPerotSpec) -> tuple[float, float]:
    transmission = mirror_transmission(fp_spec.n_r,
                                       fp_spec.mirror_thickness, 1.0)
    return math.sqrt(max(0.0, 1.0 - transmission)), math.sqrt(transmission)


def _parse_control(raw: dict, fp_spec: FabryPerotSpec | None,
                   stack: LayerStack, lead: PulseInjection
                   ) -> ControlSchedule | None:
    table = raw.get("control")
    if not isinstance(table, dict):
        return None
    intent = str(table.get("intent", "none")).lower()
    if intent == "none" and "injections" not in table:
        return None
    if fp_spec is None:
        raise ConfigError("[control] requires the two-mirror resonator "
                          "keys in [media]")
    res = resonance_constants(fp_spec)
    if table.get("auto_amplitude", True) and "injections" not in table:
        r, t = _mirror_r_t(fp_spec)
        if intent == "truncate":
            n = int(_get(table, "N", "control"))
            return control_mod.design_truncation(res, r, n, lead)
        if intent == "confine":
            k = int(_get(table, "K", "control"))
            return control_mod.design_confinement(res, r, t, k, lead, stack)
        raise ConfigError(f"unknown control intent {intent!r}")
    members = []
    for item in table.get("injections", ()):
        direction = _parse_direction(_get(item, "direction",
                                          "control.injections"),
                                     "control.injections")
        if "center0_lambda0" in item:
            center0 = float(item["center0_lambda0"])
        elif direction == LEFT:
            center0 = lead.center0
        else:
            standoff = stack.x_first - lead.center0
            cavity = stack.layers[1].thickness if len(stack.layers) == 3 \
                else 0.0
            center0 = stack.x_last + standoff + cavity
        members.append(PulseInjection(
            envelope=lead.envelope,
            scale=complex(float(_get(item, "scale_re", "control.injections")),
                          float(item.get("scale_im", 0.0))),
            delay=float(_get(item, "delay_tau0", "control.injections")),
            direction=direction,
            center0=center0))
    return ControlSchedule(injections=tuple(members),
                           intent=f"manual({intent})", tau_rt=res.tau_rt,
                           lead_delay=lead.delay,
                           lead_scale=complex(lead.scale))


def parse_scenario(path: str | Path) -> Scenario:
    """Parse and structurally validate a scenario config."""
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = tomllib.loads(text.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        line, column = _toml_error_position(str(exc))
        raise ConfigError(f"config parse error in {path}: {exc}",
                          line=line, column=column) from exc

    grid_table = raw.get("grid")
    if not isinstance(grid_table, dict):
        raise ConfigError("config missing [grid] table")
    t_max = float(_get(grid_table, "t_max_tau0", "grid"))
    dt = float(grid_table.get("dt_tau0", 0.25))
    if dt <= 0.0 or t_max <= dt:
        raise ConfigError("[grid] needs 0 < dt_tau0 < t_max_tau0")
    x_min = float(_get(grid_table, "x_min_lambda0", "grid"))
    x_max = float(_get(grid_table, "x_max_lambda0", "grid"))
    samples = float(grid_table.get("samples_per_wavelength", 32))

    units, stack, fp_spec, regions = _parse_media(raw)
    grid, envelope, lead = _parse_pulse(raw, t_max)
    schedule = _parse_control(raw, fp_spec, stack, lead)

    outputs = dict(raw.get("outputs", {}))
    outputs.setdefault("spacetime", False)
    outputs.setdefault("timeseries", False)
    outputs.setdefault("measures", False)
    outputs.setdefault("spectra", False)
    outputs.setdefault("raytrace", False)
    if outputs["timeseries"] and "x_R_lambda0" not in outputs:
        raise ConfigError("config missing key 'x_R_lambda0' in [outputs]")
    if outputs["raytrace"] and fp_spec is None:
        raise ConfigError("[outputs].raytrace requires the two-mirror "
                          "resonator keys in [media]")

    measure = dict(raw.get("measure", {}))
    if outputs["measures"] or measure:
        if "tau_M_tau0" not in measure:
            raise ConfigError("config missing key 'tau_M_tau0' in [measure]")
        if not measure.get("regions"):
            raise ConfigError("config missing key 'regions' in [measure]")
        norm_mode = measure.setdefault("normalize", "trajectory")
        if norm_mode not in ("trajectory", "lead"):
            raise ConfigError("[measure].normalize must be 'trajectory' "
                              "or 'lead'")
        for name in measure["regions"]:
            if name not in regions:
                raise ConfigError(f"[measure] references unknown region "
                                  f"{name!r}")

    return Scenario(path=path, raw=raw, content_hash=_hash_config(raw),
                    units=units, stack=stack, fp_spec=fp_spec,
                    regions=regions, frequency_grid=grid, envelope=envelope,
                    lead=lead, schedule=schedule, x_min=x_min, x_max=x_max,
                    samples_per_wavelength=samples, t_max=t_max, dt=dt,
                    outputs=outputs, measure=measure)


def _toml_error_position(message: str) -> tuple[int | None, int | None]:
    # tomllib reports "... (at line L, column C)"
    import re
    m = re.search(r"line (\d+), column (\d+)", message)
    if m:
        return int(m.group(1)), int(m.group(2))
    return None, None


def validate_scenario(scenario: Scenario) -> None:
    """Run every guard a solve would hit, without solving.

    Raises the same error types `run` raises: resolution guards for the
    frequency and space grids, launch-position guards, and region checks.
    """
    x = scenario.x_grid()
    check_grid_resolution(scenario.stack, x,
                          float(scenario.frequency_grid.omega[-1]))
    # the delayed measure trajectory shifts supports; guard the widest case
    delays = [0.0]
    if scenario.outputs["measures"]:
        delays.append(-float(scenario.measure["tau_M_tau0"]))
    for d in delays:
        _check_launch(scenario.stack, scenario.injections(d),
                      float(x[0]), float(x[-1]))
    for name in scenario.measure.get("regions", ()):
        region = scenario.regions[name]
        if region.x_lo < scenario.x_min or region.x_hi > scenario.x_max:
            raise DomainError(
                f"measure region {name!r} is outside the spatial window")
    if scenario.outputs["timeseries"]:
        x_r = float(scenario.outputs["x_R_lambda0"])
        if scenario.stack.layers and \
                scenario.stack.x_first <= x_r <= scenario.stack.x_last:
            raise DomainError("x_R_lambda0 must lie outside the stack")
