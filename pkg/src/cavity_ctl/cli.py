"""Command-line front end: scenario ingestion, run orchestration, and
deterministic file emission.

Outputs are plain text (UTF-8, LF, '#' headers carrying the scenario hash)
written atomically; rerunning an identical config reproduces identical
bytes, independently of the worker count.  The manifest records what was
written (wall-clock timings are informational and excluded from the
determinism contract).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import raytrace, resonance_constants
from .config import Scenario, parse_scenario, validate_scenario
from .control import ControlSchedule
from .errors import CavityCtlError, ConfigError
from .markov import distance_series, nonmarkov_content
from .pulse import (PulseInjection, assemble_field, free_space_norm,
                    probe_series, trajectory_norm)
from .scatter import _batch_amplitudes, _batch_total

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_IO = 4

_FMT = "{:.12e}".format


@dataclass
class RunManifest:
    """Record of one scenario execution."""

    scenario_hash: str
    version: str
    config: str
    threads: int
    outputs: list[dict] = field(default_factory=list)
    timings_s: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "scenario_hash": self.scenario_hash,
            "version": self.version,
            "config": self.config,
            "threads": self.threads,
            "outputs": self.outputs,
            "timings_s": {k: round(v, 3) for k, v in self.timings_s.items()},
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _header(scenario: Scenario, columns: str, extra: list[str] | None = None
            ) -> list[str]:
    lines = [
        f"# cavity-ctl {__version__}",
        f"# scenario={scenario.content_hash}",
        f"# config={scenario.path.name}",
    ]
    if extra:
        lines.extend(f"# {item}" for item in extra)
    lines.append(f"# columns: {columns}")
    return lines


def _write_atomic(path: Path, data: bytes) -> dict:
    """Write via temp file + rename; report whether identical bytes were
    already present (cache equivalence)."""
    unchanged = False
    if path.exists():
        try:
            unchanged = path.read_bytes() == data
        except OSError:
            unchanged = False
    fd, tmp = tempfile.mkstemp(dir=str(path.parent),
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except OSError:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return {"file": path.name, "bytes": len(data),
            "sha256": hashlib.sha256(data).hexdigest(),
            "unchanged": unchanged}


def _spectra_text(scenario: Scenario) -> str:
    grid = scenario.frequency_grid
    amps = _batch_amplitudes(_batch_total(scenario.stack, grid.omega))
    lines = _header(scenario,
                    "omega re_r im_r re_t im_t reflectance transmittance")
    for i, w in enumerate(grid.omega):
        r = amps["r_left"][i]
        t = amps["t_left"][i]
        lines.append(" ".join(_FMT(v) for v in
                              (w, r.real, r.imag, t.real, t.imag,
                               abs(r) ** 2, abs(t) ** 2)))
    return "\n".join(lines) + "\n"


def _scenario_schedule(scenario: Scenario) -> ControlSchedule:
    if scenario.schedule is not None:
        return scenario.schedule
    res = scenario.resonance
    if res is None:
        raise ConfigError("ray trace requires the two-mirror resonator")
    return ControlSchedule.none(res.tau_rt, scenario.lead.delay,
                                complex(scenario.lead.scale))


def _raytrace_text(scenario: Scenario) -> str:
    from .analytic import mirror_transmission
    fp = scenario.fp_spec
    transmission = mirror_transmission(fp.n_r, fp.mirror_thickness, 1.0)
    r = float(np.sqrt(max(0.0, 1.0 - transmission)))
    t = float(np.sqrt(transmission))
    n_events = int(scenario.outputs.get("raytrace_events", 12))
    events = raytrace(r, t, _scenario_schedule(scenario), n_events)
    lines = _header(scenario, "time side re_amp im_amp energy",
                    [f"r={r:.12g} t={t:.12g} "
                     f"tau_rt={resonance_constants(fp).tau_rt:.12g}"])
    for ev in events:
        lines.append(f"{_FMT(ev.time)} {ev.side} {_FMT(ev.amplitude.real)} "
                     f"{_FMT(ev.amplitude.imag)} {_FMT(ev.energy)}")
    return "\n".join(lines) + "\n"


def _timeseries_text(scenario: Scenario, threads: int) -> str:
    x_r = float(scenario.outputs["x_R_lambda0"])
    t = scenario.t_grid
    series = probe_series(scenario.stack, scenario.injections(), [x_r], t,
                          threads=threads)[:, 0]
    lines = _header(scenario, "t re im energy_density",
                    [f"x_R={x_r:.12g}"])
    for i, tv in enumerate(t):
        v = series[i]
        lines.append(f"{_FMT(tv)} {_FMT(v.real)} {_FMT(v.imag)} "
                     f"{_FMT(abs(v) ** 2)}")
    return "\n".join(lines) + "\n"


def _spacetime_products(scenario: Scenario, threads: int, binary: bool
                        ) -> list[tuple[str, bytes]]:
    x = scenario.x_grid()
    t = scenario.t_grid
    stride = scenario.outputs.get("spacetime_stride", [1, 1])
    st, sx = int(stride[0]), int(stride[1])
    field_obj = assemble_field(scenario.stack, scenario.injections(), x, t,
                               threads=threads)
    xs, ts = x[::sx], t[::st]
    vals = field_obj.values[::st, ::sx]
    stem = scenario.path.stem
    if binary:
        density = np.ascontiguousarray(np.abs(vals) ** 2, dtype="<f8")
        hdr = "\n".join(_header(
            scenario, "binary row-major float64-le energy_density",
            [f"n_t={len(ts)} n_x={len(xs)}",
             f"t0={ts[0]:.12g} dt={(ts[1] - ts[0]) if len(ts) > 1 else 0:.12g}",
             "x_grid follows, one value per line"]
        ) + [_FMT(v) for v in xs]) + "\n"
        return [(f"{stem}_spacetime.bin", density.tobytes()),
                (f"{stem}_spacetime.hdr", hdr.encode())]
    lines = _header(scenario, "t x re im energy_density",
                    [f"n_t={len(ts)} n_x={len(xs)}"])
    for i, tv in enumerate(ts):
        row = vals[i]
        for j, xv in enumerate(xs):
            v = row[j]
            lines.append(f"{_FMT(tv)} {_FMT(xv)} {_FMT(v.real)} "
                         f"{_FMT(v.imag)} {_FMT(abs(v) ** 2)}")
    return [(f"{stem}_spacetime.txt", ("\n".join(lines) + "\n").encode())]


def _region_filename(name: str) -> str:
    return name.replace("'", "prime").replace(" ", "_")


def measure_scenario(scenario: Scenario, threads: int | None = None
                     ) -> dict[tuple[str, str], tuple]:
    """Distance and non-Markovianity series for every requested region.

    Returns {(case, region): (DistanceSeries, NonMarkovSeries)} where case
    is "uncontrolled" (lead trajectory pair) and, when the scenario has a
    control schedule, also "controlled" (lead plus controls).  The
    trajectory pair is the field and its copy advanced by tau_M; each
    trajectory is normalized per [measure].normalize ("trajectory": unit
    total energy including control pulses, default; "lead": unit lead
    energy only).
    """
    tau_m = float(scenario.measure["tau_M_tau0"])
    names = list(scenario.measure["regions"])
    norm_mode = scenario.measure.get("normalize", "trajectory")
    x = scenario.x_grid()
    t = scenario.t_grid

    cases: list[tuple[str, tuple]] = [("uncontrolled", (scenario.lead,))]
    if scenario.schedule is not None and scenario.schedule.injections:
        cases.append(("controlled", scenario.injections()))

    out: dict[tuple[str, str], tuple] = {}
    for tag, base in cases:
        shifted = tuple(PulseInjection(envelope=i.envelope, scale=i.scale,
                                       delay=i.delay - tau_m,
                                       direction=i.direction,
                                       center0=i.center0)
                        for i in base)
        norm = (trajectory_norm(base) if norm_mode == "trajectory"
                else free_space_norm(base[0]))
        f1 = assemble_field(scenario.stack, base, x, t,
                            norm=norm, threads=threads)
        f2 = assemble_field(scenario.stack, shifted, x, t,
                            norm=norm, threads=threads)
        for name in names:
            ds = distance_series(f1, f2, scenario.regions[name], tau_m=tau_m)
            out[(tag, name)] = (ds, nonmarkov_content(ds))
        del f1, f2
    return out


def _measures_products(scenario: Scenario, threads: int
                       ) -> list[tuple[str, bytes]]:
    tau_m = float(scenario.measure["tau_M_tau0"])
    norm_mode = scenario.measure.get("normalize", "trajectory")
    series = measure_scenario(scenario, threads)
    n_cases = len({tag for tag, _ in series})
    stem = scenario.path.stem
    products: list[tuple[str, bytes]] = []
    for (tag, name), (ds, nm) in series.items():
        lines = _header(scenario, "t D ID",
                        [f"region={name} tau_M={tau_m:.12g} case={tag} "
                         f"normalize={norm_mode}"])
        for i, tv in enumerate(ds.t_grid):
            lines.append(f"{_FMT(tv)} {_FMT(ds.D[i])} {_FMT(nm.ID[i])}")
        suffix = f"_{tag}" if n_cases > 1 else ""
        products.append((
            f"{stem}_measures_{_region_filename(name)}{suffix}.txt",
            ("\n".join(lines) + "\n").encode()))
    return products


def run_scenario(config_path: str | Path, out_dir: str | Path = ".",
                 threads: int | None = None, binary: bool = False,
                 quiet: bool = False, only: str | None = None
                 ) -> RunManifest:
    """Execute a scenario config end to end and write its outputs.

    `only` restricts execution to one product family ("spectra",
    "raytrace", "timeseries", "measures") regardless of the [outputs]
    table; None honors the config.
    """
    scenario = parse_scenario(config_path)
    validate_scenario(scenario)
    threads = threads if threads is not None else _default_threads()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(scenario_hash=scenario.content_hash,
                           version=__version__,
                           config=scenario.path.name, threads=threads)
    stem = scenario.path.stem

    def note(msg: str) -> None:
        if not quiet:
            print(msg, file=sys.stderr)

    def emit(name: str, data: bytes) -> None:
        manifest.outputs.append(_write_atomic(out / name, data))

    wants = {
        "spectra": scenario.outputs["spectra"],
        "raytrace": scenario.outputs["raytrace"],
        "timeseries": scenario.outputs["timeseries"],
        "spacetime": scenario.outputs["spacetime"],
        "measures": scenario.outputs["measures"],
    }
    if only is not None:
        wants = {k: (k == only) for k in wants}
        if only == "raytrace" and scenario.fp_spec is None:
            raise ConfigError("ray trace requires the two-mirror resonator "
                              "keys in [media]")
        if only == "measures" and "tau_M_tau0" not in scenario.measure:
            raise ConfigError("config missing [measure] table")

    if wants["spectra"]:
        t0 = time.perf_counter()
        emit(f"{stem}_spectra.txt", _spectra_text(scenario).encode())
        manifest.timings_s["spectra"] = time.perf_counter() - t0
        note(f"spectra -> {stem}_spectra.txt")
    if wants["raytrace"]:
        t0 = time.perf_counter()
        emit(f"{stem}_raytrace.txt", _raytrace_text(scenario).encode())
        manifest.timings_s["raytrace"] = time.perf_counter() - t0
        note(f"raytrace -> {stem}_raytrace.txt")
    if wants["timeseries"]:
        t0 = time.perf_counter()
        emit(f"{stem}_timeseries.txt",
             _timeseries_text(scenario, threads).encode())
        manifest.timings_s["timeseries"] = time.perf_counter() - t0
        note(f"timeseries -> {stem}_timeseries.txt")
    if wants["spacetime"]:
        t0 = time.perf_counter()
        for name, data in _spacetime_products(scenario, threads, binary):
            emit(name, data)
        manifest.timings_s["spacetime"] = time.perf_counter() - t0
        note(f"spacetime -> {stem}_spacetime.*")
    if wants["measures"]:
        t0 = time.perf_counter()
        for name, data in _measures_products(scenario, threads):
            emit(name, data)
        manifest.timings_s["measures"] = time.perf_counter() - t0
        note(f"measures -> {stem}_measures_*.txt")

    emit(f"{stem}_manifest.json", manifest.to_json().encode())
    return manifest


def _default_threads() -> int:
    env = os.environ.get("CAVITY_CTL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavity-ctl",
        description="Exact spectral simulation of photon wave packets in "
                    "1D dielectric resonators")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("run", "execute every output requested by the config"),
            ("spectra", "emit r(omega), t(omega) tables only"),
            ("raytrace", "emit the analytic pulse-train table only"),
            ("measure", "emit distance / non-Markovianity series only"),
            ("validate", "check the config and its guards without solving")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="scenario config (TOML)")
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: all cores or "
                            "CAVITY_CTL_THREADS); results do not depend "
                            "on this")
        p.add_argument("--binary", action="store_true",
                       help="binary space-time output with text sidecar")
        p.add_argument("--quiet", action="store_true",
                       help="suppress progress messages")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            scenario = parse_scenario(args.config)
            validate_scenario(scenario)
            if not args.quiet:
                print(f"ok scenario={scenario.content_hash}")
            return EXIT_OK
        only = {"run": None, "spectra": "spectra", "raytrace": "raytrace",
                "measure": "measures"}[args.command]
        run_scenario(args.config, out_dir=args.out_dir,
                     threads=args.threads, binary=args.binary,
                     quiet=args.quiet, only=only)
        return EXIT_OK
    except ConfigError as exc:
        pos = ""
        if exc.line is not None:
            pos = f" (line {exc.line}, column {exc.column})"
        print(f"config error: {exc}{pos}", file=sys.stderr)
        return EXIT_CONFIG
    except CavityCtlError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        print("hint: relax the grid/window or fix the launch geometry as "
              "described above", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":   # pragma: no cover
    sys.exit(main())
