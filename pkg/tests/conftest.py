"""Shared fixtures and measurement helpers for the test suite."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

import cavity_ctl as cc

# Exact single-mirror amplitudes at the carrier for n_r = 2.5:
# the flux contrast (k1^2-k2^2)/(2 k1 k2) = -21/20 gives |t|^2 = 400/841.
R_MIRROR = 21.0 / 29.0
T_MIRROR = 20.0 / 29.0

CONFIG_DIR = Path(cc.__file__).parent / "configs"


@pytest.fixture(scope="session")
def fp_spec():
    return cc.FabryPerotSpec(n_r=2.5, L_B=15.0, L_A=40.0, L_C=40.0)


@pytest.fixture(scope="session")
def fp_stack(fp_spec):
    return cc.build_fabry_perot(fp_spec)


@pytest.fixture(scope="session")
def fp_resonance(fp_spec):
    return cc.resonance_constants(fp_spec)


@pytest.fixture(scope="session")
def short_pulse_envelope():
    """T0*omega0 = 60 envelope on the standard synthesis grid."""
    grid = cc.make_frequency_grid(1.0, 0.25, 4096, 1200.0)
    return cc.smoothed_rect_spectrum(grid, 1.0, 60.0 / (2.0 * math.pi), 0.25)


@pytest.fixture(scope="session")
def short_lead(short_pulse_envelope):
    return cc.apply_injection(short_pulse_envelope, 1.0, 0.0, "left", -30.0)


def group_peaks(t: np.ndarray, p: np.ndarray, threshold: float,
                gap: float = 15.0) -> list[dict]:
    """Locate pulse-train peaks in a nearly flat-topped train.

    Local maxima above the threshold are grouped when closer than `gap`;
    each group reports its tallest sample, an energy-weighted centroid
    time, and the energy integrated over a window of one group spacing.
    """
    idx = [i for i in range(1, len(p) - 1)
           if p[i] > p[i - 1] and p[i] >= p[i + 1] and p[i] > threshold]
    groups: list[list[int]] = []
    for i in idx:
        if groups and t[i] - t[groups[-1][-1]] < gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    dt = t[1] - t[0]
    out = []
    for g in groups:
        top = max(g, key=lambda j: p[j])
        lo = max(0, int((t[g[0]] - gap / 2 - t[0]) / dt))
        hi = min(len(t), int((t[g[-1]] + gap / 2 - t[0]) / dt) + 1)
        w = p[lo:hi]
        tw = t[lo:hi]
        energy = float(np.trapezoid(w, tw))
        centroid = float(np.trapezoid(w * tw, tw) / energy)
        out.append({"time": t[top], "height": p[top],
                    "centroid": centroid, "energy": energy,
                    "span": (t[g[0]], t[g[-1]])})
    return out
