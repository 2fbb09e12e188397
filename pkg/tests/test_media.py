import math

import numpy as np
import pytest

import cavity_ctl as cc
from cavity_ctl.errors import GeometryError


class TestUnitSystem:
    def test_defaults_are_light_consistent(self):
        units = cc.UnitSystem()
        assert units.c_relative_error < 1e-3

    def test_photon_energy(self):
        assert cc.UnitSystem().photon_energy_eV == pytest.approx(0.827,
                                                                 abs=5e-4)

    def test_conversions(self):
        units = cc.UnitSystem()
        assert units.time_fs(30.0) == pytest.approx(150.0)
        assert units.length_nm(0.1) == pytest.approx(150.0)

    @pytest.mark.parametrize("kw", [{"lambda0_SI": 0.0}, {"tau0_SI": -1.0}])
    def test_invalid_scales(self, kw):
        with pytest.raises(GeometryError):
            cc.UnitSystem(**kw)


class TestLayerAndStack:
    def test_layer_index(self):
        assert cc.Layer(0.1, 6.25).n_r == pytest.approx(2.5)
        assert cc.Layer(1.0, 2.0, 2.0).n_r == pytest.approx(2.0)

    @pytest.mark.parametrize("kw", [
        {"thickness": 0.0, "eps_r": 1.0},
        {"thickness": -1.0, "eps_r": 1.0},
        {"thickness": 1.0, "eps_r": 0.0},
        {"thickness": 1.0, "eps_r": 1.0, "mu_r": -2.0},
    ])
    def test_layer_validation(self, kw):
        with pytest.raises(GeometryError):
            cc.Layer(**kw)

    def test_interfaces_strictly_increasing(self):
        stack = cc.LayerStack(1.5, (cc.Layer(0.1, 6.25), cc.Layer(15.0, 1.0),
                                    cc.Layer(0.1, 6.25)))
        pos = stack.interfaces
        assert all(b > a for a, b in zip(pos, pos[1:]))
        assert stack.total_thickness == pytest.approx(15.2)
        assert stack.x_first == 1.5
        assert stack.x_last == pytest.approx(16.7)

    def test_empty_stack(self):
        stack = cc.LayerStack()
        assert stack.interfaces == (0.0,)
        assert stack.max_index == 1.0


class TestFabryPerot:
    def test_quarter_wave_thickness(self):
        spec = cc.FabryPerotSpec(2.5, 15.0, 40.0, 40.0)
        assert spec.mirror_thickness == 0.1          # lambda0/(4*2.5), exact
        assert cc.UnitSystem().length_nm(spec.mirror_thickness) \
            == pytest.approx(150.0)

    def test_build_geometry(self, fp_spec, fp_stack):
        assert len(fp_stack.layers) == 3
        mirror, cavity, mirror2 = fp_stack.layers
        assert mirror == mirror2
        assert mirror.eps_r == pytest.approx(6.25)
        assert mirror.mu_r == 1.0
        # cavity interfaces exactly L_B apart
        pos = fp_stack.interfaces
        assert pos[2] - pos[1] == pytest.approx(15.0, abs=1e-15)

    def test_build_deterministic(self, fp_spec):
        assert cc.build_fabry_perot(fp_spec) == cc.build_fabry_perot(fp_spec)

    def test_unity_index_mirrors_allowed(self):
        spec = cc.FabryPerotSpec(1.0, 15.0, 40.0, 40.0)
        stack = cc.build_fabry_perot(spec)
        for omega in (0.8, 1.0, 1.3):
            amps = cc.stack_scattering(stack, omega)
            assert abs(amps.r_left) < 1e-14
            assert abs(amps.t_left) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("kw", [
        {"n_r": 0.8, "L_B": 15.0, "L_A": 40.0, "L_C": 40.0},
        {"n_r": 2.5, "L_B": -1.0, "L_A": 40.0, "L_C": 40.0},
        {"n_r": 2.5, "L_B": 15.0, "L_A": 0.0, "L_C": 40.0},
    ])
    def test_invalid_spec(self, kw):
        with pytest.raises(GeometryError):
            cc.FabryPerotSpec(**kw)


class TestRegions:
    def test_region_validation(self):
        with pytest.raises(GeometryError):
            cc.RegionSpec("X", 2.0, 2.0)

    def test_default_regions_lengths(self):
        spec = cc.FabryPerotSpec(2.5, 15.0, 160.0, 120.0)
        regions = {r.name: r for r in
                   cc.default_regions(cc.build_fabry_perot(spec), spec)}
        assert regions["A"].length == pytest.approx(160.0)
        assert regions["C"].length == pytest.approx(120.0)
        assert regions["B"].length == pytest.approx(15.0)

    def test_half_cavity_region(self):
        spec = cc.FabryPerotSpec(2.5, 120.0, 80.0, 10.0)
        regions = {r.name: r for r in
                   cc.default_regions(cc.build_fabry_perot(spec), spec)}
        b, bp = regions["B"], regions["B'"]
        assert bp.length == pytest.approx(60.0)
        assert bp.x_lo == b.x_lo                    # adjacent to left mirror
        assert bp.x_lo == pytest.approx(spec.mirror_thickness)

    def test_regions_partition_outside_mirrors(self, fp_spec, fp_stack):
        regions = cc.default_regions(fp_stack, fp_spec)
        a, b, bp, c = regions
        # pairwise overlap only through B' being a subset of B
        assert a.x_hi <= b.x_lo
        assert b.x_hi <= c.x_lo
        assert bp.x_lo >= b.x_lo and bp.x_hi <= b.x_hi
        # the gaps between A|B and B|C are exactly the mirrors
        assert b.x_lo - a.x_hi == pytest.approx(fp_spec.mirror_thickness)
        assert c.x_lo - b.x_hi == pytest.approx(fp_spec.mirror_thickness)
