"""Exact spectral simulation of photon wave packets in one-dimensional
lossless dielectric resonators, with coherent-control pulse design and
subregion non-Markovianity measures."""

__version__ = "0.1.0"

from .media import (C_NATURAL, OMEGA0_NATURAL, FabryPerotSpec, Layer,
                    LayerStack, Medium, RegionSpec, UnitSystem,
                    build_fabry_perot, default_regions)
from .scatter import (ModeField, ScatteringAmplitudes, TransferMatrix,
                      build_x_grid, interface_matrix, layer_matrix,
                      mode_field, stack_scattering, total_matrix)
from .analytic import (RayEvent, ResonanceConstants, coherent_train_energy,
                       geometric_sum, lorentzian_spectrum,
                       mirror_transmission, raytrace, resonance_constants,
                       weighted_sum)
from .pulse import (FrequencyGrid, PulseInjection, SpaceTimeField,
                    SpectralEnvelope, apply_injection, assemble_field,
                    free_space_norm, integrating_detector,
                    make_frequency_grid, probe_series, region_energy,
                    smoothed_rect_spectrum, trajectory_norm)
from .control import ControlSchedule, design_confinement, design_truncation
from .markov import (DistanceSeries, NonMarkovSeries, OverlapMatrix,
                     distance_series, hs_distance, nonmarkov_content,
                     overlap_matrix)

__all__ = [name for name in dir() if not name.startswith("_")]
