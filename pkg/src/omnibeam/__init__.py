"""Omni-surface aided multi-user downlink: codebooks, training, beamforming.

A deterministic simulation library for surfaces whose elements reflect and
refract simultaneously with coupled amplitudes and phases.  The package
covers near/far-field channel models, mirror-symmetric area codebooks,
hierarchical multi-user beam training, coupled reflect/refract beamforming
with water-filling power control, and an experiment harness comparing the
coupled surface against reflect-only baselines.
"""

__version__ = "0.1.0"

from .geometry import (
    ArrayGeometry,
    FieldRegion,
    Point3,
    SceneLayout,
    Side,
    classify_field,
    element_positions,
    half_wavelength_array,
    mirror_point,
    rayleigh_distance,
)
from .channels import (
    AreaDescriptor,
    area_equivalent_channel,
    bs_ios_channel,
    far_area,
    far_field_link,
    far_field_user_channel,
    near_area,
    near_field_user_channel,
    steering_vector_upa,
)
from .surface import (
    ElementCoefficients,
    SurfaceConfiguration,
    SurfaceSpec,
    make_element,
    quantize_phase,
    surface_matrices,
)
from .codebook import (
    AreaGrid,
    Codeword,
    CodebookRealization,
    GridConfig,
    HierarchicalCodebook,
    build_area_grid,
    build_hierarchical_codebook,
    export_codebook_csv,
    factorize_codeword_init,
    mirrored_coverage,
    synthesize_codeword,
    user_combiner_codebook,
)
from .training import (
    SimUser,
    TrainingConfig,
    TrainingReport,
    exhaustive_search_oracle,
    format_report,
    measure_power,
    run_training,
    update_region_index,
)
from .beamforming import (
    BeamformerSolution,
    EffectiveChannel,
    alternating_factorization,
    digital_precoder,
    effective_channel,
    optimize_phases,
    residual,
    sum_rate,
    throughput,
    water_filling,
)
from .harness import (
    ExperimentResult,
    ScenarioConfig,
    beam_gain_map,
    drop_users,
    emit_results,
    load_config,
    run_scheme,
    snr_sweep,
    verify_suite,
)
