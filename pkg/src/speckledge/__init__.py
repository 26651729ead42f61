"""speckledge: benchmark speckle-aware edge detectors on simulated multi-look
SAR amplitude mosaics, scored with a distance-map delta metric."""

from .config import ConfigError, ExperimentConfig, MethodSpec, config_from_text, load_config
from .detectors import (
    CannyConfig,
    GravitationalConfig,
    MultiscaleConfig,
    canny_edges,
    fu_window,
    gravitational_force_map,
    multiscale_edges,
)
from .filters import LeeParams, boxcar, enhanced_lee, median_filter
from .metrics import BdmConfig, DistanceMap, baddeley_delta, distance_transform
from .pipeline import cmd_report, cmd_run, cmd_simulate, run_experiment, simulate_mosaics
from .raster import (
    CHANNEL_TAGS,
    BinaryImage,
    ByteImage,
    EdgeStrengthMap,
    GrayImage,
    MultiChannelImage,
    NetpbmError,
    normalize,
    quantize,
    read_pbm,
    read_pgm,
    write_pbm,
    write_pgm,
)
from .report import ReportRow, merge_rows, read_report, summary_table, write_report
from .simulate import (
    ClassModel,
    LabelMap,
    SimulationSpec,
    default_saturation,
    derive_seed,
    generate_phantom,
    ground_truth_edges,
    simulate_channel,
)
from .strategies import (
    FilterSpec,
    Strategy,
    SweepSpec,
    aggregate_mean,
    run_strategy,
    strength_map,
    sweep_best,
    threshold,
)

__version__ = "0.1.0"
