"""Semi-blind image watermarking with a wavelet/graph-transform/SVD block
cascade and whale-search selection of carrier blocks and strengths."""

from .attacks import (
    ATTACK_KINDS,
    FITNESS_SUITE,
    REPORT_SUITE,
    AttackSpec,
    apply_attack,
    build_suite,
    fitness_suite,
    report_suite,
)
from .codec import (
    CapacityError,
    KeyEntry,
    KeyFormatError,
    WatermarkBits,
    WatermarkKey,
    embed,
    embed_bit,
    extract,
    extract_bit,
)
from .imaging import (
    BLUE,
    GREEN,
    RED,
    BlockGrid,
    Plane,
    RasterImage,
    extract_channel,
    get_block,
    load_image,
    replace_channel,
    save_image,
    set_block,
)
from .metrics import MetricReport, ber, nc, psnr, render_table, ssim
from .optimizer import (
    AgentEncoding,
    FitnessContext,
    WoaConfig,
    WoaResult,
    decode_agent,
    fitness_value,
    optimize_watermarking,
    watermark_fitness,
    woa_run,
)
from .transforms import (
    GRAPH_KINDS,
    PATH_ADAPTIVE,
    PATH_UNIFORM,
    DwtSubbands,
    GraphSpec,
    SvdTriple,
    build_graph,
    dwt2_haar,
    gbt2_forward,
    gbt2_inverse,
    idwt2_haar,
    svd,
    svd_reconstruct,
)

__version__ = "0.1.0"

__all__ = [
    "ATTACK_KINDS",
    "BLUE",
    "FITNESS_SUITE",
    "GRAPH_KINDS",
    "GREEN",
    "PATH_ADAPTIVE",
    "PATH_UNIFORM",
    "RED",
    "REPORT_SUITE",
    "AgentEncoding",
    "AttackSpec",
    "BlockGrid",
    "CapacityError",
    "DwtSubbands",
    "FitnessContext",
    "GraphSpec",
    "KeyEntry",
    "KeyFormatError",
    "MetricReport",
    "Plane",
    "RasterImage",
    "SvdTriple",
    "WatermarkBits",
    "WatermarkKey",
    "WoaConfig",
    "WoaResult",
    "apply_attack",
    "ber",
    "build_graph",
    "build_suite",
    "decode_agent",
    "dwt2_haar",
    "embed",
    "embed_bit",
    "extract",
    "extract_bit",
    "extract_channel",
    "fitness_suite",
    "fitness_value",
    "gbt2_forward",
    "gbt2_inverse",
    "get_block",
    "idwt2_haar",
    "load_image",
    "nc",
    "optimize_watermarking",
    "psnr",
    "render_table",
    "replace_channel",
    "report_suite",
    "save_image",
    "set_block",
    "ssim",
    "svd",
    "svd_reconstruct",
    "watermark_fitness",
    "woa_run",
]
