"""Fractal transformations between attractors of iterated function systems,
and the imaging tools built on them."""

from .errors import (
    BadProbabilities,
    ConfigError,
    DegenerateDenominator,
    EmptyAddress,
    FractransError,
    MaskError,
    MaskGap,
    MaskNotSubset,
    MaskOverlap,
    NoIntersection,
    NotInvertibleHere,
    NumericError,
    OrbitEscape,
)
from .geometry import AffineMap2, BilinearMap2, Point2, ProjectiveMap2, apply, invert
from .ifs import (
    UNIT_INTERVAL,
    UNIT_SQUARE,
    Address,
    IfsSystem,
    Rect,
    attractor_chaos_game,
    attractor_deterministic,
    coding_point,
    recommended_depth,
)
from .imaging import (
    Picture,
    color_steal,
    color_steal_tops,
    decode_measure,
    encode_measure,
    fractal_filter,
    pack_masked,
    unpack_masked,
)
from .render import render_attractor_density, render_repeller_escape
from .sections import Mask, classify, masked_address, masked_step, shift, tops_mask, validate_mask
from .transform import (
    FractalTransform,
    HomeoPair,
    SectionSystem,
    compute_p_star,
    make_hrs_pair,
    make_pair,
    splat_raster,
    transform_point,
    transform_points,
    transform_raster,
)

__version__ = "0.1.0"
