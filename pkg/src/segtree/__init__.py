"""Multi-scale time series segmentation with hierarchical split queries.

A query applies one split technique (or operator combination) per tree level;
each level subdivides the segments produced by the previous one, yielding a
segment tree whose children exactly partition their parents. Similarity
guidance and point-anomaly analytics support exploring the result.
"""

from .anomaly import (
    ANOMALY_TYPES,
    AnomalyHistogram,
    PointAnomaly,
    aggregate,
    density_overlay,
    detect_io_tc,
    detect_lof,
    detect_mad,
    detect_shesd,
)
from .engine import (
    SegmentNode,
    SegmentTree,
    apply_operator,
    carry_over,
    evaluate,
    export_tree_csv,
    import_tree_csv,
    verify_partition,
)
from .guidance import SiblingSimilarity, color_position, dtw_distance, sibling_distances
from .query import OperatorNode, QueryLevel, QueryNode, QuerySpec, TechniqueNode, parse_query
from .series import (
    Dimension,
    IndexInterval,
    TimeSeries,
    detect_dimension_kinds,
    parse_csv,
    serialize_csv,
    slice_view,
)
from .techniques import (
    TECHNIQUES,
    Bins,
    CategoricalChange,
    ChangePoints,
    DensityClusters,
    FptMinima,
    GeoArea,
    MotifRepresentatives,
    PatternMatches,
    Seasonality,
    SplitIndexList,
    TemporalGaps,
    ValueRange,
    get_split_indices,
)

__version__ = "0.1.0"
