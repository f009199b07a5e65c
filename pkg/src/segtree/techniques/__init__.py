"""Catalog of split techniques sharing the get_split_indices contract."""

from .base import (
    TECHNIQUES,
    SplitIndexList,
    Technique,
    get_split_indices,
    make_split_list,
    technique_from_params,
    validate_split_list,
)
from .changepoint import ChangePoints
from .geo import DensityClusters, FptMinima, GeoArea, haversine_m, points_in_polygon
from .patterns import MotifRepresentatives, PatternMatches, matrix_profile
from .temporal import Bins, TemporalGaps
from .value_based import CategoricalChange, Seasonality, ValueRange

__all__ = [
    "TECHNIQUES",
    "SplitIndexList",
    "Technique",
    "get_split_indices",
    "make_split_list",
    "technique_from_params",
    "validate_split_list",
    "TemporalGaps",
    "Bins",
    "ChangePoints",
    "ValueRange",
    "CategoricalChange",
    "Seasonality",
    "MotifRepresentatives",
    "PatternMatches",
    "GeoArea",
    "DensityClusters",
    "FptMinima",
    "haversine_m",
    "points_in_polygon",
    "matrix_profile",
]
