"""Driver fingerprinting from inertial turn dynamics.

Pipeline: align a raw IMU trace to the geographic frame, detect steering
events from the yaw-rate stream, keep the ~90 degree turns, resample each
to a common length, summarize it as a 225-value feature vector, and
identify the driver per turn (naive Bayes / random forest) or per trip
(MAP fusion).  Open-set enrollment gates unknown drivers with per-driver
Gaussian mixtures.  A deterministic simulator provides labeled corpora.
"""

from .classify import (
    GaussianNBModel,
    KFoldReport,
    RandomForestModel,
    TripPrediction,
    kfold_eval,
    load_model,
    predict_labels,
    predict_trip_map,
    predict_turn,
    save_model,
    train,
)
from .config import ConfigError, RunConfig
from .enroll import (
    GmmModel,
    ProfileEntry,
    ProfileTable,
    assign_or_new_driver,
    corrupt_labels,
    enroll_driver,
    fit_gmm,
    load_profiles,
    save_profiles,
    trip_loglikelihood,
)
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    a_eot,
    build_feature_vector,
    heading_accel,
    read_features_csv,
    write_features_csv,
)
from .pipeline import extract_turns, trace_to_vectors, turns_to_vectors
from .simgen import (
    DriverProfile,
    LaneChange,
    LeftTurn,
    ManeuverAnnotation,
    RightTurn,
    RouteScript,
    Stop,
    Straight,
    UTurn,
    generate_trip,
    load_profile,
    load_route,
    save_profile,
    save_route,
)
from .trace import (
    AlignedTrace,
    RawTrace,
    align_to_geo_frame,
    despike,
    lowpass_smooth,
    read_trace_csv,
    write_trace_csv,
)
from .turns import (
    SteeringEvent,
    TurnSegment,
    classify_and_filter_turns,
    detect_steering_events,
    heading_series,
    interpolate_turn,
    read_turns_jsonl,
    write_turns_jsonl,
)

__version__ = "0.1.0"

__all__ = [
    "AlignedTrace",
    "ConfigError",
    "DriverProfile",
    "FEATURE_NAMES",
    "FeatureVector",
    "GaussianNBModel",
    "GmmModel",
    "KFoldReport",
    "LaneChange",
    "LeftTurn",
    "ManeuverAnnotation",
    "ProfileEntry",
    "ProfileTable",
    "RandomForestModel",
    "RawTrace",
    "RightTurn",
    "RouteScript",
    "RunConfig",
    "SteeringEvent",
    "Stop",
    "Straight",
    "TripPrediction",
    "TurnSegment",
    "UTurn",
    "a_eot",
    "align_to_geo_frame",
    "assign_or_new_driver",
    "build_feature_vector",
    "classify_and_filter_turns",
    "corrupt_labels",
    "despike",
    "detect_steering_events",
    "enroll_driver",
    "extract_turns",
    "fit_gmm",
    "generate_trip",
    "heading_accel",
    "heading_series",
    "interpolate_turn",
    "kfold_eval",
    "load_model",
    "load_profile",
    "load_profiles",
    "load_route",
    "lowpass_smooth",
    "predict_labels",
    "predict_trip_map",
    "predict_turn",
    "read_features_csv",
    "read_trace_csv",
    "read_turns_jsonl",
    "save_model",
    "save_profile",
    "save_profiles",
    "save_route",
    "trace_to_vectors",
    "train",
    "trip_loglikelihood",
    "turns_to_vectors",
    "write_features_csv",
    "write_trace_csv",
    "write_turns_jsonl",
]
