"""fairboard: training-run observability with slice-based fairness auditing.

Ingests standard event logs plus per-example prediction sidecars, computes
disaggregated and group-fairness metrics over user-defined slices, aligns
and correlates multi-run series, and serves everything to a linked-view
dashboard over REST.
"""

from .aggregation import AlignedTable, align_series, reservoir_downsample, window_aggregate
from .correlation import CorrelationMatrix, correlation_matrix, pearson
from .detection import average_precision, iou, match_detections
from .fairness import (
    DisparityTimeline,
    FairnessReport,
    StabilityReport,
    disparity_timeline,
    dp_gap,
    eo_gaps,
    fairness_report,
    stability_report,
    what_if_reconfigure,
)
from .predlog import Env, PredictionRecord, Task, parse_prediction_log
from .records import RecordFrame, read_record_stream
from .runs import Catalog, Run, ScalarSeries, discover_runs
from .slicing import GroupKey, GroupMetrics, SlicePredicate, classification_metrics, partition
from .wire import ScalarEvent, decode_scalar_event

__version__ = "0.1.0"

__all__ = [
    "AlignedTable",
    "Catalog",
    "CorrelationMatrix",
    "DisparityTimeline",
    "Env",
    "FairnessReport",
    "GroupKey",
    "GroupMetrics",
    "PredictionRecord",
    "RecordFrame",
    "Run",
    "ScalarEvent",
    "ScalarSeries",
    "SlicePredicate",
    "StabilityReport",
    "Task",
    "align_series",
    "average_precision",
    "classification_metrics",
    "correlation_matrix",
    "decode_scalar_event",
    "discover_runs",
    "disparity_timeline",
    "dp_gap",
    "eo_gaps",
    "fairness_report",
    "iou",
    "match_detections",
    "parse_prediction_log",
    "partition",
    "pearson",
    "read_record_stream",
    "reservoir_downsample",
    "stability_report",
    "what_if_reconfigure",
    "window_aggregate",
]
