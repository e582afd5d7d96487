"""Streaming hierarchical heavy hitters with Space Saving summaries."""

from .bounds import bound_cond_error_1d, bound_output_size_1d, bound_output_size_2d
from .core import HhhEntry, HhhReport, HierarchicalHeavyHitters
from .distributed import load_state, merge_states, save_state
from .lattice import Dimension, Hierarchy, Prefix
from .oracle import check_report, conditioned_count_wrt, exact_counts, exact_hhh
from .space_saving import HeapSpaceSaving, StreamSummary, make_summary, merge
from .tcam import TcamCostModel, TcamSimulator, tcam_run, tcam_single_instance_run

__all__ = [
    "Dimension", "Hierarchy", "Prefix",
    "HeapSpaceSaving", "StreamSummary", "make_summary", "merge",
    "HierarchicalHeavyHitters", "HhhEntry", "HhhReport",
    "bound_output_size_1d", "bound_cond_error_1d", "bound_output_size_2d",
    "exact_counts", "exact_hhh", "conditioned_count_wrt", "check_report",
    "merge_states", "save_state", "load_state",
    "TcamCostModel", "TcamSimulator", "tcam_run", "tcam_single_instance_run",
]
__version__ = "0.1.0"
