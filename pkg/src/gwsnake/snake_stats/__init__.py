"""Statistics on trees and snakes."""
from .branches import BranchReport, branch_composition, branch_composition_exact, uniform_vertex_progeny
from .hausdorff import CompactSet, directed_hausdorff, graph_with_peaks, hausdorff_distance
from .holder import dyadic_windows, holder_statistic, window_oscillations
from .inversions import (
    CouplingReport,
    coupled_labels,
    exhaustive_mean_inversions,
    expected_inversions,
    inversion_coupling_check,
    inversions,
    inversions_naive,
    shared_ancestry_sum,
    shared_ancestry_sum_naive,
    step_process,
    variance_of_J_check,
)
from .peaks import PeakSet, extract_peaks
from .records import first_ladder_times, height_from_records, weak_record_times
from .report import StatReport
