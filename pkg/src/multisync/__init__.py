"""Synchronization analysis for identical systems coupled through several
directed networks: graph and spectral tools, the xi_M computation with
certificates, executable criteria and simulators."""

from .criteria import (
    GridSpec,
    MultiNetworkSystem,
    SyncVerdict,
    check_spanning_tree_threshold,
    check_coupling_lmi,
    check_certificate_criterion,
    check_balanced_criterion,
    discrete_criterion,
    discrete_criterion_scalar,
    is_synchronizing_linear,
    phi,
    stability_region,
    threshold_spanning_tree,
)
from .errors import (
    DivergenceError,
    HypothesisError,
    MultisyncError,
    NotCommutingError,
    NotPositiveDefiniteError,
    SolverError,
    ValidationError,
)
from .graphs import (
    WeightedDigraph,
    graph_sum,
    has_spanning_directed_tree,
    laplacian,
    three_layer_example,
    reversal,
)
from .sim import simulate_ct, simulate_dt, sync_error
from .spectra import CommutingFamily, kron_sum_spectrum, make_family, zero_multiplicity
from .ximax import (
    SdpProblem,
    XiMaxResult,
    sdp_feasible,
    verify_certificate,
    xi_lower_bound,
    xi_max,
    xi_upper_bound,
)

__version__ = "0.1.0"
