"""Decentralized rank aggregation by randomized gossip.

Voters sit on a communication graph, hold their own ranking, and repeatedly
average state vectors with random neighbors; sorting the averaged scores
recovers the Borda, Copeland, median-rank, or locally Kemeny-optimal
consensus at every node.  Centralized rules, graph generators, spectral
bounds, data models, and an experiment harness round out the toolkit.
"""

from .consensus import (
    ConsensusResult,
    TransitivityReport,
    borda_consensus,
    check_transitivity,
    copeland_consensus,
    footrule_consensus,
    kemeny_bruteforce,
    local_kemenize,
)
from .datasets import (
    ContaminationSpec,
    FileFormatError,
    MallowsModel,
    PreferenceProfile,
    contaminate,
    mallows_sample,
    preflib_parse,
    preflib_write,
)
from .gossip import LocalEstimate, Simulation, Snapshot, extract, from_states, init, run, step
from .graphs import (
    EdgeDistribution,
    SpectralInfo,
    Topology,
    edge_distribution,
    gen_complete,
    gen_geometric,
    gen_grid,
    gen_watts_strogatz,
    spectral_info,
)
from .metrics import BoundConstants, bound_constants, kendall_error_curve, prop1_curve, prop2_curve, score_mse
from .rankings import (
    Ordering,
    PairwiseMatrix,
    PartialRanking,
    Permutation,
    RankHistogram,
    ScoreVector,
    complete_partial,
    kendall_tau,
    pairwise_of,
    profile_pairwise,
    spearman_footrule,
    spearman_rho_sq,
    total_kendall_loss,
)

__version__ = "0.1.0"
