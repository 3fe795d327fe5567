"""cyclecut: partition dense regular graphs into few vertex-disjoint cycles.

Library surface plus a FastAPI service (`cyclecut.service`) and a thin CLI
client (`cyclecut.cli`).
"""

from .config import RunConfig
from .decomposer import (
    Cluster,
    Decomposition,
    FAR_BIPARTITE,
    NEAR_BIPARTITE,
    ParameterLadder,
    classify_cluster,
    decompose,
    default_ladder,
    find_sparse_cut,
    refine_split,
)
from .assembler import (
    CyclePartition,
    PathPartition,
    PartitionSummary,
    closing_cycle_check,
    find_two_matching,
    partition_cycles,
    partition_paths_bipartite,
)
from .balancing import (
    BalancingMatching,
    FractionalMatching,
    FlowNetwork,
    LiftGraph,
    OrderedFilter,
    balance_clumps,
    build_filtered,
    build_lift,
    build_network,
    clump_imbalance,
    max_flow,
    prune_matching,
    round_matching,
)
from .forest import (
    ForestReport,
    LinearForest,
    build_balancing_forest,
    fix_parity,
    merge_leaves,
    pull_back,
    short_connect,
)
from .graph import (
    Cut,
    Graph,
    RegularityInfo,
    cut_sparsity,
    bipartition_of,
    gen_bipartite_union,
    gen_clique_union,
    gen_petersen,
    gen_random_regular,
    max_cut_bipartition,
    validate_regular,
)
from .hamilton import (
    CycleFactor,
    HamRequest,
    connect_and_absorb,
    ham_path,
    initial_cycle_factor,
    reduce_cycle_factor,
    select_reservoir,
)
from .verification import (
    VerificationReport,
    brute_ham_path,
    brute_min_cycle_partition,
    verify_cycle_partition,
    verify_forest,
    verify_path_partition,
)

__version__ = "0.1.0"
