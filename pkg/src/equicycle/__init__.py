"""equicycle: search for k pairwise edge-disjoint cycles on one vertex set.

Building blocks: sublinear-expansion certification and extraction, a
degree-flattening regulariser, disjoint-path connection engines, absorber
gadgets with robustly matchable pair graphs, leftover-bounded matchings,
an orchestrating pipeline, and an independent brute-force oracle for
small instances.
"""

from .graph import (
    BipartiteGraph,
    DegreeStats,
    Graph,
    Subgraph,
    check_path_parity,
    degree_stats,
    graph_to_text,
    load_graph,
    parse_graph,
    restrict,
    save_graph,
)
from .rng import SeededRng
from .sampling import (
    BalancedPartition,
    BalancedSubset,
    PRandom,
    UniformOfSize,
    sample,
)
from .expander import (
    ExpanderParams,
    ExpanderVerdict,
    Witness,
    almost_regular_subgraph,
    check_expander,
    check_reachable,
    decompose_into_expanders,
    extract_expander,
    find_well_expanding_subset,
    min_neighbourhood_under_deletion,
    reach_ball,
)
from .regularize import (
    RegularisationConfig,
    RegularisationResult,
    classify_degrees,
    regularize,
    regularize_step,
)
from .connect import (
    ConnectionRequest,
    ConnectionSolution,
    connect_pairs_disjoint,
    find_one_of_many_paths,
    star_matching,
)
from .forest import (
    LayeredInstance,
    LeftoverReport,
    assemble_forest,
    bipartite_edge_colouring,
    matchings_with_leftover,
)
from .absorb import (
    Absorber,
    AbsorberGrid,
    RMBG,
    assign_and_absorb,
    build_absorber_chain,
    build_rmbg,
    verify_absorber,
)
from .oracle import OracleResult, SearchLimits, brute_force_cycles, brute_force_extremal
from .pipeline import (
    CycleFamily,
    FailureReport,
    PipelineConfig,
    PipelineResult,
    bundled_scenario,
    run_pipeline,
    select_sets,
)
from .verify import verify_cycles

__version__ = "0.1.0"
