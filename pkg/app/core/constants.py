# Closed list of strategies accepted by the CLI, the sweep files and the API
STRATEGIES = ("omst-s", "omst-d", "omst-lc", "mst-d", "vanilla-d", "rwc", "dfs")
OMST_STRATEGIES = ("omst-s", "omst-d", "omst-lc")
MST_STRATEGIES  = OMST_STRATEGIES + ("mst-d",)

# Row layout shared by CSV output, the results table and the summary tool
CSV_SCHEMA_VERSION = 1
CSV_FIELDS = (
    "strategy", "alpha", "beta", "workload", "edges", "windows", "seconds",
    "throughput", "ns_per_edge",
    "q_p95", "q_p99", "wm_p95", "wm_p99",
    "mem_vertices", "mem_tree_edges", "mem_nontree_edges", "mem_words", "peak_mem",
    "replacement_searches", "accesses", "answer_checksum",
)

# Sweep dimensions a plan may vary
SWEEP_DIMENSIONS = ("workload", "alpha", "beta", "edges_per_window", "edges_per_slide")

WORKLOAD_PRNG = "pcg64-v1"

EXIT_OK          = 0
EXIT_USAGE       = 1
EXIT_DATA        = 2
EXIT_CORRECTNESS = 3
