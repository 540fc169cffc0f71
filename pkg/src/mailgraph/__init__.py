"""Email corpora to weighted communication graphs: centrality and clustering."""

from .centrality import (
    CentralityResult,
    betweenness,
    closeness,
    degree,
    dense_ranks,
    eigencentrality,
    kappa,
    rank_of,
    strength,
    tom_centrality,
    tom_matrix,
)
from .cluster import (
    ClusterSet,
    DissimilarityMatrix,
    LinkageTree,
    Merge,
    agglomerate,
    cluster_graph,
    cut,
    dissimilarity,
    export_dendrogram,
)
from .errors import (
    ConfigError,
    DissimilarityError,
    EmailParseError,
    MailgraphError,
    MatrixFormatError,
    PowerIterationError,
    TomDomainError,
)
from .graph import (
    NodeRoster,
    RosterEntry,
    UndirectedGraph,
    WeightedDigraph,
    binarize,
    load_matrix_csv,
    load_roster_csv,
    merge_roster_metadata,
    save_matrix_csv,
    save_roster_csv,
    symmetrize,
)
from .ingest import (
    AliasTable,
    EmailRecord,
    IngestDiagnostics,
    accumulate,
    cc_discount,
    default_alias_rules,
    drop_duplicates,
    ingest_corpus,
    load_alias_csv,
    parse_email,
    resolve,
    save_alias_csv,
)
from .report import (
    ComparisonReport,
    build_report,
    compute_all_measures,
    export_dot,
    rank_correlation,
)

__version__ = "0.1.0"

__all__ = [
    "AliasTable",
    "CentralityResult",
    "ClusterSet",
    "ComparisonReport",
    "ConfigError",
    "DissimilarityError",
    "DissimilarityMatrix",
    "EmailParseError",
    "EmailRecord",
    "IngestDiagnostics",
    "LinkageTree",
    "MailgraphError",
    "MatrixFormatError",
    "Merge",
    "NodeRoster",
    "PowerIterationError",
    "RosterEntry",
    "TomDomainError",
    "UndirectedGraph",
    "WeightedDigraph",
    "accumulate",
    "agglomerate",
    "betweenness",
    "binarize",
    "build_report",
    "cc_discount",
    "closeness",
    "cluster_graph",
    "compute_all_measures",
    "cut",
    "default_alias_rules",
    "degree",
    "dense_ranks",
    "dissimilarity",
    "drop_duplicates",
    "eigencentrality",
    "export_dendrogram",
    "export_dot",
    "ingest_corpus",
    "kappa",
    "load_alias_csv",
    "load_matrix_csv",
    "load_roster_csv",
    "merge_roster_metadata",
    "parse_email",
    "rank_correlation",
    "rank_of",
    "resolve",
    "save_alias_csv",
    "save_matrix_csv",
    "save_roster_csv",
    "strength",
    "symmetrize",
    "tom_centrality",
    "tom_matrix",
]
