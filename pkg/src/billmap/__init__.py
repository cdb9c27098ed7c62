"""billmap: manifold learning over legislative bill metadata.

Builds fuzzy k-nearest-neighbor graph embeddings of bill-level feature
spaces, supports supervised projection of new bills onto a learned
manifold, and ships the ingestion, evaluation, experiment, and plotting
machinery around it.
"""

from .encoding import BillEncoder, FeatureMatrix
from .errors import (
    ArgumentError,
    BillmapError,
    CorpusError,
    DataError,
    FetchError,
    ModelCompatibilityError,
    ModelFormatError,
    NumericError,
    PageDecodeError,
    RowError,
    SchemaError,
)
from .estimator import ManifoldEmbedding
from .experiments import (
    GridSpec,
    RunSettings,
    run_era_experiment,
    run_grid,
    run_random_split_experiment,
)
from .fuzzy import FuzzyGraph, build_fuzzy_graph, calibrate_sigma
from .ingest import (
    CatalogQuery,
    ClientConfig,
    ColumnSchema,
    fetch_bills,
    load_corpus,
    save_corpus,
    split_corpus,
)
from .metrics import (
    AlignmentReport,
    alignment_report,
    neighborhood_purity,
    trustworthiness,
)
from .neighbors import NeighborGraph, knn_approx, knn_exact
from .optim import (
    Embedding,
    EmbeddingConfig,
    LowDimKernel,
    cross_entropy,
    fit_kernel,
    initialize,
    optimize,
)
from .projector import (
    EmbeddingModel,
    ProjectionResult,
    fit_model,
    load_model,
    save_model,
    transform,
)
from .records import BillRecord, BillType, Chamber, Corpus, Era, Party

__version__ = "0.1.0"

__all__ = [
    "AlignmentReport",
    "ArgumentError",
    "BillEncoder",
    "BillRecord",
    "BillType",
    "BillmapError",
    "CatalogQuery",
    "Chamber",
    "ClientConfig",
    "ColumnSchema",
    "Corpus",
    "CorpusError",
    "DataError",
    "Embedding",
    "EmbeddingConfig",
    "EmbeddingModel",
    "Era",
    "FeatureMatrix",
    "FetchError",
    "FuzzyGraph",
    "GridSpec",
    "LowDimKernel",
    "ManifoldEmbedding",
    "ModelCompatibilityError",
    "ModelFormatError",
    "NeighborGraph",
    "NumericError",
    "PageDecodeError",
    "Party",
    "ProjectionResult",
    "RowError",
    "RunSettings",
    "SchemaError",
    "alignment_report",
    "build_fuzzy_graph",
    "calibrate_sigma",
    "cross_entropy",
    "fetch_bills",
    "fit_kernel",
    "fit_model",
    "initialize",
    "knn_approx",
    "knn_exact",
    "load_corpus",
    "load_model",
    "neighborhood_purity",
    "optimize",
    "run_era_experiment",
    "run_grid",
    "run_random_split_experiment",
    "save_corpus",
    "save_model",
    "split_corpus",
    "transform",
    "trustworthiness",
]
