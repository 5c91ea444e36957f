"""Community detection on social-network graphs by prompting
chat-completion models.

The pipeline serializes a graph into natural-language connectivity
lines, asks a model which community each node belongs to, parses the
structured reply, merges chunked answers, and scores the result
against ground truth with NMI, ARI, VOI, and purity. Deterministic
mock providers make every stage testable offline.
"""

from .baseline import LPConfig, label_propagation
from .datasets import DATASETS, DatasetInfo, dataset_paths, list_datasets, load_dataset
from .errors import (
    AlignmentError,
    AuthError,
    ChunkBudgetError,
    ConfigError,
    ContextLengthError,
    DataError,
    EdgeListParseError,
    LabelFileError,
    LlmcdError,
    MalformedReplyError,
    NoOverlapError,
    ProviderError,
    RetriesExhaustedError,
    UnknownNodeError,
)
from .estimators import LabelPropagationDetector, LLMCommunityDetector, as_graph
from .gateway import (
    ChatRequest,
    ChatResponse,
    HttpProvider,
    Provider,
    ProviderConfig,
    ReplayCache,
    complete,
    load_provider_config,
)
from .graph import (
    Graph,
    GraphStats,
    Partition,
    format_edge_list,
    format_labels,
    graph_stats,
    load_edge_list,
    load_labels,
    neighbors,
    symmetrize,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    RunRecord,
    aggregate,
    emit_report,
    resolve_provider,
    run_experiment,
)
from .metrics import (
    ContingencyTable,
    CoverageWarning,
    MetricReport,
    ari,
    contingency,
    nmi,
    purity,
    restrict_to_common,
    score_partitions,
    voi,
)
from .mocks import BaselineBrain, Canned, EchoOracle, Noisy, make_mock
from .parsing import (
    LabelAlignment,
    ParseDiagnostics,
    align_labels,
    merge_chunks,
    parse_assignments,
    render_assignments,
)
from .pipeline import DetectionResult, detect_communities
from .prompts import (
    DEFAULT_VARIANT_ID,
    PromptBundle,
    PromptVariant,
    list_variants,
    render_prompt,
)
from .serialize import (
    GraphText,
    NodeChunk,
    chunk_plan_json,
    estimate_tokens,
    parse_graph_text,
    plan_chunks,
    serialize,
    serialize_nodes,
)
from .viz import PALETTE, UNCOVERED_COLOR, export_dot

__version__ = "0.1.0"
