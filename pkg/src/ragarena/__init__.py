"""Self-hosted RAG challenge stack: indices, pipeline, judging, sessions."""
from .benchgen import BenchConfig, QAPair, default_config, generate_benchmark
from .corpus import Chunk, Document, chunk_corpus, chunk_document, load_corpus
from .dense import DenseIndex, DensePolicy, HashEmbedder
from .errors import (
    ConfigurationError,
    DeadlineError,
    GenerationError,
    NotFoundError,
    ParseError,
    RagArenaError,
    TransportError,
    ValidationError,
)
from .judge import JudgeConfig, MockJudgeBackend, QuestionScore, evaluate_submission
from .manual_eval import AnnotationEntry, AnnotationSet, borda_aggregate, pearson
from .orchestrator import LeaderboardEntry, Orchestrator, Session, TeamInfo
from .pipeline import AnswerRecord, PipelineConfig, answer_batch, answer_question
from .retrieval import RetrievalConfig, RetrievedPassage, retrieve, rrf_fuse
from .sparse import BM25Params, SparseIndex, bm25_score, build_sparse, search_sparse

__version__ = "0.1.0"

__all__ = [
    "AnnotationEntry",
    "AnnotationSet",
    "AnswerRecord",
    "BM25Params",
    "BenchConfig",
    "Chunk",
    "ConfigurationError",
    "DeadlineError",
    "DenseIndex",
    "DensePolicy",
    "Document",
    "GenerationError",
    "HashEmbedder",
    "JudgeConfig",
    "LeaderboardEntry",
    "MockJudgeBackend",
    "NotFoundError",
    "Orchestrator",
    "ParseError",
    "PipelineConfig",
    "QAPair",
    "QuestionScore",
    "RagArenaError",
    "RetrievalConfig",
    "RetrievedPassage",
    "Session",
    "SparseIndex",
    "TeamInfo",
    "TransportError",
    "ValidationError",
    "answer_batch",
    "answer_question",
    "bm25_score",
    "borda_aggregate",
    "build_sparse",
    "chunk_corpus",
    "chunk_document",
    "default_config",
    "evaluate_submission",
    "generate_benchmark",
    "load_corpus",
    "pearson",
    "retrieve",
    "rrf_fuse",
    "search_sparse",
    "__version__",
]
