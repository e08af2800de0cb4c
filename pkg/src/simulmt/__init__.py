"""Simultaneous translation by a policy agent and a translation agent sharing a memory."""

from .core import (
    Action,
    BoundaryConfig,
    IdentityTokenizer,
    Memory,
    MemoryView,
    RuleTokenizer,
    SentencePair,
    SessionTrace,
    TokenLevelPolicy,
    WordLevelPolicy,
    build_sentence_pair,
)
from .errors import *  # noqa: F401,F403
from .metrics import average_lagging, computation_aware_al, corpus_bleu, difficulty_partition, hallucination_rate
from .orchestrator import FakeClock, SessionConfig, SourceStream, WallClock, run_corpus, run_session
from .policy import apply_boundary, induced_policy, scripted_agent, token_to_word_policy, waitk_agent
from .translator import PromptTemplate, http_translator, mock_translator
from .data import build_prefix_pair, emit_sft_dataset

__version__ = "0.1.0"
