"""Round-trip dataset curation: summarize, regenerate, and filter."""

from verikit.curation.records import DatasetRecord, read_jsonl, write_jsonl
from verikit.curation.rouge import rouge_l, tokenize_code, tokenize_text
from verikit.curation.llm import (
    ChatClient,
    FormatError,
    LlmEndpoint,
    TransportError,
    parse_tagged_response,
    summarize_code,
    synthesize_code,
)
from verikit.curation.pipeline import (
    CurationConfig,
    curate_records,
    decontaminate,
    difficulty_filter,
    roundtrip_filter,
    synthesizability_check,
)

__all__ = [
    "ChatClient",
    "CurationConfig",
    "DatasetRecord",
    "FormatError",
    "LlmEndpoint",
    "TransportError",
    "curate_records",
    "decontaminate",
    "difficulty_filter",
    "parse_tagged_response",
    "read_jsonl",
    "rouge_l",
    "roundtrip_filter",
    "summarize_code",
    "synthesize_code",
    "synthesizability_check",
    "tokenize_code",
    "tokenize_text",
    "write_jsonl",
]
