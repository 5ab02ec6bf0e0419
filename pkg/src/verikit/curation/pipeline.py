"""Filter stack for round-trip curation.

Pipeline order: synthesizability, summarize (when x is missing), regenerate
(when y_prime is missing), round-trip equivalence, difficulty, benchmark
decontamination. Filters are independent predicates on the record, so the
kept set does not depend on the order; the order only decides which filter
gets credited on a record that would fail several.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from verikit.curation.llm import (
    ChatClient,
    FormatError,
    TransportError,
    summarize_code,
    synthesize_code,
)
from verikit.curation.records import DatasetRecord
from verikit.curation.rouge import rouge_l, tokenize_code
from verikit.equiv import CheckConfig, check_sources
from verikit.front.parser import ParseError, parse_source
from verikit.sim import ElaborationError, elaborate

__all__ = [
    "CurationConfig",
    "curate_records",
    "decontaminate",
    "difficulty_filter",
    "roundtrip_filter",
    "synthesizability_check",
]

DEFAULT_K_ATTEMPTS = 5
DEFAULT_ROUGE_THRESHOLD = 0.5


@dataclass
class CurationConfig:
    k_attempts: int = DEFAULT_K_ATTEMPTS
    rouge_threshold: float = DEFAULT_ROUGE_THRESHOLD
    # "any_pass": drop when any attempt is equivalent (distillation-style
    # difficulty). "all_pass": drop only when every attempt is equivalent
    # (RL-stage rule).
    difficulty_mode: str = "any_pass"
    check: CheckConfig = field(default_factory=CheckConfig)

    def __post_init__(self):
        if self.k_attempts < 1:
            raise ValueError("k_attempts must be at least 1")
        if not (0.0 < self.rouge_threshold <= 1.0):
            raise ValueError("rouge_threshold must be in (0, 1]")
        if self.difficulty_mode not in ("any_pass", "all_pass"):
            raise ValueError("difficulty_mode must be any_pass or all_pass")


def synthesizability_check(y_star: str) -> bool:
    """Pass iff the source parses and elaborates under this toolkit."""
    try:
        elaborate(parse_source(y_star))
        return True
    except (ParseError, ElaborationError, ValueError):
        return False


def roundtrip_filter(record: DatasetRecord, config: CurationConfig | None = None) -> bool:
    """Keep iff the regenerated code is equivalent to the original.

    Unsupported sources are routed to the "unsupported" bucket: the record
    is dropped with that evidence, never silently kept.
    """
    config = config or CurationConfig()
    if record.y_prime is None:
        record.drop("roundtrip", reason="no regenerated code")
        record.set_flag("roundtrip_equivalent", False)
        return False
    report = check_sources(record.y_star, record.y_prime, config.check)
    if report.verdict == "equivalent":
        record.set_flag("roundtrip_equivalent", True)
        return True
    record.set_flag("roundtrip_equivalent", False)
    if report.verdict == "unsupported":
        record.drop("roundtrip", bucket="unsupported", detail=report.detail)
    else:
        record.drop("roundtrip", verdict=report.verdict, epsilon=report.epsilon,
                    first_mismatch=report.first_mismatch)
    return False


def difficulty_filter(
    record: DatasetRecord,
    attempts: Sequence[str] | None = None,
    k: int | None = None,
    config: CurationConfig | None = None,
    client: ChatClient | None = None,
) -> bool:
    """Judge k candidate attempts against the golden code.

    Attempts come from the record (canned), the ``attempts`` argument, or,
    when both are absent and a client is given, k fresh generations from the
    record's instruction. any_pass mode drops the record as soon as one
    attempt is equivalent; all_pass mode drops it only when every attempt is.
    """
    config = config or CurationConfig()
    k = k if k is not None else config.k_attempts
    if k < 1:
        raise ValueError("k must be at least 1")
    attempts = list(attempts if attempts is not None else record.attempts)
    if not attempts and client is not None:
        if record.x is None:
            raise ValueError(f"record {record.id}: no instruction to sample from")
        for i in range(k):
            try:
                _thought, code, _warn = synthesize_code(record.x, client)
            except FormatError:
                code = ""  # a malformed attempt cannot be equivalent
            attempts.append(code)
        record.attempts = list(attempts)
    if len(attempts) < k:
        raise ValueError(f"record {record.id}: need {k} attempts, have {len(attempts)}")
    attempts = attempts[:k]
    verdicts = []
    passed = 0
    for i, attempt in enumerate(attempts):
        report = check_sources(record.y_star, attempt, config.check)
        verdicts.append(report.verdict)
        record.attempt_results.append(
            {"attempt": i, "verdict": report.verdict, "epsilon": report.epsilon}
        )
        if report.verdict == "equivalent":
            passed += 1
            if config.difficulty_mode == "any_pass":
                record.set_flag("difficulty_kept", False)
                record.drop("difficulty", attempt=i, verdict="equivalent",
                            mode=config.difficulty_mode)
                return False
    if config.difficulty_mode == "all_pass" and passed == len(attempts):
        record.set_flag("difficulty_kept", False)
        record.drop("difficulty", verdict="all attempts equivalent",
                    mode=config.difficulty_mode)
        return False
    record.set_flag("difficulty_kept", True)
    return True


def decontaminate(
    records: Iterable[DatasetRecord],
    benchmark_corpus: Sequence[str],
    threshold: float | None = None,
) -> tuple[list[DatasetRecord], list[DatasetRecord]]:
    """Partition records into (kept, dropped) by max Rouge-L against the
    benchmark corpus; a record is dropped when similarity exceeds the
    threshold. Scores use the regenerated code when present, else y_star."""
    threshold = DEFAULT_ROUGE_THRESHOLD if threshold is None else threshold
    bench_tokens = [tokenize_code(b) for b in benchmark_corpus]
    kept, dropped = [], []
    for rec in records:
        code = rec.y_prime if rec.y_prime is not None else rec.y_star
        toks = tokenize_code(code)
        best = 0.0
        best_idx = -1
        for i, bt in enumerate(bench_tokens):
            score = rouge_l(toks, bt)
            if score > best:
                best, best_idx = score, i
        if best > threshold:
            rec.set_flag("decontaminated", False)
            rec.drop("decontaminate", score=best, benchmark_index=best_idx,
                     threshold=threshold)
            dropped.append(rec)
        else:
            rec.set_flag("decontaminated", True)
            kept.append(rec)
    return kept, dropped


def curate_records(
    records: Iterable[DatasetRecord],
    config: CurationConfig | None = None,
    client: ChatClient | None = None,
    benchmark_corpus: Sequence[str] | None = None,
    run_difficulty: bool = True,
    baseline_client: ChatClient | None = None,
) -> tuple[list[DatasetRecord], list[DatasetRecord]]:
    """Run the full stack over the records; returns (kept, dropped).

    ``client`` fills in missing summaries and regenerations; on a transport
    or format failure the record is dropped with that evidence so a flaky
    endpoint cannot silently shrink the dataset. ``baseline_client``, when
    given, samples the k difficulty attempts for records without canned
    ones (the difficulty judge is a weaker model than the regenerator).
    """
    config = config or CurationConfig()
    kept: list[DatasetRecord] = []
    dropped: list[DatasetRecord] = []

    survivors: list[DatasetRecord] = []
    for rec in records:
        if rec.dropped:
            dropped.append(rec)
            continue
        ok = synthesizability_check(rec.y_star)
        rec.set_flag("synthesizable", ok)
        if not ok:
            rec.drop("synthesizability", reason="golden code does not elaborate")
            dropped.append(rec)
            continue

        if rec.x is None and client is not None:
            try:
                rec.x, _raw = summarize_code(rec.y_star, client)
            except (TransportError, FormatError) as e:
                rec.drop("summarize", error=str(e))
                dropped.append(rec)
                continue
        if rec.y_prime is None and client is not None and rec.x is not None:
            try:
                rec.c_prime, rec.y_prime, _warn = synthesize_code(rec.x, client)
            except (TransportError, FormatError) as e:
                rec.drop("synthesize", error=str(e))
                dropped.append(rec)
                continue

        if not roundtrip_filter(rec, config):
            dropped.append(rec)
            continue

        if run_difficulty and (rec.attempts or baseline_client is not None):
            if not difficulty_filter(rec, config=config, client=baseline_client):
                dropped.append(rec)
                continue
        survivors.append(rec)

    if benchmark_corpus:
        kept, decon_dropped = decontaminate(survivors, benchmark_corpus,
                                            config.rouge_threshold)
        dropped.extend(decon_dropped)
    else:
        kept = survivors
    return kept, dropped
