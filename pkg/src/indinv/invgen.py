"""Candidate lemma sampling and filtering against the reachable states.

A candidate is a disjunction of distinct seed predicates, each negated with
probability one half, placed under the grammar's quantifier template. A
candidate survives only if it holds on every reachable state; checking a
candidate stops at the first falsifying state.
"""
from __future__ import annotations

import hashlib
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

from .errors import EngineError
from .evaluator import holds
from .instance import State
from .reachability import ReachSet
from .syntax import (
    Expr,
    GrammarConfig,
    Not,
    Or,
    Quant,
    canonical_text,
    canonicalize,
    to_str,
)


@dataclass(frozen=True)
class CandidateInvariant:
    template: tuple[tuple[str, str, str], ...]
    literals: tuple[tuple[int, bool], ...]  # (seed index, negated)
    closed: Expr
    id: str

    def __str__(self) -> str:
        return self.id


def build_candidate(
    grammar: GrammarConfig, literals: tuple[tuple[int, bool], ...]
) -> CandidateInvariant:
    parts = []
    for idx, negated in literals:
        seed = grammar.seeds[idx]
        parts.append(Not(seed) if negated else seed)
    body: Expr = parts[0] if len(parts) == 1 else Or(tuple(parts))
    closed = body
    for kind, var, sort in reversed(grammar.template):
        closed = Quant(kind, var, sort, closed)
    closed = canonicalize(closed)
    return CandidateInvariant(
        grammar.template, tuple(sorted(literals)), closed, to_str(closed)
    )


def _is_tautological(grammar: GrammarConfig, literals) -> bool:
    # Seeds are stored canonicalized, so a literal cancels another exactly
    # when its canonical negation prints identically.
    texts = set()
    negated_texts = set()
    for idx, negated in literals:
        lit = Not(grammar.seeds[idx]) if negated else grammar.seeds[idx]
        texts.add(canonical_text(lit))
        negated_texts.add(canonical_text(Not(lit)))
    return bool(texts & negated_texts)


def sample_candidate(
    grammar: GrammarConfig, nterms: int, rng: random.Random
) -> CandidateInvariant:
    """Uniform draw of nterms distinct seeds, each negated with probability 1/2."""
    nseeds = len(grammar.seeds)
    if not 1 <= nterms <= nseeds:
        raise ValueError(f"nterms {nterms} out of range 1..{nseeds}")
    for _ in range(100):
        idxs = rng.sample(range(nseeds), nterms)
        literals = tuple((i, rng.random() < 0.5) for i in idxs)
        if _is_tautological(grammar, literals):
            continue
        return build_candidate(grammar, literals)
    raise EngineError("grammar admits only tautological candidates at this size")


@dataclass(frozen=True)
class LemmaMeta:
    round_added: int
    sample_no: int


class LemmaRepository:
    """Ordered, id-deduplicated store of lemma invariants."""

    def __init__(self) -> None:
        self._lemmas: list[CandidateInvariant] = []
        self._meta: dict[str, LemmaMeta] = {}

    def add(self, cand: CandidateInvariant, round_added: int = 0, sample_no: int = 0) -> bool:
        if cand.id in self._meta:
            return False
        self._lemmas.append(cand)
        self._meta[cand.id] = LemmaMeta(round_added, sample_no)
        return True

    def meta(self, lemma_id: str) -> LemmaMeta:
        return self._meta[lemma_id]

    def __contains__(self, lemma_id: str) -> bool:
        return lemma_id in self._meta

    def __len__(self) -> int:
        return len(self._lemmas)

    def __iter__(self) -> Iterator[CandidateInvariant]:
        return iter(self._lemmas)

    def dump(self) -> str:
        lines = [f"# lemma repository: {len(self._lemmas)} invariants"]
        for lemma in self._lemmas:
            m = self._meta[lemma.id]
            lines.append(f"# round={m.round_added} sample={m.sample_no}")
            lines.append(lemma.id)
        return "\n".join(lines) + "\n"


@dataclass
class GenStats:
    sampled: int = 0
    duplicates: int = 0
    kept: int = 0
    rejected: int = 0
    evals: int = 0


def _partition(lemma_id: str, workers: int) -> int:
    h = hashlib.blake2b(lemma_id.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(h, "big") % workers


def generate_lemma_invariants(
    reach: ReachSet,
    grammar: GrammarConfig,
    repo: LemmaRepository,
    n_lemmas: int,
    nterms: int,
    rng: random.Random,
    *,
    round_no: int = 1,
    workers: int = 1,
    on_reject: Callable[[CandidateInvariant, State], None] | None = None,
    stats: GenStats | None = None,
) -> LemmaRepository:
    """Draw n_lemmas candidates and keep those true on every reachable state.

    Duplicate draws are discarded, not re-drawn; n_lemmas counts draws. The
    surviving set is a pure function of the rng stream regardless of the
    worker count, because work is partitioned by candidate id.
    """
    if not reach.states:
        raise ValueError("reachable set is empty")
    stats = stats if stats is not None else GenStats()

    fresh: list[tuple[int, CandidateInvariant]] = []
    batch_ids: set[str] = set()
    for sample_no in range(n_lemmas):
        cand = sample_candidate(grammar, nterms, rng)
        stats.sampled += 1
        if cand.id in repo or cand.id in batch_ids:
            stats.duplicates += 1
            continue
        batch_ids.add(cand.id)
        fresh.append((sample_no, cand))

    instance = reach.instance
    states = reach.states

    def falsifier(cand: CandidateInvariant) -> tuple[State | None, int]:
        evals = 0
        for s in states:
            evals += 1
            if not holds(cand.closed, s, instance):
                return s, evals
        return None, evals

    verdicts: dict[str, State | None] = {}
    if workers <= 1 or len(fresh) <= 1:
        for _, cand in fresh:
            bad, evals = falsifier(cand)
            stats.evals += evals
            verdicts[cand.id] = bad
    else:
        shards: list[list[CandidateInvariant]] = [[] for _ in range(workers)]
        for _, cand in fresh:
            shards[_partition(cand.id, workers)].append(cand)

        def run_shard(shard: list[CandidateInvariant]):
            return [(c.id, *falsifier(c)) for c in shard]

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(run_shard, shards):
                for cid, bad, evals in result:
                    stats.evals += evals
                    verdicts[cid] = bad

    for sample_no, cand in fresh:
        bad = verdicts[cand.id]
        if bad is None:
            repo.add(cand, round_added=round_no, sample_no=sample_no)
            stats.kept += 1
        else:
            stats.rejected += 1
            if on_reject is not None:
                on_reject(cand, bad)
    return repo


def term_size_schedule(grammar: GrammarConfig, round_no: int) -> int:
    """Term count for a sampling round; clamps to the last schedule entry."""
    if round_no < 1:
        raise ValueError("round number starts at 1")
    idx = min(round_no, len(grammar.max_terms)) - 1
    return grammar.max_terms[idx]
