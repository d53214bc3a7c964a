"""Top-level inference loop and the finite-instance induction checker.

The loop keeps a candidate Ind, initially the safety predicate. While CTIs
of Ind exist it conjoins the repository lemma that eliminates the most of
them, then regenerates CTIs against the strengthened candidate. When no
lemma helps, it resamples the repository at the next term size a bounded
number of times before giving up; a failed run still returns the partial
conjunction since its lemmas are invariants in their own right.

Success means no CTI was found by sampling, which is evidence, not proof;
``check_induction`` then validates the result exhaustively on the instance
(or by sampling when the space is too large to enumerate).
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .ctigen import CTI, CtiBatch, generate_ctis
from .errors import ConfigError, EnumerationLimitError, UnsafeProtocolError
from .evaluator import Transition, holds, initial_state, successors
from .instance import (
    Instance,
    State,
    enumerate_states,
    format_state,
    random_state,
    state_space_size,
)
from .invgen import (
    GenStats,
    LemmaRepository,
    generate_lemma_invariants,
    term_size_schedule,
)
from .reachability import ReachSet, compute_reach
from .selection import choose_greedy
from .syntax import And, Expr, GrammarConfig, Protocol, canonical_text, to_str


@dataclass
class InferenceConfig:
    n_lemmas: int = 15000
    n_ctis: int = 50000
    cti_cap: int = 10000
    walk_depth: int = 3
    max_regen_rounds: int = 3
    seed: int = 0
    term_schedule: tuple[int, ...] | None = None  # None: use the grammar's
    reach_limit: int = 1_000_000
    enum_limit: int = 1_000_000
    workers_check: int = 1
    workers_cti: int = 1
    workers_elim: int = 1

    def validate(self) -> None:
        positive = {
            "n_lemmas": self.n_lemmas,
            "n_ctis": self.n_ctis,
            "cti_cap": self.cti_cap,
            "walk_depth": self.walk_depth,
            "reach_limit": self.reach_limit,
            "enum_limit": self.enum_limit,
            "workers_check": self.workers_check,
            "workers_cti": self.workers_cti,
            "workers_elim": self.workers_elim,
        }
        for name, value in positive.items():
            if value < 1:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.max_regen_rounds < 0:
            raise ConfigError("max_regen_rounds must be non-negative")
        if self.term_schedule is not None:
            last = 0
            for n in self.term_schedule:
                if n <= last:
                    raise ConfigError("term_schedule must be strictly increasing and positive")
                last = n

    def describe(self) -> str:
        schedule = (
            ",".join(str(n) for n in self.term_schedule)
            if self.term_schedule is not None
            else "grammar"
        )
        return (
            f"n_lemmas={self.n_lemmas} n_ctis={self.n_ctis} cti_cap={self.cti_cap} "
            f"walk_depth={self.walk_depth} max_regen_rounds={self.max_regen_rounds} "
            f"term_schedule={schedule} "
            f"workers={self.workers_check}/{self.workers_cti}/{self.workers_elim}"
        )


@dataclass
class PhaseTimes:
    total: float = 0.0
    check: float = 0.0
    elim: float = 0.0
    ctigen: float = 0.0


@dataclass
class InferenceResult:
    status: str  # 'success' | 'fail'
    conjuncts: list[Expr]  # safety first, then lemmas in selection order
    ctis_eliminated: int
    rounds: int  # lemma sampling rounds executed
    lemmas_sampled: int
    lemmas_kept: int
    times: PhaseTimes
    seed: int
    config: InferenceConfig
    instance_text: str

    @property
    def succeeded(self) -> bool:
        return self.status == "success"

    def conjunct_texts(self) -> list[str]:
        return [to_str(c) for c in self.conjuncts]


def conjunction(conjuncts: list[Expr]) -> Expr:
    return conjuncts[0] if len(conjuncts) == 1 else And(tuple(conjuncts))


def _schedule_at(grammar: GrammarConfig, config: InferenceConfig, round_no: int) -> int:
    if config.term_schedule is not None:
        idx = min(round_no, len(config.term_schedule)) - 1
        nterms = config.term_schedule[idx]
    else:
        nterms = term_size_schedule(grammar, round_no)
    return min(nterms, len(grammar.seeds))


def infer_inductive_invariant(
    protocol: Protocol,
    instance: Instance,
    grammar: GrammarConfig,
    config: InferenceConfig,
) -> InferenceResult:
    """Run the inference loop; deterministic at worker count 1 for a seed."""
    config.validate()
    rng = random.Random(config.seed)
    times = PhaseTimes()
    t_start = time.perf_counter()

    safety = protocol.safety
    conjuncts: list[Expr] = [safety]
    chosen_ids = {canonical_text(safety)}
    ind = conjunction(conjuncts)

    def ctis_for(current: Expr) -> CtiBatch:
        t0 = time.perf_counter()
        batch = generate_ctis(
            protocol, instance, current, config.n_ctis, config.walk_depth,
            config.cti_cap, rng, workers=config.workers_cti,
        )
        times.ctigen += time.perf_counter() - t0
        return batch

    batch = ctis_for(ind)
    eliminated_total = 0
    repo = LemmaRepository()
    gen_stats = GenStats()
    reach: ReachSet | None = None
    rounds = 0
    regens = 0

    def sample_round() -> None:
        nonlocal reach, rounds
        t0 = time.perf_counter()
        if reach is None:
            reach = compute_reach(protocol, instance, config.reach_limit)
            for s in reach.states:
                if not holds(safety, s, instance):
                    raise UnsafeProtocolError(
                        f"safety predicate fails at reachable state: {format_state(s)}"
                    )
        rounds += 1
        nterms = _schedule_at(grammar, config, rounds)
        generate_lemma_invariants(
            reach, grammar, repo, config.n_lemmas, nterms, rng,
            round_no=rounds, workers=config.workers_check, stats=gen_stats,
        )
        times.check += time.perf_counter() - t0

    if batch.ctis:
        sample_round()

    remaining: list[CTI] = list(batch.ctis)
    while remaining:
        t0 = time.perf_counter()
        choice = choose_greedy(
            repo, remaining, instance,
            exclude=frozenset(chosen_ids), workers=config.workers_elim,
        )
        times.elim += time.perf_counter() - t0
        if choice is None:
            if regens >= config.max_regen_rounds:
                times.total = time.perf_counter() - t_start
                return InferenceResult(
                    "fail", conjuncts, eliminated_total, rounds,
                    gen_stats.sampled, len(repo), times, config.seed, config,
                    instance.text(),
                )
            regens += 1
            sample_round()
            continue
        lemma, eliminated = choice
        conjuncts.append(lemma.closed)
        chosen_ids.add(lemma.id)
        eliminated_total += len(eliminated)
        # drop the eliminated CTIs, then regenerate against the strengthened
        # candidate; the regenerated batch replaces whatever survived
        gone = {c.fingerprint for c in eliminated}
        remaining = [c for c in remaining if c.fingerprint not in gone]
        ind = conjunction(conjuncts)
        batch = ctis_for(ind)
        remaining = list(batch.ctis)

    times.total = time.perf_counter() - t_start
    return InferenceResult(
        "success", conjuncts, eliminated_total, rounds,
        gen_stats.sampled, len(repo), times, config.seed, config, instance.text(),
    )


# ---------------------------------------------------------------------------
# Induction checking


@dataclass
class InductionReport:
    initiation_ok: bool
    initiation_witness: tuple[State, int] | None  # (state, conjunct index)
    consecution_ok: bool
    consecution_witness: tuple[State, Transition, int] | None
    strengthening_ok: bool
    strengthening_structural: bool
    strengthening_witness: State | None
    states_checked: int
    mode: str

    @property
    def passed(self) -> bool:
        return self.initiation_ok and self.consecution_ok and self.strengthening_ok

    def describe(self) -> str:
        verdict = "pass" if self.passed else "fail"
        return f"{verdict} mode={self.mode} states={self.states_checked}"


def check_induction(
    protocol: Protocol,
    instance: Instance,
    conjuncts: list[Expr],
    mode: str = "exhaustive",
    *,
    limit: int = 1_000_000,
    n_samples: int = 10000,
    seed: int = 0,
) -> InductionReport:
    """Initiation, consecution, and strengthening on one finite instance.

    Exhaustive mode enumerates every type-correct state (consecution over
    unreachable states included, as induction requires); sampled mode draws
    n_samples random states instead. Strengthening passes structurally when
    the first conjunct is the safety predicate, else it is checked state by
    state.
    """
    if mode not in ("exhaustive", "sampled"):
        raise ConfigError(f"unknown induction check mode {mode!r}")
    if not conjuncts:
        raise ConfigError("induction check needs at least one conjunct")

    init = initial_state(protocol, instance)
    initiation_ok = True
    initiation_witness: tuple[State, int] | None = None
    for i, c in enumerate(conjuncts):
        if not holds(c, init, instance):
            initiation_ok = False
            initiation_witness = (init, i)
            break

    structural = canonical_text(conjuncts[0]) == canonical_text(protocol.safety)

    if mode == "exhaustive":
        size = state_space_size(protocol, instance)
        if size > limit:
            raise EnumerationLimitError(
                f"state space has {size} states, exceeds exhaustive limit {limit}"
            )
        states = enumerate_states(protocol, instance)
    else:
        rng = random.Random(seed)
        states = (random_state(protocol, instance, rng) for _ in range(n_samples))

    # Scan the whole space: each condition gets a complete verdict with the
    # first witness found, not just whichever failure happens to come first.
    consecution_ok = True
    consecution_witness: tuple[State, Transition, int] | None = None
    strengthening_ok = True
    strengthening_witness: State | None = None
    checked = 0
    for s in states:
        checked += 1
        if not all(holds(c, s, instance) for c in conjuncts):
            continue
        if not structural and strengthening_ok and not holds(protocol.safety, s, instance):
            strengthening_ok = False
            strengthening_witness = s
        if consecution_ok:
            for t in successors(s, protocol, instance):
                violated = None
                for i, c in enumerate(conjuncts):
                    if not holds(c, t.post, instance):
                        violated = i
                        break
                if violated is not None:
                    consecution_ok = False
                    consecution_witness = (s, t, violated)
                    break

    return InductionReport(
        initiation_ok, initiation_witness,
        consecution_ok, consecution_witness,
        strengthening_ok, structural, strengthening_witness,
        checked, mode,
    )


# ---------------------------------------------------------------------------
# Reporting


def run_round_stats(result: InferenceResult) -> tuple[dict, str]:
    """Per-run stats as a machine-readable row and an aligned text table."""
    row = {
        "status": result.status,
        "time_s": round(result.times.total, 1),
        "ctis": result.ctis_eliminated,
        "check_s": round(result.times.check, 1),
        "elim_s": round(result.times.elim, 1),
        "ctigen_s": round(result.times.ctigen, 1),
        "conjuncts": len(result.conjuncts),
    }
    header = f"{'Time':>8} {'CTIs':>8} {'Check':>8} {'Elim':>8} {'CTIGen':>8}"
    values = (
        f"{row['time_s']:>8} {row['ctis']:>8} {row['check_s']:>8} "
        f"{row['elim_s']:>8} {row['ctigen_s']:>8}"
    )
    return row, header + "\n" + values


def render_result(
    result: InferenceResult,
    induction: InductionReport | None,
    protocol_name: str,
) -> str:
    """Stable, timing-free result file body; byte-identical across reruns."""
    lines = [
        f"status: {result.status}",
        f"protocol: {protocol_name}",
        f"instance: {result.instance_text}",
        f"seed: {result.seed}",
        f"config: {result.config.describe()}",
        f"conjuncts: {len(result.conjuncts)}",
    ]
    for i, text in enumerate(result.conjunct_texts(), start=1):
        lines.append(f"conjunct {i}: {text}")
    lines.append(f"rounds: {result.rounds}")
    lines.append(f"lemmas_sampled: {result.lemmas_sampled}")
    lines.append(f"lemmas_kept: {result.lemmas_kept}")
    lines.append(f"ctis_eliminated: {result.ctis_eliminated}")
    if induction is not None:
        lines.append(f"induction: {induction.describe()}")
    return "\n".join(lines) + "\n"
