"""Inductive invariant inference for parameterized protocols on finite instances."""

from .ctigen import CTI, CtiBatch, generate_ctis, replay_witness
from .errors import EngineError
from .evaluator import evaluate, holds, initial_state, successors
from .infer import (
    InductionReport,
    InferenceConfig,
    InferenceResult,
    check_induction,
    infer_inductive_invariant,
)
from .instance import Instance, State, enumerate_states, fingerprint, parse_instance, random_state, state_space_size
from .invgen import CandidateInvariant, LemmaRepository, generate_lemma_invariants, sample_candidate
from .parser import parse_expression, parse_grammar, parse_protocol
from .reachability import ReachSet, compute_reach, load_reach, save_reach
from .selection import choose_greedy, cover_report, eliminates
from .syntax import GrammarConfig, Protocol, canonicalize, to_str

__version__ = "0.1.0"

__all__ = [
    "CTI",
    "CandidateInvariant",
    "CtiBatch",
    "EngineError",
    "GrammarConfig",
    "InductionReport",
    "InferenceConfig",
    "InferenceResult",
    "Instance",
    "LemmaRepository",
    "Protocol",
    "ReachSet",
    "State",
    "canonicalize",
    "check_induction",
    "choose_greedy",
    "compute_reach",
    "cover_report",
    "eliminates",
    "enumerate_states",
    "evaluate",
    "fingerprint",
    "generate_ctis",
    "generate_lemma_invariants",
    "holds",
    "infer_inductive_invariant",
    "initial_state",
    "load_reach",
    "parse_expression",
    "parse_grammar",
    "parse_instance",
    "parse_protocol",
    "random_state",
    "replay_witness",
    "sample_candidate",
    "save_reach",
    "state_space_size",
    "successors",
    "to_str",
]
