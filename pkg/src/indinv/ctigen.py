"""Counterexample-to-induction generation by randomized simulation.

A sampled start state that satisfies the current candidate is walked forward
by uniformly random enabled transitions. If the walk hits a violating state
at step k, every earlier state on the walk satisfies the candidate by
construction, so all of them are counterexamples to induction; each is
recorded with its witness suffix.
"""
from __future__ import annotations

import hashlib
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .evaluator import Transition, apply_action, evaluate, holds, successors
from .instance import Instance, State, fingerprint, format_state, random_state
from .syntax import Expr, Protocol, to_str


@dataclass(frozen=True)
class CTI:
    state: State
    fingerprint: int
    witness: tuple[Transition, ...]
    depth_to_violation: int

    def __post_init__(self):
        assert self.depth_to_violation == len(self.witness) >= 1


@dataclass
class CtiBatch:
    ctis: list[CTI]
    samples_attempted: int
    ind_text: str

    def __len__(self) -> int:
        return len(self.ctis)

    def fingerprints(self) -> set[int]:
        return {c.fingerprint for c in self.ctis}


def _derive_seed(base: int, worker: int) -> int:
    h = hashlib.blake2b(f"{base}:{worker}".encode("ascii"), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def _sample_walks(
    protocol: Protocol,
    instance: Instance,
    ind: Expr,
    budget: int,
    depth: int,
    cap: int,
    rng: random.Random,
) -> tuple[list[CTI], int]:
    ctis: list[CTI] = []
    seen: set[int] = set()
    attempts = 0
    for _ in range(budget):
        if len(ctis) >= cap:
            break
        attempts += 1
        s0 = random_state(protocol, instance, rng)
        if not holds(ind, s0, instance):
            continue
        path = [s0]
        walk: list[Transition] = []
        for _step in range(depth):
            succs = successors(path[-1], protocol, instance)
            if not succs:
                break
            t = succs[rng.randrange(len(succs))]
            walk.append(t)
            if not holds(ind, t.post, instance):
                # states path[0..k-1] all satisfy ind; each becomes a CTI
                k = len(walk)
                for j in range(k):
                    fp = fingerprint(path[j])
                    if fp in seen:
                        continue
                    seen.add(fp)
                    ctis.append(CTI(path[j], fp, tuple(walk[j:]), k - j))
                    if len(ctis) >= cap:
                        break
                break
            path.append(t.post)
    return ctis, attempts


def generate_ctis(
    protocol: Protocol,
    instance: Instance,
    ind: Expr,
    n_ctis: int,
    depth: int,
    cap: int,
    rng: random.Random,
    workers: int = 1,
) -> CtiBatch:
    """Sample up to n_ctis start states and collect at most cap distinct CTIs.

    Deterministic given the rng at worker count 1; with more workers each one
    runs on a seed derived from (base draw, worker index), so the merged batch
    is deterministic for a fixed (seed, worker count) pair.
    """
    if depth < 1:
        raise ValueError("walk depth must be at least 1")
    if cap < 1:
        raise ValueError("CTI cap must be at least 1")
    ind_text = to_str(ind)
    if workers <= 1:
        ctis, attempts = _sample_walks(protocol, instance, ind, n_ctis, depth, cap, rng)
        return CtiBatch(ctis, attempts, ind_text)

    base = rng.getrandbits(64)
    budgets = [n_ctis // workers] * workers
    budgets[0] += n_ctis % workers
    merged: list[CTI] = []
    seen: set[int] = set()
    attempts = 0

    def run(idx: int):
        wrng = random.Random(_derive_seed(base, idx))
        return _sample_walks(protocol, instance, ind, budgets[idx], depth, cap, wrng)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for ctis, n in pool.map(run, range(workers)):
            attempts += n
            for c in ctis:
                if c.fingerprint not in seen and len(merged) < cap:
                    seen.add(c.fingerprint)
                    merged.append(c)
    return CtiBatch(merged, attempts, ind_text)


def replay_witness_diagnosis(
    cti: CTI, protocol: Protocol, instance: Instance, ind: Expr
) -> str | None:
    """None when the witness re-executes exactly; else names the failing step."""
    if fingerprint(cti.state) != cti.fingerprint:
        return "step 0: stored fingerprint does not match the start state"
    if not holds(ind, cti.state, instance):
        return "step 0: start state does not satisfy the predicate"
    if len(cti.witness) != cti.depth_to_violation:
        return "step 0: depth does not match the witness length"
    cur = cti.state
    last = len(cti.witness) - 1
    for i, t in enumerate(cti.witness):
        try:
            action = protocol.action(t.action)
        except KeyError:
            return f"step {i}: unknown action {t.action}"
        if tuple(n for n, _ in t.binding) != tuple(n for n, _ in action.params):
            return f"step {i}: binding does not match the parameters of {t.action}"
        env = dict(t.binding)
        if fingerprint(cur) != t.pre_fingerprint:
            return f"step {i}: pre-state fingerprint mismatch"
        if evaluate(action.guard, cur, env, instance) is not True:
            return f"step {i}: guard of {t.action} does not hold"
        post = apply_action(cur, action, env, protocol, instance)
        if post != t.post:
            return f"step {i}: post-state mismatch"
        if i == last:
            if holds(ind, post, instance):
                return f"step {i}: final state still satisfies the predicate"
        else:
            if not holds(ind, post, instance):
                return f"step {i}: intermediate state violates the predicate"
        cur = post
    return None


def replay_witness(cti: CTI, protocol: Protocol, instance: Instance, ind: Expr) -> bool:
    """True iff the recorded witness replays exactly and ends in violation."""
    return replay_witness_diagnosis(cti, protocol, instance, ind) is None


def dump_ctis(batch: CtiBatch) -> str:
    """Text dump of a batch for offline inspection, one record per CTI."""
    lines = [
        f"# CTIs of: {batch.ind_text}",
        f"# count: {len(batch.ctis)}  samples_attempted: {batch.samples_attempted}",
    ]
    for c in batch.ctis:
        actions = " -> ".join(
            "%s(%s)" % (t.action, ", ".join(el for _, el in t.binding))
            for t in c.witness
        )
        lines.append(f"state: {format_state(c.state)}")
        lines.append(f"  depth: {c.depth_to_violation}  witness: {actions}")
    return "\n".join(lines) + "\n"
