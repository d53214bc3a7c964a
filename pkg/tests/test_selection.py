from __future__ import annotations

import itertools
import random

from indinv.ctigen import CTI, generate_ctis
from indinv.evaluator import Transition
from indinv.instance import enumerate_states, fingerprint, parse_instance
from indinv.invgen import LemmaRepository, build_candidate
from indinv.parser import parse_expression
from indinv.selection import build_matrix, choose_greedy, cover_report, eliminates
from indinv.syntax import GrammarConfig, canonicalize


def _mk_cti(state):
    # selection only reads the state and fingerprint; witness is a stub
    t = Transition("stub", (), fingerprint(state), state)
    return CTI(state, fingerprint(state), (t,), 1)


def _enum_setup(enum_protocol):
    instance = parse_instance("", enum_protocol)
    seeds = tuple(
        canonicalize(parse_expression(f"x = e{i}", enum_protocol)) for i in range(1, 6)
    )
    grammar = GrammarConfig((), seeds, (1, 2, 3))
    states = {s.value("x"): s for s in enumerate_states(enum_protocol, instance)}
    return instance, grammar, states


def test_lemma_with_max_count_wins(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states[f"e{i}"]) for i in range(1, 6)]
    l1 = build_candidate(grammar, ((2, False), (3, False), (4, False)))  # false on e1,e2
    l2 = build_candidate(grammar, ((0, False), (4, False)))  # false on e2,e3,e4
    repo = LemmaRepository()
    repo.add(l1)
    repo.add(l2)
    choice = choose_greedy(repo, ctis, instance)
    assert choice is not None
    lemma, eliminated = choice
    assert lemma.id == l2.id
    assert len(eliminated) == 3


def test_no_eliminator_returns_none(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states["e1"])]
    repo = LemmaRepository()
    # true on every state, so it never eliminates anything
    always_true = build_candidate(
        GrammarConfig((), (canonicalize(parse_expression("true", enum_protocol)),), (1,)),
        ((0, False),),
    )
    repo.add(always_true)
    assert choose_greedy(repo, ctis, instance) is None
    assert choose_greedy(LemmaRepository(), ctis, instance) is None


def test_tie_breaks_prefer_fewer_literals_then_smaller_id(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states["e1"]), _mk_cti(states["e2"])]
    one_literal = build_candidate(grammar, ((2, False),))  # x = e3
    two_literals = build_candidate(grammar, ((2, False), (3, False)))  # x = e3 \/ x = e4
    repo = LemmaRepository()
    repo.add(two_literals)
    repo.add(one_literal)
    lemma, eliminated = choose_greedy(repo, ctis, instance)
    assert lemma.id == one_literal.id
    assert len(eliminated) == 2

    # same literal count: lexicographically smaller id wins
    e3 = build_candidate(grammar, ((2, False),))
    e4 = build_candidate(grammar, ((3, False),))
    repo2 = LemmaRepository()
    repo2.add(e4)
    repo2.add(e3)
    lemma2, _ = choose_greedy(repo2, ctis, instance)
    assert lemma2.id == min(e3.id, e4.id)


def test_excluded_ids_are_skipped(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states["e1"])]
    best = build_candidate(grammar, ((1, False),))
    repo = LemmaRepository()
    repo.add(best)
    assert choose_greedy(repo, ctis, instance) is not None
    assert choose_greedy(repo, ctis, instance, exclude=frozenset([best.id])) is None


def test_eliminates_examples(lockserver):
    protocol, grammar, instance = lockserver
    a1 = build_candidate(grammar, ((0, True), (1, True)))
    true_lemma = build_candidate(
        GrammarConfig((), (canonicalize(parse_expression("true", protocol)),), (1,)),
        ((0, False),),
    )
    safe_batch = generate_ctis(
        protocol, instance, protocol.safety, 5000, 1, 10000, random.Random(0)
    )
    assert len(safe_batch) > 0
    eliminated_by_a1 = 0
    for cti in safe_batch.ctis:
        # a CTI of Safe satisfies Safe, so Safe itself never eliminates it
        assert not eliminates_safe(protocol, cti, instance)
        assert not eliminates(true_lemma, cti, instance)
        if eliminates(a1, cti, instance):
            eliminated_by_a1 += 1
    assert eliminated_by_a1 > 0


def eliminates_safe(protocol, cti, instance):
    from indinv.evaluator import holds

    return not holds(protocol.safety, cti.state, instance)


def test_eliminates_the_locked_and_held_state(lockserver):
    # the state with locked[s1] and s1 in held[c1] falsifies the known lemma
    from indinv.instance import MapV, State, state_schema

    protocol, grammar, instance = lockserver
    a1 = build_candidate(grammar, ((0, True), (1, True)))
    schema = state_schema(protocol)
    state = State(
        schema,
        (
            MapV((("s1", True), ("s2", True))),
            MapV((("c1", frozenset({"s1"})), ("c2", frozenset()))),
        ),
    )
    assert eliminates(a1, _mk_cti(state), instance)


def test_cover_report_count_matches_per_cti_recount(lockserver):
    protocol, grammar, instance = lockserver
    batch = generate_ctis(
        protocol, instance, protocol.safety, 5000, 3, 10000, random.Random(1)
    )
    a1 = build_candidate(grammar, ((0, True), (1, True)))
    repo = LemmaRepository()
    repo.add(a1)
    report = cover_report(repo, batch.ctis, instance)
    from indinv.evaluator import holds

    recount = sum(1 for c in batch.ctis if not holds(a1.closed, c.state, instance))
    assert report.counts[a1.id] == recount
    assert recount > 0


def test_cover_report_counts(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states[f"e{i}"]) for i in range(1, 4)]
    l1 = build_candidate(grammar, ((0, False),))  # x = e1: false on e2,e3
    l2 = build_candidate(grammar, ((3, False),))  # x = e4: false on e1,e2,e3
    repo = LemmaRepository()
    repo.add(l1)
    repo.add(l2)
    report = cover_report(repo, ctis, instance)
    assert report.counts == {l1.id: 2, l2.id: 3}
    assert report.uncoverable == 0
    assert report.matrix.cell_count == len(repo) * len(ctis)


def test_cover_report_empty_cti_set(enum_protocol):
    instance, grammar, _ = _enum_setup(enum_protocol)
    repo = LemmaRepository()
    repo.add(build_candidate(grammar, ((0, False),)))
    report = cover_report(repo, [], instance)
    assert all(count == 0 for count in report.counts.values())
    assert report.uncoverable == 0
    assert report.matrix.cell_count == 0


def test_cover_report_flags_uncoverable(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states["e1"]), _mk_cti(states["e2"])]
    l1 = build_candidate(grammar, ((1, True),))  # ~(x = e2): false only on e2
    repo = LemmaRepository()
    repo.add(l1)
    report = cover_report(repo, ctis, instance)
    assert report.uncoverable == 1


def test_matrix_cells_match_eliminates(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states[f"e{i}"]) for i in range(1, 6)]
    repo = LemmaRepository()
    for idxs in itertools.combinations(range(5), 2):
        repo.add(build_candidate(grammar, tuple((i, False) for i in idxs)))
    matrix = build_matrix(repo, ctis, instance)
    for row, lemma in enumerate(repo):
        for col, cti in enumerate(ctis):
            assert matrix.cells[row][col] == eliminates(lemma, cti, instance)


def test_greedy_maximality_on_random_fixtures(lockserver):
    protocol, grammar, instance = lockserver
    batch = generate_ctis(
        protocol, instance, protocol.safety, 6000, 3, 10000, random.Random(2)
    )
    pool = [
        build_candidate(grammar, tuple(zip(idxs, negs)))
        for n in (1, 2)
        for idxs in itertools.combinations(range(3), n)
        for negs in itertools.product([False, True], repeat=n)
    ]
    rng = random.Random(5)
    for _ in range(100):
        repo = LemmaRepository()
        for cand in rng.sample(pool, rng.randint(2, len(pool))):
            repo.add(cand)
        ctis = rng.sample(batch.ctis, rng.randint(1, min(20, len(batch.ctis))))
        choice = choose_greedy(repo, ctis, instance)
        counts = {
            lemma.id: sum(1 for c in ctis if eliminates(lemma, c, instance))
            for lemma in repo
        }
        if choice is None:
            assert all(count == 0 for count in counts.values())
            continue
        lemma, eliminated = choice
        assert len(eliminated) == counts[lemma.id]
        assert counts[lemma.id] == max(counts.values())
        best = min(
            (
                (-count, len(l.literals), l.id)
                for l in repo
                if (count := counts[l.id]) > 0
            ),
        )
        assert (-counts[lemma.id], len(lemma.literals), lemma.id) == best


def test_eliminated_ctis_fail_the_strengthened_candidate(lockserver):
    # conjoining the chosen lemma makes every eliminated CTI violate the
    # new candidate, so the outer loop's CTI set shrinks monotonically
    from indinv.evaluator import holds
    from indinv.syntax import And

    protocol, grammar, instance = lockserver
    batch = generate_ctis(
        protocol, instance, protocol.safety, 6000, 3, 10000, random.Random(3)
    )
    pool = [
        build_candidate(grammar, tuple(zip(idxs, negs)))
        for n in (1, 2)
        for idxs in itertools.combinations(range(3), n)
        for negs in itertools.product([False, True], repeat=n)
    ]
    repo = LemmaRepository()
    for cand in pool:
        repo.add(cand)
    lemma, eliminated = choose_greedy(repo, batch.ctis, instance)
    strengthened = And((protocol.safety, lemma.closed))
    assert eliminated
    for cti in eliminated:
        assert not holds(strengthened, cti.state, instance)


def test_choice_is_deterministic(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states[f"e{i}"]) for i in range(1, 6)]
    repo = LemmaRepository()
    for i in range(5):
        repo.add(build_candidate(grammar, ((i, False),)))
    first = choose_greedy(repo, ctis, instance)
    for _ in range(5):
        again = choose_greedy(repo, ctis, instance)
        assert again[0].id == first[0].id
        assert [c.fingerprint for c in again[1]] == [c.fingerprint for c in first[1]]


def test_worker_count_does_not_change_choice(enum_protocol):
    instance, grammar, states = _enum_setup(enum_protocol)
    ctis = [_mk_cti(states[f"e{i}"]) for i in range(1, 6)]
    repo = LemmaRepository()
    for i in range(5):
        repo.add(build_candidate(grammar, ((i, False),)))
    a = choose_greedy(repo, ctis, instance, workers=1)
    b = choose_greedy(repo, ctis, instance, workers=4)
    assert a[0].id == b[0].id
