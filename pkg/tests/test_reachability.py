from __future__ import annotations

import pytest

from indinv.errors import CorruptCacheError, ReachLimitError, StaleCacheError
from indinv.evaluator import holds, successors
from indinv.instance import fingerprint, parse_instance
from indinv.parser import parse_protocol
from indinv.reachability import compute_reach, load_reach, save_reach
from indinv import benchmarks

from . import oracles


def test_lockserver_1_1_has_two_reachable_states(lockserver_protocol):
    inst = parse_instance("Server=s1 Client=c1", lockserver_protocol)
    reach = compute_reach(lockserver_protocol, inst)
    assert len(reach) == 2
    snapshots = {oracles.freeze_state(s) for s in reach.states}
    assert snapshots == {
        oracles.o_freeze({"locked": {"s1": True}, "held": {"c1": frozenset()}}),
        oracles.o_freeze({"locked": {"s1": False}, "held": {"c1": frozenset({"s1"})}}),
    }


def test_reach_count_matches_fixpoint_oracle(lockserver_protocol, lockserver_instance):
    reach = compute_reach(lockserver_protocol, lockserver_instance)
    oracle = oracles.o_reach(lockserver_protocol, lockserver_instance)
    assert len(reach) == len(oracle)
    assert {oracles.freeze_state(s) for s in reach.states} == set(oracle)


def test_limit_one_errors(lockserver_protocol, lockserver_instance):
    with pytest.raises(ReachLimitError) as err:
        compute_reach(lockserver_protocol, lockserver_instance, limit=1)
    assert err.value.depth == 1
    assert err.value.count == 2


def test_reach_is_closed_under_successors(small_benchmarks):
    for name, (protocol, _, instance) in small_benchmarks.items():
        reach = compute_reach(protocol, instance)
        for s in reach.states:
            for t in successors(s, protocol, instance):
                assert fingerprint(t.post) in reach.index, name


def test_safety_holds_on_reach_for_all_benchmarks(small_benchmarks):
    for name, (protocol, _, instance) in small_benchmarks.items():
        reach = compute_reach(protocol, instance)
        assert all(holds(protocol.safety, s, instance) for s in reach.states), name


def test_bfs_discovery_order_is_deterministic(lockserver_protocol, lockserver_instance):
    a = compute_reach(lockserver_protocol, lockserver_instance)
    b = compute_reach(lockserver_protocol, lockserver_instance)
    assert [fingerprint(s) for s in a.states] == [fingerprint(s) for s in b.states]


def test_save_load_round_trip(tmp_path, lockserver_protocol, lockserver_instance):
    reach = compute_reach(lockserver_protocol, lockserver_instance)
    path = tmp_path / "lockserver.reach"
    save_reach(reach, str(path))
    loaded = load_reach(str(path), lockserver_protocol, lockserver_instance)
    assert loaded.states == reach.states
    assert loaded.index == reach.index
    assert loaded.protocol_digest == reach.protocol_digest


def test_load_with_edited_protocol_is_stale(tmp_path, lockserver_protocol, lockserver_instance):
    reach = compute_reach(lockserver_protocol, lockserver_instance)
    path = tmp_path / "lockserver.reach"
    save_reach(reach, str(path))
    text = benchmarks.protocol_path("lockserver").read_text()
    edited = parse_protocol(text.replace("require locked[s];", "require ~locked[s];"))
    with pytest.raises(StaleCacheError, match="stale"):
        load_reach(str(path), edited, lockserver_instance)


def test_load_with_other_instance_is_stale(tmp_path, lockserver_protocol, lockserver_instance):
    reach = compute_reach(lockserver_protocol, lockserver_instance)
    path = tmp_path / "lockserver.reach"
    save_reach(reach, str(path))
    other = parse_instance("Server=s1 Client=c1", lockserver_protocol)
    with pytest.raises(StaleCacheError):
        load_reach(str(path), lockserver_protocol, other)


def test_truncated_file_is_corrupt(tmp_path, lockserver_protocol, lockserver_instance):
    reach = compute_reach(lockserver_protocol, lockserver_instance)
    path = tmp_path / "lockserver.reach"
    save_reach(reach, str(path))
    data = path.read_bytes()
    path.write_bytes(data[: len(data) - 7])
    with pytest.raises(CorruptCacheError, match="truncated"):
        load_reach(str(path), lockserver_protocol, lockserver_instance)


def test_garbage_file_is_corrupt(tmp_path, lockserver_protocol, lockserver_instance):
    path = tmp_path / "bogus.reach"
    path.write_bytes(b"this is not a cache file at all")
    with pytest.raises(CorruptCacheError):
        load_reach(str(path), lockserver_protocol, lockserver_instance)
