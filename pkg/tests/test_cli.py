from __future__ import annotations

from indinv import benchmarks
from indinv.cli import main

from . import oracles

A1_TEXT = "forall s: Server. forall c: Client. locked[s] -> ~(s in held[c])"
SAFE_TEXT = "forall ci: Client. forall cj: Client. held[ci] & held[cj] != {} -> ci = cj"

FAST = [
    "--n-lemmas", "1500", "--n-ctis", "4000",
    "--workers-check", "1", "--workers-cti", "1", "--workers-elim", "1",
]


def _infer_args(out, seed=0):
    return [
        "infer", "lockserver", "--grammar", "lockserver",
        "--seed", str(seed), "--out", str(out), *FAST,
    ]


def test_infer_success_exit_zero(tmp_path, capsys):
    out = tmp_path / "result.txt"
    assert main(_infer_args(out)) == 0
    content = out.read_text()
    assert "status: success" in content
    assert "conjuncts: 2" in content
    assert "induction: pass" in content
    stdout = capsys.readouterr().out
    assert "lockserver: success" in stdout


def test_infer_repeated_run_is_byte_identical(tmp_path):
    out1 = tmp_path / "r1.txt"
    out2 = tmp_path / "r2.txt"
    assert main(_infer_args(out1, seed=7)) == 0
    assert main(_infer_args(out2, seed=7)) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_infer_different_seeds_still_succeed(tmp_path):
    out = tmp_path / "r.txt"
    assert main(_infer_args(out, seed=5)) == 0


def test_infer_fail_exit_two(tmp_path):
    grammar = tmp_path / "useless.grammar"
    grammar.write_text("template forall s: Server.\nseed true\nmax_terms 1\n")
    out = tmp_path / "r.txt"
    code = main(
        [
            "infer", "lockserver", "--grammar", str(grammar),
            "--n-lemmas", "100", "--n-ctis", "1000", "--out", str(out),
        ]
    )
    assert code == 2
    assert "status: fail" in out.read_text()


def test_missing_grammar_file_exit_one(capsys):
    code = main(["infer", "lockserver", "--grammar", "/nope/missing.grammar"])
    assert code == 1
    assert "/nope/missing.grammar" in capsys.readouterr().err


def test_missing_protocol_file_exit_one(capsys):
    code = main(["reach", "/nope/missing.proto", "--instance", "A=a1"])
    assert code == 1
    assert "/nope/missing.proto" in capsys.readouterr().err


def test_parse_error_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.proto"
    bad.write_text("var x bool\n")
    code = main(["reach", str(bad), "--instance", ""])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_reach_prints_count(capsys):
    assert main(["reach", "lockserver", "--instance", "Server=s1 Client=c1"]) == 0
    assert capsys.readouterr().out.strip() == "2"


def test_reach_matches_oracle_at_default_instance(capsys, lockserver):
    protocol, _, instance = lockserver
    assert main(["reach", "lockserver"]) == 0
    printed = int(capsys.readouterr().out.strip())
    assert printed == len(oracles.o_reach(protocol, instance))


def test_reach_limit_exit_one(capsys):
    assert main(["reach", "lockserver", "--reach-limit", "1"]) == 1
    assert "limit" in capsys.readouterr().err


def test_reach_writes_cache(tmp_path, lockserver):
    cache = tmp_path / "lockserver.reach"
    assert main(["reach", "lockserver", "--out", str(cache)]) == 0
    from indinv.reachability import load_reach

    protocol, _, instance = lockserver
    loaded = load_reach(str(cache), protocol, instance)
    assert len(loaded) == 9


def test_check_known_invariant_exit_zero(tmp_path, capsys):
    inv = tmp_path / "ind.txt"
    inv.write_text(f"{SAFE_TEXT}\n{A1_TEXT}\n")
    assert main(["check", "lockserver", str(inv)]) == 0
    out = capsys.readouterr().out
    assert "initiation: pass" in out
    assert "consecution: pass" in out
    assert "states checked: 64" in out


def test_check_safety_alone_exit_two_with_witness(tmp_path, capsys):
    inv = tmp_path / "ind.txt"
    inv.write_text(SAFE_TEXT + "\n")
    assert main(["check", "lockserver", str(inv)]) == 2
    out = capsys.readouterr().out
    assert "consecution: fail" in out
    assert "transition:" in out
    assert "post-state:" in out


def test_check_unbound_variable_exit_one(tmp_path, capsys):
    inv = tmp_path / "ind.txt"
    inv.write_text("forall s: Server. locked[zzz]\n")
    assert main(["check", "lockserver", str(inv)]) == 1
    assert "unknown identifier" in capsys.readouterr().err


def test_check_missing_invariant_file_exit_one(capsys):
    assert main(["check", "lockserver", "/nope/ind.txt"]) == 1


def test_missing_instance_for_non_benchmark(tmp_path, capsys):
    proto = tmp_path / "tiny.proto"
    proto.write_text(benchmarks.protocol_path("lockserver").read_text())
    code = main(["reach", str(proto)])
    assert code == 1
    assert "--instance" in capsys.readouterr().err


def test_bundled_names_resolve_with_or_without_extension(capsys):
    assert main(["reach", "lockserver.proto", "--instance", "Server=s1 Client=c1"]) == 0
    capsys.readouterr()


def test_exit_codes_are_only_0_1_2(tmp_path):
    outcomes = set()
    outcomes.add(main(["reach", "lockserver"]))
    outcomes.add(main(["reach", "lockserver", "--reach-limit", "1"]))
    inv = tmp_path / "safe.txt"
    inv.write_text(SAFE_TEXT + "\n")
    outcomes.add(main(["check", "lockserver", str(inv)]))
    assert outcomes <= {0, 1, 2}
