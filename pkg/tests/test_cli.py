import io
import json
import os
import subprocess
import sys

import jsonschema
import pytest

from conftest import ROOT, corpus_files
from sociable import load, refines
from sociable.cli import EXIT_NO, EXIT_USAGE, EXIT_YES, VERDICT_SCHEMA, run
from sociable.composition import IncompatibleError, compose
from sociable.parser import parse_expr
from sociable.safety import check

GOLDEN = ROOT / "tests" / "golden"
UPDATE = os.environ.get("UPDATE_GOLDEN") == "1"

# (golden name, argv)
CASES = [
    ("compose_fire", ["compose", "corpus/fire.si", "-m", "Fire", "-m", "Guard"]),
    ("compose_fire_variant", ["compose", "corpus/fire_variant.si", "-m", "Fire", "-m", "Guard"]),
    ("compose_handshake", ["compose", "corpus/handshake.si", "-m", "Client", "-m", "Server"]),
    ("compose_handshake_eager", ["compose", "corpus/handshake.si", "-m", "Client", "-m", "EagerServer"]),
    ("compose_optimism", ["compose", "corpus/optimism.si", "-m", "Sender", "-m", "Receiver"]),
    ("compose_ping", ["compose", "corpus/ping.si", "-m", "Alice", "-m", "Bob"]),
    ("refine_fire_self", ["refine", "corpus/fire.si", "-m", "Fire", "-m", "Fire"]),
    ("refine_impl_spec", ["refine", "corpus/refine.si", "-m", "Impl", "-m", "Spec"]),
    ("refine_chatty_spec", ["refine", "corpus/refine.si", "-m", "Chatty", "-m", "Spec"]),
    ("refine_picky_spec", ["refine", "corpus/refine.si", "-m", "Picky", "-m", "Spec"]),
    ("refine_spec_impl", ["refine", "corpus/refine.si", "-m", "Spec", "-m", "Impl"]),
    ("check_guard_optimistic", ["check", "corpus/fire.si", "-m", "Guard", "--invariant", "!seen",
                                "--mode", "optimistic"]),
    ("check_guard_pessimistic", ["check", "corpus/fire.si", "-m", "Guard", "--invariant", "!seen",
                                 "--mode", "pessimistic"]),
    ("check_fire_pessimistic", ["check", "corpus/fire.si", "-m", "Fire", "--invariant", "!alarm",
                                "--mode", "pessimistic"]),
    ("check_fire_optimistic", ["check", "corpus/fire.si", "-m", "Fire", "--invariant", "!alarm"]),
    ("wf_fire", ["wf", "corpus/fire.si", "-m", "Fire"]),
    ("wf_meter", ["wf", "corpus/ping.si", "-m", "Meter"]),
    ("info_fire", ["info", "corpus/fire.si"]),
    ("info_handshake", ["info", "corpus/handshake.si"]),
    ("info_two_files", ["info", "corpus/refine.si", "corpus/optimism.si"]),
]


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def masked(text: str) -> str:
    obj = json.loads(text)
    obj["stats"]["time_ms"] = 0
    return json.dumps(obj, indent=2) + "\n"


@pytest.fixture(autouse=True)
def at_root(monkeypatch):
    monkeypatch.chdir(ROOT)


def _golden(name: str, text: str):
    path = GOLDEN / name
    if UPDATE:
        path.write_text(text)
    assert path.exists(), f"missing golden file {path}; run with UPDATE_GOLDEN=1"
    assert text == path.read_text()


@pytest.mark.parametrize("name, argv", CASES, ids=[c[0] for c in CASES])
def test_golden_text(name, argv):
    code, out, err = invoke(argv)
    assert err == ""
    _golden(f"{name}.txt", f"exit {code}\n{out}")


@pytest.mark.parametrize("name, argv", CASES, ids=[c[0] for c in CASES])
def test_golden_json(name, argv):
    code, out, err = invoke(argv + ["--json"])
    obj = json.loads(out)
    jsonschema.validate(obj, VERDICT_SCHEMA)
    assert obj["command"] == argv[0]
    _golden(f"{name}.json", masked(out))


@pytest.mark.parametrize("name, argv", CASES, ids=[c[0] for c in CASES])
def test_deterministic(name, argv):
    first, second = invoke(argv), invoke(argv)
    assert first == second
    a, b = invoke(argv + ["--json"]), invoke(argv + ["--json"])
    assert masked(a[1]) == masked(b[1])


def _library_verdicts():
    """Exit codes predicted from library calls for every corpus module/pair."""
    cases = []
    for path in corpus_files():
        rel = str(path.relative_to(ROOT))
        mods = load(path.read_text(), rel)
        for p in mods.values():
            for q in mods.values():
                if p is not q:
                    try:
                        compose(p, q)
                        code = EXIT_YES
                    except IncompatibleError:
                        code = EXIT_NO
                    except Exception:
                        code = EXIT_USAGE
                    cases.append((["compose", rel, "-m", p.name, "-m", q.name], code))
                try:
                    code = EXIT_YES if refines(p, q) else EXIT_NO
                except Exception:
                    code = EXIT_USAGE
                cases.append((["refine", rel, "-m", p.name, "-m", q.name], code))
            for mode in ("optimistic", "pessimistic"):
                phi = "true" if not p.variables else f"{p.variables[0].name} = {p.variables[0].name}"
                code = EXIT_YES if check(p, parse_expr(phi), mode) else EXIT_NO
                cases.append((["check", rel, "-m", p.name, "--invariant", phi, "--mode", mode], code))
            cases.append((["wf", rel, "-m", p.name], EXIT_YES))
    return cases


def test_exit_codes_agree_with_library():
    cases = _library_verdicts()
    assert len(cases) > 50
    for argv, expected in cases:
        code, out, _ = invoke(argv)
        assert code == expected, argv
        code, out, _ = invoke(argv + ["--json"])
        assert code == expected, argv
        if code != EXIT_USAGE:
            jsonschema.validate(json.loads(out), VERDICT_SCHEMA)
        else:
            assert out == ""


@pytest.mark.parametrize("argv, fragment", [
    (["compose", "corpus/missing.si", "-m", "A", "-m", "B"], "cannot read"),
    (["compose", "corpus/fire.si", "-m", "Fire"], "exactly 2"),
    (["refine", "corpus/fire.si", "-m", "Fire", "-m", "Nobody"], "unknown module"),
    (["check", "corpus/fire.si", "-m", "Fire", "--invariant", "s +"], "error"),
    (["check", "corpus/fire.si", "-m", "Fire", "--invariant", "nope"], "unknown variable"),
    (["info", "corpus/fire.si", "corpus/fire.si"], "more than one file"),
    (["compose", "corpus/fire.si", "-m", "Fire", "-m", "Fire"], "clashing locals"),
])
def test_usage_errors(argv, fragment):
    code, out, err = invoke(argv)
    assert code == EXIT_USAGE
    assert fragment in err


def test_argparse_errors_exit_2():
    assert invoke(["frobnicate"])[0] == EXIT_USAGE
    assert invoke(["check", "corpus/fire.si", "-m", "Fire"])[0] == EXIT_USAGE


def test_parse_error_has_span(tmp_path):
    bad = tmp_path / "bad.si"
    bad.write_text("module M:\n  var x: bool\n  init: x &\n")
    code, _, err = invoke(["info", str(bad)])
    assert code == EXIT_USAGE
    assert f"{bad}:4:1" in err or f"{bad}:3:" in err


def test_validation_error_has_span(tmp_path):
    bad = tmp_path / "bad.si"
    bad.write_text("module M:\n  var x: [0..1]\n  output a { true ==> x' := 4; }\n  init: true\n")
    code, _, err = invoke(["wf", str(bad), "-m", "M"])
    assert code == EXIT_NO
    assert "domain violation" in invoke(["wf", str(bad), "-m", "M"])[1]
    code, _, err = invoke(["info", str(bad)])
    assert code == EXIT_USAGE and f"{bad}:3:" in err


def test_compose_output_file(tmp_path):
    target = tmp_path / "fg.si"
    code, out, _ = invoke(["compose", "corpus/fire.si", "-m", "Fire", "-m", "Guard",
                           "-o", str(target), "--name", "Both"])
    assert code == EXIT_YES and "wrote Both" in out
    code, out, _ = invoke(["info", str(target)])
    assert code == EXIT_YES and "module Both" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sociable", "refine", "corpus/fire.si",
                           "-m", "Fire", "-m", "Fire"], cwd=ROOT, capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("REFINES")
