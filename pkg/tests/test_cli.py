import json
import subprocess
import sys

import numpy as np
import pytest

from cohconv.cli import main
from cohconv.jsonio import channel_to_json, ensemble_to_json, state_to_json
from cohconv.states import Ensemble, PureState

from conftest import ens, sqrt_state, uniform

PAIR = ens((0.5, sqrt_state(0.7, 0.2, 0.1)), (0.5, sqrt_state(0.6, 0.3, 0.1)))
C = sqrt_state(0.5, 0.3, 0.2)
PLUS = PureState(np.array([1, 1]) / np.sqrt(2))


def js(obj):
    return json.dumps(obj)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def insufficiency():
    src = ens((0.5, sqrt_state(0.5, 0.5)), (0.5, PureState.basis(2, 0)))
    return ensemble_to_json(src), ensemble_to_json(Ensemble.singleton(sqrt_state(0.75, 0.25)))


def test_measure_values(capsys):
    code, out, _ = run(capsys, "measure", js(state_to_json(uniform(3))), "--kind", "tail", "--l", 2)
    assert code == 0 and out["value"] == pytest.approx(2 / 3, abs=1e-12)
    code, out, _ = run(capsys, "measure", js(state_to_json(PureState.basis(3, 0))), "--kind", "capped", "--l", 3, "--k", 0.5)
    assert out == {"value": 0.0}
    measure = js({"kind": "capped", "l": 2, "k": 0.25})
    code, out, _ = run(capsys, "measure", js(state_to_json(C)), "--measure", measure)
    assert out["value"] == pytest.approx(1.8, abs=1e-12)


def test_measure_table_and_ensembles(capsys):
    code, out, _ = run(capsys, "measure", js(ensemble_to_json(PAIR)))
    assert code == 0
    table = {(r["kind"], r["l"], r.get("k")): r["value"] for r in out["measures"]}
    assert table[("tail", 2, None)] == pytest.approx(0.35, abs=1e-12)


def test_measure_errors(capsys):
    assert run(capsys, "measure", js(state_to_json(C)), "--kind", "tail", "--l", 4)[0] == 2
    assert run(capsys, "measure", js(state_to_json(C)), "--kind", "tail")[0] == 2
    assert run(capsys, "measure", '{"amplitudes": [[1, 0], [1, 0]]}')[0] == 2
    assert run(capsys, "measure", "/nonexistent.json")[0] == 2
    assert run(capsys, "measure", "{not json")[0] == 2


def test_check(capsys):
    assert run(capsys, "check", js(state_to_json(uniform(3))), js(state_to_json(C)))[0] == 0
    code, out, _ = run(capsys, "check", js(state_to_json(PureState.basis(2, 0))), js(state_to_json(PLUS)))
    assert code == 1 and out["violations"][0]["l"] == 2
    src, tgt = insufficiency()
    code, out, _ = run(capsys, "check", js(src), js(tgt))
    (v,) = out["violations"]
    assert code == 1 and v["k"] == pytest.approx(0.25, abs=1e-12)
    assert v["lhs"] == pytest.approx(0.125, abs=1e-12) and v["rhs"] == pytest.approx(0.25, abs=1e-12)
    assert run(capsys, "check", js(state_to_json(C)), js(state_to_json(PLUS)))[0] == 2


def test_synthesize(capsys):
    code, out, _ = run(capsys, "synthesize", js(state_to_json(C)), js(state_to_json(C)))
    assert code == 0 and out["verified"]
    code, out, _ = run(capsys, "synthesize", js(state_to_json(C)), js(ensemble_to_json(PAIR)))
    assert code == 0 and out["max_weight_err"] <= 1e-9 and out["max_state_err"] <= 1e-9
    assert run(capsys, "synthesize", js(state_to_json(PureState.basis(2, 0))), js(state_to_json(PLUS)))[0] == 1


def test_synthesize_ensemble_plan(capsys):
    half = sqrt_state(0.5, 0.5)
    src = ensemble_to_json(ens((0.5, half), (0.5, half)))
    tgt = ensemble_to_json(ens((0.5, sqrt_state(0.75, 0.25)), (0.5, sqrt_state(0.25, 0.75))))
    code, out, _ = run(capsys, "synthesize", js(src), js(tgt))
    assert code == 0 and len(out["channels"]) == 2 and np.allclose(np.sum(out["t"], axis=1), 1)


def test_verify(tmp_path, capsys):
    ident = channel_to_json([np.eye(3)])
    assert run(capsys, "verify", js(ident), js(state_to_json(C)), js(state_to_json(C)))[0] == 0
    half = channel_to_json([np.eye(3) * 0.5])
    code, out, _ = run(capsys, "verify", js(half), js(state_to_json(C)), js(state_to_json(C)))
    assert code == 1 and out["completeness_residual"] > 0.1
    bad = np.eye(2, dtype=complex)
    bad[1, 0] = 1.0
    code, out, _ = run(capsys, "verify", js(channel_to_json([bad / np.sqrt(2)])), js(state_to_json(PLUS)), js(state_to_json(PLUS)))
    assert code == 1 and out["non_incoherent_operators"] == [0]
    path = tmp_path / "state.json"
    path.write_text(js(state_to_json(C)))
    assert run(capsys, "verify", js(ident), str(path), str(path))[0] == 0


def test_fuzz(capsys):
    code, out, _ = run(capsys, "fuzz", "--d", 2, "--m", 2, "--n", 2, "--trials", 50, "--seed", 3)
    assert code == 0 and out["trials"] == 50 and out["agreements"] == 50
    assert run(capsys, "fuzz", "--trials", 0)[0] == 2


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_output_file(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["check", js(state_to_json(uniform(3))), js(state_to_json(C)), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["convertible"] is True


def _cli(*argv, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "cohconv", *map(str, argv)], capture_output=True, input=stdin, check=False
    )


def test_stdin_and_module_entry():
    r = _cli("measure", "-", "--kind", "tail", "--l", 2, stdin=js(state_to_json(C)).encode())
    assert r.returncode == 0 and json.loads(r.stdout)["value"] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize(
    "argv",
    [
        ("measure", js(ensemble_to_json(PAIR))),
        ("check", *insufficiency()),
        ("synthesize", js(state_to_json(C)), js(ensemble_to_json(PAIR))),
        ("fuzz", "--d", 3, "--m", 2, "--n", 2, "--trials", 200, "--seed", 7),
    ],
)
def test_byte_identical_repeats(argv):
    argv = [a if isinstance(a, (str, int)) else js(a) for a in argv]
    first, second = _cli(*argv), _cli(*argv)
    assert first.returncode == second.returncode
    assert first.stdout == second.stdout and first.stdout
