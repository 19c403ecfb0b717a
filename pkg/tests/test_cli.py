import json

import pytest

from ratdyn import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, main


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_simulate_constant_orbit_csv(capsys):
    code, out = _run(capsys, "simulate", "--p", "1", "--q", "1", "--r", "0", "--x0", "1", "--x1", "1", "--steps", "5")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "index,value"
    assert lines[1:] == [f"{i},1" for i in range(6)]


def test_simulate_json(capsys, validate_schema):
    code, out = _run(capsys, "simulate", "--p", "3", "--q", "1", "--r", "2", "--x0", "1", "--x1", "1",
                     "--steps", "200", "--format", "json", "--window", "8")
    assert code == EXIT_OK
    data = json.loads(out)
    validate_schema(data, "simulate")
    assert len(data['values']) == 202
    assert data['limit']['kind'] == "Equilibrium"


def test_simulate_six_parameter_form(capsys):
    code, out = _run(capsys, "simulate", "--alpha", "1", "--beta", "1", "--gamma", "1",
                     "--A", "1", "--B", "1", "--C", "1", "--x0", "1", "--x1", "1", "--steps", "3")
    assert code == EXIT_OK
    assert out.splitlines()[1:] == ["0,1", "1,1", "2,1", "3,1"]


def test_simulate_domain_error(capsys):
    code, _ = _run(capsys, "simulate", "--p", "3", "--q", "1", "--r", "2", "--x0", "0", "--x1", "1", "--steps", "5")
    assert code == EXIT_DOMAIN


def test_invalid_parameters(capsys):
    code, _ = _run(capsys, "analyze", "--p", "-1", "--q", "1", "--r", "2")
    assert code == EXIT_DOMAIN


@pytest.mark.parametrize("argv", [
    ["simulate", "--p", "3", "--q", "1", "--r", "2", "--x0", "1", "--x1", "1"],
    ["analyze", "--p", "3", "--q", "1"],
    ["analyze", "--alpha", "1", "--beta", "1"],
    ["certify", "--claim", "cubic", "--subcase", "Q1_w_ge_v"],
    ["sweep", "--p-range", "0.5"],
    ["nonsense"],
])
def test_usage_errors_exit_with_one(argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == EXIT_USAGE


def test_analyze_report(capsys, validate_schema):
    code, out = _run(capsys, "analyze", "--p", "9", "--q", "0.5", "--r", "2")
    assert code == EXIT_OK
    data = json.loads(out)
    validate_schema(data, "behavior_report")
    assert data['behavior']['branch_key'] == "inc_dec_embedded"
    assert data['behavior']['prediction'] == "AllConvergeToEquilibrium"


def test_analyze_with_trend(capsys, validate_schema):
    code, out = _run(capsys, "analyze", "--p", "3", "--q", "1", "--r", "2", "--trend", "2000")
    assert code == EXIT_OK
    data = json.loads(out)
    validate_schema(data, "behavior_report")
    assert set(data['trend']) == {'even', 'odd'}


def test_analyze_six_parameter_form(capsys, validate_schema):
    code, out = _run(capsys, "analyze", "--alpha", "1", "--beta", "1", "--gamma", "1", "--A", "1", "--B", "1", "--C", "1")
    assert code == EXIT_OK
    data = json.loads(out)
    validate_schema(data, "behavior_report")
    assert data['behavior']['branch_key'] == "p_equals_q"
    assert data['envelope']['lo'] == pytest.approx(1.0)


def test_period2(capsys):
    code, out = _run(capsys, "period2", "--p", "9", "--q", "0.5", "--r", "2")
    assert code == EXIT_OK
    m, M = (float(v) for v in out.strip().split(","))
    assert m == pytest.approx(8 - 2 * 7 ** 0.5)
    assert M == pytest.approx(8 + 2 * 7 ** 0.5)

    _, out = _run(capsys, "period2", "--p", "0.5", "--q", "0.5", "--r", "2")
    assert out == "none\n"

    _, out = _run(capsys, "period2", "--prime", "--p", "0.1", "--q", "10", "--r", "0.5")
    m, M = (float(v) for v in out.strip().split(","))
    assert m + M == pytest.approx(0.9)


def test_interval(capsys):
    code, out = _run(capsys, "interval", "--p", "3", "--q", "1", "--r", "2")
    assert code == EXIT_OK
    assert out == "level,m,M\n0,1,3\n1,2,3\n"


def test_certify_cubic_is_reproducible(tmp_path, capsys, validate_schema):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["certify", "--claim", "cubic", "--no-timing", "--out", str(first)]) == EXIT_OK
    assert main(["certify", "--claim", "cubic", "--no-timing", "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    data = json.loads(first.read_text(encoding="utf-8"))
    validate_schema(data, "certificate")
    assert data['success']
    assert data['certificates'][0]['controls'][0]['verdict'] == "Refuted"


def test_certify_identities(capsys, validate_schema):
    code, out = _run(capsys, "certify", "--claim", "identities")
    assert code == EXIT_OK
    data = json.loads(out)
    validate_schema(data, "certificate")
    assert data['certificates'][0]['verdict'] == "IdentityHolds"
    assert data['certificates'][0]['wall_time'] >= 0


def test_sweep_small_grid(capsys):
    code, out = _run(capsys, "--threads", "1", "sweep", "--p-range", "0.5", "2", "2", "--q-range", "0.5", "2", "2",
                     "--r-range", "0", "4", "2", "--orbits", "2")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("cell,p,q,r,branch_key")
    assert len(lines) == 9


def test_validate_theorem_small(capsys, validate_schema):
    code, out = _run(capsys, "--threads", "1", "validate-theorem", "--cells", "3", "--orbits", "2",
                     "--step-cap", "20000")
    assert code == EXIT_OK
    data = json.loads(out)
    validate_schema(data, "theorem_validation")
    assert data['config']['orbits'] == 2
