import json

import pytest
from cli_e2e import FILES, run_e2e

from fclkp.cli import main, parse_gauss
from fclkp.scalar import GaussRat


@pytest.fixture
def files(tmp_path):
    for name, obj in FILES.items():
        (tmp_path / name).write_text(json.dumps(obj))
    return tmp_path


def test_parse_gauss():
    assert parse_gauss("1/2-3i") == GaussRat(GaussRat(1) / 2, -3)
    assert parse_gauss("-i") == GaussRat(0, -1)
    assert parse_gauss("7") == GaussRat(7)


def test_residue_in_process(files, capsys):
    assert main(["residue", str(files / "inv.json")]) == 0
    assert capsys.readouterr().out.strip() == "1 + 0i"


def test_compose_to_stdout(files, capsys):
    assert main(["compose", str(files / "unit.json"), str(files / "B.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == FILES["B.json"]


def test_usage_error_is_parse_exit(capsys):
    assert main(["compose"]) == 2
    assert main(["project", "x.json", "--tag", "Q"]) == 2


def test_verify_single_suite(capsys):
    assert main(["verify", "--suite", "manin", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_end_to_end_script(tmp_path):
    results = run_e2e(str(tmp_path))
    failed = [(n, d) for n, ok, d in results if not ok]
    assert not failed, failed
