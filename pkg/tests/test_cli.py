import json

from circumext import cli
from circumext.verify import Config, report_json


def test_spaces_suite_writes_report(tmp_path, capsys):
    code = cli.main(["verify", "--suite", "spaces", "--out", str(tmp_path), "--format", "csv"])
    assert code == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["pass"] is True
    for r in doc["records"]:
        assert set(r) == {"suite", "paper_ref", "bound", "worst_observed", "tolerance", "pass"}
    assert (tmp_path / "report.csv").read_text().startswith("suite,paper_ref,bound,worst_observed,tolerance,pass")
    assert "passed" in capsys.readouterr().out


def test_report_has_no_timestamps_and_sorted_keys():
    rec = {"suite": "spaces", "paper_ref": "x", "bound": "b", "worst_observed": 0.0, "tolerance": 1.0, "pass": True}
    text = report_json(Config(suite="spaces"), [rec])
    assert text.index('"bound"') < text.index('"paper_ref"') < text.index('"worst_observed"')
    assert "time" not in text


def test_unknown_suite_is_config_error(capsys):
    assert cli.main(["verify", "--suite", "nope"]) == 2


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("fan = 8\n")
    assert cli.main(["verify", "--config", str(cfg)]) == 2
    cfg.write_text("colour = blue\n")
    assert cli.main(["verify", "--config", str(cfg)]) == 2
    cfg.write_text("no equals sign\n")
    assert cli.main(["verify", "--config", str(cfg)]) == 2
    assert cli.main(["verify", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# defaults\nsuite = boundary\nseed = 3\nfan = 64\n")
    args = cli._parser().parse_args(["verify", "--config", str(cfg), "--seed", "11"])
    c = cli.build_config(args)
    assert (c.suite, c.seed, c.fan) == ("boundary", 11, 64)


def test_failure_exit_code_dumps_cases(tmp_path, monkeypatch, capsys):
    bad = {"suite": "spaces", "paper_ref": "forced failure", "bound": "x", "worst_observed": 1.0,
           "tolerance": 0.0, "pass": False}
    monkeypatch.setattr(cli, "run", lambda cfg: ([bad], {}))
    assert cli.main(["verify", "--suite", "spaces", "--out", str(tmp_path)]) == 1
    assert "forced failure" in capsys.readouterr().err


def test_tables_written(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "run", lambda cfg: ([], {"convergence.csv": "fan,t,distance\n"}))
    assert cli.main(["verify", "--suite", "circumcenter", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "tables" / "convergence.csv").read_text() == "fan,t,distance\n"


def test_suite_alone_reproduces_records_of_full_run(tmp_path):
    from circumext.verify import run

    alone, _ = run(Config(suite="flow"))
    again, _ = run(Config(suite="flow"))
    assert alone == again
