import json
import math

import pytest

from braidflow.experiment_cli import (
    EXIT_COMPUTATION,
    EXIT_OK,
    EXIT_USAGE,
    load_config,
    load_map_file,
    main,
)


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == EXIT_USAGE


def test_braid_eval_prints_exact_rational(capsys):
    assert main(["braid-eval", "--word", "1 2", "--qm",
                 "rademacher-minus-writhe"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "-1"
    assert main(["braid-eval", "--word", "1"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "0"
    assert main(["braid-eval", "--word", "1 2 1", "--qm", "writhe"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "3"


def test_braid_eval_half_integer_value(capsys):
    # sigma_1^2 sigma_2 maps to a trace-zero torsion element with writhe 3,
    # so phi is the genuine half-integer -3/2
    assert main(["braid-eval", "--word", "1 1 2"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "-3/2"


def test_group_metric_csv(tmp_path, capsys):
    out = tmp_path / "metric.csv"
    assert main(["group-metric", "--degree", "5", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "class_repr,class_repr,q_fg,q_gf,d"
    rows = [ln.split(",") for ln in lines[2:]]
    assert len(rows) == 16  # 4 classes, full matrix
    reps = {r[0] for r in rows}
    assert reps == {"(3 4 5)", "(2 3)(4 5)", "(1 2 3 4 5)", "(1 2 3 5 4)"}
    diag = [r for r in rows if r[0] == r[1]]
    assert all(float(r[4]) == 0.0 for r in diag)


def test_group_metric_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["group-metric", "--degree", "5", "--out", str(a)])
    main(["group-metric", "--degree", "5", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_qi_diagnostic_json(tmp_path):
    out = tmp_path / "qi.json"
    assert main(["qi-diagnostic", "--degree", "5", "--base-class", "(3 4 5)",
                 "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["lambda"] == 1.0
    assert payload["C"] == pytest.approx(math.log(3))
    assert payload["coverage_radius"] == pytest.approx(math.log(2))
    assert "proxy" in payload["note"]


def test_qi_diagnostic_unknown_class(tmp_path, capsys):
    assert main(["qi-diagnostic", "--degree", "5",
                 "--base-class", "(9 9)"]) == EXIT_USAGE


MAP_TEXT = """
# rigid full twist for tracing
rigid 0.0 0.0 0.7 6.283185307179586
"""


def test_load_map_file_and_trace(tmp_path):
    map_path = tmp_path / "f.map"
    map_path.write_text(MAP_TEXT)
    f = load_map_file(map_path)
    assert f.support_ball().radius == 0.7

    out = tmp_path / "braids.jsonl"
    assert main(["trace", "--map", str(map_path), "--power", "1",
                 "--samples", "10", "--seed", "3", "--out", str(out)]) == EXIT_OK
    recs = [json.loads(ln) for ln in out.read_text().splitlines()]
    assert len(recs) == 10
    for rec in recs:
        assert "config_hash" in rec and "config" in rec
        if "braid" in rec:
            assert "lk" in rec and "phi" in rec


def test_map_file_errors(tmp_path):
    bad = tmp_path / "bad.map"
    bad.write_text("twist 0 0 0.3\n")
    with pytest.raises(Exception):
        load_map_file(bad)
    bad.write_text("frobnicate 1 2 3\n")
    with pytest.raises(Exception):
        load_map_file(bad)


def test_gg_estimate_cli_deterministic(tmp_path):
    map_path = tmp_path / "f.map"
    map_path.write_text(MAP_TEXT)
    o1, o2 = tmp_path / "e1.json", tmp_path / "e2.json"
    for o in (o1, o2):
        assert main(["gg-estimate", "--map", str(map_path), "--power", "1",
                     "--samples", "60", "--seed", "5", "--out", str(o)]) == EXIT_OK
    assert o1.read_bytes() == o2.read_bytes()
    payload = json.loads(o1.read_text())
    assert payload["mean"] == pytest.approx(-3 * 0.7**6, abs=1e-12)


def test_scaling_check_cli(tmp_path):
    map_path = tmp_path / "f.map"
    map_path.write_text(MAP_TEXT)
    out1 = tmp_path / "s1.json"
    out2 = tmp_path / "s2.json"
    for out in (out1, out2):
        code = main(["scaling-check", "--map", str(map_path), "--r", "2",
                     "--power", "1", "--samples", "80", "--seed", "7",
                     "--out", str(out)])
        assert code == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    payload = json.loads(out1.read_text())
    assert payload["status"] == "pass"
    assert payload["ratio"] == pytest.approx(2**-6, abs=1e-12)


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("word = 1 2\nqm = rademacher-minus-writhe\n")
    assert main(["braid-eval", "--config", str(cfg)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "-1"
    # flags take precedence over config values
    assert main(["braid-eval", "--config", str(cfg), "--word", "1"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "0"


def test_config_rejects_unknown_and_malformed(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    with pytest.raises(Exception):
        load_config(cfg)
    cfg.write_text("no equals sign here\n")
    with pytest.raises(Exception):
        load_config(cfg)
    cfg.write_text("word = 1\nword = 2\n")
    with pytest.raises(Exception):
        load_config(cfg)


KERCAL_MAP_TEXT = """
rigid -0.4 0.0 0.25 6.283185307179586
rigid 0.4 0.0 0.25 -6.283185307179586
"""


def test_sequence_experiment_cli_with_csv_tables(tmp_path):
    fmap = tmp_path / "f.map"
    fmap.write_text(KERCAL_MAP_TEXT)
    gmap = tmp_path / "g.map"
    gmap.write_text(MAP_TEXT)
    out = tmp_path / "seq.json"
    code = main(["sequence-experiment", "--f", str(fmap), "--g", str(gmap),
                 "--r", "2", "--nmax", "1", "--mmax", "3", "--power", "1",
                 "--samples", "60", "--seed", "3", "--defect-assumed", "3.0",
                 "--out", str(out), "--out_dir", str(tmp_path / "cache")])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["area_bounds"][1][0] == pytest.approx(2 * math.log(2))
    assert payload["certificates"][0]["validity"] == "conditional-on-D"
    assert "seed" in payload and "config_hash" in payload
    area = (tmp_path / "seq_area.csv").read_text().splitlines()
    assert area[1] == "m,n,area_lower_bound"
    assert len(area) == 2 + 4  # header rows + 2x2 table
    levels = (tmp_path / "seq_levels.csv").read_text().splitlines()
    assert levels[1].startswith("n,abs_mean,stderr")
    certs = (tmp_path / "seq_certs.csv").read_text().splitlines()
    assert len(certs) == 2 + 3


def test_usage_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    assert main(["braid-eval", "--config", str(cfg)]) == EXIT_USAGE


def test_computation_error_exit_code(tmp_path, capsys):
    # scaling check with a quasi-morphism that fails the sigma_1 gate
    map_path = tmp_path / "f.map"
    map_path.write_text(MAP_TEXT)
    code = main(["scaling-check", "--map", str(map_path), "--r", "2",
                 "--power", "1", "--samples", "20", "--seed", "0",
                 "--qm", "writhe"])
    assert code == EXIT_COMPUTATION
