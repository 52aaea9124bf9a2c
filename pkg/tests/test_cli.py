"""CLI dispatch, exit codes, JSON output, determinism."""

import json
import subprocess
import sys

from feynpar.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_poly_bubble(capsys):
    code, doc = run_cli(["poly", "bubble", "--p2", "1"], capsys)
    assert code == 0
    assert doc["psi"]["pretty"] == "t1 + t2"
    assert doc["P"]["pretty"] == "t1*t2"
    assert doc["generic_condition"]["holds"] is True


def test_poly_symbolic_p2(capsys):
    code, doc = run_cli(["poly", "bubble"], capsys)
    assert code == 0
    assert doc["P"]["pretty"] == "t1*t2*p2"


def test_check_exit_codes(capsys):
    code, doc = run_cli(["check", "bubble", "triangle", "banana3"], capsys)
    assert code == 0 and doc["failures"] == []


def test_check_full_corpus(capsys):
    code, doc = run_cli(["check"], capsys)
    assert code == 0, doc["failures"]


def test_check_directory_of_graph_files(tmp_path, capsys):
    from feynpar import corpus as corpus_mod

    d = tmp_path / "corpus"
    d.mkdir()
    for name in ("bubble", "triangle"):
        (d / f"{name}.json").write_text(
            json.dumps(corpus_mod.DESCRIPTIONS[name])
        )
    code, doc = run_cli(["check", str(d)], capsys)
    assert code == 0
    assert set(doc["checks"]) == {"bubble", "triangle"}


def test_parse_error_exit_2(capsys):
    code = main(["poly", "/nonexistent/graph.json"])
    assert code == 2


def test_malformed_graph_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "name": "bad",
        "vertices": ["v1"],
        "edges": [{"id": "e1", "src": "v1", "tgt": "vX"}],
        "external": [],
    }))
    assert main(["poly", str(bad)]) == 2


def test_divergent_exit_4(capsys):
    code = main(["integrate", "bubble", "--dimension", "2", "--p2", "1"])
    assert code == 4


def test_integrate_allow_divergent_runs(capsys):
    code, doc = run_cli(
        ["integrate", "bubble", "--dimension", "4", "--p2", "1",
         "--tolerance", "1e-8"],
        capsys,
    )
    assert code == 0
    assert abs(doc["integral"]["value"] - 1.0) < 1e-6
    assert doc["prefactor"]["gamma_pole"] is True


def test_dimreg_command(capsys):
    code, doc = run_cli(
        ["dimreg", "bubble", "--dimension", "4", "--order", "1",
         "--p2", "1", "--tolerance", "1e-7"],
        capsys,
    )
    assert code == 0
    c = doc["series"]["coefficients"]
    assert abs(c[0] - 1.0) < 1e-5 and abs(c[1] + 1.0) < 1e-5


def test_case_table_command(capsys):
    code, doc = run_cli(
        ["case-table", "--n", "6", "--dimension", "4", "--loops", "1"], capsys
    )
    assert code == 0
    assert doc["case_table"]["m"] == 4 and doc["case_table"]["big_c"] == 8


def test_count_points_command(capsys):
    code, doc = run_cli(
        ["count-points", "banana3", "--q", "2", "3", "--projective"], capsys
    )
    assert code == 0
    assert doc["counts"]["2"]["affine"] == 4
    assert doc["counts"]["2"]["affine"] == doc["counts"]["2"]["naive_oracle"]


def test_slice_deterministic_bytes(capsys):
    code1 = main(["--seed", "5", "slice", "--n", "4", "--k", "2"])
    out1 = capsys.readouterr().out
    code2 = main(["--seed", "5", "slice", "--n", "4", "--k", "2"])
    out2 = capsys.readouterr().out
    assert code1 == code2 == 0
    assert out1 == out2  # byte-for-byte determinism


def test_seed_env_default(capsys, monkeypatch):
    monkeypatch.setenv("FEYNPAR_SEED", "77")
    code, doc = run_cli(["slice", "--n", "3", "--k", "2"], capsys)
    assert code == 0 and doc["slice"]["seed"] == 77


def test_milnor_command(capsys):
    code, doc = run_cli(["--seed", "7", "milnor", "banana3", "--k", "2"], capsys)
    assert code == 0
    assert doc["milnor"]["points"][0]["milnor_mu"] == "1"
    assert doc["milnor"]["transversal"] is True
    assert doc["milnor"]["slice"]["normals"]  # reproducibility data embedded


def test_feynman_subspace_command(capsys):
    code, doc = run_cli(
        ["--seed", "7", "feynman-subspace", "banana3", "--k", "2",
         "--dims", "2", "4"],
        capsys,
    )
    assert code == 0
    assert doc["subspace"]["2"]["dimension"] == 1
    assert doc["subspace"]["4"]["dimension"] == 0


def test_hopf_coproduct_command(capsys):
    code, doc = run_cli(
        ["hopf", "coproduct", "--graphs", "nested2loop", "--dimension", "4"],
        capsys,
    )
    assert code == 0
    assert len(doc["coproduct"]["nested2loop"]["reduced_terms"]) == 1


def test_hopf_birkhoff_command(tmp_path, capsys):
    char = tmp_path / "char.json"
    char.write_text(json.dumps({
        "generators": {"nested2loop": {"coeffs": {"-1": "1/1", "0": "2/1"}}}
    }))
    code, doc = run_cli(
        ["hopf", "birkhoff", "--graphs", "nested2loop", "--dimension", "4",
         "--character", str(char)],
        capsys,
    )
    assert code == 0
    assert "nested2loop" in doc["birkhoff"]


def test_renorm_mu_independent_counterterm(tmp_path, capsys):
    char = tmp_path / "char.json"
    char.write_text(json.dumps({
        "generators": {"bubble": {"coeffs": {"-1": "2/1", "0": "5/1"}}},
        "mu_exponent_rule": "loops",
    }))
    outs = []
    for log_mu in ("0", "1.5"):
        code, doc = run_cli(
            ["renorm", "--graphs", "bubble", "--dimension", "4",
             "--character", str(char), "--log-mu", log_mu],
            capsys,
        )
        assert code == 0
        outs.append(doc["renormalized"]["bubble"]["counterterm"])
    assert outs[0] == outs[1]  # polar part independent of the mass scale


def test_connection_command(tmp_path, capsys):
    char = tmp_path / "char.json"
    char.write_text(json.dumps({
        "generators": {"nested2loop": {"coeffs": {"-1": "3/2"}}}
    }))
    code, doc = run_cli(
        ["connection", "--graphs", "nested2loop", "--dimension", "4",
         "--character", str(char)],
        capsys,
    )
    assert code == 0
    assert doc["flatness_residual"] == "0"


def test_zeta_log_command(capsys):
    code, doc = run_cli(
        ["zeta-log", "bubble", "--n-max", "2", "--tolerance", "1e-7"], capsys
    )
    assert code == 0
    assert abs(doc["zeta_coefficients"][0]["value"] - 1.0) < 1e-5
    lam1 = doc["iterated_log_checks"][0]
    assert abs(lam1["value"] - lam1["expected"]) < 1e-5


def test_golden_file_roundtrip(tmp_path, capsys):
    golden = tmp_path / "bubble.golden.json"
    code = main(["--golden", str(golden), "poly", "bubble", "--p2", "1"])
    capsys.readouterr()
    assert code == 0 and golden.exists()
    code = main(["--golden", str(golden), "poly", "bubble", "--p2", "1"])
    capsys.readouterr()
    assert code == 0  # byte-identical rerun passes
    golden.write_text(golden.read_text().replace("t1 + t2", "t1 + t9"))
    code = main(["--golden", str(golden), "poly", "bubble", "--p2", "1"])
    capsys.readouterr()
    assert code == 3  # drift detected


def test_dimreg_plot_data(tmp_path, capsys):
    out = tmp_path / "series.csv"
    code, _ = run_cli(
        ["dimreg", "bubble", "--dimension", "4", "--order", "1", "--p2", "1",
         "--tolerance", "1e-6", "--emit-plot-data", str(out)],
        capsys,
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "k,coefficient,err" and len(lines) == 3


def test_console_script_entry():
    out = subprocess.run(
        [sys.executable, "-m", "feynpar.cli", "case-table", "--n", "2",
         "--dimension", "4", "--loops", "1"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["case_table"]["m"] == 2
