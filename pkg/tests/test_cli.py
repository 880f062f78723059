import numpy as np
import pytest

from diracnorm.cli import (
    ConfigError,
    dump_json,
    format_real,
    load_field_snapshot,
    main,
    parse_config,
    save_field_snapshot,
)
from diracnorm.spectral_core import DiracSpace, Grid, l2_norm, random_field


def test_defaults_parse():
    cfg = parse_config("")
    assert cfg.grid.n_per_axis == 24
    assert cfg.grid.box_length == 16.0
    assert cfg.model.kind == "pure_power"
    assert cfg.solver.seed == 20240
    assert cfg.sweep_a_values == [0.2, 0.14, 0.1, 0.07, 0.05]


def test_comments_and_blank_lines_ignored():
    cfg = parse_config("# hello\n\nsolve.a=0.07\n")
    assert cfg.solve_a == 0.07


def test_rejects_bad_p_with_condition_label():
    with pytest.raises(ConfigError, match=r"\(f3\)"):
        parse_config("model.p=3.5\n")


def test_rejects_bad_tau_with_condition_label():
    with pytest.raises(ConfigError, match=r"\(f5\).*0.25"):
        parse_config("model.growth_alpha=2.5\nmodel.tau=0.3\n")


def test_rejects_unknown_key_with_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("solve.a=0.1\nnot.a.key=3\n")


def test_rejects_odd_grid():
    with pytest.raises(ConfigError, match="even"):
        parse_config("grid.n_per_axis=23\n")


def test_rejects_bad_scalar_type():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("solve.a=abc\n")


def test_json_formatting_fixed_digits():
    blob = dump_json({"x": 0.1, "flag": True, "name": "model", "none": None})
    assert '"x": 0.10000000000000001' in blob
    assert '"flag": true' in blob
    assert '"none": null' in blob
    import json

    parsed = json.loads(blob)
    assert parsed["x"] == 0.1


def test_format_real_seventeen_digits():
    assert format_real(1.0 / 3.0) == "0.33333333333333331"


def test_snapshot_round_trip(tmp_path, rng):
    space = DiracSpace(Grid(8, 6.0), 1.2)
    u = random_field(space, rng)
    path = tmp_path / "field.bin"
    save_field_snapshot(path, u, 0.37)
    v, a = load_field_snapshot(path)
    assert a == 0.37
    assert v.space.grid.n_per_axis == 8
    assert v.space.grid.box_length == 6.0
    assert v.space.mass == 1.2
    assert np.array_equal(v.values, u.values)


def test_snapshot_header_is_64_bytes(tmp_path, rng):
    space = DiracSpace(Grid(8, 6.0), 1.0)
    u = random_field(space, rng)
    path = tmp_path / "field.bin"
    save_field_snapshot(path, u, 0.1)
    blob = path.read_bytes()
    assert blob[:12] == b"DIRACNORM v1"
    assert blob[63:64] == b"\n"
    assert (len(blob) - 64) == 8 * 8 * 8 * 4 * 16


def _write(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return str(p)


SMALL = """
grid.n_per_axis=12
grid.box_length=12.0
solve.a=0.1
solver.max_outer=500
"""


def test_cmd_check_passes_on_defaults(tmp_path, capsys):
    cfg = _write(tmp_path, SMALL + f"output.dir={tmp_path}/out\n")
    assert main(["check", "--config", cfg, "--quiet"]) == 0
    report = (tmp_path / "out" / "check_report.txt").read_text()
    assert "FAIL" not in report


def test_cmd_check_rejects_bad_config(tmp_path):
    cfg = _write(tmp_path, "model.p=3.5\n")
    assert main(["check", "--config", cfg]) == 2


def test_cmd_solve_deterministic(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, SMALL + f"output.dir={out}\n")
    assert main(["solve", "--config", cfg, "--quiet"]) == 0
    first_json = (out / "solution.json").read_bytes()
    first_field = (out / "solution.field").read_bytes()
    assert main(["solve", "--config", cfg, "--quiet"]) == 0
    assert (out / "solution.json").read_bytes() == first_json
    assert (out / "solution.field").read_bytes() == first_field


def test_cmd_solve_reports_solution(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, SMALL + f"output.dir={out}\n")
    assert main(["solve", "--config", cfg, "--quiet"]) == 0
    import json

    rec = json.loads((out / "solution.json").read_text())
    assert rec["converged"] is True
    assert rec["omega"] < 1.0
    assert rec["residual_rel"] <= 1e-6
    field, a = load_field_snapshot(out / rec["snapshot"])
    assert np.isclose(l2_norm(field), a, rtol=1e-9)


def test_cmd_sweep_csv_shape(tmp_path):
    out = tmp_path / "out"
    cfg = _write(
        tmp_path,
        SMALL + f"sweep.a_values=0.1,0.08\noutput.dir={out}\n",
    )
    assert main(["sweep", "--config", cfg, "--quiet"]) == 0
    lines = (out / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "a,omega,m_minus_omega,u_l2,u_hhalf,j_level,residual,iterations,converged"
    assert len(lines) == 3


def test_cmd_sweep_rejects_empty_values(tmp_path):
    cfg = _write(tmp_path, "sweep.a_values=,\n")
    assert main(["sweep", "--config", cfg]) == 2


def test_cmd_multi_null_single_family(tmp_path):
    out = tmp_path / "out"
    cfg = _write(
        tmp_path,
        SMALL + f"model.kind=null\nmulti.k=1\noutput.dir={out}\n",
    )
    assert main(["multi", "--config", cfg, "--quiet"]) == 0
    import json

    rec = json.loads((out / "multi_00.json").read_text())
    assert np.isclose(rec["omega"], 1.0, atol=1e-9)
    matrix = (out / "distinctness.csv").read_text().strip().splitlines()
    assert matrix[0] == "i,j,l2_distance,same_family"


def test_cmd_subspace_csv(tmp_path):
    out = tmp_path / "out"
    cfg = _write(
        tmp_path,
        SMALL
        + "model.p=2.2\nmodel.q=2.2\nmodel.growth_alpha=2.2\n"
        + f"subspace.k_list=1\nsubspace.n_ladder=2,4\nsubspace.sample_density=4\noutput.dir={out}\n",
    )
    assert main(["subspace", "--config", cfg, "--quiet"]) == 0
    lines = (out / "subspace.csv").read_text().strip().splitlines()
    assert lines[0].startswith("k,n,sup_quad,inf_psi,ratio,injective,level_bound,below_half_ma2")
    assert len(lines) == 3


def test_cli_seed_override_changes_nothing_for_fixed_problem(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, SMALL + f"output.dir={out}\n")
    assert main(["solve", "--config", cfg, "--seed", "7", "--quiet"]) == 0
    assert (out / "solution.json").exists()


def test_cli_missing_config_file():
    assert main(["check", "--config", "/nonexistent/file.cfg"]) == 2
