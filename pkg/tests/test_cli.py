import csv
import json

import pytest

from quadsum.cli import (
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_SCHEMA,
    EXIT_TOLERANCE,
    ConfigError,
    load_config,
    main,
)


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_defaults_describe_the_split_senary_family():
    cfg = load_config("verify", env={})
    assert cfg.family.dim(cfg.family.ell) == 6
    assert cfg.threads == 1 and cfg.tolerance == 1e-5
    assert set(cfg.sources.values()) == {"default"}


def test_precedence_flag_over_env_over_config(tmp_path):
    path = write(tmp_path, "numeric.threads = 2\nnumeric.tolerance = 1e-4\noutput.dir = from-config\n")
    env = {"QUADSUM_THREADS": "3", "QUADSUM_OUT": "from-env"}
    cfg = load_config("verify", path, {"numeric.threads": "4"}, env=env)
    assert cfg["numeric.threads"] == 4 and cfg.sources["numeric.threads"] == "flag"
    assert cfg["output.dir"] == "from-env" and cfg.sources["output.dir"] == "environment"
    assert cfg["numeric.tolerance"] == 1e-4 and cfg.sources["numeric.tolerance"] == "config"


def test_config_path_from_environment(tmp_path):
    path = write(tmp_path, "family.ell = 2\n")
    assert load_config("verify", env={"QUADSUM_CONFIG": path}).family.ell == 2


def test_strict_sequential_forces_one_thread():
    cfg = load_config("verify", overrides={"numeric.threads": "4", "numeric.strict_sequential": "yes"}, env={})
    assert cfg.threads == 1


def test_comments_and_rational_lists(tmp_path):
    path = write(tmp_path, "# a comment\nscale.a_list = 2, 1/3   # trailing\n")
    assert [str(a) for a in load_config("scale", path, env={})["scale.a_list"]] == ["2", "1/3"]


@pytest.mark.parametrize("text, fragment", [
    ("family.J0 = 2,1,0;1,2,0;0,0,2\nfamily.ell = 1\n", "even size"),
    ("family.J0 = 2,1;1\n", "square"),
    ("nonsense = 1\n", "unknown key"),
    ("family.ell\n", "key = value"),
    ("numeric.threads = many\n", "numeric.threads"),
    ("arch.preset = flat\n", "arch.preset"),
    ("family.J0 = 2,0;0,2\nfamily.ell = 1\n", "unimodular"),
    ("family.ell = 1\n", "ell > 1"),
    ("dilation = -2\n", "dilation"),
])
def test_schema_errors_are_collected(tmp_path, text, fragment):
    with pytest.raises(ConfigError) as err:
        load_config("verify", write(tmp_path, text), env={})
    assert any(fragment in m for m in err.value.errors)


def test_experiment_preconditions_at_load_time(tmp_path):
    with pytest.raises(ConfigError):
        load_config("scale", write(tmp_path, "family.ell = 2\n"), env={})
    with pytest.raises(ConfigError):
        load_config("count", write(tmp_path, "family.ell = 2\n"), env={})
    with pytest.raises(ConfigError):
        load_config("theta", write(tmp_path, "arch.preset = skew\n"), env={})
    with pytest.raises(ConfigError):
        load_config("densities", write(tmp_path, "densities.primes = 2,4\n"), env={})


def test_odd_size_core_exits_with_schema_status(tmp_path, capsys):
    path = write(tmp_path, "family.J0 = 2,1,0;1,2,0;0,0,2\n")
    assert main(["verify", "--config", path, "--out", str(tmp_path / "out")]) == EXIT_SCHEMA
    assert "even size" in capsys.readouterr().err


def test_verify_run_writes_self_describing_reports(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--out", str(out), "--strict-sequential"]) == EXIT_OK
    report = json.loads((out / "verify.json").read_text())
    assert report["passed"] and report["result"]["relative_deviation"] < 1e-5
    assert report["settings"]["family.ell"] == 3
    assert report["result"]["settings"]["radii"]["lhs"]
    rows = list(csv.reader(open(out / "verify.csv")))
    assert rows[0] == ["term_label", "side", "real", "imag", "abs_err_bound"]
    assert all(float(c) == float(c) for r in rows[1:] for c in r[2:])
    log = (out / "verify.log").read_text()
    assert "trapezoid nodes" in log and "radius" in log


def test_strict_sequential_csv_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["verify", "--out", str(tmp_path / name), "--strict-sequential"]) == EXIT_OK
    assert (tmp_path / "a" / "verify.csv").read_bytes() == (tmp_path / "b" / "verify.csv").read_bytes()


def test_tolerance_failure_has_its_own_status(tmp_path):
    path = write(tmp_path, "arch.preset = skew\nfamily.ell = 2\n")
    assert main(["verify", "--config", path, "--tolerance", "1e-300", "--out", str(tmp_path)]) == EXIT_TOLERANCE
    assert not json.loads((tmp_path / "verify.json").read_text())["passed"]


def test_resource_guard_status(tmp_path, monkeypatch):
    import quadsum.summation as summation

    monkeypatch.setattr(summation, "MAX_RADIUS", 3)
    assert main(["verify", "--out", str(tmp_path)]) == EXIT_RESOURCE


def test_densities_and_theta_runs(tmp_path):
    out = str(tmp_path)
    assert main(["densities", "--out", out]) == EXIT_OK
    rows = list(csv.reader(open(tmp_path / "densities.csv")))
    assert rows[0] == ["p", "k", "count", "normalized_density"]
    assert ["3", "1", "261", "29/27"] in rows
    assert main(["theta", "--out", out]) == EXIT_OK
    assert json.loads((tmp_path / "theta.json").read_text())["result"]["relative_deviation"] < 1e-3
