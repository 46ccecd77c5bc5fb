import csv
import json
import os

import mpmath as mp
import pytest

from dlaguerre import DomainError
from dlaguerre.cli import DEFAULT_OUT, OUT_ENV, RunConfig, main


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def manifest(out, partial=False):
    return json.loads((out / ("manifest.json.partial" if partial else "manifest.json")).read_text())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --- configuration --------------------------------------------------------

def test_config_roundtrip():
    cfg = RunConfig(alpha="0.5", lam="-1/2", t_grid=("2", "0.5"), n_max=7, digits=30,
                    formats=("json",), tasks=("verify",), quantities=("ln h_n", "beta"), ns=(8, 4))
    assert cfg.t_grid == ("0.5", "2")
    assert set(cfg.tasks) >= {"verify", "recurrence", "aux", "moments"}
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_config_validation():
    with pytest.raises(DomainError):
        RunConfig(alpha="-1", lam="0", t_grid=("1",))
    with pytest.raises(DomainError):
        RunConfig(alpha="0", lam="0", t_grid=())
    with pytest.raises(DomainError):
        RunConfig.from_text("alpha=0\nbogus=1\n")


def test_config_file_and_flag_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# fixture\nalpha=0\nlambda=1\nt=2\nn_max=3\ndigits=30\n")
    code, out = run(tmp_path, "compute", "--config", str(conf), "--n-max", "2")
    assert code == 0
    m = manifest(out)
    assert m["config"]["n_max"] == 2 and m["config"]["lam"] == "1"


# --- compute --------------------------------------------------------------

def test_compute_fixture(tmp_path):
    code, out = run(tmp_path, "compute", "--alpha", "0", "--lambda", "1", "--t", "2", "--n-max", "4")
    assert code == 0
    rows = read_csv(out / "recurrence_t=2.csv")
    with mp.workdps(60):
        assert abs(mp.mpf(rows[0]["alpha_n"]) - mp.mpf(4) / 3) < mp.mpf(10) ** -45
    m = manifest(out)
    assert m["schema_version"] == 1 and m["exit_code"] == 0
    assert {f["path"] for f in m["files"]} >= {"moments_t=2.json", "recurrence_t=2.csv", "aux_t=2.csv"}
    assert not list(out.glob("*.tmp*"))


def test_compute_lambda0_alpha_column(tmp_path):
    code, out = run(tmp_path, "compute", "--alpha", "1.5", "--lambda", "0", "--t", "1", "--n-max", "6",
                    "--format", "csv")
    assert code == 0
    assert not list(out.glob("*.json")) or [p.name for p in out.glob("*.json")] == ["manifest.json"]
    with mp.workdps(60):
        for row in read_csv(out / "recurrence_t=1.csv"):
            n = int(row["n"])
            assert abs(mp.mpf(row["alpha_n"]) - (2 * n + mp.mpf("2.5"))) < mp.mpf(10) ** -45


def test_compute_deterministic(tmp_path):
    args = ["compute", "--alpha", "0.5", "--lambda", "1.5", "--t", "1", "--t", "3", "--n-max", "5", "--digits", "30"]
    _, a = run(tmp_path, *args, name="a")
    _, b = run(tmp_path, *args, name="b", )
    fa = {f["path"]: f["sha256"] for f in manifest(a)["files"]}
    fb = {f["path"]: f["sha256"] for f in manifest(b)["files"]}
    assert fa == fb and len(fa) == 12


def test_compute_parallel_matches_serial(tmp_path):
    args = ["compute", "--alpha", "0", "--lambda", "2", "--t", "1", "--t", "2", "--n-max", "4", "--digits", "30"]
    _, a = run(tmp_path, *args, name="a")
    _, b = run(tmp_path, *args, "--jobs", "2", name="b")
    assert manifest(a)["files"] == manifest(b)["files"]


def test_env_var_default_out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "envout"))
    assert main(["compute", "--alpha", "0", "--lambda", "1", "--t", "2", "--n-max", "2"]) == 0
    assert (tmp_path / "envout" / "manifest.json").exists()
    monkeypatch.delenv(OUT_ENV)
    assert main(["compute", "--alpha", "0", "--lambda", "1", "--t", "2", "--n-max", "2"]) == 0
    assert (tmp_path / DEFAULT_OUT / "manifest.json").exists()


def test_error_leaves_partial(tmp_path):
    # a single t is not a long-time grid: the run errors after nothing useful was produced
    code, out = run(tmp_path, "asymptotics", "--regime", "long_time", "--alpha", "0", "--lambda", "1",
                    "--t", "100", "--n", "1")
    assert code == 2
    m = manifest(out, partial=True)
    assert m["error"] and m["exit_code"] == 2
    assert not (out / "manifest.json").exists()


def test_error_renames_written_files(tmp_path, monkeypatch):
    import dlaguerre.cli as cli

    real = cli._compute_one
    calls = []

    def flaky(cfg, t):
        calls.append(t)
        if len(calls) == 2:
            raise cli.DataIntegrityError("simulated failure")
        return real(cfg, t)

    monkeypatch.setattr(cli, "_compute_one", flaky)
    code, out = run(tmp_path, "compute", "--alpha", "0", "--lambda", "1", "--t", "1", "--t", "2", "--n-max", "2")
    assert code == 2
    names = sorted(p.name for p in out.iterdir())
    assert names and all(n.endswith(".partial") for n in names)


def test_bad_arguments_exit_2(tmp_path):
    # invalid parameters are rejected at argument parsing with the usage exit code
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "compute", "--alpha", "-3", "--lambda", "1", "--t", "2")
    assert exc.value.code == 2


# --- verify ---------------------------------------------------------------

def test_verify_passes(tmp_path, capsys):
    code, out = run(tmp_path, "verify", "--alpha", "0.5", "--lambda", "1.5", "--t", "1", "--n-max", "5",
                    "--digits", "30")
    assert code == 0
    m = manifest(out)
    ids = {r["identity"] for r in m["results"]}
    assert {"s12", "s11", "s21", "s23", "s22a", "d11", "d12", "tb1", "tb2", "dphi", "dlnhnt"} <= ids
    assert all(r["pass"] for r in m["results"])
    assert (out / "verify_t=1.csv").exists()


def test_verify_fault_injection(tmp_path, capsys):
    code, out = run(tmp_path, "verify", "--alpha", "0", "--lambda", "1", "--t", "2", "--n-max", "5",
                    "--digits", "30", "--no-fd", "--inject-fault", "moment:5:1e-12")
    assert code == 1
    text = capsys.readouterr().err
    assert "FAIL: worst identity" in text
    m = manifest(out)
    failing = {r["identity"] for r in m["results"] if not r["pass"]}
    assert "s21" in failing
    assert m["summary"]["passed"] is False


def test_verify_lambda0_annotations(tmp_path):
    code, out = run(tmp_path, "verify", "--alpha", "1", "--lambda", "0", "--t", "2", "--n-max", "4",
                    "--digits", "30", "--no-fd")
    assert code == 0
    notes = [n for r in manifest(out)["results"] for n in r["notes"]]
    assert "degenerate: classical Laguerre" in notes


# --- asymptotics / fit-constants -----------------------------------------

def test_asymptotics_long_time(tmp_path):
    code, out = run(tmp_path, "asymptotics", "--regime", "long_time", "--alpha", "0", "--lambda", "1",
                    "--t", "100", "--t", "1000", "--t", "10000", "--n", "2", "--quantity", "beta_n",
                    "--digits", "30")
    assert code == 0
    slopes = json.loads((out / "slopes.json").read_text())
    rep = slopes["reports"][0]
    assert rep["quantity"] == "beta_n" and abs(rep["observed_slope"] + 3) <= 0.1


def test_asymptotics_lambda0_exact(tmp_path):
    code, out = run(tmp_path, "asymptotics", "--regime", "large_n", "--alpha", "1", "--lambda", "0",
                    "--t", "1", "--n", "8", "--n", "16", "--n", "24", "--n", "32", "--quantity", "alpha_n",
                    "--quantity", "beta_n", "--digits", "30")
    assert code == 0
    reps = json.loads((out / "slopes.json").read_text())["reports"]
    assert [r["status"] for r in reps] == ["exact match", "exact match"]


def test_asymptotics_strict_inconclusive(tmp_path):
    # at t ~ 1e15 the t^-3 remainder (~1e-45) sits below the certified floor
    args = ["asymptotics", "--regime", "long_time", "--alpha", "0", "--lambda", "1", "--t", "1e15",
            "--t", "1e16", "--t", "1e17", "--n", "1", "--quantity", "alpha_n", "--digits", "12"]
    code, out = run(tmp_path, *args, name="lax")
    reps = json.loads((out / "slopes.json").read_text())["reports"]
    assert reps[0]["status"] == "inconclusive" and code == 0
    code, _ = run(tmp_path, *args, "--strict", name="strict")
    assert code == 1


def test_fit_constants_lambda0(tmp_path):
    code, out = run(tmp_path, "fit-constants", "--alpha", "1", "--lambda", "0", "--t", "1", "--n-max", "40",
                    "--digits", "30")
    assert code == 0
    doc = json.loads((out / "constants.json").read_text())
    fit = doc["fits"][0]
    with mp.workdps(30):
        assert abs(mp.mpf(fit["constants"]["c2"]) - (1 - mp.log(2 * mp.pi))) < mp.mpf("1e-4")
    assert fit["tag"].startswith("known")


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "0.1.0" in capsys.readouterr().out
