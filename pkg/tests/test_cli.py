import json

import numpy as np
import pytest

from vmfkit import VmfParams, normalize, sample_mixture, reference_mixture, SamplerConfig
from vmfkit.cli import EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from vmfkit.io import load_json, load_matrix, model_to_dict, save_json, save_labels, save_matrix


def run(*args):
    return main([str(a) for a in args])


def test_sample_then_fit_batch_roundtrip(tmp_path):
    data = tmp_path / "data.csv"
    model = tmp_path / "model.json"
    report = tmp_path / "report.json"
    truth = tmp_path / "truth.json"
    save_json(truth, model_to_dict(VmfParams(mu=np.array([1.0, 0, 0, 0, 0]), kappa=50.0)))
    assert run("sample", "--dim", 5, "--kappa", 50, "--mu-e1", "--n", 4000, "--seed", 0, "--out", data) == EXIT_OK
    assert run("fit", "--method", "batch", "--data", data, "--truth", truth, "--out", model, "--report", report) == EXIT_OK
    fitted = load_json(model)
    assert fitted["d"] == 5
    assert abs(fitted["kappa"] - 50.0) / 50.0 < 0.1
    rep = load_json(report)
    assert rep["e_kappa"] is not None and rep["e_kappa"] < 0.1
    assert rep["header"]["toolkit_version"]


def test_fit_sgd_smoke(tmp_path):
    data = tmp_path / "data.csv"
    run("sample", "--dim", 4, "--kappa", 20, "--mu-e1", "--n", 1000, "--seed", 1, "--out", data)
    model = tmp_path / "model.json"
    report = tmp_path / "report.json"
    code = run(
        "fit", "--method", "sgd", "--data", data, "--epochs", 5, "--seed", 1,
        "--out", model, "--report", report,
    )
    assert code == EXIT_OK
    assert len(load_json(report)["ll_trace"]) == 5


def test_sample_with_mu_file_and_header(tmp_path):
    mu_file = tmp_path / "mu.csv"
    save_matrix(mu_file, normalize(np.array([1.0, 2.0, 2.0]))[None, :])
    out = tmp_path / "data.csv"
    assert run("sample", "--kappa", 10, "--mu-file", mu_file, "--n", 50, "--seed", 2, "--out", out, "--header") == EXIT_OK
    assert load_matrix(out).shape == (50, 3)


def test_fit_mix_and_cluster(tmp_path):
    mix = reference_mixture()
    x, z = sample_mixture(mix, 600, SamplerConfig(seed=3))
    data = tmp_path / "data.csv"
    labels = tmp_path / "labels.csv"
    save_matrix(data, x)
    save_labels(labels, z)
    truth = tmp_path / "truth.json"
    save_json(truth, model_to_dict(mix))

    model = tmp_path / "mix.json"
    report = tmp_path / "mixreport.json"
    code = run(
        "fit-mix", "--method", "em", "--data", data, "--order", 3, "--truth", truth,
        "--seed", 3, "--out", model, "--report", report,
    )
    assert code == EXIT_OK
    doc = load_json(report)
    assert doc["errors"]["alpha_l1"] < 0.2
    fitted = load_json(model)
    assert len(fitted["components"]) == 3
    assert fitted["alphas"]

    metrics = tmp_path / "metrics.json"
    out_labels = tmp_path / "pred.csv"
    code = run(
        "cluster", "--data", data, "--labels", labels, "--k", 3, "--method", "kmeans",
        "--seed", 3, "--report", metrics, "--out-labels", out_labels,
    )
    assert code == EXIT_OK
    m = load_json(metrics)
    assert m["ari"] > 0.9 and m["nmi"] > 0.9
    assert m["nmi_normalization"] == "arithmetic"
    assert len(np.loadtxt(out_labels, dtype=int)) == 600


def test_cluster_em_method(tmp_path):
    mix = reference_mixture()
    x, z = sample_mixture(mix, 400, SamplerConfig(seed=4))
    data = tmp_path / "data.csv"
    labels = tmp_path / "labels.csv"
    save_matrix(data, x)
    save_labels(labels, z)
    metrics = tmp_path / "metrics.json"
    assert run("cluster", "--data", data, "--labels", labels, "--k", 3, "--method", "em",
               "--seed", 4, "--report", metrics) == EXIT_OK
    assert load_json(metrics)["ari"] > 0.8


def test_bessel_subcommand(capsys):
    assert run("bessel", "--order", 100, "--arg", 0.03) == EXIT_OK
    printed = float(capsys.readouterr().out.strip())
    assert printed == pytest.approx(-783.7098811158334, rel=1e-12)
    assert run("bessel", "--order", 0.5, "--arg", 2.0, "--ratio") == EXIT_OK
    printed = float(capsys.readouterr().out.strip())
    assert 0.0 < printed < 1.0


def test_exit_codes(tmp_path):
    # validation error before any work
    out = tmp_path / "x.csv"
    assert run("sample", "--dim", 3, "--kappa", 5, "--mu-e1", "--n", 0, "--seed", 0, "--out", out) == EXIT_VALIDATION
    # numerical failure: identical rows make kappa unbounded
    data = tmp_path / "flat.csv"
    save_matrix(data, np.tile(np.array([1.0, 0.0, 0.0]), (8, 1)))
    assert run("fit", "--method", "batch", "--data", data,
               "--out", tmp_path / "m.json", "--report", tmp_path / "r.json") == EXIT_NUMERICAL
    # i/o failure: missing input file
    assert run("fit", "--method", "batch", "--data", tmp_path / "missing.csv",
               "--out", tmp_path / "m.json", "--report", tmp_path / "r.json") == EXIT_IO


def test_experiment_validation_before_work(tmp_path):
    assert run("experiment", "table1", "--dims", "5", "--kappas", "50", "--n", 0,
               "--seeds", "0", "--out-dir", tmp_path) == EXIT_VALIDATION
    assert not list(tmp_path.iterdir())


def test_experiment_table1_deterministic(tmp_path):
    args = ["experiment", "table1", "--dims", "5", "--kappas", "50", "--n", 400, "--seeds", "0,1"]
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    assert run(*args, "--out-dir", d1) == EXIT_OK
    assert run(*args, "--out-dir", d2) == EXIT_OK
    assert (d1 / "table1.json").read_bytes() == (d2 / "table1.json").read_bytes()
    assert (d1 / "table1.txt").read_bytes() == (d2 / "table1.txt").read_bytes()
    report = load_json(d1 / "table1.json")
    assert report["header"]["config_hash"]
    assert len(report["cells"]) == 1
    assert len(report["cells"][0]["runs"]) == 2


def test_experiment_mixture_synth_smoke(tmp_path):
    assert run("experiment", "mixture-synth", "--n", 300, "--seeds", "0",
               "--out-dir", tmp_path) == EXIT_OK
    report = load_json(tmp_path / "mixture_synth.json")
    assert report["runs"][0]["em"]["alpha_l1"] >= 0.0
    assert (tmp_path / "mixture_synth.txt").exists()


def test_experiment_mixture_synth_order_override(tmp_path):
    assert run("experiment", "mixture-synth", "--n", 300, "--seeds", "0", "--order", 1,
               "--out-dir", tmp_path) == EXIT_OK
    report = load_json(tmp_path / "mixture_synth.json")
    assert report["runs"][0]["errors"] is None
    assert "alpha_l1" not in report["runs"][0]["em"]


def test_seed_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("VMFKIT_SEED", "7")
    out_env = tmp_path / "env.csv"
    out_flag = tmp_path / "flag.csv"
    run("sample", "--dim", 3, "--kappa", 5, "--mu-e1", "--n", 20, "--out", out_env)
    monkeypatch.delenv("VMFKIT_SEED")
    run("sample", "--dim", 3, "--kappa", 5, "--mu-e1", "--n", 20, "--seed", 7, "--out", out_flag)
    assert out_env.read_bytes() == out_flag.read_bytes()


def test_labels_data_mismatch(tmp_path):
    data = tmp_path / "d.csv"
    labels = tmp_path / "l.csv"
    save_matrix(data, np.eye(3))
    save_labels(labels, np.array([0, 1]))
    assert run("cluster", "--data", data, "--labels", labels, "--k", 2, "--method", "kmeans",
               "--seed", 0, "--report", tmp_path / "m.json") == EXIT_VALIDATION
