import json
import subprocess
import sys

import numpy as np
import pytest

from orchid.analysis import feature_distribution, wcc
from orchid.cli import main, parse_alpha_grid


@pytest.fixture
def clique(tmp_path):
    path = tmp_path / "clique_5_3.hg"
    assert main(["generate", "clique", "--n", "5", "--r", "3", "--out", str(path)]) == 0
    return path


def test_curvature_on_clique(clique, capsys):
    assert main(["curvature", str(clique), "--measure", "en", "--agg", "mean", "--alpha", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["edge_curvature"] == pytest.approx([0.75] * 10)
    assert doc["config"] == {"measure": "en", "agg": "mean", "alpha": 0.0}
    assert set(doc["manifest"]) >= {"argv", "configs", "inputs", "version"}


def test_alpha_grid_writes_36_files(clique, tmp_path):
    out = tmp_path / "grid"
    argv = ["curvature", str(clique), "--alpha-grid", "0:0.5:0.1", "--measure", "en,ee,we", "--agg", "mean,max"]
    assert main(argv + ["--out", str(out)]) == 0
    assert len(list(out.glob("*.json"))) == 36


def test_alpha_grid_parsing():
    assert parse_alpha_grid("0:0.5:0.1") == [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
    assert parse_alpha_grid("0.2:0.2:0.1") == [0.2]


def test_missing_file_and_parse_error(tmp_path, capsys):
    assert main(["curvature", str(tmp_path / "nope.hg")]) == 2
    bad = tmp_path / "bad.hg"
    bad.write_text("a b\n,,\n")
    assert main(["curvature", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_usage_error_exit_code(capsys):
    assert main(["curvature"]) == 2
    assert main(["nonsense"]) == 2


def test_isolated_nodes_warn_but_succeed(tmp_path, capsys):
    path = tmp_path / "iso.hg"
    path.write_text("a\nb c\n")
    assert main(["curvature", str(path)]) == 0
    captured = capsys.readouterr()
    assert "isolated" in captured.err
    assert json.loads(captured.out)["node_curvature_edges"]["a"] is None


def test_outputs_identical_across_thread_counts(tmp_path):
    graph = tmp_path / "er.hg"
    assert main(["generate", "er", "--n", "60", "--m", "80", "--p", "0.05", "--seed", "3", "--out", str(graph)]) == 0
    blobs = []
    out = tmp_path / "out"
    for threads in ("1", "3"):
        assert main(["curvature", str(graph), "--measure", "we", "--alpha", "0.1", "--threads", threads, "--out", str(out)]) == 0
        blobs.append(sorted((p.name, p.read_bytes()) for p in out.glob("*.json")))
    assert blobs[0] == blobs[1]


def test_threads_env_fallback(tmp_path, clique, monkeypatch):
    monkeypatch.setenv("ORCHID_THREADS", "2")
    assert main(["curvature", str(clique), "--out", str(tmp_path / "env")]) == 0
    monkeypatch.setenv("ORCHID_THREADS", "many")
    assert main(["curvature", str(clique), "--out", str(tmp_path / "env2")]) == 2


def test_timings_are_opt_in(clique, capsys):
    assert main(["curvature", str(clique), "--timings"]) == 0
    assert "timings" in json.loads(capsys.readouterr().out)["manifest"]
    assert main(["curvature", str(clique)]) == 0
    assert "timings" not in json.loads(capsys.readouterr().out)["manifest"]


def test_csv_export(clique, tmp_path):
    out = tmp_path / "csv"
    assert main(["curvature", str(clique), "--out", str(out), "--csv"]) == 0
    rows = next(out.glob("*.csv")).read_text().splitlines()
    assert rows[0] == "kind,key,value"
    assert rows[1].startswith("edge,0,")


def test_generate_is_deterministic(tmp_path):
    paths = [tmp_path / "a.hg", tmp_path / "b.hg"]
    for p in paths:
        assert main(["generate", "er", "--n", "100", "--m", "200", "--p", "0.05", "--seed", "7", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_generate_tree_reports_central_edge(tmp_path, capsys):
    assert main(["generate", "tree", "--r", "3", "--k", "2", "--depth", "3", "--out", str(tmp_path / "t.hg")]) == 0
    assert "central edge: 0" in capsys.readouterr().err


def test_generate_errors(capsys):
    assert main(["generate", "hcm", "--degrees", "1,2", "--cards", "2,2"]) == 2
    assert main(["generate", "er", "--n", "10"]) == 2
    assert main(["generate", "grid", "--cycle-len", "5", "--r", "3"]) == 2


def test_generate_hcm_reports_discards(capsys):
    assert main(["generate", "hcm", "--degrees", "2,2,2", "--cards", "3,3", "--seed", "1"]) == 0
    assert "discard rate" in capsys.readouterr().err


def test_generate_hsbm_communities(tmp_path):
    out = tmp_path / "comm.json"
    argv = [
        "generate", "hsbm", "--node-sizes", "5,5", "--edge-sizes", "4,4",
        "--affinity", "0.8,0.0;0.0,0.8", "--communities-out", str(out), "--out", str(tmp_path / "h.hg"),
    ]
    assert main(argv) == 0
    doc = json.loads(out.read_text())
    assert len(doc["node_communities"]) <= 10


def _result_dir(tmp_path, name, seed, p=0.08):
    graph = tmp_path / f"{name}.hg"
    assert main(["generate", "er", "--n", "40", "--m", "40", "--p", str(p), "--seed", str(seed), "--out", str(graph)]) == 0
    out = tmp_path / f"res_{name}"
    assert main(["curvature", str(graph), "--out", str(out), "--types", "edge"]) == 0
    return out


def test_analyze_mmd_identical_results(tmp_path, capsys):
    a = _result_dir(tmp_path, "g", 1)
    b = tmp_path / "copy"
    b.mkdir()
    for f in a.glob("*.json"):
        (b / f.name).write_bytes(f.read_bytes())
    assert main(["analyze", str(a), str(b), "--mmd", "--B", "50"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mmd"]["p_bonferroni"][0][1] > 0.9


def test_analyze_nmi_over_grid(clique, tmp_path, capsys):
    er = tmp_path / "er.hg"
    assert main(["generate", "er", "--n", "30", "--m", "30", "--p", "0.12", "--seed", "2", "--out", str(er)]) == 0
    out = tmp_path / "grid"
    argv = ["curvature", str(er), "--alpha-grid", "0:0.5:0.1", "--measure", "en,ee,we", "--agg", "mean,max", "--types", "edge"]
    assert main(argv + ["--out", str(out)]) == 0
    assert main(["analyze", str(out), "--nmi"]) == 0
    mat = np.array(json.loads(capsys.readouterr().out)["nmi"]["er"]["matrix"], dtype=float)
    assert mat.shape == (36, 36)
    assert np.allclose(mat, mat.T)
    assert np.allclose(np.diag(mat), 1.0)


def test_analyze_wcc_with_label_file(tmp_path, capsys):
    dirs = [_result_dir(tmp_path, f"g{k}", k, p=0.05 + 0.05 * (k % 2)) for k in range(4)]
    files = [next(d.glob("*.json")) for d in dirs]
    labels = tmp_path / "labels.txt"
    labels.write_text("".join(f"{f} {k % 2}\n" for k, f in enumerate(files)))
    assert main(["analyze", *map(str, files), "--wcc", "--labels", str(labels)]) == 0
    got = json.loads(capsys.readouterr().out)["wcc"]["value"]
    dists = [feature_distribution(json.loads(f.read_text()), "edge_curvature") for f in files]
    assert got == pytest.approx(wcc([k % 2 for k in range(4)], dists))


def test_analyze_kernel_and_clusters(tmp_path, capsys):
    dirs = [_result_dir(tmp_path, f"g{k}", k) for k in range(3)]
    assert main(["analyze", *map(str, dirs), "--kernel", "rbf", "--k", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["kpca"]) == 3 and len(doc["kpca"][0]) == 2
    assert len(doc["clusters"]) == 3
    assert doc["kernel"]["kind"] == "rbf"


def test_analyze_rejects_mixed_configs_and_missing_features(clique, tmp_path):
    out = tmp_path / "mixed"
    assert main(["curvature", str(clique), "--agg", "mean,max", "--types", "edge", "--out", str(out)]) == 0
    assert main(["analyze", str(out), "--mmd"]) == 2
    single = next(out.glob("*mean*.json"))
    assert main(["analyze", str(single), str(single), "--mmd", "--feature", "directional_curvature"]) == 2
    assert main(["analyze", str(single)]) == 2


def test_profile(clique, capsys):
    assert main(["profile", str(clique), "--exact-diameter"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["uniform_r"] == 3 and doc["diameter"] == 1 and doc["components"] == 1


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "orchid.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("curvature", "generate", "analyze", "profile"):
        assert sub in res.stdout
