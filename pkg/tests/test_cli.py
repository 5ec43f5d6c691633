import numpy as np
import pytest

from unfold.cli import main, read_config, read_matrix


@pytest.fixture
def data(tmp_path):
    path = tmp_path / "roll.csv"
    assert main(["generate", "swiss_roll", "--n", "40", "--seed", "3", "--output", str(path)]) == 0
    return path


def test_generate_writes_truth(data):
    Y = read_matrix(data)
    T = read_matrix(data.with_name("roll.truth.csv"), header=True)
    assert Y.shape == (40, 3) and T.shape == (40, 2)


def test_embed_round_trip(tmp_path, data):
    out = tmp_path / "emb.csv"
    svg = tmp_path / "emb.svg"
    assert main(["embed", "--method", "isomap", "--k", "8", "--input", str(data),
                 "--output", str(out), "--svg", str(svg), "--trajectory"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x1,x2" and len(lines) == 41
    X = read_matrix(out)
    assert X.shape == (40, 2)
    assert read_matrix(tmp_path / "emb.eigenvalues.csv").shape == (2, 1)
    text = svg.read_text()
    assert text.startswith("<svg") or text.startswith("<?xml")
    assert text.count("<circle") == 40 and "<polyline" in text


@pytest.mark.parametrize("argv", [
    ["embed", "--method", "tsne"],
    ["embed", "--method", "pca", "--q", "0"],
    ["generate", "moons"],
    ["embed", "--method", "pca", "--k", "x"],
])
def test_usage_errors_exit_two(tmp_path, data, capsys, argv):
    code = main(argv + ["--input", str(data), "--output", str(tmp_path / "o.csv")]
                if argv[0] == "embed" else argv)
    err = capsys.readouterr().err.strip().splitlines()
    assert code == 2
    assert len(err) == 1 and err[0].startswith("error:")


def test_runtime_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    assert main(["embed", "--method", "pca", "--input", str(bad), "--output", "-"]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and "row 2, column 2" in err


def test_thread_variable(monkeypatch, data, capsys):
    monkeypatch.setenv("UNFOLD_THREADS", "zero")
    assert main(["embed", "--method", "pca", "--input", str(data), "--output", "-"]) == 2
    monkeypatch.setenv("UNFOLD_THREADS", "1")
    assert main(["embed", "--method", "pca", "--input", str(data), "--output", "-"]) == 0


def test_config_precedence(tmp_path, data):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nmethod = lle\nq = 1\nstrict-connectivity = yes\n")
    assert read_config(cfg) == {"method": "lle", "q": 1, "strict_connectivity": True}
    out = tmp_path / "o.csv"
    assert main(["embed", "--config", str(cfg), "--q", "2", "--input", str(data),
                 "--output", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "x1,x2"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert main(["embed", "--config", str(bad), "--input", str(data)]) == 1


def test_header_detection(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("a,b\n1,2\n")
    assert read_matrix(p).shape == (1, 2)
    p.write_text("1e3,2\n1,2\n")
    assert read_matrix(p).shape == (2, 2)


def test_compare_table(tmp_path, data, capsys):
    out = tmp_path / "cmp.csv"
    # a 1-nearest-neighbor graph falls apart, so eigenmaps fails
    assert main(["compare", "--methods", "pca,kpca,le", "--k", "1", "--restarts", "1",
                 "--input", str(data), "--output", str(out), "--timing"]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "method,score,runtime_s,error"
    scores = [float(r.split(",")[1]) for r in rows[1:3]]
    assert scores == sorted(scores, reverse=True)
    assert rows[3].startswith("le,,") and "components" in rows[3]
    assert all(float(r.split(",")[2]) > 0 for r in rows[1:])
    assert "method" in capsys.readouterr().out
    assert (tmp_path / "cmp.txt").exists()


def test_score_command(tmp_path, data, capsys):
    assert main(["score", "--input", str(data), "--embedding",
                 str(data.with_name("roll.truth.csv")), "--restarts", "1"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("score,") and np.isfinite(float(line.split(",")[1]))


def test_reruns_are_byte_identical(tmp_path, data):
    outs = []
    for run in range(2):
        d = tmp_path / f"run{run}"
        d.mkdir()
        assert main(["embed", "--method", "alle", "--ordering", "random", "--seed", "7",
                     "--input", str(data), "--output", str(d / "e.csv")]) == 0
        outs.append((d / "e.csv").read_bytes())
    assert outs[0] == outs[1]
