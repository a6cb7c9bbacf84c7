import json
import re

import numpy as np
import pytest

from conftest import WORKED_DEGREES
from gwsnake import io
from gwsnake.cli import cli_main
from gwsnake.plotting import PlotSpec, Series, emit_plot, process_plot, tree_svg
from gwsnake.snake_stats import StatReport
from gwsnake.spatial_snake import Uniform3, decorate
from gwsnake.tree_codec import PlaneTree, chain, decode, encode

WORKED_W = [0, 3, 2, 1, 2, 2, 5, 4, 3, 2, 1, 0, 1, 3, 2, 1, 0, -1]
WORKED_H = [0, 1, 1, 1, 2, 3, 4, 4, 4, 4, 2, 1, 2, 3, 3, 3, 2]

CHAIN_SVG = """\
<svg xmlns="http://www.w3.org/2000/svg" width="640" height="320" viewBox="0 0 640 320">
<rect width="640" height="320" fill="white"/>
<title>H</title>
<polyline class="series" data-name="H" fill="none" stroke="#1f4e79" stroke-width="1" points="20,300 220,206.667 420,113.333 620,20"/>
</svg>
"""


def test_sample_cli(tmp_path):
    out = tmp_path / "t.csv"
    assert cli_main(["sample", "--offspring", "geometric:0.5", "--n", "3", "--seed", "7", "--out", str(out)]) == 0
    t = io.read_tree_csv(out)
    assert t.degrees.size == 4 and t.degrees.sum() == 3
    again = tmp_path / "u.csv"
    cli_main(["sample", "--n", "3", "--seed", "7", "--out", str(again)])
    assert out.read_bytes() == again.read_bytes()


def test_encode_cli_worked_tree(tmp_path):
    src = tmp_path / "worked.csv"
    io.write_tree_csv(src, PlaneTree(WORKED_DEGREES))
    assert cli_main(["encode", "--in", str(src), "--out", str(tmp_path / "enc")]) == 0
    assert io.read_process_csv(tmp_path / "enc" / "W.csv").tolist() == WORKED_W
    assert io.read_process_csv(tmp_path / "enc" / "H.csv").tolist() == WORKED_H
    assert cli_main(["encode", "--in", str(src), "--out", str(tmp_path / "bin"), "--format", "bin"]) == 0
    assert io.read_binary(tmp_path / "bin" / "W.bin").tolist() == WORKED_W


def test_sample_encode_decode_roundtrip(tmp_path):
    t = tmp_path / "t.csv"
    cli_main(["sample", "--n", "300", "--seed", "3", "--out", str(t)])
    cli_main(["encode", "--in", str(t), "--out", str(tmp_path / "e")])
    W = io.read_process_csv(tmp_path / "e" / "W.csv")
    tree = io.read_tree_csv(t)
    assert decode(W) == tree
    enc = encode(tree)
    assert np.array_equal(io.read_process_csv(tmp_path / "e" / "C.csv"), enc.C)


def test_stats_cli(tmp_path, capsys):
    src = tmp_path / "chain.csv"
    io.write_tree_csv(src, chain(8))
    assert cli_main(["stats", "inversions", "--in", str(src), "--perm", "identity"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == 0.0
    cli_main(["stats", "inversions", "--in", str(src), "--perm", "reverse"])
    assert json.loads(capsys.readouterr().out)["value"] == 28.0
    cli_main(["stats", "path-length", "--in", str(src)])
    assert json.loads(capsys.readouterr().out)["value"] == 28.0


@pytest.mark.parametrize("argv,code", [
    (["sample", "--n", "5"], 2),
    (["sample", "--n", "5", "--seed", "1", "--offspring", "bogus"], 2),
    (["sample", "--n", "3", "--seed", "1", "--offspring", "binary"], 3),
    (["sample", "--n", "5", "--seed", "1", "--out", "/nonexistent/dir/t.csv"], 2),
    (["frobnicate"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert cli_main(argv) == code
    assert "gwsnake" in capsys.readouterr().err


def test_process_roundtrips(tmp_path, rng):
    ints = rng.integers(-10**12, 10**12, 1000)
    io.write_binary(tmp_path / "a.bin", ints)
    assert np.array_equal(io.read_binary(tmp_path / "a.bin"), ints)
    assert (tmp_path / "a.bin").stat().st_size == 8 + 8 * 1000
    io.write_process_csv(tmp_path / "a.csv", ints)
    assert np.array_equal(io.read_process_csv(tmp_path / "a.csv"), ints)
    floats = rng.normal(size=100)
    io.write_process_csv(tmp_path / "f.csv", floats)
    assert np.array_equal(io.read_process_csv(tmp_path / "f.csv"), floats)
    with pytest.raises(TypeError):
        io.write_binary(tmp_path / "x.bin", floats)


def test_binary_layout(tmp_path):
    io.write_binary(tmp_path / "w.bin", np.array([0, -1]))
    assert (tmp_path / "w.bin").read_bytes() == bytes([2] + [0] * 7 + [0] * 8 + [0xFF] * 8)
    (tmp_path / "bad.bin").write_bytes(bytes([3] + [0] * 7 + [0] * 8))
    with pytest.raises(ValueError):
        io.read_binary(tmp_path / "bad.bin")


def test_snake_and_report_roundtrip(tmp_path, worked_tree, rng):
    snake = decorate(worked_tree, Uniform3(), rng)
    io.write_snake_csv(tmp_path / "s.csv", snake)
    kind, depth, pos = io.read_snake_csv(tmp_path / "s.csv")
    assert kind == "lex" and np.array_equal(depth, worked_tree.depth) and np.array_equal(pos, snake.S)
    io.write_snake_csv(tmp_path / "c.csv", snake, contour=True)
    kind, depth, pos = io.read_snake_csv(tmp_path / "c.csv")
    assert kind == "contour" and np.array_equal(pos, snake.Csp)
    r = StatReport("peaks", 3.0, 0.5, 10, 42, {"eta": 1.0})
    io.write_report_json(tmp_path / "r.json", r)
    assert io.read_report_json(tmp_path / "r.json") == r


def test_golden_chain_svg():
    svg = emit_plot(process_plot("H", [0, 1, 2, 3]))
    assert svg.decode() == CHAIN_SVG


def test_empty_plot_spec():
    with pytest.raises(ValueError):
        emit_plot(PlotSpec([]))
    with pytest.raises(ValueError):
        emit_plot(PlotSpec([Series("x", np.arange(3))], fmt="png"))


def test_spike_count_matches_peaks(tmp_path, capsys):
    base = ["--n", "3000", "--seed", "5", "--displacement", "regime:p=0.6", "--p", "0.6", "--eta", "0.1"]
    assert cli_main(["plot", "--kind", "snake", "--out", str(tmp_path / "s.svg")] + base) == 0
    svg = (tmp_path / "s.svg").read_text()
    assert cli_main(["stats", "peaks"] + base) == 0
    count = json.loads(capsys.readouterr().out)["value"]
    assert count > 0
    assert len(re.findall(r'class="peak"', svg)) == count


def test_plots_deterministic(tmp_path):
    args = ["plot", "--kind", "tree", "--n", "200", "--seed", "2"]
    cli_main(args + ["--out", str(tmp_path / "a.svg")])
    cli_main(args + ["--out", str(tmp_path / "b.svg")])
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert tree_svg(chain(5), layout="layered").count("<circle") == 5
