import json
from pathlib import Path

import pytest

from fraclat.cli import EXIT_BAD_CONFIG, EXIT_CEILING, EXIT_OK, EXIT_VALIDATION, run


def lines(path: Path):
    return path.read_text().splitlines()


def test_validate_builtin_gasket(capsys):
    assert run(["validate", "--builtin", "gasket"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "pass" in out
    assert out.count("ok") == 5


def test_validate_failure_exit_code(tmp_path):
    bad = {
        "name": "bad",
        "N": 3,
        "N0": 3,
        "relation": [[1, 2, 2, 1], [1, 3, 3, 1], [2, 3, 3, 2], [1, 1, 2, 1]],
        "group": [[1, 2, 3]],
        "alpha": [1, 1, 1],
        "beta": [1, 1, 1],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    assert run(["validate", "--structure", str(path)]) == EXIT_VALIDATION


def test_missing_structure_is_config_error():
    assert run(["validate"]) == EXIT_BAD_CONFIG
    assert run(["validate", "--builtin", "nosuch"]) == EXIT_BAD_CONFIG


def test_spectrum_csv_format(tmp_path):
    assert run(["spectrum", "--builtin", "gasket", "--level", "1", "--out", str(tmp_path)]) == EXIT_OK
    content = lines(tmp_path / "gasket_n1_dirichlet.csv")
    assert content[0].startswith("# command: spectrum, config: ")
    assert content[1] == "lambda,multiplicity"
    atoms = [tuple(map(float, l.split(","))) for l in content[2:]]
    assert [m for _, m in atoms] == [2, 1]
    assert [loc for loc, _ in atoms] == pytest.approx([-2.5, -1.0], abs=1e-12)


def test_spectrum_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert run(["spectrum", "--builtin", "gasket", "--level", "2", "--out", str(out)]) == EXIT_OK
    for name in ("gasket_n2_neumann.csv", "gasket_n2_dirichlet.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_nd_outputs(tmp_path):
    assert run(["nd", "--builtin", "gasket", "--level", "2", "--out", str(tmp_path)]) == EXIT_OK
    nd = lines(tmp_path / "gasket_n2_nd.csv")
    assert nd[1] == "lambda,multiplicity"
    rows = [l.split(",") for l in nd[2:]]
    assert [int(r[1]) for r in rows] == [3, 1]
    rho = lines(tmp_path / "gasket_n2_rho.csv")
    assert rho[1] == "lambda,rho_n"
    assert [int(l.split(",")[1]) for l in rho[2:]] == [3, 1]


def test_dos_output(tmp_path):
    assert run(["dos", "--builtin", "interval:1/2", "--level", "3", "--points", "50",
                "--out", str(tmp_path)]) == EXIT_OK
    content = lines(tmp_path / "interval_n3_dos_neumann.csv")
    assert content[1] == "lambda,cdf"
    rows = [tuple(map(float, l.split(","))) for l in content[2:]]
    assert len(rows) == 50
    # repartition function decreases in lambda and ends at the normalized count
    assert rows[0][1] == pytest.approx(9 / 8)
    assert all(a[1] >= b[1] - 1e-12 for a, b in zip(rows[:-1], rows[1:]))


def test_green_scan(tmp_path):
    assert run(["green", "--builtin", "gasket", "--re-steps", "3", "--im-steps", "2",
                "--nmax", "12", "--out", str(tmp_path)]) == EXIT_OK
    content = lines(tmp_path / "gasket_green.csv")
    assert content[1] == "re_lambda,im_lambda,value,iters,tail"
    assert len(content) == 2 + 6


def test_gasket_measure_report(tmp_path, capsys):
    tree = tmp_path / "tree.json"
    assert run(["gasket-measure", "--n", "3", "--kmax", "2", "--out", str(tmp_path),
                "--tree-out", str(tree)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "max atom-location mismatch" in out
    assert "total mass nu side" in out
    assert "total mass limit side" in out
    records = json.loads(tree.read_text())
    assert len(records) == 2 * (1 + 2 + 4)
    assert all(set(r) == {"depth", "parent", "location"} for r in records)


def test_degrees_gasket(tmp_path, capsys):
    assert run(["degrees", "--builtin", "gasket", "--n", "3", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "dhat sequence: [2, 4, 8]" in out
    assert "case_i" in out
    content = lines(tmp_path / "gasket_degrees.csv")
    assert content[1] == "n,d00,d01,d10,d11,l_n,l_n^{1/n}"
    first = content[2].split(",")
    assert [int(x) for x in first[:5]] == [1, 1, 1, 1, 2]


def test_degrees_interval(tmp_path, capsys):
    assert run(["degrees", "--builtin", "interval:1/3", "--n", "3", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "dhat sequence: [2, 4, 8]" in out
    assert "case_ii" in out


def test_decimation_report(tmp_path, capsys):
    assert run(["decimation", "--n", "2", "--out", str(tmp_path)]) == EXIT_OK
    assert "pass" in capsys.readouterr().out


def test_matrix_export(tmp_path):
    assert run(["matrix", "--builtin", "gasket", "--level", "1", "--out", str(tmp_path)]) == EXIT_OK
    content = lines(tmp_path / "gasket_A1.mtx")
    assert content[0] == "%%MatrixMarket matrix coordinate real symmetric"
    n, m, nnz = map(int, content[2].split())
    assert (n, m) == (6, 6)
    assert len(content) == 3 + nnz


def test_custom_base_operator(tmp_path):
    base = {"a": [[1, 2, "2"], [1, 3, "2"], [2, 3, "2"]], "b": [1, 1, 1]}
    path = tmp_path / "base.json"
    path.write_text(json.dumps(base))
    assert run(["spectrum", "--builtin", "gasket", "--level", "0", "--base", str(path),
                "--out", str(tmp_path)]) == EXIT_OK
    content = lines(tmp_path / "gasket_n0_neumann.csv")
    atoms = [tuple(map(float, l.split(","))) for l in content[2:]]
    assert atoms == [(-6.0, 2.0), (0.0, 1.0)]


def test_invalid_base_operator_rejected(tmp_path):
    # couplings that miss the symmetry group (and leave the cell disconnected)
    base = {"a": [[1, 2, "1"]], "b": [1, 1, 1]}
    path = tmp_path / "base.json"
    path.write_text(json.dumps(base))
    assert run(["spectrum", "--builtin", "gasket", "--level", "0", "--base", str(path),
                "--out", str(tmp_path)]) == EXIT_BAD_CONFIG


def test_size_ceiling_exit_code(tmp_path):
    assert run(["spectrum", "--builtin", "interval:1/2", "--level", "14",
                "--out", str(tmp_path)]) == EXIT_CEILING
