import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pacsloss.cli import main, parse_complex
from pacsloss.wigner import read_field_gnuplot


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.reader(text.splitlines()))


def test_parse_complex():
    assert parse_complex("0.3+0.2i") == 0.3 + 0.2j
    assert parse_complex("0.5") == 0.5
    assert parse_complex(1.5) == 1.5
    with pytest.raises(ValueError):
        parse_complex("abc")


def test_pnw_fock_anchor(capsys):
    code, out, _ = run(["pnw", "--alpha", "0", "--m", "1", "--gamma-t", "0"], capsys)
    assert code == 0
    header, row = rows_of(out)
    assert header == ["gamma_t", "p_nw", "min_w", "converged"]
    assert float(row[1]) == pytest.approx(2 * math.exp(-0.5) - 1, abs=1e-4)
    assert row[3] == "true"


def test_ep_fock_anchor(capsys):
    code, out, _ = run(["ep", "--alpha", "0", "--m", "1", "--gamma-t", "0"], capsys)
    assert code == 0
    header, row = rows_of(out)
    assert header == ["gamma_t", "log_negativity", "trace_norm", "truncation_error"]
    assert float(row[1]) == pytest.approx(1.0, abs=1e-6)


def test_ep_sweep_rows(capsys):
    code, out, _ = run(["ep", "--alpha", "0.5", "--gamma-t-range", "0", "1", "0.25"], capsys)
    assert code == 0
    rows = rows_of(out)[1:]
    assert [float(r[0]) for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_threshold_fock(capsys):
    code, out, _ = run(["threshold", "--alpha", "0", "--m", "1", "--grid-n", "401"], capsys)
    assert code == 0
    assert float(rows_of(out)[1][-1]) == pytest.approx(math.log(2), abs=0.01)


def test_invalid_truncation_exit_2(capsys):
    code, _, err = run(["pnw", "--alpha", "1.5", "--m", "2", "--dim", "8"], capsys)
    assert code == 2
    assert "error" in err


def test_invalid_values_exit_2(capsys):
    assert run(["pnw", "--alpha", "0.5", "--gamma-t", "-1"], capsys)[0] == 2
    assert run(["pnw", "--alpha", "0.5", "--grid-n", "10"], capsys)[0] == 2
    assert run(["wigner", "--alpha", "0.5", "--half-width", "3"], capsys)[0] == 2
    assert run(["ep", "--alpha", "zz"], capsys)[0] == 2
    assert run(["ep", "--alpha", "0.5", "--format", "gnuplot-matrix"], capsys)[0] == 2


def test_cut_out_of_grid_exit_2(capsys):
    assert run(["cut", "--alpha", "0.5", "--p", "9", "--grid-n", "65"], capsys)[0] == 2


def test_unconverged_exit_3(tmp_path, capsys):
    out = tmp_path / "pnw.csv"
    code, _, err = run(["pnw", "--alpha", "0", "--grid-n", "65", "-o", str(out)], capsys)
    assert code == 3
    assert "convergence" in err
    # the result is still written, flagged unconverged
    assert rows_of(out.read_text())[1][3] == "false"


def test_threshold_not_found_exit_3(capsys, monkeypatch):
    import pacsloss.cli as cli
    from pacsloss.errors import NoThresholdInRange

    def never(*args, **kwargs):
        raise NoThresholdInRange("P_NW never drops below epsilon")

    monkeypatch.setattr(cli, "vanishing_threshold", never)
    assert run(["threshold", "--alpha", "0.5"], capsys)[0] == 3


def test_unwritable_output_exit_4(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    assert run(["ep", "--alpha", "0.5", "-o", str(target)], capsys)[0] == 4


def test_missing_config_exit_4(tmp_path, capsys):
    assert run(["ep", "--config", str(tmp_path / "nope.json")], capsys)[0] == 4


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"alpha": "0.5", "m": 2, "gamma_t": 0.3}))
    code, out, _ = run(["ep", "--config", str(cfg), "--m", "1"], capsys)
    assert code == 0
    code2, out2, _ = run(["ep", "--alpha", "0.5", "--m", "1", "--gamma-t", "0.3"], capsys)
    assert out == out2


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"alpah": 0.5}))
    assert run(["ep", "--config", str(cfg)], capsys)[0] == 2


def test_json_schema_and_manifest(tmp_path, capsys):
    out = tmp_path / "ep.json"
    code, _, _ = run(["ep", "--alpha", "0.5", "--gamma-t", "0.2", "--format", "json", "-o", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"columns", "rows", "metadata"}
    assert doc["columns"] == ["gamma_t", "log_negativity", "trace_norm", "truncation_error"]
    assert len(doc["rows"]) == 1 and len(doc["rows"][0]) == 4
    assert doc["metadata"]["library_version"]
    manifest = json.loads((tmp_path / "ep.json.manifest.json").read_text())
    assert manifest["file"] == "ep.json"
    assert manifest["alpha"] == [0.5, 0.0]


def test_wigner_gnuplot_output(tmp_path, capsys):
    out = tmp_path / "w.dat"
    code, _, _ = run(["wigner", "--alpha", "0.5", "--grid-n", "65", "--format", "gnuplot-matrix",
                      "-o", str(out)], capsys)
    assert code == 0
    q, p, vals = read_field_gnuplot(out)
    assert q.size == p.size == 65
    assert vals.min() < 0


def test_wigner_routes_agree(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["wigner", "--alpha", "0.5", "--gamma-t", "0.4", "--grid-n", "129"]
    assert run(common + ["-o", str(a)], capsys)[0] == 0
    assert run(common + ["--route", "propagated", "-o", str(b)], capsys)[0] == 0
    wa = np.loadtxt(a, delimiter=",", skiprows=1)[:, 2]
    wb = np.loadtxt(b, delimiter=",", skiprows=1)[:, 2]
    assert np.max(np.abs(wa - wb)) < 1e-4


def test_cut_output(capsys):
    code, out, _ = run(["cut", "--alpha", "0.5", "--grid-n", "65"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert rows[0] == ["q", "W"]
    assert len(rows) == 66


def test_deterministic_bytes(tmp_path, capsys, monkeypatch):
    args = ["pnw", "--alpha", "0.5", "--gamma-t-range", "0", "0.4", "0.2", "--grid-n", "201"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    monkeypatch.setenv("PACSLOSS_THREADS", "1")
    main(args + ["-o", str(a)])
    monkeypatch.setenv("PACSLOSS_THREADS", "3")
    main(args + ["-o", str(b)])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_figure_2_files(tmp_path, capsys):
    code, _, _ = run(["figure", "2", "--outdir", str(tmp_path), "--grid-n", "65"], capsys)
    assert code == 0
    csvs = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert len(csvs) == 4
    for name in csvs:
        rows = rows_of((tmp_path / name).read_text())
        assert rows[0] == ["gamma_t", "q", "W"]
        by_time = {}
        for t, q, _ in rows[1:]:
            by_time.setdefault(float(t), []).append(float(q))
        assert len(by_time) == 7
        for t, qs in by_time.items():
            # cuts sit on grids centred on the damped real amplitude
            assert len(qs) == 65
            assert (qs[0] + qs[-1]) / 2 == pytest.approx(qs[32], abs=1e-9)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert sorted(manifest["files"]) == csvs


def test_figure_manifest_merges(tmp_path, capsys):
    run(["figure", "5b", "--outdir", str(tmp_path)], capsys)
    run(["figure", "1", "--outdir", str(tmp_path), "--grid-n", "33"], capsys)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "fig5b_ep_m1.csv" in manifest["files"]
    assert sum(name.startswith("fig1_") for name in manifest["files"]) == 3


def test_bad_figure_id_exits_2():
    proc = subprocess.run([sys.executable, "-m", "pacsloss.cli", "figure", "9"],
                          capture_output=True, text=True)
    assert proc.returncode == 2


def test_version_flag():
    proc = subprocess.run([sys.executable, "-m", "pacsloss.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
