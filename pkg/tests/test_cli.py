import csv

import numpy as np
import pytest

from ipdft_grid.cli import main, parse_grid, parse_sets
from ipdft_grid.persistence import SampleRecord, write_samples


def write(path, text):
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_parse_grid():
    assert parse_grid("1, 2,3") == (1.0, 2.0, 3.0)
    assert parse_grid("0.1:0.3:0.1") == (0.1, 0.2, 0.3)
    assert len(parse_grid("0.1:2.0:0.05")) == 39
    with pytest.raises(ValueError):
        parse_grid("1:0:0.1")
    with pytest.raises(ValueError):
        parse_grid("")


def test_parse_sets():
    assert parse_sets("2; 3; 2+3") == ((2,), (3,), (2, 3))


def test_fig1_quick(tmp_path):
    cfg = write(tmp_path / "c.ini", "[sweep]\nN = 64, 128\ncir = 0.5, 1.0\n")
    out = tmp_path / "o.csv"
    assert main(["fig1", "--config", cfg, "--quick", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["cir", "N", "err_amp", "err_phase"]
    assert len(rows) == 4


def test_deterministic_output(tmp_path):
    cfg = write(tmp_path / "c.ini", "[sweep]\nN = 512\ncir = 0.7\nsnr = 40, 60\nrealizations = 500\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["fig3", "--config", cfg, "--seed", "3", "--out", str(a)]) == 0
    assert main(["fig3", "--config", cfg, "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    assert main(["fig3", "--config", cfg, "--seed", "4", "--out", str(c)]) == 0
    assert a.read_bytes() != c.read_bytes()


def test_seed_required(tmp_path, capsys):
    cfg = write(tmp_path / "c.ini", "[sweep]\nN = 512\n")
    assert main(["fig3", "--config", cfg]) == 2
    assert "--seed" in capsys.readouterr().err
    assert main(["combined", "--config", cfg]) == 2


def test_output_path_from_config_and_flag_override(tmp_path):
    cfg_out = tmp_path / "from_cfg.csv"
    flag_out = tmp_path / "from_flag.csv"
    cfg = write(tmp_path / "c.ini", f"[sweep]\nN = 64\ncir = 1.0\n[output]\npath = {cfg_out}\n")
    assert main(["fig1", "--config", cfg, "--quick"]) == 0
    assert cfg_out.exists()
    assert main(["fig1", "--config", cfg, "--quick", "--out", str(flag_out)]) == 0
    assert flag_out.exists()


def test_stdout(tmp_path, capsys):
    cfg = write(tmp_path / "c.ini", "[sweep]\nN = 64\ncir = 1.0\n")
    assert main(["fig1", "--config", cfg, "--quick"]) == 0
    assert capsys.readouterr().out.startswith("cir,N,err_amp,err_phase")


@pytest.mark.parametrize(
    "text",
    [
        "[bogus]\nx = 1\n",
        "[sweep]\ntypo = 1\n",
        "[sweep]\nN = sixty-four\n",
        "[sweep]\ncir = -0.5\n",
        "no header\n",
    ],
)
def test_config_errors(tmp_path, text):
    cfg = write(tmp_path / "c.ini", text)
    assert main(["fig1", "--config", cfg, "--quick"]) == 2


def test_missing_config(tmp_path):
    assert main(["fig1", "--config", str(tmp_path / "none.ini")]) == 2


def test_bad_subcommand(tmp_path):
    cfg = write(tmp_path / "c.ini", "")
    assert main(["fig9", "--config", cfg]) == 2


def test_table_columns(tmp_path):
    cfg = write(
        tmp_path / "c.ini",
        "[sweep]\nN = 512\nharmonic_sets = 2; 2+3\n[prefilter]\nfilters = none\n",
    )
    o1, o2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
    assert main(["table1", "--config", cfg, "--quick", "--out", str(o1)]) == 0
    assert main(["table2", "--config", cfg, "--quick", "--out", str(o2)]) == 0
    r1, r2 = read_csv(o1), read_csv(o2)
    assert list(r1[0]) == ["filter", "N", "cir", "harmonics", "err_amp_pct"]
    assert list(r2[0]) == ["filter", "N", "cir", "harmonics", "err_phase"]
    assert [r["harmonics"] for r in r1] == ["2", "2+3"]
    assert float(r1[0]["err_amp_pct"]) == pytest.approx(3.6, rel=0.3)


@pytest.fixture
def tone_file(tmp_path):
    fs = 24000.0
    n = np.arange(512)
    p = tmp_path / "tone.f64"
    write_samples(SampleRecord(fs, 1.3 * np.sin(2 * np.pi * 50 * n / fs + 0.4)), p)
    return p


def test_estimate(tmp_path, tone_file):
    cfg = write(tmp_path / "c.ini", f"[input]\npath = {tone_file}\n")
    out = tmp_path / "e.csv"
    assert main(["estimate", "--config", cfg, "--out", str(out)]) == 0
    row = read_csv(out)[0]
    assert float(row["f1"]) == pytest.approx(50.0, rel=1e-6)
    assert float(row["A1"]) == pytest.approx(1.3, rel=1e-6)
    assert float(row["phi1"]) == pytest.approx(0.4, abs=1e-6)
    assert row["k"] == "1"


def test_estimate_tail_window(tmp_path, tone_file):
    cfg = write(tmp_path / "c.ini", f"[input]\npath = {tone_file}\nN = 256\n")
    out = tmp_path / "e.csv"
    assert main(["estimate", "--config", cfg, "--out", str(out)]) == 0
    assert float(read_csv(out)[0]["A1"]) == pytest.approx(1.3, rel=1e-5)


def test_estimate_failure_exit_code(tmp_path):
    p = tmp_path / "z.f64"
    write_samples(SampleRecord(24000.0, np.zeros(256)), p)
    cfg = write(tmp_path / "c.ini", f"[input]\npath = {p}\n")
    assert main(["estimate", "--config", cfg]) == 3


def test_estimate_missing_input(tmp_path):
    cfg = write(tmp_path / "c.ini", f"[input]\npath = {tmp_path / 'none.f64'}\n")
    assert main(["estimate", "--config", cfg]) == 2
    cfg = write(tmp_path / "d.ini", "[input]\n")
    assert main(["estimate", "--config", cfg]) == 2
