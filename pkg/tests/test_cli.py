import json
from importlib import resources

import numpy as np
import pytest

from thzent.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, load_config, main, ConfigError

DETUNED_PAIR = """[system]
f_thz = 1000
delta1 = 871.6
delta2 = 867.4
omega1 = 499.8
omega2 = 497.4
omega_sb1 = {sb}
omega_sb2 = {sb}
kappa = 59.6
n_fock = 3

[spectrum]
vis_points = 0
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(tmp_path, command, text, out="out", extra=(), environ=None):
    cfg = write(tmp_path, text)
    code = main([command, "--config", cfg, "--out", str(tmp_path / out), *extra],
                environ={} if environ is None else environ)
    return code, tmp_path / out


def schema():
    return json.loads(resources.files("thzent").joinpath("csv_schema.json").read_text())


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# manifest_sha256=")
    return lines[0].split("=", 1)[1], lines[1].split(","), [row.split(",") for row in lines[2:]]


def test_spectrum_single_lines_then_triplets(tmp_path, capsys):
    code, out = run(tmp_path, "spectrum", DETUNED_PAIR.format(sb=0.0))
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert [len(l.split(":")[1].split(",")) for l in lines] == [1, 1]
    code, out = run(tmp_path, "spectrum", DETUNED_PAIR.format(sb=10.3), out="out2")
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert all(len(l.split(":")[1].split(",")) >= 3 for l in lines)


def test_spectrum_without_sideband_is_lorentzian(tmp_path):
    # no sideband drive: the THz line of emitter 1 is a single Lorentzian whose width is
    # set by spontaneous emission redistributed over the dressed states
    text = DETUNED_PAIR.format(sb=0.0) + "thz_min = 1004.5\nthz_max = 1005.0\n"
    code, out = run(tmp_path, "spectrum", text)
    assert code == EXIT_OK
    _, header, rows = read_csv(out / "spectrum.csv")
    data = np.array([[float(r[2]), float(r[3])] for r in rows if r[1] == "1"])
    f, s = data.T
    f0 = f[np.argmax(s)]
    above = f[s > s.max() / 2]
    hw = 0.5 * (above[-1] - above[0])
    assert 0.5 * 0.03979 < 2 * hw < 2 * 0.03979
    sel = np.abs(f - f0) < 3 * hw
    fit = np.polyval(np.polyfit(f[sel], 1 / s[sel], 2), f[sel])
    assert np.abs(fit * s[sel] - 1).max() < 1e-3


def test_outputs_carry_manifest_hash(tmp_path):
    text = "[gap]\npoints = 5\n"
    code, out = run(tmp_path, "gap", text)
    assert code == EXIT_OK
    man = json.loads((out / "manifest.json").read_text())
    h, header, rows = read_csv(out / "gap.csv")
    assert h == man["manifest_sha256"]
    assert (out / "summary.txt").read_text().startswith(f"manifest_sha256={h}")
    assert header == list(schema()["gap.csv"])
    assert len(rows) == 5
    assert man["config"]["gap"]["points"] == 5


def test_gap_reproduces_closed_form(tmp_path):
    code, out = run(tmp_path, "gap", "[gap]\npoints = 9\ntheta_min = 0.4\n")
    assert code == EXIT_OK
    res = json.loads((out / "manifest.json").read_text())["results"]
    assert res["max_rel_error"] < 1e-6


def test_deterministic_reruns(tmp_path):
    text = """[system]
f_thz = 1000
[tomography]
state = bell
n_shot = 100 1000
eta_e = 0.5 0.9
n_ave = 3
"""
    a = run(tmp_path, "tomography", text, out="a", extra=("--seed", "5"))[1]
    b = run(tmp_path, "tomography", text, out="b", extra=("--seed", "5"))[1]
    c = run(tmp_path, "tomography", text, out="c", extra=("--seed", "6"))[1]
    for name in ("tomography.csv", "tomography_raw.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "tomography_raw.csv").read_bytes() != (c / "tomography_raw.csv").read_bytes()


def test_threads_do_not_change_output(tmp_path):
    text = "[system]\n[tomography]\nstate = bell\nn_shot = 200\neta_e = 0.8 0.9\nn_ave = 2\n"
    a = run(tmp_path, "tomography", text, out="a")[1]
    b = run(tmp_path, "tomography", text, out="b", extra=("--threads", "2"))[1]
    assert (a / "tomography_raw.csv").read_bytes() == (b / "tomography_raw.csv").read_bytes()


def test_singular_cell_flagged(tmp_path):
    text = "[system]\n[tomography]\nstate = bell\nn_shot = 200\neta_e = 0.01\nn_ave = 2\n"
    code, out = run(tmp_path, "tomography", text)
    assert code == EXIT_OK
    _, header, rows = read_csv(out / "tomography.csv")
    assert rows[0][header.index("singular")] == "1"


def test_empty_sweep_writes_header(tmp_path):
    code, out = run(tmp_path, "map", "[map]\nchi_points = 0\n")
    assert code == EXIT_OK
    _, header, rows = read_csv(out / "map.csv")
    assert header == list(schema()["map.csv"]) and rows == []


def test_unknown_key_is_line_anchored(tmp_path, capsys):
    code, _ = run(tmp_path, "gap", "[gap]\npoints = 3\n\nwibble = 1\n")
    assert code == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "run.ini:4:" in err and "wibble" in err


def test_unknown_section(tmp_path, capsys):
    code, _ = run(tmp_path, "gap", "[gap]\n[map]\nchi_points = 1\n")
    assert code == EXIT_CONFIG
    assert "run.ini:2:" in capsys.readouterr().err


def test_bad_value(tmp_path, capsys):
    code, _ = run(tmp_path, "gap", "[gap]\npoints = many\n")
    assert code == EXIT_CONFIG
    assert "run.ini:2:" in capsys.readouterr().err


def test_malformed_file(tmp_path):
    assert run(tmp_path, "gap", "points = 3\n")[0] == EXIT_CONFIG


def test_infeasible_exit_code(tmp_path):
    code, _ = run(tmp_path, "optimize", "[optimize]\nomega_max = 0\n")
    assert code == EXIT_INFEASIBLE


def test_environment_override(tmp_path):
    path = write(tmp_path, "[gap]\npoints = 3\n")
    cfg = load_config("gap", path, environ={"THZENT_GAP_POINTS": "7"})
    assert cfg["gap"]["points"] == 7
    with pytest.raises(ConfigError):
        load_config("gap", path, environ={"THZENT_GAP_POINTS": "x"})


def test_seed_from_environment(tmp_path):
    text = "[system]\n[tomography]\nstate = bell\nn_shot = 100\neta_e = 0.9\nn_ave = 2\n"
    a = run(tmp_path, "tomography", text, out="a", environ={"THZENT_SEED": "9"})[1]
    b = run(tmp_path, "tomography", text, out="b", extra=("--seed", "9"))[1]
    assert (a / "tomography_raw.csv").read_bytes() == (b / "tomography_raw.csv").read_bytes()


def test_bad_threads(tmp_path):
    assert run(tmp_path, "gap", "[gap]\npoints = 2\n", extra=("--threads", "0"))[0] == EXIT_CONFIG


def test_validation_rules(tmp_path):
    assert run(tmp_path, "spectrum", "[spectrum]\nmodel = exact\n")[0] == EXIT_CONFIG
    assert run(tmp_path, "tomography", "[tomography]\neta_g = 1.5\n")[0] == EXIT_CONFIG
