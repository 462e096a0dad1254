import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsisplit.cli import main
from fsisplit.config import ConfigError, dump_config, parse_config

BASE = {
    "L": "1.0", "H_f": "1.0", "H_s": "1.0",
    "nx": "4", "ny_f": "4", "ny_s": "4",
    "rho_f": "1.0", "rho_s": "1.0", "mu": "0.1",
    "l1": "1.0", "l2": "1.0", "lambda": "1.0",
    "T": "0.25", "N": "8", "m": "1",
    "mode": "stability", "dt_levels": "3", "seed": "7",
}


def write_config(path, **overrides):
    vals = dict(BASE)
    for k, v in overrides.items():
        if v is None:
            vals.pop(k)
        else:
            vals[k] = v
    path.write_text("".join(f"{k} = {v}\n" for k, v in vals.items()))
    return str(path)


def test_parse_valid_config(tmp_path):
    cfg = parse_config(write_config(tmp_path / "a.cfg"))
    assert cfg.geometry.length == 1.0
    assert cfg.nx == 4 and cfg.num_windows == 8 and cfg.substeps == 1
    assert cfg.params.lambda_robin == 1.0
    assert cfg.mode == "stability" and cfg.seed == 7


def test_parse_tolerates_comments_and_blanks(tmp_path):
    path = tmp_path / "b.cfg"
    text = "# header\n\n" + "".join(f"  {k} = {v}  # note\n"
                                    for k, v in BASE.items())
    path.write_text(text)
    assert parse_config(str(path)).num_windows == 8


@pytest.mark.parametrize("overrides,needle", [
    ({"lambda": "0.0"}, "lambda"),
    ({"rho_f": "-1.0"}, "rho_f"),
    ({"bogus": "1"}, "bogus"),
    ({"N": None}, "N"),
    ({"N": "0"}, "window"),
    ({"nx": "zero"}, "nx"),
    ({"mode": "plot"}, "mode"),
    ({"dt_levels": "0"}, "dt_levels"),
    ({"L": "-2"}, "geometry"),
])
def test_parse_rejects_and_names_key(tmp_path, overrides, needle):
    path = write_config(tmp_path / "bad.cfg", **overrides)
    with pytest.raises(ConfigError, match=needle):
        parse_config(path)


def test_parse_rejects_duplicate_key(tmp_path):
    path = tmp_path / "dup.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in BASE.items())
                    + "nx = 5\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(str(path))


def test_dump_round_trips_byte_identically(tmp_path):
    cfg = parse_config(write_config(tmp_path / "a.cfg"))
    text = dump_config(cfg)
    path = tmp_path / "canon.cfg"
    path.write_text(text)
    assert dump_config(parse_config(str(path))) == text


@settings(max_examples=25, deadline=None)
@given(L=st.floats(0.01, 100.0), mu=st.floats(1e-6, 10.0),
       lam=st.floats(1e-3, 1e3), T=st.floats(0.01, 10.0))
def test_dump_parse_fixed_point(tmp_path_factory, L, mu, lam, T):
    tmp = tmp_path_factory.mktemp("cfg")
    path = write_config(tmp / "h.cfg", L=repr(L), mu=repr(mu),
                        **{"lambda": repr(lam)}, T=repr(T))
    text = dump_config(parse_config(path))
    path2 = tmp / "h2.cfg"
    path2.write_text(text)
    assert dump_config(parse_config(str(path2))) == text


# -- CLI exit codes and outputs ----------------------------------------------


def test_missing_config_exits_2(tmp_path):
    assert main(["stability", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_invalid_config_exits_2(tmp_path, capsys):
    path = write_config(tmp_path / "bad.cfg", **{"lambda": "0.0"})
    assert main(["stability", "--config", path]) == 2
    assert "lambda" in capsys.readouterr().err


def test_dump_config_command(tmp_path, capsys):
    path = write_config(tmp_path / "a.cfg")
    assert main(["dump-config", "--config", path]) == 0
    out = capsys.readouterr().out
    assert "lambda = 1.0" in out and "mode = stability" in out


def test_stability_command_writes_csv(tmp_path, capsys):
    path = write_config(tmp_path / "a.cfg")
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["stability", "--config", path, "--out", str(out1)]) == 0
    assert main(["stability", "--config", path, "--out", str(out2)]) == 0
    csv1 = (out1 / "stability.csv").read_bytes()
    assert csv1 == (out2 / "stability.csv").read_bytes()  # bitwise rerun
    rows = list(csv.DictReader((out1 / "stability.csv").open()))
    assert len(rows) == 8 + 1
    resid = np.array([float(r["stability_residual"]) for r in rows])
    scale = float(rows[0]["E"]) + float(rows[0]["S"])
    assert resid.max() <= 1e-8 * scale


def test_converge_command(tmp_path):
    path = write_config(tmp_path / "c.cfg", mode="converge", N="4", seed="0")
    out = tmp_path / "out"
    assert main(["converge", "--config", path, "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "converge.csv").open()))
    assert len(rows) == 3  # dt_levels
    dts = [float(r["dt"]) for r in rows]
    assert dts == sorted(dts, reverse=True)
    assert (out / "consistency.csv").exists()


def test_dn_compare_without_blowup_exits_4(tmp_path, capsys):
    # heavy solid: no added-mass blow-up, so the contrast threshold fails
    path = write_config(tmp_path / "d.cfg", mode="dn-compare",
                        rho_s="1000.0", N="40")
    assert main(["dn-compare", "--config", path,
                 "--out", str(tmp_path / "o")]) == 4
    assert "threshold" in capsys.readouterr().err


def test_dn_compare_blowup_exits_0(tmp_path):
    path = write_config(tmp_path / "d.cfg", mode="dn-compare", N="120")
    out = tmp_path / "o"
    assert main(["dn-compare", "--config", path, "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "dn_compare.csv").open()))
    e0 = float(rows[0]["energy_dn"])
    assert max(float(r["energy_dn"]) for r in rows) >= 1e6 * e0


def test_solver_failure_exits_3(tmp_path, monkeypatch):
    from fsisplit import cli
    from fsisplit.assembly import SingularSystemError

    def boom(cfg, out_dir):
        raise SingularSystemError("pivot")

    monkeypatch.setitem(cli.COMMANDS, "stability", boom)
    path = write_config(tmp_path / "a.cfg")
    assert main(["stability", "--config", path, "--out", str(tmp_path)]) == 3


def test_csv_floats_full_precision(tmp_path):
    path = write_config(tmp_path / "a.cfg", N="2")
    out = tmp_path / "p"
    assert main(["stability", "--config", path, "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "stability.csv").open()))
    val = rows[1]["E"]
    # 17 significant digits survive a float round-trip exactly
    assert f"{float(val):.17g}" == val
