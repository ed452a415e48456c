import json

import numpy as np
import pytest

from sigmatoda.cli import build_parser, main

G1 = {"genus": 1, "lambda": [[0.0, 0.0], [-1.0, 0.0], [0.0, 0.0]]}


@pytest.fixture()
def curve_file(tmp_path):
    path = tmp_path / "curve.json"
    path.write_text(json.dumps(G1))
    return str(path)


def run(capsys, argv):
    status = main(argv)
    out = capsys.readouterr().out
    return status, out


def test_periods_subcommand(curve_file, capsys):
    status, out = run(capsys, ["periods", "--curve", curve_file])
    assert status == 0
    payload = json.loads(out)
    assert payload["legendre_residual"] < 1e-10
    assert payload["genus"] == 1


def test_malformed_curve_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    status = main(["periods", "--curve", str(bad)])
    assert status == 2
    missing = main(["periods", "--curve", str(tmp_path / "absent.json")])
    assert missing == 2


def test_degenerate_curve_exits_2(tmp_path):
    path = tmp_path / "cusp.json"
    path.write_text(json.dumps(
        {"genus": 1, "lambda": [[0, 0], [0, 0], [0, 0]]}))
    assert main(["periods", "--curve", str(path)]) == 2


def test_torsion_subcommand_finds_known_value(curve_file, capsys):
    status, out = run(capsys, ["torsion", "--curve", curve_file, "--N", "3"])
    assert status == 0
    payload = json.loads(out)
    target = np.sqrt(9 + 6 * np.sqrt(3)) / 3
    hits = [c for c in payload["candidates"]
            if abs(complex(*c["x"]) - target) < 1e-8]
    assert hits
    assert hits[0]["lattice_residual"] < 1e-6


def test_sigma_and_abel_round_trip(curve_file, capsys):
    status, out = run(capsys, ["sigma", "--curve", curve_file,
                               "--u", "0.31,0.12"])
    assert status == 0
    payload = json.loads(out)
    x_re, x_im = payload["wp"][0][0]
    # lift the wp value back through the Abel map
    y2 = complex(x_re, x_im) ** 3 - complex(x_re, x_im)
    y = np.sqrt(y2)
    status2, out2 = run(capsys, [
        "abel", "--curve", curve_file,
        "--points", json.dumps([[x_re, x_im, y.real, y.imag]])])
    assert status2 == 0
    u = json.loads(out2)["u"][0]
    # equal to the input up to lattice and involution sign
    assert min(abs(complex(*u) - 0.31 - 0.12j),
               abs(complex(*u) + 0.31 + 0.12j)) < 1e-6


def test_division_degree_certificate(curve_file, capsys):
    status, out = run(capsys, ["division", "--curve", curve_file, "--n", "5"])
    assert status == 0
    payload = json.loads(out)
    assert payload["degree"] == 12
    assert payload["degree_certified"] is True


def test_verify_addition_deterministic(curve_file, capsys):
    argv = ["verify-addition", "--curve", curve_file,
            "--samples", "3", "--seed", "11"]
    status1, out1 = run(capsys, argv)
    status2, out2 = run(capsys, argv)
    assert status1 == status2 == 0
    assert out1 == out2
    payload = json.loads(out1)
    assert payload["residuals"]["two_point_addition"]["max"] < 1e-8


def test_toda_run_csv(curve_file, capsys):
    status, out = run(capsys, [
        "toda-run", "--format", "csv", "--curve", curve_file,
        "--point", json.dumps([[1.4678898250138706, 0.0,
                                1.3019113530593938, 0.0]]),
        "--sites", "3", "--t0", "0.0", "--t1", "0.2", "--steps", "3"])
    assert status == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,site,a_re,a_im,b_re,b_im"
    assert len(lines) == 1 + 3 * 3


def test_spectral_subcommand(curve_file, capsys):
    status, out = run(capsys, [
        "spectral", "--curve", curve_file,
        "--point", json.dumps([[1.4678898250138706, 0.0,
                                1.3019113530593938, 0.0]]),
        "--sites", "3"])
    assert status == 0
    payload = json.loads(out)
    assert len(payload["weierstrass_z"]) == 6
    assert payload["morphism_residual"] < 1e-9
    assert payload["lax_determinant_residual"] < 1e-10


def test_poncelet_subcommand(curve_file, tmp_path, capsys):
    from sigmatoda.division import xi_set
    from sigmatoda.poncelet import pair_for_torsion
    from sigmatoda.sigma import sigma_context
    from sigmatoda.curves import make_curve

    ctx = sigma_context(make_curve(1, [0, -1, 0]))
    cand = max((c for c in xi_set(ctx.curve, 3)
                if abs(c.point.x.imag) < 1e-9 and c.point.x.real > 0),
               key=lambda c: c.point.x.real)
    pair = pair_for_torsion(ctx, cand.point)
    conic = tmp_path / "conic.json"
    conic.write_text(json.dumps({
        "matrix": [[[z.real, z.imag] for z in row] for row in pair.matrix]}))
    status, out = run(capsys, ["poncelet", "--conic", str(conic), "--N", "3"])
    assert status == 0
    payload = json.loads(out)
    assert payload["closure_residual_max"] < 1e-6
    assert payload["side_tangency_max"] < 1e-6


def test_parser_has_all_subcommands():
    parser = build_parser()
    sub = next(a for a in parser._actions
               if isinstance(a, type(parser._subparsers._group_actions[0])))
    names = set(sub.choices)
    assert {"periods", "sigma", "abel", "verify-addition", "division",
            "torsion", "toda-run", "spectral", "poncelet",
            "verify-all"} <= names
