import json

import pytest

from ionarch.cli import main
from ionarch.config import parse_config_text
from ionarch.errors import ValidationError


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_estimate_adder_table_row(capsys):
    code, out, _ = run_cli(capsys, "estimate-adder", "--n", "128",
                           "--arch", "musiqc", "--level", "1")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == ("n,layout,circuit,level,depth_total,toffoli_steps,"
                      "time_s,qubits,parallel_ops")
    fields = row.split(",")
    assert fields[0] == "128" and fields[1] == "musiqc"
    assert float(fields[6]) == pytest.approx(0.16, rel=0.25)


def test_estimate_adder_nn(capsys):
    code, out, _ = run_cli(capsys, "estimate-adder", "--n", "1024",
                           "--arch", "nn", "--json")
    assert code == 0
    payload = json.loads(out.strip().splitlines()[-1])
    assert payload["time_s"] == pytest.approx(4.5, rel=0.10)


def test_estimate_adder_domain_error(capsys):
    code, _, err = run_cli(capsys, "estimate-adder", "--n", "4", "--arch", "musiqc")
    assert code == 2
    assert "n > 6" in err


def test_estimate_shor_levels(capsys):
    for n, level in [(32, 1), (512, 2), (8, 1)]:
        code, out, _ = run_cli(capsys, "estimate-shor", "--n", str(n),
                               "--arch", "musiqc", "--json")
        assert code == 0
        assert json.loads(out)["level"] == level


def test_estimate_shor_infeasible_exit_code(capsys):
    code, _, err = run_cli(capsys, "estimate-shor", "--n", "4096",
                           "--eps-phys", "9.99e-5")
    assert code == 3
    assert "infeasible" in err


def test_threshold_point(capsys):
    code, out, _ = run_cli(capsys, "threshold", "--eps", "0", "--ratio", "0",
                           "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["margin"] == pytest.approx(2.9e-3)
    code, out, _ = run_cli(capsys, "threshold", "--eps", "0.0029",
                           "--ratio", "0", "--json")
    assert json.loads(out)["margin"] == pytest.approx(0.0, abs=1e-15)


def test_threshold_rejects_bad_budget(capsys):
    code, _, err = run_cli(capsys, "threshold", "--eps", "0.5", "--ratio", "0")
    assert code == 2


def test_mc_cluster_deterministic_bytes(capsys):
    args = ("mc-cluster", "--samples", "20000", "--seed", "7")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2
    header = out1.splitlines()[0]
    assert header == ("eps,r,analytic_first_order,analytic_product,"
                      "mc_estimate,mc_stderr,samples,seed")


def test_netsim_summary_schema(capsys):
    code, out, _ = run_cli(capsys, "netsim", "--pairs", "40", "--seed", "1",
                           "--repetition-rate-hz", "500000")
    assert code == 0
    payload = json.loads(out)
    assert "mean_pair_latency_s" in payload
    assert payload["successes"] == 40


def test_netsim_zero_probability_exit(capsys):
    code, _, err = run_cli(capsys, "netsim", "--pairs", "5", "--seed", "1",
                           "--p-excite", "0")
    assert code == 2


def test_netsim_event_log_deterministic(tmp_path, capsys):
    log_a = tmp_path / "a.log"
    log_b = tmp_path / "b.log"
    for path in (log_a, log_b):
        code, _, _ = run_cli(capsys, "netsim", "--pairs", "30", "--seed", "9",
                             "--repetition-rate-hz", "500000",
                             "--log", str(path))
        assert code == 0
    assert log_a.read_bytes() == log_b.read_bytes()


def test_hypercell_scan_csv(capsys):
    code, out, _ = run_cli(capsys, "hypercell", "--scan",
                           "--eps-grid", "1e-6,1e-4", "--ratio-grid", "1,10")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "eps,ratio,t_opt,layers_opt,eps_total,p_fail,feasible"
    assert len(lines) == 5


def test_hypercell_point(capsys):
    code, out, _ = run_cli(capsys, "hypercell", "--eps", "2.9e-4",
                           "--ratio", "1.0", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["ft_bounds"]["ratio_bound"] == pytest.approx(8.25e-3,
                                                                rel=0.01)


def test_config_precedence_triple_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("run.pairs = 25\nrun.seed = 4\n", encoding="utf-8")
    # default
    _, out, _ = run_cli(capsys, "netsim", "--seed", "1",
                        "--repetition-rate-hz", "500000")
    assert json.loads(out)["successes"] == 10
    # config beats default
    _, out, _ = run_cli(capsys, "netsim", "--config", str(cfg),
                        "--repetition-rate-hz", "500000")
    assert json.loads(out)["successes"] == 25
    # flag beats config
    _, out, _ = run_cli(capsys, "netsim", "--config", str(cfg), "--pairs", "7",
                        "--repetition-rate-hz", "500000")
    assert json.loads(out)["successes"] == 7


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("device.bogus = 1\n", encoding="utf-8")
    code, _, err = run_cli(capsys, "netsim", "--config", str(cfg))
    assert code == 2
    assert "unknown key" in err


def test_config_parser():
    parsed = parse_config_text(
        "# comment\ndevice.gamma_hz = 20e6\nrun.seed = 12  # trailing\n")
    assert parsed == {"device.gamma_hz": 20e6, "run.seed": 12}
    with pytest.raises(ValidationError):
        parse_config_text("device.gamma_hz 20e6")


def test_config_device_units(tmp_path, capsys):
    # gamma in the config is the linewidth over 2 pi, in Hz
    from ionarch.config import device_from_config
    import math
    params = device_from_config({"device.gamma_hz": 20e6,
                                 "device.t_two_gate_us": 12.0})
    assert params.gamma == pytest.approx(2 * math.pi * 20e6)
    assert params.t_two_gate == pytest.approx(12e-6)
    assert params.rep_rate == pytest.approx(2e6)
