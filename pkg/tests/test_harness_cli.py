import json
import math
import os

import numpy as np
import pytest

from jamming_bandits import bounds
from jamming_bandits.cli import main
from jamming_bandits.config import ConfigError, parse_config
from jamming_bandits.harness import emit_outputs, grid_oracle, make_environment, run_experiment, run_seed
from jamming_bandits.jb import ActionGrid
from jamming_bandits.presets import PRESETS, load_preset
from jamming_bandits.trace import CSV_HEADER

SMALL = """
[experiment]
name = small
algorithm = {algorithm}
horizon = {horizon}
seeds = 0-1
{extra}

[jammer]
schemes = AWGN, BPSK, QPSK
jnr_min_db = 10
jnr_max_db = 10
reward = raw-ser

[victim]
policy = static
scheme = BPSK
snr_db = 20
n_symbols = 500
"""


def small(algorithm="jb-ucb1", horizon=600, extra=""):
    return SMALL.format(algorithm=algorithm, horizon=horizon, extra=extra)


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_config_round_trip():
    c = parse_config(small())
    assert c.horizon == 600 and c.seeds == [0, 1] and c.space.jnr_min == pytest.approx(10.0)
    assert c.holder.constant_L == pytest.approx(math.sqrt(100 / (8 * math.pi)))


def test_config_lists_every_problem():
    bad = small(horizon=0).replace("algorithm = jb-ucb1", "algorithm = magic").replace("jnr_max_db = 10", "jnr_max_db = 30")
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    msgs = " | ".join(err.value.errors)
    assert "horizon" in msgs and "magic" in msgs and "jnr_max_db" in msgs
    assert len(err.value.errors) >= 3


@pytest.mark.parametrize("extra,needle", [
    ("window_w = 7", "window_w"),
    ("seeds = ", "seeds"),
    ("fidelity = exact", "fidelity"),
])
def test_config_specific_errors(extra, needle):
    text = small("jb-drifting" if "window" in extra else "jb-ucb1").replace("seeds = 0-1\n", "")
    with pytest.raises(ConfigError) as err:
        parse_config(text.replace("[jammer]", extra + "\n\n[jammer]"))
    assert any(needle in e for e in err.value.errors)


def test_all_presets_parse_and_scale():
    for name in PRESETS:
        full = load_preset(name)
        assert full.horizon == 1048576 and len(full.seeds) == 30
        tiny = load_preset(name, 1 / 64)
        assert tiny.horizon == 16384
        assert all(v.n_symbols == 156 for v in tiny.victims)


def test_grid_oracle_brute_force_at_m2():
    c = parse_config(small())
    res = grid_oracle(c, 2)
    env = make_environment(c, 0)
    brute = [env.expected_reward(res.grid.action(i)) for i in range(res.grid.size)]
    assert np.allclose(res.values, brute)
    assert res.best == int(np.argmax(brute))
    with pytest.raises(ValueError):
        grid_oracle(c, 1)


def test_grid_oracle_matches_jb_grid():
    c = parse_config(small())
    env = make_environment(c, 0)
    for m in (3, 9, 15):
        g = ActionGrid.over(c.space, m)
        assert grid_oracle(c, m).best_value == pytest.approx(np.max(g.expected(env)))


@pytest.mark.parametrize("coherent,rho", [("true", 0.078), ("false", 0.06)])
def test_grid_oracle_bpsk_pulse_ratio(coherent, rho):
    c = parse_config(small(extra=f"coherent = {coherent}").replace("n_symbols = 500", "n_symbols = 10000"))
    res = grid_oracle(c, 1000)
    bpsk = [i for i in range(res.grid.size) if res.grid.action(i).scheme.value == "BPSK"]
    best = res.grid.action(bpsk[int(np.argmax(res.values[bpsk]))])
    assert abs(best.rho - rho) <= 1e-3 + 1e-12


def test_noncoherent_pulsed_noise_beats_bpsk():
    # without phase lock the Gaussian tails of pulsed noise win over a bounded BPSK jammer
    c = parse_config(small(extra="coherent = false").replace("n_symbols = 500", "n_symbols = 10000"))
    res = grid_oracle(c, 1000)
    assert res.best_action.scheme.value == "AWGN"
    assert res.best_value > 0.0168 > 0.0129 > max(res.values[1000:])


def test_run_is_deterministic_and_well_formed(tmp_path):
    cfg = write(tmp_path, small())
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for seed in (0, 1):
        a = (tmp_path / "a" / f"seed_{seed}" / "trace.csv").read_bytes()
        b = (tmp_path / "b" / f"seed_{seed}" / "trace.csv").read_bytes()
        assert a == b
        lines = a.decode().splitlines()
        assert lines[0] == ",".join(CSV_HEADER) == "t,scheme,jnr_db,rho,reward,per_est,ser_est,oracle_best,cum_regret"
        assert len(lines) == 1 + 600
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()


def test_summary_bounds_match_bounds_module(tmp_path):
    c = parse_config(small(horizon=1024))
    traces, summary = run_experiment(c)
    emit_outputs(traces, summary, str(tmp_path))
    data = json.loads((tmp_path / "summary.json").read_text())
    for ps in data["per_seed"]:
        want = bounds.bound_overlays(1024, c.holder, 3, ps["terminal_m"])
        assert ps["bounds"] == want
        assert ps["bounds"]["one_step_delta"] == bounds.one_step_delta(1024, c.holder)


def test_emit_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        emit_outputs({}, {}, str(tmp_path))


def test_seed_and_scale_flags(tmp_path):
    cfg = write(tmp_path, small(horizon=1000))
    assert main(["run", "--config", cfg, "--seed", "7", "--scale", "0.5", "--out", str(tmp_path / "o")]) == 0
    assert os.listdir(tmp_path / "o" / "seed_7")
    rows = (tmp_path / "o" / "seed_7" / "trace.csv").read_text().splitlines()
    assert len(rows) == 501


def test_exit_codes(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.ini")]) == 2
    assert main(["run", "--config", write(tmp_path, small(horizon=0))]) == 1
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--config", write(tmp_path, small()), "--out", str(blocker / "sub")]) == 2
    assert main(["run", "--config", write(tmp_path, small()), "--scale", "0"]) == 1


def test_oracle_and_bounds_commands(tmp_path, capsys):
    cfg = write(tmp_path, small(horizon=65536))
    assert main(["oracle", "--config", cfg, "--grid-m", "50"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["best_action"]["scheme"] == "BPSK"
    assert main(["bounds", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["m"] == 15
    assert out["one_step_delta"] == pytest.approx(bounds.one_step_delta(65536, parse_config(small()).holder))


def test_sweep_command(tmp_path):
    assert main(["sweep", "--preset", "fig4", "--scale", "0.001", "--seeds", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "summary.json").exists()


@pytest.mark.parametrize("algorithm,extra", [("jb-elim", ""), ("jb-drifting", "window_w = 100"),
                                              ("epsilon-greedy", "epsilon_m = 5"), ("fixed-awgn", "")])
def test_every_algorithm_runs(algorithm, extra):
    c = parse_config(small(algorithm, 400, extra))
    tr = run_seed(c, 0)
    assert len(tr) == 400


def test_regret_nonnegative_in_expectation():
    c = parse_config(small(horizon=2**11).replace("seeds = 0-1", "seeds = 0-29"))
    traces, summary = run_experiment(c)
    assert all(r >= 0 for r in summary["mean_cum_regret_at_round_ends"])


def test_fixed_awgn_is_worse_than_jb():
    c = parse_config(small(horizon=2**13))
    jb = run_experiment(c)[1]["mean_terminal_reward"]
    c.algorithm = "fixed-awgn"
    awgn = run_experiment(c)[1]["mean_terminal_reward"]
    assert awgn < jb
