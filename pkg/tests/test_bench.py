import math

import numpy as np
import pytest

from qfreq.bench.cli import main
from qfreq.bench.experiment import (
    CSV_COLUMNS,
    ConfigError,
    loglog_slope,
    parse_config,
    rows_to_csv,
    run_experiment,
    splitmix64,
    trial_seed,
)
from qfreq.bench.generators import GENERATORS, GeneratorError, advertised_moment, generate_instance
from qfreq.bench.theory import CATALOGUE, UnknownCurve, evaluate, parse_grid, theory_table
from qfreq.bench.verify import run_suite
from qfreq.core import exact_f_infty, exact_moment, read_stream
from qfreq.qsim import LEDGER_COLUMNS

CONFIG = """
[experiment]
algorithm = {algorithm}
trials = {trials}
seed = 99

[stream]
generator = uniform
n = 300
m = 200

[params]
epsilon = 0.5
k = 2
K = 12
"""


def test_pairs_instance():
    s = generate_instance("pairs", {"n": 6}, 0)
    assert exact_moment(s, 2) == 12 == 6 * 2 ** (2 - 1)


def test_all_distinct_instance():
    assert exact_moment(generate_instance("all_distinct", {"n": 6}, 0), 2) == 6


@pytest.mark.parametrize("n", [8, 20])
def test_near_pairing_instance(n):
    one = generate_instance("beame_machmouchi", {"n": n, "variant": 1}, 1)
    two = generate_instance("beame_machmouchi", {"n": n, "variant": 2}, 1)
    assert exact_moment(one, 2) == 2 * n
    # equal-length variant: n/2 - 1 pairs and two singletons
    assert exact_moment(two, 2) == 2 * n - 2
    assert exact_moment(one, 0) == n // 2 and exact_moment(two, 0) == n // 2 + 1


def test_equality_instance_gap():
    n = 64
    eq = generate_instance("equality", {"n": n, "equal": 1}, 2)
    ne = generate_instance("equality", {"n": n, "equal": 0}, 2)
    for k in (2, 3):
        assert exact_moment(eq, k) == n * 2 ** (k - 2)
        assert exact_moment(ne, k) <= n // 4 + n * 2 ** (k - 3)
    assert exact_moment(ne, 0) >= 3 * n // 8


@pytest.mark.parametrize("name", sorted(GENERATORS))
def test_every_generator_meets_its_claims(name):
    params = {
        "uniform": {"n": 50, "m": 20},
        "zipf": {"n": 50, "m": 20},
        "all_equal": {"n": 13},
        "all_distinct": {"n": 13},
        "exact_f0": {"n": 60, "f0": 17},
        "pairs": {"n": 14},
        "beame_machmouchi": {"n": 14, "variant": 2},
        "equality": {"n": 40, "equal": 0},
        "disjointness": {"n": 40, "intersect": 1},
    }[name]
    s = generate_instance(name, params, 7)
    for k in (0, 1, 2, 3, math.inf):
        claim = advertised_moment(name, params, k)
        if claim is not None:
            assert claim == (exact_f_infty(s) if k == math.inf else exact_moment(s, int(k)))


def test_generator_errors():
    with pytest.raises(GeneratorError, match="unknown generator"):
        generate_instance("nope", {}, 0)
    with pytest.raises(GeneratorError, match="missing"):
        generate_instance("uniform", {"n": 3}, 0)
    with pytest.raises(GeneratorError):
        generate_instance("pairs", {"n": 5}, 0)


def test_theory_values():
    assert evaluate("f0_query_upper", n=1e4, eps=0.1) == pytest.approx(1000)
    assert evaluate("fk_query_exponent", k=2) == pytest.approx(1 / 3)
    assert evaluate("fk_query_exponent", k=3) == pytest.approx(10 / 21)
    assert evaluate("finf_stream_passes", n=4096) == 64
    with pytest.raises(UnknownCurve):
        evaluate("nope", n=1)


def test_theory_roles():
    assert {c.role for c in CATALOGUE.values()} == {"upper", "lower"}
    assert CATALOGUE["finf_query_lower"].role == "lower"


def test_theory_table_csv():
    text = theory_table(["finf_stream_passes", "f0_query_lower"], parse_grid(["n=64,256", "eps=0.25"]))
    lines = text.splitlines()
    assert lines[0] == "curve,label,role,n,m,k,eps,value"
    assert lines[1] == "finf_stream_passes,sqrt(n),upper,64,,,,8"
    assert lines[3] == "f0_query_lower,sqrt(n/eps),lower,64,,,0.25,16"
    with pytest.raises(ValueError):
        theory_table(["f0_query_upper"], parse_grid(["n=4"]))


def test_splitmix_reference_outputs():
    # first two outputs of the splitmix64 generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4
    assert trial_seed(7, 0) != trial_seed(7, 1) != trial_seed(8, 1)


def test_parse_config_fields():
    cfg = parse_config(CONFIG.format(algorithm="fk_query", trials=3))
    assert (cfg.algorithm, cfg.trials, cfg.seed, cfg.k, cfg.epsilon) == ("fk_query", 3, 99, 2, 0.5)
    assert cfg.params == {"K": "12"} and cfg.generator_params == {"n": "300", "m": "200"}


@pytest.mark.parametrize(
    "mutate,msg",
    [
        (lambda t: t.replace("seed = 99\n", ""), "seed"),
        (lambda t: t.replace("trials = 2", "trials = 0"), "trials"),
        (lambda t: t.replace("generator = uniform", "file = x.txt\ngenerator = uniform"), "exactly one"),
        (lambda t: t + "\n[cost]\nbogus = 1\n", "bogus"),
        (lambda t: t.replace("f0_query", "f9_query"), "unknown algorithm"),
    ],
)
def test_config_validation(mutate, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(mutate(CONFIG.format(algorithm="f0_query", trials=2)))


@pytest.mark.parametrize("algorithm", ["f0_query", "fk_query", "finf_query", "f0_stream", "finf_stream"])
def test_run_experiment_rows(algorithm):
    rows = run_experiment(parse_config(CONFIG.format(algorithm=algorithm, trials=2)))
    assert [r["trial"] for r in rows] == ["0", "1"]
    assert tuple(rows[0]) == CSV_COLUMNS == LEDGER_COLUMNS + ("success", "generator")
    assert rows[0]["generator"] == "uniform"


def test_workers_do_not_change_output():
    cfg = parse_config(CONFIG.format(algorithm="fk_query", trials=4))
    serial = rows_to_csv(run_experiment(cfg))
    cfg.workers = 2
    assert rows_to_csv(run_experiment(cfg)) == serial


def test_loglog_slope():
    xs = [2**i for i in range(5)]
    assert loglog_slope(xs, [3 * x**0.5 for x in xs]) == pytest.approx(0.5)


def test_cli_roundtrip(tmp_path, capsys):
    out = tmp_path / "s.txt"
    assert main(["gen", "pairs", "--params", "n=10", "--seed", "3", "--out", str(out)]) == 0
    assert exact_moment(read_stream(out), 2) == 20
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[experiment]\nalgorithm = finf_stream\ntrials = 2\nseed = 1\noutput = res.csv\n"
        "[stream]\nfile = s.txt\n",
        encoding="utf-8",
    )
    assert main(["run", str(cfg)]) == 0
    text = (tmp_path / "res.csv").read_text()
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert main(["theory", "finf_stream_passes", "--grid", "n=4096"]) == 0
    assert capsys.readouterr().out.strip().endswith(",64")


def test_cli_exit_codes(tmp_path):
    assert main(["theory", "bogus", "--grid", "n=4"]) == 2
    assert main(["gen", "nope", "--out", str(tmp_path / "x")]) == 2
    assert main(["run", str(tmp_path / "missing.ini")]) == 1
    assert main(["verify", "generators"]) == 0


def test_verify_suites_pass():
    for suite in ("lemma1", "hash", "ae", "estimators", "generators"):
        results = run_suite(suite)
        assert results and all(ok for _, ok, _ in results), suite
    with pytest.raises(KeyError):
        run_suite("nope")
