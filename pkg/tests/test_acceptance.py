"""Acceptance criteria, one test each, at the stated tolerances and time budgets.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from profilepriv.baselines import as_profile_mechanism, randomized_response
from profilepriv.cli import main
from profilepriv.experiments import (
    CATEGORICAL_CHAIN_PROFILES,
    DEFAULT_EPSILON_GRID,
    DEFAULT_P_GRID,
    ExperimentSpec,
    chain_spread,
    output_costs,
    rr_flip,
    run_bernoulli_chain,
    run_bernoulli_couplet,
    run_experiment,
)
from profilepriv.graph import bernoulli_chain, chain_graph, make_graph
from profilepriv.lp import FEAS_TOL
from profilepriv.mechanisms import (
    flip_closed_form,
    one_bit_cluster,
    one_bit_log_ratios,
    smooth_categorical,
    smooth_one_bit,
    two_profile_flip,
)
from profilepriv.verifier import (
    check_additive_composition,
    check_parallel_composition,
    check_post_processing,
    verify_exact,
)

GRAPHS = Path(__file__).resolve().parent.parent / "graphs"


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f}s, budget {self.seconds}s"


def couplet_graph(p_i, p_j, eps):
    return make_graph([("a", (1 - p_i, p_i)), ("b", (1 - p_j, p_j))], [("a", "b")], eps)


def bernoulli_test_graphs():
    for eps in DEFAULT_EPSILON_GRID:
        for n, p_i in enumerate(DEFAULT_P_GRID):
            for p_j in DEFAULT_P_GRID[n:]:
                yield couplet_graph(p_i, p_j, eps)
        for k in (6, 21):
            yield bernoulli_chain(np.linspace(0, 1, k), eps)


@pytest.mark.acceptance("AC1", "randomized-response reduction")
def test_ac1_randomized_response_reduction():
    with Budget(1.0):
        for eps in (0.1, 0.5, 1.0, 2.0, 5.0):
            assert abs(two_profile_flip(0.0, 1.0, eps) - 1 / (1 + math.exp(eps))) <= 1e-9


@pytest.mark.acceptance("AC2", "closed form agrees with LP")
def test_ac2_closed_form_vs_lp():
    grid = [i / 10 for i in range(11)]
    with Budget(10.0):
        worst = 0.0
        for eps in (0.1, 0.5, 1.0, 2.0):
            for p_i in grid:
                for p_j in grid:
                    worst = max(worst, abs(flip_closed_form(p_i, p_j, eps) - two_profile_flip(p_i, p_j, eps)))
        assert worst <= 1e-6


# "non-zero" means above solver tolerance; an identity optimum can carry 1e-16 residue
def _is_binding(report, eps):
    return any(e.max_abs_log_ratio >= eps - 1e-3 for e in report.per_edge)


@pytest.mark.acceptance("AC3", "synthesized mechanisms certify")
def test_ac3_certification():
    with Budget(120.0):
        failures = []
        for eps in DEFAULT_EPSILON_GRID:
            graphs = [couplet_graph(p_i, p_j, eps) for n, p_i in enumerate(DEFAULT_P_GRID) for p_j in DEFAULT_P_GRID[n:]]
            graphs += [bernoulli_chain(np.linspace(0, 1, k), eps) for k in (6, 21)]
            for g in graphs:
                for mech, smooth in ((smooth_one_bit(g), True), (one_bit_cluster(g), False)):
                    report = verify_exact(g, mech)
                    if not (report.passed and report.overall <= eps + 1e-6):
                        failures.append((g.ids, eps, report.overall))
                    if smooth and mech.flip_probabilities().max() > FEAS_TOL and not _is_binding(report, eps):
                        failures.append(("not binding", g.ids, eps, report.overall))
            cat = chain_graph(CATEGORICAL_CHAIN_PROFILES, eps)
            mech = smooth_categorical(cat)
            report = verify_exact(cat, mech)
            if not (report.passed and report.overall <= eps + 1e-6):
                failures.append(("categorical", eps, report.overall))
            if mech.max_off_diagonal() > FEAS_TOL and not _is_binding(report, eps):
                failures.append(("categorical not binding", eps, report.overall))
        assert not failures, failures[:5]


def _random_graph(rng, eps):
    k = int(rng.integers(2, 7))
    d = int(rng.integers(2, 6))
    dists = rng.dirichlet(np.full(d, 0.5), size=k)
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    chosen = [p for p in pairs if rng.random() < 0.5] or pairs[:1]
    return make_graph(
        [(f"p{i}", tuple(row)) for i, row in enumerate(dists)],
        [(f"p{i}", f"p{j}") for i, j in chosen],
        eps,
    )


@pytest.mark.acceptance("AC4", "LDP dominance")
def test_ac4_dominance():
    rng = np.random.default_rng(4)
    with Budget(30.0):
        for trial in range(100):
            g = _random_graph(rng, float(rng.choice([0.1, 0.5, 1.0, 3.0])))
            assert verify_exact(g, as_profile_mechanism(randomized_response(g.d, g.epsilon), g)).passed, trial
        for g in bernoulli_test_graphs():
            smooth = smooth_one_bit(g).flip_probabilities().max()
            cluster = one_bit_cluster(g).flip_probabilities().max()
            assert smooth <= cluster + 1e-9, (g.ids, g.epsilon)
            assert cluster <= rr_flip(g.epsilon) + 1e-9, (g.ids, g.epsilon)


@pytest.mark.acceptance("AC5", "log-ratio monotone in flip probability")
def test_ac5_monotonicity():
    ps = np.linspace(0, 1, 21)
    p1, p2 = np.meshgrid(ps, ps, indexing="ij")
    keep = p1 > p2
    alphas = np.linspace(0.001, 0.499, 48)
    P1, A = np.meshgrid(p1[keep], alphas, indexing="ij")
    P2, _ = np.meshgrid(p2[keep], alphas, indexing="ij")
    assert P1.size >= 10_000
    h = 1e-6
    with Budget(5.0):
        lo = one_bit_log_ratios(P1, P2, A)
        hi = one_bit_log_ratios(P1, P2, A + h)
        for before, after in zip(lo, hi):
            slope = (after - before) / h
            assert np.all(slope <= 1e-9), slope.max()  # rounding noise of the difference quotient


@pytest.mark.acceptance("AC6", "additive and parallel composition")
def test_ac6_composition():
    epsilons = (0.1, 0.3, 0.7, 1.5, 3.0)
    structures = (
        lambda eps: couplet_graph(0.2, 0.8, eps),
        lambda eps: bernoulli_chain(np.linspace(0, 1, 6), eps),
    )
    with Budget(30.0):
        for build in structures:
            for e1 in epsilons:
                for e2 in epsilons:
                    g1, g2 = build(e1), build(e2)
                    m1, m2 = smooth_one_bit(g1), one_bit_cluster(g2)
                    add = check_additive_composition(g1, m1, m2)
                    assert add.epsilon == pytest.approx(e1 + e2) and add.passed, (e1, e2, add.overall)
                    par = check_parallel_composition(g1, m1, m2)
                    assert par.epsilon == max(e1, e2) and par.passed, (e1, e2, par.overall)


@pytest.mark.acceptance("AC7", "post-processing never increases loss")
def test_ac7_post_processing():
    rng = np.random.default_rng(7)
    cases = []
    for eps in (0.1, 0.5, 2.0):
        cat = chain_graph(CATEGORICAL_CHAIN_PROFILES, eps)
        cases.append((cat, smooth_categorical(cat)))
        cases.append((cat, as_profile_mechanism(randomized_response(4, eps), cat)))
        chain = bernoulli_chain(np.linspace(0, 1, 6), eps)
        cases.append((chain, smooth_one_bit(chain)))
    with Budget(10.0):
        for g, mech in cases:
            base = verify_exact(g, mech)
            assert base.passed
            for _ in range(50):
                F = rng.dirichlet(np.full(int(rng.integers(1, 7)), 0.5), size=g.d)
                assert check_post_processing(g, mech, F).overall <= base.overall + 1e-12


@pytest.mark.acceptance("AC8a", "couplet: ours never flips more than LDP")
def test_ac8a_couplet_shape():
    with Budget(120.0):
        for eps in DEFAULT_EPSILON_GRID:
            for row in run_bernoulli_couplet(eps):
                if abs(row.p_j - row.p_i) == 1.0:
                    assert row.alpha_ours == pytest.approx(row.alpha_ldp, abs=1e-9)
                else:
                    assert row.alpha_ours < row.alpha_ldp, row


@pytest.mark.acceptance("AC8b", "chain: wider spread than LDP at 0.2")
def test_ac8b_chain_spread():
    with Budget(120.0):
        for k in (6, 21):
            rows = run_bernoulli_chain(k, [0.2])
            assert chain_spread(rows, 0.2, "ours") > chain_spread(rows, 0.2, "ldp"), k


@pytest.mark.acceptance("AC8c", "categorical: cost ordering and max-cost dominance")
def test_ac8c_categorical_costs():
    failures = []
    with Budget(120.0):
        for eps in DEFAULT_EPSILON_GRID:
            g = chain_graph(CATEGORICAL_CHAIN_PROFILES, eps)
            ours = output_costs(g, smooth_categorical(g))
            base = output_costs(g, as_profile_mechanism(randomized_response(4, eps), g))
            if not ours[3] <= ours[2] + 1e-9:
                failures.append(("cost4 > cost3", eps, ours[3], ours[2]))
            if not ours.max() <= base.max() + 1e-9:
                failures.append(("max cost above baseline", eps, ours.max(), base.max()))
    assert not failures, failures


def _cli(tmp_path, name, *argv):
    out = tmp_path / name
    assert main([*map(str, argv), "-o", str(out)]) == 0
    return out.read_bytes()


@pytest.mark.acceptance("AC9", "deterministic outputs")
def test_ac9_determinism(tmp_path, capfd):
    graph = GRAPHS / "categorical_chain.json"
    with Budget(10.0):
        for algorithm, g in (("smooth-categorical", graph), ("smooth-onebit", GRAPHS / "bernoulli_chain_6.json")):
            a = _cli(tmp_path, "a.json", "synthesize", g, "--algorithm", algorithm)
            b = _cli(tmp_path, "b.json", "synthesize", g, "--algorithm", algorithm)
            assert a == b
        for name in ("categorical-chain", "bernoulli-chain-21"):
            a = _cli(tmp_path, "a.csv", "experiment", name)
            b = _cli(tmp_path, "b.csv", "experiment", name)
            assert a == b
            assert a.decode() == run_experiment(ExperimentSpec(name))

        # a fresh interpreter must reproduce the same bytes and the same samples
        mech = tmp_path / "m.json"
        mech.write_bytes(_cli(tmp_path, "m.json", "synthesize", graph))
        cmd = [sys.executable, "-m", "profilepriv"]
        fresh = subprocess.run([*cmd, "synthesize", str(graph)], capture_output=True, check=True).stdout
        assert fresh == mech.read_bytes()
        sample = [*cmd, "sample", str(mech), "--profile", "P3", "--value", "1", "--seed", "99", "--count", "200"]
        first = subprocess.run(sample, capture_output=True, check=True).stdout
        second = subprocess.run(sample, capture_output=True, check=True).stdout
        assert first == second
        capfd.readouterr()
        assert main(sample[3:]) == 0
        assert capfd.readouterr().out.encode() == first
