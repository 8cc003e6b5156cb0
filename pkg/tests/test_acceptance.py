"""Acceptance gate: one test per criterion, each printed as PASS/FAIL in the summary.

Run alone with ``pytest tests/test_acceptance.py -v``. Criterion 10 simulates
a 32-component model 40,000 times and takes several minutes on one core.
"""

from __future__ import annotations

import json
import random
import time
from collections import Counter
from itertools import combinations

import pytest
from scipy.stats import chi2

from mpsim.attractors import estimate_propensities, minimal_trap_spaces
from mpsim.bits import parse_bits, to_mask
from mpsim.bnet import parse_bnet, read_bnet
from mpsim.cli import ExperimentConfig, cmd_simulate, main
from mpsim.engine import reachable_spaces, space_cube, spread, tr
from mpsim.model import apply_mutations, is_locally_monotone, parse_mutation
from mpsim.oracle import (
    Tables,
    async_successors,
    exact_propensities,
    fully_async_successors,
    mp_successors_bruteforce,
    trap_spaces_bruteforce,
)
from mpsim.sampler import (
    Constant,
    ExponentialDecay,
    SimulationParams,
    Stepper,
    WeightVector,
    transition_rates,
)

from netgen import random_network

SEED = 1
RUNS = 10_000


@pytest.fixture(scope="module")
def toy_paths(models_dir):
    return {"A": str(models_dir / "toyA.bnet"), "B": str(models_dir / "toyB.bnet")}


def simulate(path, init, depth, weights="uniform", workers=1, runs=RUNS):
    cfg = ExperimentConfig(
        model_path=path, init=init, depth=depth, weights=weights, runs=runs, seed=SEED, workers=workers
    )
    report = cmd_simulate(cfg)
    fractions = {row["id"]: row["fraction"] for row in report.attractors}
    return report, fractions


def exact(path, init, depth, weights="uniform"):
    f = read_bnet(path)
    W = WeightVector.single(f.n) if weights == "single" else WeightVector.uniform(f.n)
    params = SimulationParams(depth=depth, weights=W)
    return exact_propensities(f, parse_bits(init), params)


def sampler_support(f, x, params):
    """Every configuration one sampling step from x can return, read off spaces and rates."""
    out = set()
    for d in params.depth.support():
        spaces = reachable_spaces(f, x, d)
        R = transition_rates(spaces, params.weights, params.l_row_mode)
        if R.sum() == 0:
            out.add(x)
            continue
        for s, space in enumerate(spaces):
            for y in tr(space).members():
                if R[s, bin(x ^ y).count("1") - 1] > 0:
                    out.add(y)
    return out


# --- 1-3: toy propensities ---------------------------------------------------------------


def test_criterion_01_toy_bistability(criterion, toy_paths):
    note = criterion(1, "toy A from 000, const:3: 110 and 111 equiprobable")
    report, frac = simulate(toy_paths["A"], "000", "const:3")
    p = exact(toy_paths["A"], "000", Constant(3))
    note(
        f"fraction(111)={frac.get('111', 0.0):.4f} exact={p['111']!r} "
        f"elapsed={report.elapsed_seconds:.2f}s"
    )
    assert report.non_converged == 0
    assert 0.47 <= frac["111"] <= 0.53
    assert abs(p["111"] - 0.5) <= 1e-9
    assert report.elapsed_seconds < 5.0


def test_criterion_02_exponential_depth(criterion, toy_paths):
    note = criterion(2, "toy A from 000, exp depth: 111 with probability 1/14")
    report, frac = simulate(toy_paths["A"], "000", "exp")
    p = exact(toy_paths["A"], "000", ExponentialDecay(3))
    note(f"fraction(111)={frac.get('111', 0.0):.4f} exact={p['111']!r} (1/14={1 / 14!r})")
    assert 0.056 <= frac.get("111", 0.0) <= 0.087
    assert abs(p["111"] - 1 / 14) <= 1e-9


def test_criterion_03_asynchronous_ratio(criterion, toy_paths):
    note = criterion(3, "toy B from 111, depth 1: 001 twice 110; single flips: equal")
    _, frac = simulate(toy_paths["B"], "111", "const:1")
    p = exact(toy_paths["B"], "111", Constant(1))
    _, single = simulate(toy_paths["B"], "111", "const:1", weights="single")
    note(
        f"uniform W: fraction(001)={frac['001']:.4f} exact={p['001']!r}; "
        f"single W: 001={single['001']:.4f} 110={single['110']:.4f}"
    )
    assert 0.63 <= frac["001"] <= 0.70
    assert abs(p["001"] - 2 / 3) <= 1e-9
    assert 0.47 <= single["001"] <= 0.53
    assert 0.47 <= single["110"] <= 0.53


# --- 4-5: depth-1 collapse ------------------------------------------------------------------


def _depth_one_harness(weights, oracle, draws_for=False):
    rng = random.Random(2024)
    checked = mismatches = 0
    picks = []
    for k in range(200):
        f = random_network(rng, rng.randint(1, 8), monotone=k % 2 == 0)
        W = weights(f.n)
        params = SimulationParams(depth=Constant(1), weights=W)
        for x in range(1 << f.n):
            want = oracle(f, x)
            got = sampler_support(f, x, params)
            # a configuration with no successor is returned unchanged
            if got - {x} != want or (not want and got != {x}):
                mismatches += 1
            checked += 1
            # every fourth network lends one configuration to the frequency test
            if draws_for and k % 4 == 0 and len(want) >= 2 and (not picks or picks[-1][0] is not f):
                picks.append((f, x, params, sorted(want)))
    return checked, mismatches, picks


def test_criterion_04_depth_one_is_general_asynchronous(criterion):
    note = criterion(4, "depth 1 support equals general asynchronous successors")
    start = time.perf_counter()
    checked, mismatches, _ = _depth_one_harness(WeightVector.uniform, async_successors)
    elapsed = time.perf_counter() - start
    note(f"{checked} configurations of 200 networks, {mismatches} mismatches, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 60


def test_criterion_05_single_flip_is_fully_asynchronous(criterion):
    note = criterion(5, "single-flip weights give uniform fully asynchronous steps")
    checked, mismatches, picks = _depth_one_harness(
        WeightVector.single, fully_async_successors, draws_for=True
    )
    # pooled goodness of fit: independent chi-square statistics add up
    stat = 0.0
    dof = 0
    draws = 3000
    for k, (f, x, params, succ) in enumerate(picks):
        stepper = Stepper(f, params)
        rng = random.Random(k)
        counts = Counter(stepper.step(x, rng) for _ in range(draws))
        assert set(counts) <= set(succ)
        expected = draws / len(succ)
        stat += sum((counts[y] - expected) ** 2 / expected for y in succ)
        dof += len(succ) - 1
    pvalue = chi2.sf(stat, dof)
    note(
        f"{checked} configurations, {mismatches} support mismatches; "
        f"chi-square over {len(picks)} configurations: p={pvalue:.3f}"
    )
    assert mismatches == 0
    assert pvalue > 0.001


# --- 6-7: spaces on locally monotone networks -----------------------------------------------


def _monotone_harness():
    rng = random.Random(77)
    made = 0
    while made < 200:
        f = random_network(rng, rng.randint(1, 6), monotone=True)
        if not is_locally_monotone(f):
            continue
        made += 1
        yield f


def test_criterion_06_spaces_cover_mp_transitions(criterion):
    note = criterion(6, "union of spaces at depth n equals brute-force MP successors")
    checked = mismatches = 0
    for f in _monotone_harness():
        t = Tables(f)
        for x in range(1 << f.n):
            union = set()
            for space in reachable_spaces(f, x, f.n):
                union |= tr(space).members()
            if union != mp_successors_bruteforce(f, x, t) - {x}:
                mismatches += 1
            checked += 1
    note(f"{checked} configurations, {mismatches} mismatches")
    assert mismatches == 0


def test_criterion_07_spaces_are_disjoint(criterion):
    note = criterion(7, "transition sets of distinct spaces are disjoint; counts add up")
    checked = overlaps = miscounts = 0
    for f in _monotone_harness():
        for x in range(1 << f.n):
            spaces = list(reachable_spaces(f, x, f.n))
            sets = [tr(s).members() for s in spaces]
            for a, b in combinations(sets, 2):
                if a & b:
                    overlaps += 1
            union = set().union(*sets)
            total = sum(sum(s.counts().values()) for s in spaces)
            if total != len(union):
                miscounts += 1
            checked += 1
    note(f"{checked} configurations, {overlaps} overlapping pairs, {miscounts} count mismatches")
    assert overlaps == 0 and miscounts == 0


# --- 8: trap spaces ---------------------------------------------------------------------------


def test_criterion_08_trap_spaces_match_bruteforce(criterion):
    note = criterion(8, "minimal trap spaces equal brute-force enumeration, n <= 10")
    rng = random.Random(8)
    mismatches = 0
    sizes = Counter()
    for k in range(100):
        n = rng.randint(5, 10)
        f = random_network(rng, n, monotone=k % 2 == 0)
        sizes[n] += 1
        if [str(a) for a in minimal_trap_spaces(f)] != trap_spaces_bruteforce(f):
            mismatches += 1
    note(f"100 networks (n=5..10, {sizes[10]} with n=10), {mismatches} mismatches")
    assert mismatches == 0


# --- 9: worked sub-hypercubes ------------------------------------------------------------------


def test_criterion_09_subhypercube_fixtures(criterion):
    note = criterion(9, "closure sub-hypercubes of toy A")
    f = parse_bnet("x1, 1\nx2, x1\nx3, (!x1 & x2) | x3")
    cases = [
        ("001", (), "001"),
        ("001", (1,), "*01"),
        ("001", (1, 2), "**1"),
        ("001", (1, 2, 3), "**1"),
        ("011", (1, 2, 3), "**1"),
        ("011", (2, 3), "0*1"),
    ]
    got = []
    for x, K, want in cases:
        H = spread(f, parse_bits(x), to_mask(k - 1 for k in K), f.n)
        got.append(str(space_cube(parse_bits(x), H, f.n)))
    note(", ".join(got))
    assert got == [want for _, _, want in cases]


# --- 10: literature model ----------------------------------------------------------------------

TUMOR_INIT = ("ECM", "DNAdamage", "CDH1")


def _metastasis_fraction(f, est):
    i = f.index("Metastasis")
    hits = sum(c for a, c in est.counts.items() if a[i] == "1")
    return hits / est.converged


def test_criterion_10_tumor_invasion_mutant(criterion, models_dir):
    note = criterion(10, "tumor invasion: p53=0 raises the Metastasis propensity")
    base = read_bnet(models_dir / "tumor_invasion.bnet")
    x0 = to_mask(base.index(name) for name in TUMOR_INIT)
    results = {}
    per_step = {}
    for label, muts in (("wt", []), ("p53=0", ["p53=0"])):
        f = apply_mutations(base, [parse_mutation(m, base) for m in muts])
        A = minimal_trap_spaces(f)
        for dname, depth in (("const:1", Constant(1)), ("exp", ExponentialDecay(f.n))):
            params = SimulationParams.uniform(f, depth)
            start = time.perf_counter()
            est = estimate_propensities(f, x0, params, RUNS, seed=SEED, attractors=A)
            elapsed = time.perf_counter() - start
            assert est.runs == RUNS
            results[label, dname] = (_metastasis_fraction(f, est), est.non_converged)
            per_step[label, dname] = elapsed / max(est.total_steps, 1)

    # per-step cost of full MP (depth n every step) against depth 1, same walks' states
    f = base
    stepper_1 = Stepper(f, SimulationParams.uniform(f, Constant(1)))
    stepper_n = Stepper(f, SimulationParams.uniform(f, Constant(f.n)))
    rng = random.Random(SEED)
    states = [x0]
    for _ in range(300):
        states.append(stepper_1.step(states[-1], rng))
        if states[-1] == states[-2]:
            states.append(x0)
    timings = []
    for stepper in (stepper_1, stepper_n):
        start = time.perf_counter()
        for x in states:
            stepper._cache.clear()
            stepper.step(x, random.Random(0))
        timings.append((time.perf_counter() - start) / len(states))
    slowdown = timings[1] / timings[0]

    text = "; ".join(
        f"{label} {dname}: Metastasis={frac:.4f} lost={lost}"
        for (label, dname), (frac, lost) in sorted(results.items())
    )
    note(
        text
        + f"; full-MP step {slowdown:.1f}x slower than depth 1"
        + f" (exp {per_step['wt', 'exp'] / per_step['wt', 'const:1']:.1f}x)"
    )
    for dname in ("const:1", "exp"):
        assert results["p53=0", dname][0] > results["wt", dname][0]


# --- 11: determinism -----------------------------------------------------------------------------


def test_criterion_11_reports_identical_across_workers(criterion, toy_paths, tmp_path, capsys):
    note = criterion(11, "criteria 1-3 reports are byte-identical for 1, 2 and 4 workers")
    runs = [
        (toy_paths["A"], "000", "const:3", "uniform"),
        (toy_paths["A"], "000", "exp", "uniform"),
        (toy_paths["B"], "111", "const:1", "uniform"),
        (toy_paths["B"], "111", "const:1", "single"),
    ]
    identical = 0
    for k, (path, init, depth, weights) in enumerate(runs):
        blobs = set()
        for workers in (1, 2, 4):
            for fmt in ("json", "csv"):
                out = tmp_path / f"{k}-{workers}.{fmt}"
                argv = [
                    "simulate", "--model", path, "--init", init, "--depth", depth,
                    "--weights", weights, "--runs", str(RUNS), "--seed", str(SEED),
                    "--workers", str(workers), "--format", fmt, "--output", str(out),
                    "--no-timing",
                ]  # fmt: skip
                assert main(argv) == 0
            blobs.add((out.with_suffix(".json").read_bytes(), out.read_bytes()))
        identical += len(blobs) == 1
        report = json.loads(next(iter(blobs))[0])
        assert report["runs"] == RUNS
    capsys.readouterr()
    note(f"{identical}/{len(runs)} settings identical")
    assert identical == len(runs)
