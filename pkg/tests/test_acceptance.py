"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantities, then asserts. Run with ``pytest tests/test_acceptance.py -v -s``
to see only these lines, or look for them in the full ``-v`` log.
"""

import math
import time
import warnings

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import unitary_group

from chebtrot.bounds import (
    bauer_fike_check,
    cheb_error_bound,
    cheb_node_error_bound,
    enumerate_sign_patterns,
    heff_distance_bound,
    total_steps_bound,
)
from chebtrot.chebgrid import fit, lebesgue_factor, make_grid, propagate_variance, weights_at_zero
from chebtrot.cli import main
from chebtrot.estimators import (
    cost_scan,
    crossover_epsilon,
    estimate_trotter_error,
    extrapolate_ground_energy,
    frobenius_circuit_probability,
    frobenius_probability,
)
from chebtrot.operators import build_tfim, sum_matrix
from chebtrot.phase_est import GaussianWindowSpec, gqpe_distribution, measured_window_error, window_error_budget
from chebtrot.trotter import apply_scheme, effective_hamiltonian, principal_power, st_scheme


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {label}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


@pytest.fixture(scope="module")
def tfim():
    return build_tfim(2, 1.0, 1.0)


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def test_criterion_01_trotter_order(tfim, report):
    start = time.perf_counter()
    ts = np.geomspace(0.02, 0.2, 8)
    H = sum_matrix(tfim)
    slopes = {}
    for order in (2, 4):
        scheme = st_scheme(order, tfim.m)
        errs = [np.linalg.norm(apply_scheme(tfim, scheme, t) - expm(-1j * t * H), 2) for t in ts]
        slopes[order] = _slope(ts, errs)
    elapsed = time.perf_counter() - start
    ok = abs(slopes[2] - 3.0) <= 0.15 and abs(slopes[4] - 5.0) <= 0.25 and elapsed < 1.0
    assert report("1", ok, f"slopes k=1 {slopes[2]:.4f}, k=2 {slopes[4]:.4f}; {elapsed:.3f}s")


def test_criterion_02_effective_hamiltonian(tfim, report):
    worst = 0.0
    for order in (2, 4):
        scheme = st_scheme(order, tfim.m)
        for t in (0.05, 0.2):
            for n in (2, 4, 6, 8):
                for s in make_grid(n).nodes:
                    heff = effective_hamiltonian(tfim, scheme, t, float(s))
                    target = principal_power(apply_scheme(tfim, scheme, s * t), 1.0 / s)
                    worst = max(worst, float(np.linalg.norm(heff.evolution(t) - target)))
    scheme = st_scheme(2, tfim.m)
    H = sum_matrix(tfim)
    ss = np.geomspace(0.05, 0.5, 8)
    dists = [np.linalg.norm(effective_hamiltonian(tfim, scheme, 0.2, s).matrix - H, 2) for s in ss]
    slope = _slope(ss, dists)
    ok = worst <= 1e-10 and abs(slope - 2.0) <= 0.1
    assert report("2", ok, f"max Frobenius mismatch {worst:.2e}; distance slope {slope:.4f}")


def test_criterion_03_conditioning(report):
    worst_orth = worst_d0 = 0.0
    lebesgue_ok = True
    for n in range(2, 65, 2):
        g = make_grid(n)
        worst_orth = max(worst_orth, float(np.max(np.abs(g.V.T @ g.V - np.eye(n)))))
        d0 = weights_at_zero(g)
        worst_d0 = max(worst_d0, float(np.max(np.abs(d0 - g.V @ g.basis(0.0)[0]))))
        lebesgue_ok &= bool(np.sum(np.abs(d0)) < lebesgue_factor(n))
    steps_ok = all(np.sum(1 / np.abs(make_grid(n).nodes)) <= total_steps_bound(n, 1.0) for n in range(2, 257, 2))
    ok = worst_orth <= 1e-12 and worst_d0 <= 1e-12 and lebesgue_ok and steps_ok
    assert report(
        "3", ok,
        f"orthogonality {worst_orth:.1e}, d(0) mismatch {worst_d0:.1e}, "
        f"one-norm below Lebesgue factor {lebesgue_ok}, step-sum bound {steps_ok}",
    )


def test_criterion_04_adversarial_tolerance(report):
    start = time.perf_counter()
    eps = 1e-3
    worst_ratio = 0.0
    count = 0
    for n in (2, 4, 6, 8):
        g = make_grid(n)
        y = np.cos(3 * g.nodes) + g.nodes
        base = fit(g, y).estimate_at_zero
        for signs in enumerate_sign_patterns(n):
            moved = abs(fit(g, y + signs * eps / lebesgue_factor(n)).estimate_at_zero - base)
            worst_ratio = max(worst_ratio, moved / eps)
            count += 1
    elapsed = time.perf_counter() - start
    ok = worst_ratio <= 1.0 and elapsed < 1.0
    assert report("4", ok, f"{count} sign patterns, max shift {worst_ratio:.4f} eps; {elapsed:.3f}s")


def test_criterion_05_noise_propagation(report):
    trials = 10_000
    g = make_grid(8)
    rng = np.random.default_rng(2024)
    sigmas = rng.uniform(0.5e-3, 1.5e-3, size=8)
    y = np.exp(g.nodes)
    est = np.array([fit(g, y + sigmas * rng.standard_normal(8)).estimate_at_zero for _ in range(trials)])
    emp = float(np.std(est, ddof=1))
    _, exact = propagate_variance(sigmas, g)
    ceiling = math.sqrt(2) * sigmas.max() * (1 + 3 / math.sqrt(trials))
    rel = abs(emp / exact - 1)
    ok = emp <= ceiling and rel <= 0.05
    assert report("5", ok, f"empirical sigma {emp:.4e}, exact {exact:.4e} ({rel:.2%}), ceiling {ceiling:.4e}")


def test_criterion_06_energy_convergence(tfim, report):
    start = time.perf_counter()
    res = [extrapolate_ground_energy(tfim, 2, 0.1, n, 1.0, with_bound=True) for n in (2, 4, 6, 8)]
    elapsed = time.perf_counter() - start
    errs = [r.systematic_error for r in res]
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    bounded = all(r.systematic_error <= r.bound for r in res if math.isfinite(r.bound))
    ok = all(q <= 0.7 for q in ratios) and bounded and elapsed < 10
    detail = ", ".join(f"n={n}: {r.systematic_error:.2e} <= {r.bound:.2e}" for n, r in zip((2, 4, 6, 8), res))
    assert report("6", ok, f"{detail}; max ratio {max(ratios):.2e}; {elapsed:.2f}s")


def test_criterion_07_cost_crossover(tfim, report):
    eps = np.logspace(-2, -8, 13)
    star = crossover_epsilon(cost_scan(tfim, 2, 0.1, eps))
    star4 = crossover_epsilon(cost_scan(tfim, 4, 0.1, eps))
    ok = star is not None and 1e-8 <= star <= 1e-2
    note = "none in range" if star4 is None else f"{star4:.1e}"
    assert report("7", ok, f"second-order crossover eps* = {star:.1e}; fourth-order (report only): {note}")


def test_criterion_08_frobenius(tfim, report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for i in range(100):
        dim = 2 ** (1 + i % 3)
        U = unitary_group.rvs(dim, random_state=rng)
        V = unitary_group.rvs(dim, random_state=rng)
        worst = max(worst, abs(frobenius_circuit_probability(U, V) - frobenius_probability(U, V)))
    res = estimate_trotter_error(tfim, 2, 0.5, 6)
    rel = abs(res.estimate - res.exact_reference) / res.exact_reference
    ok = worst <= 1e-12 and rel <= 1e-3
    assert report("8", ok, f"circuit vs trace max diff {worst:.1e}; distance relative error {rel:.2e}")


def test_criterion_09_window(report):
    worst_margin = -math.inf
    for m in range(4, 9):
        for q in range(m, m + 5):
            spec = GaussianWindowSpec(m, q, math.sqrt(2 ** m))
            worst_margin = max(worst_margin, measured_window_error(spec) / window_error_budget(spec).total)
    worst_bins = 0.0
    for m in (6, 7, 8):
        spec = GaussianWindowSpec(m, m + 2, math.sqrt(2 ** m))
        for theta in (-0.31, 0.0137, 0.25, 0.4441):
            dist = gqpe_distribution(np.diag([1.0, np.exp(2j * np.pi * theta)]), np.array([0, 1.0]), spec)
            err = (dist.circular_mean() - theta + 0.5) % 1.0 - 0.5
            worst_bins = max(worst_bins, abs(err) * 2 ** spec.q)
    ok = worst_margin <= 1.0 and worst_bins <= 1.0
    assert report("9", ok, f"max measured/budget {worst_margin:.3f}; max circular-mean error {worst_bins:.2e} bins")


def test_criterion_10a_effective_hamiltonian_bound(tfim, report):
    checked = flagged_ok = 0
    worst = 0.0
    for order in (2, 4):
        scheme = st_scheme(order, tfim.m)
        H = sum_matrix(tfim)
        for t in (0.02, 0.05, 0.1, 0.2):
            for n in (2, 4, 6, 8):
                for s in make_grid(n).half_nodes:
                    b = heff_distance_bound(tfim, scheme, t, float(s))
                    exact = np.linalg.norm(effective_hamiltonian(tfim, scheme, t, float(s)).matrix - H, 2)
                    checked += 1
                    if b.domain_ok:
                        flagged_ok += 1
                        worst = max(worst, exact / b.value)
    ok = flagged_ok > 0 and worst <= 1.0
    assert report("10a", ok, f"{flagged_ok}/{checked} nodes inside validity flags; max exact/bound {worst:.3e}")


@pytest.mark.xfail(strict=True, reason="the (a/2n)^n interpolation bound omits a factor of pi and fails for e^s")
def test_criterion_10b_stated_interpolation_bound(report):
    rows = []
    for a in (0.5, 1.0):
        for n in (2, 4, 6, 8):
            g = make_grid(n, a)
            err = abs(fit(g, np.exp(g.nodes)).estimate_at_zero - 1.0)
            rows.append((n, a, err, cheb_error_bound(n, a, math.exp(a)).value))
    ok = all(err <= bound for _, _, err, bound in rows)
    worst = max(err / bound for _, _, err, bound in rows)
    assert report("10b", ok, f"(a/2n)^n form: max exact/bound {worst:.1f} over n<=8, a in {{0.5, 1}}")


def test_criterion_10b_node_product_interpolation_bound(report):
    worst = 0.0
    for a in (0.5, 1.0):
        for n in (2, 4, 6, 8):
            g = make_grid(n, a)
            err = abs(fit(g, np.exp(g.nodes)).estimate_at_zero - 1.0)
            worst = max(worst, err / cheb_node_error_bound(n, a, math.exp(a)).value)
    assert report("10b'", worst <= 1.0, f"node-product form: max exact/bound {worst:.3f}")


def test_criterion_10c_bauer_fike(report):
    rng = np.random.default_rng(10)
    failures = 0
    for i in range(1000):
        dim = 2 + i % 7
        A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        A = (A + A.conj().T) / 2
        E = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        E = 10 ** rng.uniform(-6, 0) * (E + E.conj().T) / 2
        eigs_a = np.linalg.eigvalsh(A)
        gap = float(np.linalg.norm(E, 2))
        failures += sum(not bauer_fike_check(eigs_a, lam, gap) for lam in np.linalg.eigvalsh(A + E))
    assert report("10c", failures == 0, f"1000 random perturbed pairs, {failures} violations")


def _run_cli(root, name, argv):
    out = root / name
    out.mkdir()
    assert main(argv + ["--out", str(out)]) == 0
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


def test_criterion_11_determinism(tmp_path, report):
    import json

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "n": [2, 4, 6, 8],
        "estimator": {"gqpe": {"m": 6, "q": 8, "shots": 400}},
        "data_model": {"gaussian_noise": {"sigma": 1e-3}},
        "seed": 17,
    }))
    same = True
    files = 0
    for command in ("energy", "expval", "window", "truncation"):
        runs = [
            _run_cli(tmp_path, f"{command}-{i}", [command, "--config", str(cfg), "--threads", th])
            for i, th in enumerate(("1", "1", "4"))
        ]
        same &= runs[0] == runs[1] == runs[2]
        files += len(runs[0])
    assert report("11", same, f"{files} CSV files byte-identical across two runs and threads 1/4")
