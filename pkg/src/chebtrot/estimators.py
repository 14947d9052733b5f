"""End-to-end extrapolation pipelines and the exponential-count ledger.

Each pipeline evaluates data only at the positive nodes ``s_1 > .. > s_{n/2}``
and reuses those values at the mirrored negative nodes, because the Trotter
data are even in ``s``. Node tasks are independent; passing ``max_workers``
fans them out over a thread pool with results identical to serial runs.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import chebgrid
from .bounds import bernstein_energy_bound
from .chebgrid import ChebyshevGrid, InterpolationFit, lebesgue_factor, make_grid
from .errors import InputError, LevelCrossingError, WindowError
from .operators import HamiltonianModel, eig_herm, sum_matrix
from .phase_est import GaussianWindowSpec, gqpe_distribution, phase_rng, sample_phases
from .trotter import (
    ConvergenceDomainWarning,
    apply_scheme,
    effective_hamiltonian_from_step,
    evolve_fractional,
    integer_step_count,
    st_scheme,
    within_convergence_domain,
)

DEFAULT_PAD = 0.2


# -- data models --------------------------------------------------------------


@dataclass(frozen=True)
class ExactData:
    name = "exact"


@dataclass(frozen=True)
class GaussianNoise:
    """Additive ``N(0, sigma^2)`` noise on each node value.

    ``independent_mirror=True`` draws fresh noise for the mirrored nodes as
    well, modelling a run that measures every node (and pays for it).
    """

    sigma: float
    seed: int = 0
    independent_mirror: bool = False
    name = "gaussian_noise"


@dataclass(frozen=True)
class ShotNoise:
    """Binomial sampling of the amplitude ``(1 + f) / 2`` with ``shots`` draws per node."""

    shots: int
    seed: int = 0
    name = "shot"


@dataclass(frozen=True)
class GqpeEstimator:
    """Sampled Gaussian-window phase estimation of each node's ground phase."""

    spec: GaussianWindowSpec
    shots: int
    seed: int = 0
    name = "gqpe"


# -- cost ledger --------------------------------------------------------------


@dataclass(frozen=True)
class LedgerRow:
    s: float
    stages: int
    e_prime: int
    repetitions: int
    exponentials: int


@dataclass(frozen=True)
class CostLedger:
    rows: tuple[LedgerRow, ...]
    stages_per_step: int
    merged_stages_per_step: int
    repetitions_model: str = "exact"

    @property
    def exponentials_total(self) -> int:
        return sum(r.exponentials for r in self.rows)

    def as_dict(self) -> dict:
        return {
            "exponentials_total": self.exponentials_total,
            "stages_per_step": self.stages_per_step,
            "merged_stages_per_step": self.merged_stages_per_step,
            "repetitions_model": self.repetitions_model,
            "per_node": [r.__dict__ for r in self.rows],
        }


def cost_ledger(
    n: int,
    a: float,
    order: int,
    m: int,
    repetitions_per_node=1,
    execute_mirror: bool = False,
    repetitions_model: str = "exact",
) -> CostLedger:
    """Operator exponentials needed to collect data at every positive node.

    Each node costs ``2 m 5^(k-1)`` exponentials per step, times ``|e'_k|``
    steps, times its repetition count. When ``execute_mirror`` is set the
    negative nodes are run as well and the total doubles.
    """
    grid = make_grid(n, a)
    half = grid.half_nodes
    reps = np.broadcast_to(np.asarray(repetitions_per_node, dtype=np.int64), half.shape)
    if np.any(reps < 0):
        raise InputError("repetitions must be non-negative")
    k = order // 2
    stages = 2 * m * 5 ** (k - 1)
    merged = st_scheme(order, m).stage_count
    mirror = 2 if execute_mirror else 1
    rows = []
    for s, r in zip(half, reps):
        e = integer_step_count(float(s), float(half[0]))
        rows.append(LedgerRow(float(s), stages, e, int(r), stages * abs(e) * int(r) * mirror))
    return CostLedger(tuple(rows), stages, merged, repetitions_model)


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class NodeRecord:
    s: float
    value: float
    sigma: float
    e_prime: int
    exponentials: int
    in_derivative_domain: bool = True
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExtrapolationResult:
    estimate: float
    fit: InterpolationFit
    per_node: tuple[NodeRecord, ...]
    exact_reference: float
    cost: CostLedger
    config: dict = field(default_factory=dict)
    bound: float | None = None

    @property
    def systematic_error(self) -> float:
        return abs(self.estimate - self.exact_reference)

    def node_rows(self) -> list[NodeRecord]:
        """All ``n`` nodes in grid order; mirrored rows reuse data and cost nothing."""
        mirrored = [
            NodeRecord(-r.s, r.value, r.sigma, -r.e_prime, 0, r.in_derivative_domain, r.flags)
            for r in reversed(self.per_node)
        ]
        return list(self.per_node) + mirrored

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["s", "value", "sigma", "e_prime", "exponentials"])
        for r in self.node_rows():
            w.writerow([repr(r.s), repr(r.value), repr(r.sigma), r.e_prime, r.exponentials])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "per_node": [
                {
                    "s": r.s,
                    "value": r.value,
                    "sigma": r.sigma,
                    "e_prime": r.e_prime,
                    "exponentials": r.exponentials,
                    "in_derivative_domain": r.in_derivative_domain,
                    "flags": list(r.flags),
                }
                for r in self.per_node
            ],
            "estimate": self.estimate,
            "reference": self.exact_reference,
            "systematic_error": self.systematic_error,
            "bound": self.bound,
            "ledger": self.cost.as_dict(),
        }


def _map_nodes(fn, items, max_workers: int | None):
    if max_workers and max_workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _finish(grid: ChebyshevGrid, records, reference: float, ledger: CostLedger, config: dict, bound=None):
    half_vals = [r.value for r in records]
    y = np.array(half_vals + half_vals[::-1])
    f = chebgrid.fit(grid, y)
    return ExtrapolationResult(
        estimate=f.estimate_at_zero,
        fit=f,
        per_node=tuple(records),
        exact_reference=reference,
        cost=ledger,
        config=config,
        bound=bound,
    )


# -- ground energy --------------------------------------------------------------


def check_fourier_window(max_abs_energy: float, total_time: float, pad: float = DEFAULT_PAD) -> None:
    """Raise ``WindowError`` unless the spectrum in cycles fits inside ``[-(1-pad)/2, (1-pad)/2]``."""
    cycles = max_abs_energy * abs(total_time) / (2 * math.pi)
    if cycles > (1.0 - pad) / 2:
        raise WindowError(
            f"spectrum spans {cycles:.4f} cycles, beyond the padded window {(1.0 - pad) / 2:.4f}; reduce t"
        )


def _ground_energy_node(model, scheme, t, s1, ground, estimator, pad, index, s):
    e = integer_step_count(s, s1)
    step = apply_scheme(model, scheme, t * s)
    h, theta, z = effective_hamiltonian_from_step(step, t * s)
    energies = -theta / (t * s)
    total_time = t * s * e
    # wrapped phases cannot reveal aliasing, so the decomposition norm bounds the spectrum too
    check_fourier_window(max(float(np.max(np.abs(energies))), model.norm_sum), total_time, pad)
    overlaps = np.abs(z.conj().T @ ground)
    tracked = int(np.argmax(overlaps))
    if energies[tracked] > energies.min() + 1e-9 * max(1.0, abs(energies.min())):
        raise LevelCrossingError(
            f"at s={s:.6g} the state tracking the ground state is not the lowest level; the gap closed"
        )
    flags = []
    in_domain = within_convergence_domain(model, scheme.order, s, t)
    if isinstance(estimator, GqpeEstimator):
        U = np.linalg.matrix_power(step, e)
        dist = gqpe_distribution(U, z[:, tracked], estimator.spec)
        phases = sample_phases(dist, estimator.shots, estimator.seed, stream=index)
        zbar = np.mean(np.exp(2j * np.pi * phases))
        phase = float(np.angle(zbar) / (2 * np.pi))
        spread = float(np.std(phases)) if estimator.shots > 1 else dist.std
        scale = 2 * math.pi / total_time
        value = -phase * scale
        sigma = spread * scale / math.sqrt(estimator.shots)
        flags.append("sampled")
    else:
        value = float(energies[tracked])
        sigma = 0.0
    return value, sigma, e, in_domain, tuple(flags)


def extrapolate_ground_energy(
    model: HamiltonianModel,
    order: int,
    t: float,
    n: int,
    a: float = 1.0,
    estimator=None,
    pad: float = DEFAULT_PAD,
    max_workers: int | None = None,
    with_bound: bool = False,
) -> ExtrapolationResult:
    """Extrapolate the ground energy of the Trotterized dynamics to zero step size.

    Node values are ground energies of the effective Hamiltonian at each
    positive node, either exact or from sampled phase estimation of
    ``S(t s_k)^(e'_k)``.
    """
    estimator = estimator or ExactData()
    if t <= 0:
        raise InputError("t must be positive")
    grid = make_grid(n, a)
    scheme = st_scheme(order, model.m)
    spec = eig_herm(sum_matrix(model))
    ground = spec.ground_state
    s1 = float(grid.nodes[0])
    half = [(i, float(s)) for i, s in enumerate(grid.half_nodes)]

    def task(item):
        return _ground_energy_node(model, scheme, t, s1, ground, estimator, pad, *item)

    results = _map_nodes(task, half, max_workers)
    reps = estimator.shots * (2 ** estimator.spec.m - 1) if isinstance(estimator, GqpeEstimator) else 1
    ledger = cost_ledger(n, a, order, model.m, reps, repetitions_model="shots" if reps > 1 else "exact")
    records = [
        NodeRecord(s, v, sg, e, row.exponentials, dom, fl)
        for (_, s), (v, sg, e, dom, fl), row in zip(half, results, ledger.rows)
    ]
    bound = None
    if with_bound:
        bound = float(bernstein_energy_bound(model, scheme, t, n, a).value)
    config = {"pipeline": "energy", "order": order, "t": t, "n": n, "a": a, "estimator": estimator.name, "pad": pad}
    return _finish(grid, records, spec.ground_energy, ledger, config, bound)


# -- expectation values -------------------------------------------------------


def _quiet_evolve(model, scheme, t, s):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceDomainWarning)
        return evolve_fractional(model, scheme, t, s)


def _check_density(rho: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise InputError(f"density matrix of shape {rho.shape} does not match dimension {dim}")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise InputError("density matrix must have unit trace")
    return rho


def extrapolate_expectation(
    model: HamiltonianModel,
    rho,
    O,
    order: int,
    t: float,
    n: int,
    a: float,
    data_model=None,
    max_workers: int | None = None,
) -> ExtrapolationResult:
    """Extrapolate ``tr(rho U(t)^dag O U(t)) / ||O||`` to zero Trotter step.

    Node values come from the fractional-step evolution at each positive node,
    optionally perturbed by the chosen data model.
    """
    data_model = data_model or ExactData()
    rho = _check_density(rho, model.dim)
    O = np.asarray(O, dtype=complex)
    norm_o = float(np.linalg.norm(O, 2))
    if norm_o == 0:
        raise InputError("observable must be nonzero")
    obs = O / norm_o
    grid = make_grid(n, a)
    scheme = st_scheme(order, model.m)
    s1 = float(grid.nodes[0])
    half = [(i, float(s)) for i, s in enumerate(grid.half_nodes)]

    def exact_value(s):
        if t == 0:
            return float(np.real(np.trace(rho @ obs)))
        u = _quiet_evolve(model, scheme, t, s)
        return float(np.real(np.trace(rho @ u.conj().T @ obs @ u)))

    def task(item):
        i, s = item
        f = exact_value(s)
        e = integer_step_count(s, s1)
        dom = within_convergence_domain(model, order, s, t)
        if isinstance(data_model, GaussianNoise):
            f += data_model.sigma * phase_rng(data_model.seed, i).standard_normal()
            return f, data_model.sigma, e, dom, ("gaussian_noise",)
        if isinstance(data_model, ShotNoise):
            p = min(max((1.0 + f) / 2.0, 0.0), 1.0)
            hits = phase_rng(data_model.seed, i).binomial(data_model.shots, p)
            f_hat = 2.0 * hits / data_model.shots - 1.0
            return f_hat, 2.0 * math.sqrt(p * (1 - p) / data_model.shots), e, dom, ("shot",)
        return f, 0.0, e, dom, ()

    results = _map_nodes(task, half, max_workers)
    if isinstance(data_model, ShotNoise):
        reps, model_name = data_model.shots, "shots"
    else:
        reps, model_name = 1, "exact"
    mirror_measured = isinstance(data_model, GaussianNoise) and data_model.independent_mirror
    ledger = cost_ledger(n, a, order, model.m, reps, execute_mirror=mirror_measured, repetitions_model=model_name)
    records = [
        NodeRecord(s, v, sg, e, row.exponentials, dom, fl)
        for (_, s), (v, sg, e, dom, fl), row in zip(half, results, ledger.rows)
    ]
    H = sum_matrix(model)
    w, v = np.linalg.eigh(H)
    u_exact = (v * np.exp(-1j * w * t)) @ v.conj().T
    reference = float(np.real(np.trace(rho @ u_exact.conj().T @ obs @ u_exact)))
    config = {"pipeline": "expval", "order": order, "t": t, "n": n, "a": a, "data_model": data_model.name}

    if mirror_measured:
        # fresh draws for the negative nodes, on streams after the positive ones
        half_vals = [r.value for r in records]
        exact_half = [exact_value(s) for _, s in half]
        neg = [
            exact_half[j] + data_model.sigma * phase_rng(data_model.seed, n // 2 + j).standard_normal()
            for j in range(n // 2)
        ]
        y = np.array(half_vals + neg[::-1])
        f = chebgrid.fit(grid, y)
        return ExtrapolationResult(f.estimate_at_zero, f, tuple(records), reference, ledger, config)
    return _finish(grid, records, reference, ledger, config)


# -- Frobenius distance ------------------------------------------------------


def _check_pair(U, V) -> tuple[np.ndarray, np.ndarray, int]:
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.shape != V.shape or U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InputError(f"unitaries must be square and equal in shape, got {U.shape} and {V.shape}")
    dim = U.shape[0]
    nq = dim.bit_length() - 1
    if dim != 1 << nq:
        raise InputError("dimension must be a power of two")
    return U, V, nq


def frobenius_probability(U, V) -> float:
    """``||U - V||_F^2 / 2^(n+2)``, the ancilla-zero probability of the LCU distance circuit."""
    U, V, nq = _check_pair(U, V)
    return float(np.linalg.norm(U - V) ** 2 / 2 ** (nq + 2))


def frobenius_circuit_probability(U, V) -> float:
    """Simulate the distance circuit on the maximally mixed input and return ``P(ancilla = 0)``.

    Ancilla ``H``, controlled ``U`` on ``|0>`` and ``-V`` on ``|1>``, ancilla
    ``H``, measure. The register starts in ``I / 2^n``.
    """
    U, V, nq = _check_pair(U, V)
    dim = U.shape[0]
    had = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    h_full = np.kron(had, np.eye(dim))
    select = np.zeros((2 * dim, 2 * dim), dtype=complex)
    select[:dim, :dim] = U
    select[dim:, dim:] = -V
    circuit = h_full @ select @ h_full
    rho = np.zeros((2 * dim, 2 * dim), dtype=complex)
    rho[:dim, :dim] = np.eye(dim) / dim
    out = circuit @ rho @ circuit.conj().T
    return float(np.real(np.trace(out[:dim, :dim])))


def frobenius_distance(U, V) -> float:
    """``d(U, V) = ||(U - V)/2||_F / sqrt(2^n)``."""
    U, V, nq = _check_pair(U, V)
    return float(np.linalg.norm((U - V) / 2) / math.sqrt(2 ** nq))


def estimate_trotter_error(
    model: HamiltonianModel,
    order: int,
    t: float,
    n: int,
    a: float = 0.5,
    phase_noise: float | None = None,
    seed: int = 0,
    max_workers: int | None = None,
) -> ExtrapolationResult:
    """Extrapolate the Frobenius distance between one Trotter step and exact evolution.

    Node data are ``phi_k = asin(sqrt(p_k))`` with ``p_k`` the circuit
    probability for ``U_s(t)`` against ``U_1(t)``; the estimate is
    ``sin(phi_hat(0))``. Since ``p`` vanishes at ``s = 1`` the data have a kink
    there, so ``a`` should keep the nodes away from 1.
    """
    grid = make_grid(n, a)
    scheme = st_scheme(order, model.m)
    u_one = apply_scheme(model, scheme, t)
    s1 = float(grid.nodes[0])
    half = [(i, float(s)) for i, s in enumerate(grid.half_nodes)]

    def task(item):
        i, s = item
        p = frobenius_probability(_quiet_evolve(model, scheme, t, s), u_one)
        flags = []
        if p > 1.0:
            p, flags = 1.0, ["clamped"]
        phi = math.asin(math.sqrt(p))
        sigma = 0.0
        if phase_noise:
            phi += phase_noise * phase_rng(seed, i).standard_normal()
            sigma = phase_noise
            if not 0.0 <= phi <= math.pi / 2:
                phi = min(max(phi, 0.0), math.pi / 2)
                flags.append("clamped")
        e = integer_step_count(s, s1)
        return phi, sigma, e, within_convergence_domain(model, order, s, t), tuple(flags)

    results = _map_nodes(task, half, max_workers)
    ledger = cost_ledger(n, a, order, model.m, 1)
    records = [
        NodeRecord(s, v, sg, e, row.exponentials, dom, fl)
        for (_, s), (v, sg, e, dom, fl), row in zip(half, results, ledger.rows)
    ]
    H = sum_matrix(model)
    w, v = np.linalg.eigh(H)
    u_exact = (v * np.exp(-1j * w * t)) @ v.conj().T
    reference = frobenius_distance(u_one, u_exact)
    config = {"pipeline": "trotter-error", "order": order, "t": t, "n": n, "a": a, "phase_noise": phase_noise}
    res = _finish(grid, records, reference, ledger, config)
    # the fit lives in phase space; report the mapped distance
    return ExtrapolationResult(
        estimate=math.sin(res.estimate),
        fit=res.fit,
        per_node=res.per_node,
        exact_reference=reference,
        cost=ledger,
        config=config,
    )


# -- cost comparison -----------------------------------------------------------


def ground_energy_error(model: HamiltonianModel, order: int, step: float) -> float:
    """``|lambda_0(H_eff) - E_0|`` for a single Trotter step of length ``step``."""
    scheme = st_scheme(order, model.m)
    h, theta, _ = effective_hamiltonian_from_step(apply_scheme(model, scheme, step), step)
    e0 = eig_herm(sum_matrix(model)).ground_energy
    return abs(float(np.min(-theta / step)) - e0)


def single_formula_cost(model: HamiltonianModel, order: int, eps: float, max_halvings: int = 60) -> tuple[int, float]:
    """Exponentials for Heisenberg-limited phase estimation with one product formula.

    Picks the largest step whose ground-energy bias is at most ``eps`` (found
    from the leading power law and then shrunk until it holds) and charges
    ``ceil((1/eps) / step)`` steps.
    """
    ref = 0.05
    err_ref = ground_energy_error(model, order, ref)
    if err_ref == 0.0:
        step = ref
    else:
        step = min(ref * (eps / err_ref) ** (1.0 / order), 0.5)
        for _ in range(max_halvings):
            if ground_energy_error(model, order, step) <= eps:
                break
            step *= 0.9
    stages = 2 * model.m * 5 ** (order // 2 - 1)
    return stages * math.ceil((1.0 / eps) / step), step


def extrapolation_cost(
    model: HamiltonianModel,
    order: int,
    t: float,
    eps: float,
    a: float = 1.0,
    n_max: int = 40,
    errors: dict[int, float] | None = None,
) -> tuple[int | None, int | None]:
    """Exponentials for the extrapolated estimate to reach total error ``eps``.

    Uses the smallest even ``n`` whose systematic error is at most ``eps/2``;
    the remaining ``eps/2`` is the data budget, divided by the Lebesgue
    factor. Each node runs Heisenberg-limited phase estimation of
    ``S(t s_k)^(e'_k)`` to that precision. Returns ``(None, None)`` when no
    ``n <= n_max`` is accurate enough.
    """
    errors = errors if errors is not None else {}
    for n in range(2, n_max + 1, 2):
        if n not in errors:
            errors[n] = extrapolate_ground_energy(model, order, t, n, a).systematic_error
        if errors[n] <= eps / 2:
            eps_data = eps / (2 * lebesgue_factor(n))
            grid = make_grid(n, a)
            s1 = float(grid.nodes[0])
            reps = [
                math.ceil(1.0 / (eps_data * t * s * abs(integer_step_count(float(s), s1))))
                for s in grid.half_nodes
            ]
            return cost_ledger(n, a, order, model.m, reps, repetitions_model="heisenberg").exponentials_total, n
    return None, None


@dataclass(frozen=True)
class CostRow:
    epsilon: float
    cost_single: int
    cost_extrap: int | None
    n_used: int | None


def cost_scan(model: HamiltonianModel, order: int, t: float, eps_values, a: float = 1.0, n_max: int = 40) -> list[CostRow]:
    errors: dict[int, float] = {}
    rows = []
    for eps in eps_values:
        single, _ = single_formula_cost(model, order, float(eps))
        extrap, n_used = extrapolation_cost(model, order, t, float(eps), a, n_max, errors)
        rows.append(CostRow(float(eps), single, extrap, n_used))
    return rows


def crossover_epsilon(rows: list[CostRow]) -> float | None:
    """Largest ``eps`` below which extrapolation is cheaper at every scanned tolerance."""
    ordered = sorted(rows, key=lambda r: r.epsilon)
    star = None
    for r in ordered:
        if r.cost_extrap is not None and r.cost_extrap < r.cost_single:
            star = r.epsilon
        else:
            break
    return star
