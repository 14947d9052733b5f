"""Closed-form error and cost bounds.

Bounds annotate computations, they never gate them: every evaluator returns
a value together with the assumptions it relies on and how much slack each
assumption has. Large factorials and powers are evaluated in log space.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .chebgrid import lebesgue_factor
from .errors import CapabilityError, DomainError, InputError
from .lambertw import lambertw0, lambertw_m1
from .operators import HamiltonianModel, eig_herm, sum_matrix
from .trotter import TrotterScheme

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class Assumption:
    name: str
    satisfied: bool
    margin: float


@dataclass(frozen=True)
class BoundReport:
    value: float
    domain_ok: bool = True
    assumptions: tuple[Assumption, ...] = field(default_factory=tuple)
    log10_value: float | None = None

    def __post_init__(self):
        if self.log10_value is None:
            v = self.value
            lv = math.log10(v) if v > 0 and math.isfinite(v) else (-math.inf if v == 0 else math.nan)
            object.__setattr__(self, "log10_value", lv)

    def __float__(self) -> float:
        return float(self.value)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "log10_value": self.log10_value,
            "domain_ok": self.domain_ok,
            "assumptions": [
                {"name": a.name, "satisfied": a.satisfied, "margin": a.margin} for a in self.assumptions
            ],
        }


def _from_log(log_value: float, **kw) -> BoundReport:
    """Build a report from a natural-log value, keeping log10 when exp overflows."""
    value = math.exp(log_value) if log_value < 709.0 else math.inf
    return BoundReport(value=value, log10_value=log_value / math.log(10.0), **kw)


def _assume(name: str, lhs: float, rhs: float) -> Assumption:
    return Assumption(name=name, satisfied=lhs <= rhs, margin=rhs - lhs)


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1) if n > 20 else math.log(math.factorial(n))


# -- derivative and interpolation bounds ------------------------------------


def heff_derivative_bound(n_deriv: int, k: int, m: int, hmax: float, t: float, s: float = 1.0) -> BoundReport:
    """Bound on ``||d^n/ds^n H_eff(s)||``: ``2/t n^n (e^2 k (5/3)^k m hmax t)^(n+1)``."""
    if t <= 0:
        raise InputError(f"evolution time must be positive, got {t}")
    if n_deriv < 0:
        raise InputError("derivative order must be non-negative")
    c = k * (5.0 / 3.0) ** k * m * hmax
    lhs = c * abs(s) * t
    assumption = _assume("k(5/3)^k m hmax |s| t <= pi/20", lhs, math.pi / 20)
    inner = math.e ** 2 * c * t
    if inner == 0.0:
        return BoundReport(value=0.0, domain_ok=assumption.satisfied, assumptions=(assumption,))
    n = n_deriv
    log_v = math.log(2.0) - math.log(t) + (n * math.log(n) if n > 0 else 0.0) + (n + 1) * math.log(inner)
    return _from_log(log_v, domain_ok=assumption.satisfied, assumptions=(assumption,))


def cheb_error_bound(n: int, a: float, deriv_sup: float) -> BoundReport:
    """Error at ``s = 0`` of the ``n``-node Chebyshev interpolant: ``max|f^(n)| (a/2n)^n``.

    For odd ``n`` the origin is a node and the error is exactly zero.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if n % 2:
        return BoundReport(value=0.0, assumptions=(Assumption("odd n: 0 is a node", True, 0.0),))
    if deriv_sup == 0:
        return BoundReport(value=0.0)
    log_v = math.log(deriv_sup) + n * math.log(a / (2 * n))
    return _from_log(log_v)


def cheb_node_error_bound(n: int, a: float, deriv_sup: float) -> BoundReport:
    """Rigorous error at ``s = 0``: ``max|f^(n)| / n! * prod|s_k|`` with ``prod|s_k| = a^n 2^(1-n)``.

    ``cheb_error_bound`` drops a factor ``pi`` per node when bounding the
    cosine product and can sit below the true error; this form cannot.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if n % 2:
        return BoundReport(value=0.0, assumptions=(Assumption("odd n: 0 is a node", True, 0.0),))
    if deriv_sup == 0:
        return BoundReport(value=0.0)
    log_v = math.log(deriv_sup) + n * math.log(a) + (1 - n) * math.log(2.0) - log_factorial(n)
    return _from_log(log_v)


def total_steps_bound(n: int, a: float) -> float:
    """Upper bound ``(4n/(pi a)) (gamma + ln(2n + 2))`` on ``sum_k 1/|s_k|``."""
    if n % 2 or n < 2:
        raise InputError("n must be even and >= 2")
    if a <= 0:
        raise InputError("a must be positive")
    return 4.0 * n / (math.pi * a) * (EULER_GAMMA + math.log(2 * n + 2))


def bernstein_bound(C: float, rho: float, n: int) -> float:
    """``4 C rho^-n / (rho - 1)`` for a degree-``n`` interpolant of a function bounded by ``C`` on ``B_rho``."""
    if rho <= 1:
        raise DomainError(f"Bernstein parameter must exceed 1, got {rho}")
    if C < 0:
        raise InputError("C must be non-negative")
    return 4.0 * C * rho ** (-n) / (rho - 1.0)


@dataclass(frozen=True)
class AnalyticityRadius:
    r_max: float
    rho_max: float | None

    @property
    def covers_interval(self) -> bool:
        """True when some Bernstein ellipse around ``[-1, 1]`` fits inside the disc."""
        return self.rho_max is not None


def analyticity_radius(alpha: float, beta: float, p: int, gamma0: float) -> AnalyticityRadius:
    """Largest ``r`` with ``alpha r^p e^(beta r) / (p+1)! <= gamma0 / 2``."""
    if min(alpha, beta, gamma0) <= 0 or p < 1:
        raise InputError("alpha, beta, gamma0 must be positive and p >= 1")
    log_arg = (math.log(gamma0) + log_factorial(p + 1) - math.log(2 * alpha)) / p
    r_max = p / beta * lambertw0(beta / p * math.exp(log_arg))
    rho = r_max + math.sqrt(r_max * r_max - 1.0) if r_max > 1.0 else None
    return AnalyticityRadius(r_max=r_max, rho_max=rho)


def expval_deriv_bound(n: int, c_param: float, a: float) -> dict:
    """Both regimes of the observable-derivative bound and their interpolation errors.

    ``c_param = k (5/3)^k m max||H_l|| t``. The regime whose condition holds
    (``c > n`` or ``c <= n``) is reported as ``applicable``; ``best_interp``
    is the smaller of the two interpolation bounds.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    c = float(c_param)
    if c < 0:
        raise InputError("c must be non-negative")
    if c == 0:
        r1 = {"deriv": 0.0, "interp": 0.0}
        r2_deriv = math.sqrt(2 * n / math.pi) * 0.0
        r2 = {"deriv": r2_deriv, "interp": 0.0}
    else:
        k1 = math.sqrt(math.e ** 3 * (1.0 + math.sqrt(8.0 / math.pi) * math.e ** 2))
        r1 = {
            "deriv": _exp_safe(2 * n * math.log(c * k1)),
            "interp": _exp_safe(n * math.log(129.0 * c * c * a / n)) if a > 0 else 0.0,
        }
        log_d2 = (
            0.5 * math.log(2 * n / math.pi)
            + n * math.log(math.e ** 4 * c / 2)
            + log_factorial(n)
            + 4 * c * math.e ** 2 * math.sqrt(2 / math.pi)
        )
        r2 = {
            "deriv": _exp_safe(log_d2),
            "interp": _exp_safe(math.log(2 * math.sqrt(2) * n) + n * math.log(6 * c * a) + 24 * c) if a > 0 else 0.0,
        }
    return {
        "regime_c_gt_n": r1,
        "regime_c_le_n": r2,
        "applicable": "regime_c_gt_n" if c > n else "regime_c_le_n",
        "best_interp": min(r1["interp"], r2["interp"]),
    }


def _exp_safe(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


# -- commutator budgets ------------------------------------------------------


@dataclass(frozen=True)
class CommutatorBudget:
    alpha_comm: float
    p: int
    mode: str


EXACT_MAX_P = 4
EXACT_MAX_M = 3


def _ad(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return a @ x - x @ a


def _nested_sum(As: list[np.ndarray], B: np.ndarray, p: int) -> float:
    """``sum_{q_1+..+q_s=p} multinomial * ||ad_{A_s}^{q_s} .. ad_{A_1}^{q_1} B||``."""
    total = 0.0
    log_pf = log_factorial(p)

    def rec(i: int, x: np.ndarray, remaining: int, log_denom: float):
        nonlocal total
        if remaining == 0:
            total += math.exp(log_pf - log_denom) * np.linalg.norm(x, 2)
            return
        if i == len(As):
            return
        y = x
        for q in range(remaining + 1):
            if q > 0:
                y = _ad(As[i], y)
                if not np.any(np.abs(y) > 1e-300):
                    return
            rec(i + 1, y, remaining - q, log_denom + log_factorial(q))

    rec(0, B, p, 0.0)
    return total


def alpha_comm(As, B, p: int, mode: str = "crude") -> CommutatorBudget:
    """Nested-commutator weight ``alpha_comm(A_s, .., A_1, B)``.

    ``As`` lists ``A_1 .. A_s``. ``mode="crude"`` uses
    ``||B|| 2^p (sum_j ||A_j||)^p``; ``mode="exact"`` evaluates every nested
    commutator (only for ``p <= 4``).
    """
    if p < 1:
        raise InputError("p must be >= 1")
    As = [np.asarray(a, dtype=complex) for a in As]
    B = np.asarray(B, dtype=complex)
    if mode == "crude":
        norm_b = float(np.linalg.norm(B, 2))
        norm_a = float(sum(np.linalg.norm(a, 2) for a in As))
        return CommutatorBudget(norm_b * 2 ** p * norm_a ** p, p, mode)
    if mode == "exact":
        if p > EXACT_MAX_P:
            raise CapabilityError(f"exact nested commutators support p <= {EXACT_MAX_P}; use mode='crude'")
        return CommutatorBudget(_nested_sum(As, B, p), p, mode)
    raise InputError(f"unknown mode {mode!r}")


def crude_alpha_comm(norm_b: float, norm_as_sum: float, p: int) -> float:
    return norm_b * 2 ** p * norm_as_sum ** p


def scheme_alpha_comm(model: HamiltonianModel, scheme: TrotterScheme, p: int | None = None, mode: str = "crude") -> CommutatorBudget:
    """Sum over stages of ``alpha_comm`` with each stage as ``B`` and the later stages as ``A``.

    Stage operators are ``fraction * H_term``.
    """
    p = scheme.order if p is None else p
    stage_norms = [abs(f) * model.terms[j].norm for j, f in scheme.stages]
    if mode == "crude":
        total = 0.0
        for l, nb in enumerate(stage_norms):
            total += crude_alpha_comm(nb, sum(stage_norms[l + 1:]), p)
        return CommutatorBudget(total, p, mode)
    if mode == "exact":
        if model.m > EXACT_MAX_M or p > EXACT_MAX_P:
            raise CapabilityError(
                f"exact mode supports m <= {EXACT_MAX_M} and p <= {EXACT_MAX_P}; use mode='crude'"
            )
        ops = [f * model.terms[j].matrix for j, f in scheme.stages]
        total = sum(_nested_sum(ops[l + 1:], ops[l], p) for l in range(len(ops)))
        return CommutatorBudget(total, p, mode)
    raise InputError(f"unknown mode {mode!r}")


def heff_distance_bound(
    model: HamiltonianModel,
    scheme: TrotterScheme,
    t: float,
    s: float,
    mode: str = "crude",
    p: int | None = None,
) -> BoundReport:
    """Bound on ``||H - H_eff||`` at complex time ``|tau| = |s t|``.

    ``(5/2) alpha |tau|^p e^(2 |tau| sum||H_j||) / (p+1)!``; the three validity
    conditions are reported as assumptions, not enforced.
    """
    p = scheme.order if p is None else p
    tau = abs(s * t)
    alpha = scheme_alpha_comm(model, scheme, p, mode).alpha_comm
    budget = alpha * tau ** p * math.exp(2 * tau * model.norm_sum) / math.factorial(p + 1)
    value = 2.5 * budget
    assumptions = (
        _assume("|tau| <= 1/8", tau, 0.125),
        _assume("budget <= 1/20", budget, 0.05),
        _assume("|tau| * bound <= 15/8", tau * value, 15.0 / 8.0),
    )
    return BoundReport(value=value, domain_ok=all(a.satisfied for a in assumptions), assumptions=assumptions)


def bernstein_energy_bound(
    model: HamiltonianModel,
    scheme: TrotterScheme,
    t: float,
    n: int,
    a: float,
    mode: str = "crude",
) -> BoundReport:
    """Truncation-error bound for extrapolating the ground energy with ``n`` nodes.

    Chains the commutator bound on ``||H - H_eff||`` (which fixes ``alpha`` and
    ``beta``), the analyticity radius in ``tau = z t`` and the Bernstein-ellipse
    estimate on ``[-a, a]``. The function bounded on the ellipse is
    ``lambda(z) - E_0`` with ``C = gamma0 / 2``. With ``n`` nodes the
    interpolant has degree ``n - 1``. Returns ``inf`` when no ellipse fits.
    """
    p = scheme.order
    alpha = 2.5 * scheme_alpha_comm(model, scheme, p, mode).alpha_comm
    beta = 2.0 * model.norm_sum
    spec = eig_herm(sum_matrix(model))
    gamma0 = float(spec.eigenvalues[1] - spec.eigenvalues[0])
    if alpha == 0.0:
        return BoundReport(value=0.0)
    if gamma0 <= 0:
        return BoundReport(value=math.inf, domain_ok=False,
                           assumptions=(Assumption("ground state gap > 0", False, gamma0),))
    rad = analyticity_radius(alpha, beta, p, gamma0)
    radius_in_x = rad.r_max / (t * a)
    tau_max = rad.r_max
    assumptions = [
        _assume("analytic disc covers [-a, a] (R/a > 1)", 1.0, radius_in_x - 1e-300),
        _assume("|tau| <= 1/8 on the disc", tau_max, 0.125),
    ]
    if radius_in_x <= 1.0:
        return BoundReport(value=math.inf, domain_ok=False, assumptions=tuple(assumptions))
    rho = radius_in_x + math.sqrt(radius_in_x ** 2 - 1.0)
    value = bernstein_bound(gamma0 / 2.0, rho, n - 1)
    return BoundReport(value=value, domain_ok=all(x.satisfied for x in assumptions), assumptions=tuple(assumptions))


# -- parameter choices and cost formulas --------------------------------------


@dataclass(frozen=True)
class InterpParams:
    n_real: float
    n_star: int
    a: float


def pe_interp_params(m: int, k: int, hmax: float, Gamma: float, eps: float) -> InterpParams:
    """Node count balancing cost against tolerance, and the matching half-width.

    Solves ``n^2 = X^(1/n)`` with ``X = m k (5/3)^k hmax (1 + Gamma) / eps``
    (``n = ln X / (2 W_0(ln X / 2))``), rounds up to an even count, then sets
    ``a`` so the interpolation error at that count is ``eps``.
    """
    if eps <= 0:
        raise InputError("eps must be positive")
    if Gamma < 0:
        raise InputError("Gamma must be non-negative")
    X = m * k * (5.0 / 3.0) ** k * hmax * (1.0 + Gamma) / eps
    if X <= 1.0:
        n_real = 1.0
    else:
        L = math.log(X)
        n_real = L / (2.0 * lambertw0(L / 2.0))
    n_star = max(2, 2 * math.ceil(n_real / 2.0 - 1e-12))
    n = n_star
    scale = 32.0 * k * math.e ** 2 * (5.0 / 3.0) ** (k - 1) * m * hmax * (1.0 + Gamma)
    log_a = (
        math.log(2.0)
        + (math.log(64.0 * eps) - log_factorial(n)) / n
        - (1.0 + 1.0 / n) * math.log(scale)
    )
    return InterpParams(n_real=n_real, n_star=n_star, a=math.exp(log_a))


def expval_node_count(c_param: float, eps: float) -> InterpParams:
    """Node count and half-width for observable extrapolation.

    ``a`` solves ``6 e^24 c a = 1/2``; ``n`` is the larger of ``ceil(c)`` and
    ``ceil(-W_{-1}(-eps ln2 / (4 sqrt 2)) / ln 2)``.
    """
    if not 0 < eps:
        raise InputError("eps must be positive")
    if c_param <= 0:
        raise InputError("c must be positive")
    x = -eps * math.log(2.0) / (4.0 * math.sqrt(2.0))
    n_eps = -lambertw_m1(x) / math.log(2.0)
    n_real = max(math.ceil(c_param), math.ceil(n_eps))
    n_star = n_real + (n_real % 2)
    a = 0.5 / (6.0 * math.exp(24.0) * c_param)
    return InterpParams(n_real=float(n_real), n_star=n_star, a=a)


def iqae_oracle_count(eps_data: float, gamma_ratio: float, n: int, delta: float) -> float:
    """Grover-oracle count ``(200 g L_n/eps) ln((2n/delta) log2(g L_n pi/eps))``."""
    if min(eps_data, gamma_ratio) <= 0 or n < 1:
        raise InputError("eps_data, gamma_ratio must be positive and n >= 1")
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    L = lebesgue_factor(n)
    inner = gamma_ratio * L * math.pi / eps_data
    if inner <= 1.0:
        raise DomainError("log2 argument must exceed 1")
    outer = 2 * n / delta * math.log2(inner)
    if outer <= 0:
        raise DomainError("log argument must be positive")
    return 200.0 * gamma_ratio * L / eps_data * math.log(outer)


def state_prep_cost(e_prime, t: float, gap: float) -> float:
    """Gate-count proxy ``||e'||_1 / (t gap)`` for preparing every node's ground state."""
    if t <= 0 or gap <= 0:
        raise InputError("t and gap must be positive")
    return float(np.sum(np.abs(e_prime))) / (t * gap)


def tail_bounds(d_hat: float, xi: float, kk: float, n_qubits: int) -> tuple[float, float]:
    """Chebyshev (``1/k^2``) and Markov (``1/k``) tail probabilities.

    The first two arguments document which distribution the tails refer to;
    the probabilities depend only on ``kk``.
    """
    if kk <= 0:
        raise InputError("k must be positive")
    return 1.0 / kk ** 2, 1.0 / kk


def bauer_fike_check(eigs_a, lambda_b: float, norm_diff: float) -> bool:
    """True when some eigenvalue of ``A`` lies within ``norm_diff`` of ``lambda_b``."""
    eigs = np.asarray(eigs_a)
    return bool(np.min(np.abs(eigs - lambda_b)) <= norm_diff)


def enumerate_sign_patterns(n: int):
    """All ``2^n`` vectors in ``{-1, +1}^n``."""
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        yield np.array(signs)
