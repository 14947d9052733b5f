"""Symmetric Suzuki-Trotter product formulas and their effective Hamiltonians.

A scheme is a flat list of stages ``(term_index, fraction)`` in application
order; stage ``(j, f)`` contributes the factor ``exp(-i H_j f t)``. Term
indices are zero-based.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import schur

from .errors import BranchCutError, InputError
from .operators import HamiltonianModel

BRANCH_MARGIN = 1e-6


class ConvergenceDomainWarning(UserWarning):
    """Step size lies outside the region where the derivative bounds apply."""


def suzuki_coefficient(k: int) -> float:
    """``u_k = 1 / (4 - 4^(1/(2k-1)))`` for the order-``2k`` recursion."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


@dataclass(frozen=True)
class TrotterScheme:
    order: int
    m: int
    stages: tuple[tuple[int, float], ...]

    @property
    def k(self) -> int:
        return self.order // 2

    @property
    def unmerged_stage_count(self) -> int:
        """Exponentials per step before merging, ``2 m 5^(k-1)``."""
        return 2 * self.m * 5 ** (self.k - 1)

    @property
    def stage_count(self) -> int:
        return len(self.stages)

    def fraction_sums(self) -> np.ndarray:
        sums = np.zeros(self.m)
        for j, f in self.stages:
            sums[j] += f
        return sums


def _raw_stages(order: int, m: int, scale: float) -> list[tuple[int, float]]:
    if order == 2:
        half = [(j, 0.5 * scale) for j in range(m)]
        return half + half[::-1]
    k = order // 2
    u = suzuki_coefficient(k)
    outer = _raw_stages(order - 2, m, u * scale)
    inner = _raw_stages(order - 2, m, (1.0 - 4.0 * u) * scale)
    return outer + outer + inner + outer + outer


def _merge(stages: list[tuple[int, float]]) -> list[tuple[int, float]]:
    merged: list[tuple[int, float]] = []
    for j, f in stages:
        if merged and merged[-1][0] == j:
            merged[-1] = (j, merged[-1][1] + f)
        else:
            merged.append((j, f))
    return merged


@lru_cache(maxsize=64)
def st_scheme(order: int, m: int, merge: bool = True) -> TrotterScheme:
    """Build the order-``order`` symmetric Suzuki-Trotter scheme on ``m`` terms."""
    if order < 2 or order % 2:
        raise InputError(f"order must be a positive even integer, got {order}")
    if m < 1:
        raise InputError(f"need at least one term, got m={m}")
    stages = _raw_stages(order, m, 1.0)
    if merge:
        stages = _merge(stages)
    return TrotterScheme(order=order, m=m, stages=tuple(stages))


def _term_eigs(model: HamiltonianModel) -> list[tuple[np.ndarray, np.ndarray]]:
    return [np.linalg.eigh(term.matrix) for term in model.terms]


def apply_scheme(model: HamiltonianModel, scheme: TrotterScheme, t: float, _eigs=None) -> np.ndarray:
    """Dense unitary ``S_2k(t)``: the ordered product of the stage exponentials."""
    if scheme.m != model.m:
        raise InputError(f"scheme built for {scheme.m} terms, model has {model.m}")
    eigs = _eigs if _eigs is not None else _term_eigs(model)
    u = np.eye(model.dim, dtype=complex)
    for j, f in scheme.stages:
        w, v = eigs[j]
        # later stages multiply from the left
        u = (v * np.exp(-1j * w * (f * t))) @ (v.conj().T @ u)
    return u


def unitary_eigenphases(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in ``(-pi, pi]`` and a unitary eigenbasis of a unitary matrix.

    Uses the complex Schur form, which stays orthonormal for degenerate
    spectra where a plain ``eig`` would not.
    """
    tri, z = schur(np.asarray(u, dtype=complex), output="complex")
    theta = np.angle(np.diag(tri))
    theta = np.where(theta <= -np.pi, theta + 2 * np.pi, theta)
    return theta, z


def principal_power(u: np.ndarray, power: float) -> np.ndarray:
    """``u ** power`` on the principal eigenphase branch."""
    theta, z = unitary_eigenphases(u)
    return (z * np.exp(1j * power * theta)) @ z.conj().T


def convergence_parameter(model: HamiltonianModel, order: int, s: float, t: float) -> float:
    """Left side of the step-size condition ``k (5/3)^k m max||H_l|| |s| t``."""
    k = order // 2
    return k * (5.0 / 3.0) ** k * model.m * model.hmax * abs(s) * t


def within_convergence_domain(model: HamiltonianModel, order: int, s: float, t: float) -> bool:
    return convergence_parameter(model, order, s, t) <= math.pi / 20


def evolve_fractional(model: HamiltonianModel, scheme: TrotterScheme, t: float, s: float) -> np.ndarray:
    """``S_2k(s t) ** (1/s)``, with the non-integer power taken on the principal branch."""
    if not 0.0 < s <= 1.0:
        raise InputError(f"step parameter must lie in (0, 1], got {s}")
    if not within_convergence_domain(model, scheme.order, s, t):
        warnings.warn(
            f"s={s:g}, t={t:g} is outside the derivative-bound domain",
            ConvergenceDomainWarning,
            stacklevel=2,
        )
    step = apply_scheme(model, scheme, s * t)
    inv = 1.0 / s
    r = round(inv)
    if abs(inv - r) < 1e-12:
        return np.linalg.matrix_power(step, r)
    return principal_power(step, inv)


def integer_step_count(s_k: float, s_1: float) -> int:
    """Signed integer repetition count ``sign(s_k) * ceil(s_1 / |s_k|)``."""
    if s_k == 0:
        raise InputError("node s_k = 0 has no finite step count")
    if s_1 <= 0:
        raise InputError("s_1 must be positive")
    ratio = s_1 / abs(s_k)
    # guard against ceil(1.0000000000000002) = 2
    n = math.ceil(ratio - 1e-12)
    return int(math.copysign(n, s_k))


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray
    s: float
    t: float
    order: int
    phases: np.ndarray
    basis: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.sort(-self.phases / (self.s * self.t))

    def evolution(self, t: float | None = None) -> np.ndarray:
        """``exp(-i H_eff t)``; defaults to the construction time."""
        t = self.t if t is None else t
        energies = -self.phases / (self.s * self.t)
        z = self.basis
        return (z * np.exp(-1j * energies * t)) @ z.conj().T


def effective_hamiltonian_from_step(step: np.ndarray, step_time: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hermitian generator ``H`` with ``exp(-i H step_time) = step`` (principal log)."""
    theta, z = unitary_eigenphases(step)
    worst = float(np.max(np.abs(theta)))
    if worst >= np.pi - BRANCH_MARGIN:
        raise BranchCutError(
            f"eigenphase {worst:.6f} is within {BRANCH_MARGIN:g} of the branch cut; use a smaller step"
        )
    energies = -theta / step_time
    h = (z * energies) @ z.conj().T
    h = 0.5 * (h + h.conj().T)
    return h, theta, z


def effective_hamiltonian(model: HamiltonianModel, scheme: TrotterScheme, t: float, s: float) -> EffectiveHamiltonian:
    """``(i / (s t)) log S_2k(s t)`` from the eigenphases of the step unitary."""
    if s == 0 or t == 0:
        raise InputError("effective Hamiltonian needs s != 0 and t != 0")
    step = apply_scheme(model, scheme, s * t)
    h, theta, z = effective_hamiltonian_from_step(step, s * t)
    return EffectiveHamiltonian(matrix=h, s=s, t=t, order=scheme.order, phases=theta, basis=z)
