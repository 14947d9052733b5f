"""Gaussian-window phase estimation, simulated exactly.

Phases are in cycles throughout: frequency bin ``k`` of a ``2^q`` register
maps to the phase ``k / 2^q`` in ``[-1/2, 1/2)``. The DFT is unitary,
``X[k] = 2^(-q/2) sum_x w[x] exp(-2 pi i k x / 2^q)``, with signed indices
on both sides. Converting a phase to an energy is left to the caller.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError
from .trotter import unitary_eigenphases


@dataclass(frozen=True)
class GaussianWindowSpec:
    m: int
    q: int
    sigma: float
    T: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise InputError("window needs at least one qubit")
        if self.q < self.m:
            raise InputError(f"padded register q={self.q} is smaller than the window m={self.m}")
        if not (self.sigma > 0 and self.T > 0):
            raise InputError("sigma and T must be positive")

    @property
    def F(self) -> float:
        return 1.0 / (2 ** self.q * self.T)

    @property
    def sigma_f(self) -> float:
        return 1.0 / (4.0 * math.pi * self.sigma)

    @property
    def width_ratio(self) -> float:
        return self.sigma / self.T

    @property
    def in_regime(self) -> bool:
        """Whether ``sigma/T`` lies within a factor 10 of ``sqrt(2^m)``."""
        root = math.sqrt(2 ** self.m)
        return 0.1 * root <= self.width_ratio <= 10 * root

    @property
    def phase_std(self) -> float:
        """Standard deviation of the ideal phase distribution, in cycles."""
        return self.sigma_f * self.T

    def as_dict(self) -> dict:
        return asdict(self)


def _signed_indices(bits: int) -> np.ndarray:
    half = 2 ** (bits - 1)
    return np.arange(-half, half)


def _gauss_density(x, sigma: float) -> np.ndarray:
    return np.exp(-np.square(x) / (2 * sigma * sigma)) / (math.sqrt(2 * math.pi) * sigma)


def window_normalization(sigma: float, T: float, m: int) -> float:
    """``N(sigma, T, m) = sum_{|x| <= 2^(m-1) - 1} p(x T; sigma)``."""
    top = 2 ** (m - 1) - 1
    x = np.arange(-top, top + 1)
    return float(np.sum(_gauss_density(x * T, sigma)))


@dataclass(frozen=True)
class WindowState:
    m: int
    x: np.ndarray
    amplitudes: np.ndarray
    normalization: float


def make_window(m: int, sigma: float, T: float = 1.0) -> WindowState:
    """Truncated discrete Gaussian on ``x = -(2^(m-1) - 1) .. 2^(m-1) - 1``.

    The register also holds ``x = -2^(m-1)``; that slot stays at amplitude
    zero so the window is symmetric. ``x`` and ``amplitudes`` cover the
    full register in signed order.
    """
    if m < 1:
        raise InputError("window needs at least one qubit")
    if not (sigma > 0 and T > 0):
        raise InputError("sigma and T must be positive")
    x = _signed_indices(m) if m > 1 else np.array([0])
    norm = window_normalization(sigma, T, m)
    amps = np.sqrt(_gauss_density(x * T, sigma) / norm)
    if m > 1:
        amps[0] = 0.0
    amps /= np.linalg.norm(amps)
    x.setflags(write=False)
    amps.setflags(write=False)
    return WindowState(m=m, x=x, amplitudes=amps, normalization=norm)


def _padded_dft(signal: np.ndarray, x: np.ndarray, q: int) -> np.ndarray:
    """Place ``signal[x]`` at register positions ``x mod 2^q`` and apply the unitary DFT.

    Returns rows ordered by signed frequency ``k = -2^(q-1) .. 2^(q-1) - 1``.
    Extra axes of ``signal`` after the first are carried along.
    """
    size = 2 ** q
    reg = np.zeros((size,) + signal.shape[1:], dtype=complex)
    reg[np.mod(x, size)] = signal
    spec = np.fft.fft(reg, axis=0, norm="ortho")
    return np.fft.fftshift(spec, axes=0)


def upsample(window: WindowState, q: int) -> np.ndarray:
    """Zero-pad the window into ``2^q`` slots and return its DFT over signed frequencies."""
    if q < window.m:
        raise InputError(f"padded register q={q} is smaller than the window m={window.m}")
    return _padded_dft(window.amplitudes, window.x, q)


def analytic_samples(spec: GaussianWindowSpec) -> np.ndarray:
    """``sqrt(p(k F; sigma_f) / N(sigma_f, F, q))`` over signed frequencies ``k``."""
    k = _signed_indices(spec.q)
    dens = _gauss_density(k * spec.F, spec.sigma_f)
    return np.sqrt(dens / dens.sum())


@dataclass(frozen=True)
class WindowErrorBudget:
    trunc: float
    alias: float
    renorm: float

    @property
    def total(self) -> float:
        return self.trunc + self.alias + self.renorm


def window_error_budget(spec: GaussianWindowSpec) -> WindowErrorBudget:
    """Truncation, aliasing and renormalization budgets for the upsampled window."""
    m, q, sigma, T = spec.m, spec.q, spec.sigma, spec.T
    ratio = sigma / T
    top = 2 ** (m - 1) - 1
    n_time = window_normalization(sigma, T, m)
    n_freq = window_normalization(spec.sigma_f, spec.F, q)
    root_sig_t = math.sqrt(sigma) / T
    dim_factor = 2 ** (q / 2) * math.sqrt(n_time)
    trunc_exp = math.exp(-((T * top) / (2 * sigma)) ** 2)
    alias_exp = math.exp(-(math.pi * ratio) ** 2)
    trunc = 2 ** 0.75 * math.pi ** 0.25 * root_sig_t * trunc_exp / dim_factor
    alias = 4 * math.pi ** 0.25 * 2 ** 0.75 * root_sig_t * alias_exp / dim_factor
    renorm = (
        4 * ratio
        * math.sqrt(2 * math.pi / (2 ** q * T * n_time * spec.F * n_freq))
        * max(4 * alias_exp, math.exp(-(top / (2 * ratio)) ** 2))
    )
    return WindowErrorBudget(trunc=trunc, alias=alias, renorm=renorm)


def measured_window_error(spec: GaussianWindowSpec) -> float:
    """``||upsample - analytic samples||_2`` for the given spec."""
    window = make_window(spec.m, spec.sigma, spec.T)
    return float(np.linalg.norm(upsample(window, spec.q) - analytic_samples(spec)))


@dataclass(frozen=True)
class PhaseDistribution:
    probs: np.ndarray
    bin_phase: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.probs @ self.bin_phase)

    @property
    def std(self) -> float:
        mu = self.mean
        return float(math.sqrt(max(self.probs @ (self.bin_phase - mu) ** 2, 0.0)))

    def circular_mean(self) -> float:
        """Mean phase on the unit circle, in cycles in ``[-1/2, 1/2)``."""
        z = self.probs @ np.exp(2j * np.pi * self.bin_phase)
        ph = float(np.angle(z) / (2 * np.pi))
        return ph - 1.0 if ph >= 0.5 else ph


def gqpe_distribution(U: np.ndarray, psi: np.ndarray, spec: GaussianWindowSpec) -> PhaseDistribution:
    """Output distribution of windowed phase estimation on ``U`` with input ``psi``.

    The joint state ``sum_x w[x] |x> U^x |psi>`` is built explicitly, padded
    to ``2^q`` ancilla slots and Fourier transformed on the ancilla axis; the
    probability of bin ``k`` marginalizes over the system.
    """
    U = np.asarray(U, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InputError("U must be square")
    if psi.shape != (U.shape[0],):
        raise InputError(f"state of shape {psi.shape} does not match U of dimension {U.shape[0]}")
    if np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])) > 1e-10:
        raise InputError("U is not unitary")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise InputError("psi is not normalized")
    window = make_window(spec.m, spec.sigma, spec.T)
    theta, z = unitary_eigenphases(U)
    coeffs = z.conj().T @ psi
    # row x holds the eigenbasis components of U^x |psi>, scaled by w[x]
    joint = window.amplitudes[:, None] * np.exp(1j * np.outer(window.x, theta)) * coeffs[None, :]
    spectrum = _padded_dft(joint, window.x, spec.q)
    probs = np.sum(np.abs(spectrum) ** 2, axis=1)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    phase = _signed_indices(spec.q) / 2 ** spec.q
    probs.setflags(write=False)
    phase.setflags(write=False)
    return PhaseDistribution(probs=probs, bin_phase=phase)


def phase_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def sample_phases(dist: PhaseDistribution, shots: int, seed: int, stream: int = 0) -> np.ndarray:
    if shots < 1:
        raise InputError("shots must be >= 1")
    rng = phase_rng(seed, stream)
    idx = rng.choice(dist.probs.size, size=shots, p=dist.probs)
    return dist.bin_phase[idx]


@dataclass(frozen=True)
class VarianceAllocation:
    sigmas: np.ndarray
    excluded: np.ndarray

    @property
    def any_excluded(self) -> bool:
        return bool(self.excluded.any())


def allocate_node_variances(d0, nodes, sigma_P: float) -> VarianceAllocation:
    """Per-node standard deviations minimizing ``sum_k 1/(sigma_k |s_k|)``.

    Subject to ``2 sum_{k <= n/2} d0_k^2 sigma_k^2 = sigma_P^2``; the optimum is
    ``sigma_k = sigma_P / (sqrt 2 |d0_k|^(2/3) |s_k|^(1/3) S^(1/2))`` with
    ``S = sum_{k <= n/2} |d0_k|^(2/3) / |s_k|^(2/3)``. Mirror nodes share
    their partner's value. Nodes with zero weight need no precision and are
    flagged with ``sigma = inf``.
    """
    d0 = np.asarray(d0, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    n = d0.size
    if n % 2 or n < 2 or nodes.shape != d0.shape:
        raise InputError("need an even number of weights matching the nodes")
    if not sigma_P > 0:
        raise InputError("sigma_P must be positive")
    half = n // 2
    c = np.abs(d0[:half])
    cos = np.abs(nodes[:half])
    excluded = c == 0.0
    if excluded.all():
        raise InputError("all weights are zero")
    active = ~excluded
    S = float(np.sum(c[active] ** (2 / 3) / cos[active] ** (2 / 3)))
    sig = np.full(half, np.inf)
    sig[active] = sigma_P / (math.sqrt(2.0) * c[active] ** (2 / 3) * cos[active] ** (1 / 3) * math.sqrt(S))
    full = np.concatenate([sig, sig[::-1]])
    flags = np.concatenate([excluded, excluded[::-1]])
    return VarianceAllocation(sigmas=full, excluded=flags)


def allocation_cost(sigmas, nodes) -> float:
    """``L0 = sum_{k <= n/2} 1 / (sigma_k |s_k|)``."""
    sig = np.asarray(sigmas, dtype=float)
    nd = np.asarray(nodes, dtype=float)
    half = sig.size // 2
    return float(np.sum(1.0 / (sig[:half] * np.abs(nd[:half]))))


def distribution_csv(dist: PhaseDistribution, spec: GaussianWindowSpec) -> str:
    """CSV text with a ``# {spec json}`` header line and columns ``bin, phase_cycles, prob``."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(spec.as_dict(), sort_keys=True) + "\r\n")
    buf.write("bin,phase_cycles,prob\r\n")
    bins = _signed_indices(spec.q)
    for b, ph, p in zip(bins, dist.bin_phase, dist.probs):
        buf.write(f"{int(b)},{float(ph)!r},{float(p)!r}\r\n")
    return buf.getvalue()
