"""Dense Hermitian operators: Pauli strings, model builders and exact spectra.

Everything here is dense and exact. Matrices are complex ``numpy`` arrays and
are made read-only on construction so that terms and models can be shared
freely between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import CapabilityError, InputError

MAX_QUBITS = 12
HERMITIAN_ATOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def _check_square(matrix: np.ndarray) -> int:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"expected a square matrix, got shape {matrix.shape}")
    dim = matrix.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise InputError(f"matrix dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise CapabilityError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
    return n


@dataclass(frozen=True)
class HermitianTerm:
    """One labelled Hermitian summand ``H_j`` with its cached spectral norm."""

    label: str
    matrix: np.ndarray
    norm: float = field(default=float("nan"))

    def __post_init__(self):
        m = _frozen(self.matrix)
        _check_square(m)
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=HERMITIAN_ATOL):
            raise InputError(f"term {self.label!r} is not Hermitian")
        object.__setattr__(self, "matrix", m)
        if np.isnan(self.norm):
            norm = float(np.linalg.norm(m, 2)) if m.size else 0.0
            object.__setattr__(self, "norm", norm)

    @property
    def num_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1


@dataclass(frozen=True)
class HamiltonianModel:
    """An ordered decomposition ``H = sum_j H_j``.

    The order of ``terms`` is significant: product formulas exponentiate the
    terms in exactly this order.
    """

    terms: tuple[HermitianTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise InputError("a model needs at least one term")
        dims = {t.matrix.shape[0] for t in terms}
        if len(dims) != 1:
            raise InputError(f"terms have mismatched dimensions {sorted(dims)}")
        object.__setattr__(self, "terms", terms)

    @property
    def num_qubits(self) -> int:
        return self.terms[0].num_qubits

    @property
    def dim(self) -> int:
        return self.terms[0].matrix.shape[0]

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def hmax(self) -> float:
        return max(t.norm for t in self.terms)

    @property
    def norm_sum(self) -> float:
        """``sum_j ||H_j||``, the one-norm of the decomposition."""
        return float(sum(t.norm for t in self.terms))


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap: float

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.conj().T


def build_pauli_term(coeff: float, pauli_string: str, label: str | None = None) -> HermitianTerm:
    """Return ``coeff * P`` for a Pauli string such as ``"ZZ"`` or ``"XI"``.

    The leftmost character acts on the most significant qubit (``np.kron``
    order).
    """
    if not pauli_string:
        raise InputError("empty Pauli string")
    if not np.isfinite(coeff):
        raise InputError(f"non-finite coefficient {coeff!r}")
    bad = set(pauli_string) - set(PAULI)
    if bad:
        raise InputError(f"invalid Pauli characters {sorted(bad)} in {pauli_string!r}")
    if len(pauli_string) > MAX_QUBITS:
        raise CapabilityError(f"{len(pauli_string)} qubits exceeds the dense limit of {MAX_QUBITS}")
    mat = reduce(np.kron, (PAULI[c] for c in pauli_string))
    return HermitianTerm(
        label=label or f"{coeff:+g}*{pauli_string}",
        matrix=float(coeff) * mat,
        norm=abs(float(coeff)),
    )


def _site_string(num_spins: int, sites: dict[int, str]) -> str:
    return "".join(sites.get(i, "I") for i in range(num_spins))


def build_tfim(num_spins: int, J: float, g: float) -> HamiltonianModel:
    """Open-chain transverse-field Ising model ``-J (sum Z_i Z_{i+1} + g sum X_i)``.

    The decomposition lists every ``ZZ`` bond first and then every ``X`` site,
    one term each.
    """
    if num_spins < 2:
        raise InputError("the transverse-field Ising chain needs at least two spins")
    zz = [
        build_pauli_term(-J, _site_string(num_spins, {i: "Z", i + 1: "Z"}), label=f"ZZ[{i},{i + 1}]")
        for i in range(num_spins - 1)
    ]
    xs = [
        build_pauli_term(-J * g, _site_string(num_spins, {i: "X"}), label=f"X[{i}]")
        for i in range(num_spins)
    ]
    return HamiltonianModel(tuple(zz + xs))


def sum_matrix(model: HamiltonianModel) -> np.ndarray:
    """Dense matrix of ``H = sum_j H_j``."""
    total = np.zeros((model.dim, model.dim), dtype=complex)
    for term in model.terms:
        total += term.matrix
    return total


def eig_herm(matrix: np.ndarray, tol: float = 1e-10) -> SpectralDecomposition:
    """Exact eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"expected a square matrix, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=tol):
        raise InputError("matrix is not Hermitian")
    w, v = np.linalg.eigh(matrix)
    gap = float(np.min(np.diff(w))) if w.size > 1 else 0.0
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v, gap=max(gap, 0.0))


def model_from_dict(spec: dict) -> HamiltonianModel:
    """Build a model from ``{"num_qubits": n, "terms": [{"coeff": c, "pauli": "ZZ"}]}``."""
    try:
        n = int(spec["num_qubits"])
        raw_terms = spec["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model description: {exc}") from None
    terms = []
    for i, t in enumerate(raw_terms):
        pauli = str(t.get("pauli", ""))
        if len(pauli) != n:
            raise InputError(f"term {i}: Pauli string {pauli!r} has length {len(pauli)}, expected {n}")
        terms.append(build_pauli_term(float(t["coeff"]), pauli, label=t.get("label")))
    return HamiltonianModel(tuple(terms))


def load_model(path: str | Path) -> HamiltonianModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
