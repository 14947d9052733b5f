import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebtrot.errors import CapabilityError, InputError
from chebtrot.operators import (
    HamiltonianModel,
    HermitianTerm,
    build_pauli_term,
    build_tfim,
    eig_herm,
    load_model,
    model_from_dict,
    sum_matrix,
)


def test_single_z():
    assert np.array_equal(build_pauli_term(1.0, "Z").matrix, np.diag([1, -1]))


def test_zz_is_diagonal():
    assert np.array_equal(build_pauli_term(-1.0, "ZZ").matrix, np.diag([-1, 1, 1, -1]))


def test_xi_kron_layout():
    m = build_pauli_term(0.5, "XI").matrix
    expected = np.zeros((4, 4))
    for i, j in [(0, 2), (2, 0), (1, 3), (3, 1)]:
        expected[i, j] = 0.5
    assert np.array_equal(m, expected)


def test_invalid_pauli_character():
    with pytest.raises(InputError):
        build_pauli_term(1.0, "XQ")
    with pytest.raises(InputError):
        build_pauli_term(1.0, "")
    with pytest.raises(InputError):
        build_pauli_term(float("nan"), "X")


def test_non_hermitian_term_rejected():
    with pytest.raises(InputError):
        HermitianTerm("bad", np.array([[0, 1], [0, 0]]))


def test_dense_limit():
    with pytest.raises(CapabilityError):
        build_pauli_term(1.0, "I" * 13)


def test_matrices_are_read_only():
    term = build_pauli_term(1.0, "X")
    with pytest.raises(ValueError):
        term.matrix[0, 0] = 5


def test_tfim_two_spins_ground_energy():
    model = build_tfim(2, 1, 1)
    assert model.m == 3
    assert [t.label for t in model.terms] == ["ZZ[0,1]", "X[0]", "X[1]"]
    assert eig_herm(sum_matrix(model)).ground_energy == pytest.approx(-math.sqrt(5), abs=1e-12)


def test_tfim_zero_field():
    h = sum_matrix(build_tfim(2, 1, 0))
    assert np.allclose(h, np.diag([-1, 1, 1, -1]))
    assert eig_herm(h).ground_energy == pytest.approx(-1.0)


def test_tfim_three_spins():
    model = build_tfim(3, 1, 0.5)
    assert model.m == 5
    assert model.hmax == 1.0
    assert model.num_qubits == 3


def test_tfim_needs_two_spins():
    with pytest.raises(InputError):
        build_tfim(1, 1, 1)


def test_tfim_sum_matrix_entries():
    h = sum_matrix(build_tfim(2, 1, 1))
    expected = np.array(
        [[-1, -1, -1, 0], [-1, 1, 0, -1], [-1, 0, 1, -1], [0, -1, -1, -1]], dtype=complex
    )
    assert np.array_equal(h, expected)


def test_zero_coefficient_model():
    model = HamiltonianModel((build_pauli_term(0.0, "XZ"), build_pauli_term(0.0, "ZZ")))
    assert np.array_equal(sum_matrix(model), np.zeros((4, 4)))


def test_mismatched_dimensions():
    with pytest.raises(InputError):
        HamiltonianModel((build_pauli_term(1.0, "X"), build_pauli_term(1.0, "XX")))
    with pytest.raises(InputError):
        HamiltonianModel(())


def test_eig_small_cases():
    d = eig_herm(np.diag([1.0, -1.0]))
    assert np.allclose(d.eigenvalues, [-1, 1])
    assert d.gap == 2.0
    d = eig_herm(np.eye(4))
    assert np.allclose(d.eigenvalues, 1.0)
    assert d.gap == 0.0


def test_eig_tfim_spectrum():
    w = eig_herm(sum_matrix(build_tfim(2, 1, 1))).eigenvalues
    r5 = math.sqrt(5)
    assert np.allclose(w, [-r5, -1, 1, r5], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(InputError):
        eig_herm(np.array([[0, 1], [2, 0]]))


def test_model_file_roundtrip(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"num_qubits": 2, "terms": [{"coeff": -1, "pauli": "ZZ"}, {"coeff": 0.5, "pauli": "XI"}]}))
    model = load_model(path)
    assert model.m == 2
    assert np.allclose(sum_matrix(model), -np.diag([1, -1, -1, 1]) + build_pauli_term(0.5, "XI").matrix)


def test_model_file_length_check():
    with pytest.raises(InputError):
        model_from_dict({"num_qubits": 2, "terms": [{"coeff": 1, "pauli": "Z"}]})
    with pytest.raises(InputError):
        model_from_dict({"terms": []})


pauli_strings = st.text(alphabet="IXYZ", min_size=1, max_size=5)
coeffs = st.floats(min_value=-10, max_value=10, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(coeffs, pauli_strings)
def test_pauli_norm_is_abs_coeff(c, s):
    term = build_pauli_term(c, s)
    assert term.norm == abs(c)
    assert np.linalg.norm(term.matrix, 2) == pytest.approx(abs(c), rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(coeffs, st.text(alphabet="IXYZ", min_size=3, max_size=3)), min_size=1, max_size=4))
def test_reconstruction(terms):
    model = HamiltonianModel(tuple(build_pauli_term(c, s) for c, s in terms))
    h = sum_matrix(model)
    d = eig_herm(h)
    err = np.linalg.norm(h - d.reconstruct())
    assert err <= 1e-10 * max(1.0, np.linalg.norm(h, 2))
    assert np.all(np.diff(d.eigenvalues) >= 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3), st.floats(0, 3))
def test_eigenvalues_match_characteristic_polynomial(J, g):
    h = sum_matrix(build_tfim(2, J, g))
    roots = np.sort(np.real(np.roots(np.poly(h))))
    assert np.allclose(eig_herm(h).eigenvalues, roots, atol=1e-6 * max(1.0, J * (1 + g)))
