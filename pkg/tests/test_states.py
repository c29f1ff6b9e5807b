import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqht import DensityMatrix, Povm, StatePair, born_distribution, parse_state_pair, qubit_family, tensor_power
from sqht.errors import DimensionOverflowError, SchemaError, ValidationError
from sqht.states import encode_matrix, parse_povm, povm_to_dict, state_pair_to_json

from oracles import random_density


def _doc(rho0, rho1):
    return json.dumps({"dim": len(rho0), "rho0": encode_matrix(rho0), "rho1": encode_matrix(rho1)})


def test_trivial_povm_gives_one():
    rho = DensityMatrix(np.diag([0.6, 0.4]))
    assert np.allclose(born_distribution(rho, Povm.trivial(2)), [1.0])


def test_computational_readout():
    rho = DensityMatrix(np.diag([0.6, 0.4]))
    assert np.allclose(born_distribution(rho, Povm.computational(2)), [0.6, 0.4])


def test_qubit_born_closed_form(qubit_pair):
    p = born_distribution(qubit_pair.rho0, Povm.computational(2))
    c, s = np.cos(1.57 / 4) ** 2, np.sin(1.57 / 4) ** 2
    assert np.allclose(p, [0.98 * c + 0.01, 0.98 * s + 0.01], atol=1e-12)


def test_tensor_power():
    rho = DensityMatrix(np.diag([0.6, 0.4]))
    assert np.allclose(tensor_power(rho, 1).matrix, rho.matrix)
    assert np.allclose(tensor_power(rho, 2).matrix, np.diag([0.36, 0.24, 0.24, 0.16]))
    with pytest.raises(DimensionOverflowError):
        tensor_power(qubit_family(0.98, 0.98, 1.57).rho0, 7)


def test_qubit_family_examples():
    pair = qubit_family(0, 0, 0.7)
    assert np.allclose(pair.rho0.matrix, np.eye(2) / 2)
    assert np.allclose(pair.rho1.matrix, np.eye(2) / 2)
    pair = qubit_family(0.5, 0.5, 0)
    assert np.allclose(pair.rho0.matrix, np.diag([0.75, 0.25]))
    assert np.allclose(pair.rho1.matrix, pair.rho0.matrix)


def test_qubit_family_rejects_range():
    with pytest.raises(ValidationError):
        qubit_family(1.2, 0.5, 1.0)


def test_parse_round_trip(qubit_pair):
    back = parse_state_pair(state_pair_to_json(qubit_pair))
    assert np.allclose(back.rho0.matrix, qubit_pair.rho0.matrix)
    assert np.allclose(back.rho1.matrix, qubit_pair.rho1.matrix)


def test_parse_family_block(qubit_pair):
    doc = json.dumps({"family": {"type": "qubit", "r0": 0.98, "r1": 0.98, "theta": 1.57}})
    assert np.allclose(parse_state_pair(doc).rho1.matrix, qubit_pair.rho1.matrix)


def test_parse_trace_violation():
    with pytest.raises(ValidationError) as exc:
        parse_state_pair(_doc(np.diag([0.5, 0.4]), np.diag([0.5, 0.5])))
    assert exc.value.invariant == "trace"


def test_parse_rank_deficient():
    with pytest.raises(ValidationError) as exc:
        parse_state_pair(_doc(np.diag([0.5, 0.5]), np.diag([1.0, 0.0])))
    assert exc.value.invariant == "full support"


def test_parse_schema_errors():
    with pytest.raises(SchemaError):
        parse_state_pair("[1, 2]")
    with pytest.raises(SchemaError):
        parse_state_pair(json.dumps({"dim": 2, "rho0": [[1, 0], [0, 1]], "rho1": []}))


def test_povm_validation():
    with pytest.raises(ValidationError) as exc:
        Povm([np.diag([1, 0]), np.diag([0, 0.9])])
    assert exc.value.invariant == "completeness"
    with pytest.raises(ValidationError):
        Povm([np.diag([1.5, 0]), np.diag([-0.5, 1])])


def test_povm_file_round_trip():
    m = Povm.computational(3).relabel("x")
    back = parse_povm(json.dumps(povm_to_dict(m)))
    assert back.outcomes == m.outcomes
    assert np.allclose(back.elements, m.elements)


def test_relabel_makes_disjoint_union():
    a = Povm.computational(2).relabel("a")
    b = Povm.computational(2).relabel("b")
    assert not set(a.outcomes) & set(b.outcomes)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4))
def test_born_is_distribution(seed, d):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(random_density(rng, d))
    z = rng.standard_normal((d * d, d)) + 1j * rng.standard_normal((d * d, d))
    k, _ = np.linalg.qr(z)
    p = born_distribution(rho, Povm.from_isometry(k))
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_tensor_pair_is_state(seed):
    rng = np.random.default_rng(seed)
    pair = StatePair(DensityMatrix(random_density(rng, 2)), DensityMatrix(random_density(rng, 2)))
    big = pair.tensor_power(3)
    assert big.dim == 8
    assert abs(np.trace(big.rho0.matrix).real - 1) < 1e-12
