"""Validated quantum states, measurements and their JSON file formats."""

import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatchError,
    NotFullSupportError,
    OutOfRangeError,
    SchemaError,
    ValidationError,
)

TRACE_TOL = 1e-10
PSD_TOL = 1e-12
FULL_SUPPORT_TOL = 1e-9
COMPLETENESS_TOL = 1e-9
PROB_CLIP_TOL = 1e-12


class DensityMatrix:
    """A d x d Hermitian, positive semidefinite, unit-trace matrix.

    Construction validates the matrix; the stored array is a read-only copy.
    """

    __slots__ = ("matrix", "eigenvalues", "min_eigenvalue")

    def __init__(self, matrix):
        a = linalg.symmetrize(matrix)
        tr = np.trace(a).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError("trace", f"trace is {tr:.12g}, expected 1")
        w = np.linalg.eigvalsh(a)
        if w[0] < -PSD_TOL:
            raise ValidationError("positive semidefinite", f"eigenvalue {w[0]:.3e}")
        a.setflags(write=False)
        w.setflags(write=False)
        self.matrix = a
        self.eigenvalues = w
        self.min_eigenvalue = float(w[0])

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def full_support(self):
        return self.min_eigenvalue > FULL_SUPPORT_TOL

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, min_eigenvalue={self.min_eigenvalue:.3g})"

    @classmethod
    def from_vector(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, d):
        return cls(np.eye(d) / d)


class Povm:
    """Finite outcome-labelled measurement: PSD elements summing to the identity."""

    __slots__ = ("outcomes", "elements")

    def __init__(self, elements, outcomes=None):
        mats = [linalg.symmetrize(e) for e in elements]
        if not mats:
            raise ValidationError("nonempty", "a POVM needs at least one element")
        d = mats[0].shape[0]
        if any(m.shape != (d, d) for m in mats):
            raise DimensionMismatchError("POVM elements differ in shape")
        for i, m in enumerate(mats):
            lo = np.linalg.eigvalsh(m)[0]
            if lo < -linalg.HERMITIAN_TOL:
                raise ValidationError("positive semidefinite", f"element {i} eigenvalue {lo:.3e}")
        defect = np.linalg.norm(sum(mats) - np.eye(d))
        if defect > COMPLETENESS_TOL:
            raise ValidationError("completeness", f"||sum m(x) - I||_F = {defect:.3e}")
        if outcomes is None:
            outcomes = [str(i) for i in range(len(mats))]
        outcomes = tuple(str(o) for o in outcomes)
        if len(outcomes) != len(mats):
            raise ValidationError("outcomes", "one label per element required")
        if len(set(outcomes)) != len(outcomes):
            raise ValidationError("outcomes", "labels must be distinct")
        stack = np.array(mats)
        stack.setflags(write=False)
        self.elements = stack
        self.outcomes = outcomes

    @property
    def dim(self):
        return self.elements.shape[1]

    def __len__(self):
        return len(self.outcomes)

    def __repr__(self):
        return f"Povm(dim={self.dim}, outcomes={len(self)})"

    def index(self, label):
        try:
            return self.outcomes.index(str(label))
        except ValueError:
            raise ValidationError("outcome", f"unknown outcome label {label!r}") from None

    @classmethod
    def from_basis(cls, basis, outcomes=None):
        """Rank-1 PVM from the columns of a unitary matrix."""
        u = np.asarray(basis, dtype=complex)
        return cls([np.outer(u[:, j], u[:, j].conj()) for j in range(u.shape[1])], outcomes)

    @classmethod
    def from_isometry(cls, k, outcomes=None):
        """Rank-1 POVM m(x) = k_x^H k_x from the rows k_x of an isometry (K^H K = I)."""
        k = np.asarray(k, dtype=complex)
        return cls([np.outer(row.conj(), row) for row in k], outcomes)

    @classmethod
    def computational(cls, d):
        return cls.from_basis(np.eye(d))

    @classmethod
    def trivial(cls, d):
        return cls([np.eye(d)])

    def relabel(self, prefix):
        """Copy with every label prefixed, used to build disjoint unions of outcome sets."""
        return Povm(self.elements, [f"{prefix}{o}" for o in self.outcomes])

    def tensor(self, other, cap=linalg.DEFAULT_DIM_CAP):
        els = [linalg.kron(a, b, cap) for a in self.elements for b in other.elements]
        labels = [f"{a},{b}" for a in self.outcomes for b in other.outcomes]
        return Povm(els, labels)


@dataclass(frozen=True)
class StatePair:
    rho0: DensityMatrix
    rho1: DensityMatrix
    label: str = ""

    def __post_init__(self):
        if self.rho0.dim != self.rho1.dim:
            raise DimensionMismatchError(f"rho0 is {self.rho0.dim}-dim, rho1 is {self.rho1.dim}-dim")
        for name, rho in (("rho0", self.rho0), ("rho1", self.rho1)):
            if not rho.full_support:
                raise NotFullSupportError(f"{name} min eigenvalue {rho.min_eigenvalue:.3e}")

    @property
    def dim(self):
        return self.rho0.dim

    def swapped(self):
        return StatePair(self.rho1, self.rho0, self.label)

    def commutes(self, tol=1e-12):
        return np.linalg.norm(linalg.commutator(self.rho0.matrix, self.rho1.matrix)) <= tol

    def tensor_power(self, l, cap=linalg.DEFAULT_DIM_CAP):
        label = f"{self.label}^{l}" if self.label else ""
        return StatePair(tensor_power(self.rho0, l, cap), tensor_power(self.rho1, l, cap), label)


def born_distribution(rho, m):
    """Outcome probabilities Tr[rho m(x)] in the POVM's declared outcome order."""
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if r.shape[0] != m.dim:
        raise DimensionMismatchError(f"state is {r.shape[0]}-dim, POVM is {m.dim}-dim")
    p = np.einsum("ij,xji->x", r, m.elements).real
    if np.any(p < -PROB_CLIP_TOL):
        raise ValidationError("probability", f"Born probability {p.min():.3e} < 0")
    p = np.clip(p, 0.0, 1.0)
    return p / p.sum()


def tensor_power(rho, l, cap=linalg.DEFAULT_DIM_CAP):
    if l < 1:
        raise OutOfRangeError(f"tensor power must be >= 1, got {l}")
    if rho.dim**l > cap:
        raise linalg.DimensionOverflowError(f"{rho.dim}^{l} exceeds cap {cap}")
    out = rho.matrix
    for _ in range(l - 1):
        out = linalg.kron(out, rho.matrix, cap)
    return DensityMatrix(out)


def qubit_family(r0, r1, theta, label=None):
    """Qubit pair rho_i = r_i |psi_i><psi_i| + (1 - r_i) I/2.

    |psi_i> = cos(theta/4)|0> + (-1)^i sin(theta/4)|1>, with r_i in [0, 1)
    and theta in [0, pi].
    """
    for name, r in (("r0", r0), ("r1", r1)):
        if not 0.0 <= r <= 1.0:
            raise OutOfRangeError(f"{name}={r} not in [0, 1]")
    if not 0.0 <= theta <= np.pi:
        raise OutOfRangeError(f"theta={theta} not in [0, pi]")
    states = []
    for i, r in enumerate((r0, r1)):
        psi = np.array([np.cos(theta / 4), (-1) ** i * np.sin(theta / 4)])
        states.append(DensityMatrix(r * np.outer(psi, psi) + (1 - r) * np.eye(2) / 2))
    if label is None:
        label = f"qubit(r0={r0:g},r1={r1:g},theta={theta:g})"
    return StatePair(states[0], states[1], label)


# JSON formats ---------------------------------------------------------------

def _decode_matrix(obj, dim, where):
    try:
        a = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: entries must be [re, im] number pairs") from exc
    if a.shape != (dim, dim, 2):
        raise SchemaError(f"{where}: expected shape ({dim}, {dim}, 2), got {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


def encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def parse_state_pair(document):
    """Build a :class:`StatePair` from the JSON text of a state-pair file."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise SchemaError("label must be a string")
    if "family" in doc:
        fam = doc["family"]
        if not isinstance(fam, dict) or fam.get("type") != "qubit":
            raise SchemaError("family.type must be 'qubit'")
        try:
            r0, r1, theta = (float(fam[k]) for k in ("r0", "r1", "theta"))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError("qubit family needs numeric r0, r1, theta") from exc
        return qubit_family(r0, r1, theta, label=label or None)
    for key in ("dim", "rho0", "rho1"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SchemaError("dim must be a positive integer")
    rho0 = DensityMatrix(_decode_matrix(doc["rho0"], dim, "rho0"))
    rho1 = DensityMatrix(_decode_matrix(doc["rho1"], dim, "rho1"))
    return StatePair(rho0, rho1, label)


def state_pair_to_json(pair):
    doc = {
        "dim": pair.dim,
        "rho0": encode_matrix(pair.rho0.matrix),
        "rho1": encode_matrix(pair.rho1.matrix),
    }
    if pair.label:
        doc["label"] = pair.label
    return json.dumps(doc)


def parse_povm(document):
    """POVM file: ``{"dim": d, "outcomes": [...], "elements": [d x d [re, im] matrices]}``."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "elements" not in doc or "dim" not in doc:
        raise SchemaError("POVM document needs 'dim' and 'elements'")
    dim = doc["dim"]
    els = [_decode_matrix(e, dim, f"elements[{i}]") for i, e in enumerate(doc["elements"])]
    return Povm(els, doc.get("outcomes"))


def povm_to_dict(m):
    return {
        "dim": m.dim,
        "outcomes": list(m.outcomes),
        "elements": [encode_matrix(e) for e in m.elements],
    }
