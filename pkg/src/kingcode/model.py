"""Entangled initial states, king's measurements, Kraus errors and index sets.

Indices of error operators (``k``), measurement families (``J``) and outcomes
(``i``) are 1-based throughout, so the index-set table of the qubit example
can be written down verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, KingcodeError
from .numerics import (
    DEFAULT_TOL,
    StateVector,
    Tolerance,
    as_matrix,
    decode_matrix,
    encode_matrix,
    psd_defect,
)

__all__ = [
    "SchmidtState",
    "MeasurementFamily",
    "ErrorModel",
    "IndexSets",
    "born",
    "embed_on_slot",
    "standard_qubit_measurements",
    "example_error_model",
    "example_index_sets",
    "random_schmidt_state",
]


def _column_basis(basis, d: int | None, name: str) -> np.ndarray:
    if isinstance(basis, np.ndarray):
        mat = as_matrix(basis, name)
    else:
        mat = np.stack([np.asarray(b, dtype=complex).reshape(-1) for b in basis], axis=1)
    if d is not None and mat.shape[1] != d:
        raise DimensionError(f"{name} has {mat.shape[1]} vectors, expected {d}")
    return mat


def _check_orthonormal(mat: np.ndarray, name: str, tol: Tolerance):
    dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[1])), initial=0.0)
    if dev > tol.eps_eq:
        raise KingcodeError(f"{name} is not orthonormal (max deviation {dev:.3e})")


class SchmidtState:
    """``sum_j eta_j |psi_j> (x) |phi_j>`` with strictly positive coefficients.

    Parameters
    ----------
    eta : sequence of float
        Schmidt coefficients; all positive with unit sum of squares.
    basis_a, basis_k : array_like or list of kets, optional
        Orthonormal bases of Alice's and the king's system, as columns or a
        list of kets. Both default to the computational basis.
    """

    def __init__(self, eta, basis_a=None, basis_k=None, tol: Tolerance = DEFAULT_TOL):
        eta = np.asarray(eta, dtype=float).reshape(-1)
        d = eta.size
        if d < 1:
            raise KingcodeError("eta must be nonempty")
        if np.any(eta <= tol.eps_eq):
            raise KingcodeError(f"all Schmidt coefficients must be positive, got {eta}")
        if abs(float(np.sum(eta**2)) - 1.0) > tol.eps_eq:
            raise KingcodeError(f"sum of eta_j^2 must be 1, got {np.sum(eta**2)!r}")
        self.eta = eta
        self.basis_a = np.eye(d, dtype=complex) if basis_a is None else _column_basis(basis_a, d, "basis_a")
        self.basis_k = np.eye(d, dtype=complex) if basis_k is None else _column_basis(basis_k, d, "basis_k")
        if self.basis_a.shape[0] != d or self.basis_k.shape[0] != d:
            raise DimensionError("Schmidt bases must live in a space of dimension len(eta)")
        _check_orthonormal(self.basis_a, "basis_a", tol)
        _check_orthonormal(self.basis_k, "basis_k", tol)
        for arr in (self.eta, self.basis_a, self.basis_k):
            arr.setflags(write=False)

    @classmethod
    def maximally_entangled(cls, d: int) -> "SchmidtState":
        return cls(np.full(d, 1 / math.sqrt(d)))

    @property
    def d(self) -> int:
        return self.eta.size

    @property
    def alpha(self) -> float:
        """Scale of the derived error operators: ``min_j eta_j**2``."""
        return float(np.min(self.eta) ** 2)

    def vector(self) -> StateVector:
        amps = np.einsum("j,aj,bj->ab", self.eta, self.basis_a, self.basis_k).reshape(-1)
        return StateVector(amps, (self.d, self.d))

    def __repr__(self):
        return f"SchmidtState(eta={self.eta.tolist()})"


@dataclass(frozen=True, eq=False)
class MeasurementFamily:
    """Measurement operators ``(M_1, ..., M_m)`` of one king's measurement ``J``."""

    label: int
    ops: tuple
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        ops = tuple(as_matrix(m, f"M^({self.label})") for m in self.ops)
        if not ops:
            raise KingcodeError("a measurement family needs at least one operator")
        dim = ops[0].shape[0]
        if any(m.shape != (dim, dim) for m in ops):
            raise DimensionError("measurement operators must be square and of equal size")
        for m in ops:
            m.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        if self.check:
            total = sum(m.conj().T @ m for m in ops)
            dev = np.linalg.norm(total - np.eye(dim))
            if dev > DEFAULT_TOL.eps_eq:
                raise KingcodeError(
                    f"measurement family {self.label} is not complete (|sum M^dag M - I| = {dev:.3e})"
                )

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def to_json(self) -> dict:
        return {"J": self.label, "ops": [encode_matrix(m) for m in self.ops]}

    @classmethod
    def from_json(cls, obj: Mapping, check: bool = True) -> "MeasurementFamily":
        return cls(int(obj["J"]), tuple(decode_matrix(m) for m in obj["ops"]), check=check)


@dataclass(frozen=True, eq=False)
class ErrorModel:
    """Kraus operators ``(L_1, ..., L_l)`` of a trace non-increasing map."""

    kraus: tuple

    def __post_init__(self):
        ops = tuple(as_matrix(m, "Kraus operator") for m in self.kraus)
        if not ops:
            raise KingcodeError("an error model needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(m.shape != (dim, dim) for m in ops):
            raise DimensionError("Kraus operators must be square and of equal size")
        for m in ops:
            m.setflags(write=False)
        object.__setattr__(self, "kraus", ops)
        defect = psd_defect(np.eye(dim) - self.completeness())
        if defect > DEFAULT_TOL.eps_psd:
            raise KingcodeError(f"error model increases trace (PSD defect {defect:.3e})")

    def __len__(self):
        return len(self.kraus)

    def __getitem__(self, k: int) -> np.ndarray:
        """1-based access: ``model[1]`` is the first operator."""
        if not 1 <= k <= len(self.kraus):
            raise IndexError(f"error index {k} out of range 1..{len(self.kraus)}")
        return self.kraus[k - 1]

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def completeness(self) -> np.ndarray:
        return sum(m.conj().T @ m for m in self.kraus)

    def to_json(self) -> dict:
        return {"kraus": [encode_matrix(m) for m in self.kraus]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "ErrorModel":
        return cls(tuple(decode_matrix(m) for m in obj["kraus"]))


class IndexSets:
    """Disjoint error supports ``X^(J,i)`` and expansion coefficients.

    Parameters
    ----------
    sets : mapping ``(J, i) -> iterable of k``
    coeffs : mapping ``(J, i, k) -> complex``, optional
        Defaults to 1 for every member, which is the case for projective
        king measurements built from the qubit example.
    """

    def __init__(self, sets: Mapping, coeffs: Mapping | None = None):
        norm_sets = {}
        for key, members in sets.items():
            J, i = (int(x) for x in key)
            members = tuple(sorted(int(k) for k in members))
            if not members:
                raise KingcodeError(f"index set X^({J},{i}) is empty")
            if len(set(members)) != len(members) or min(members) < 1:
                raise KingcodeError(f"index set X^({J},{i}) has invalid members {members}")
            norm_sets[(J, i)] = members
        self.sets = dict(sorted(norm_sets.items()))

        by_family: dict[int, dict[int, int]] = {}
        for (J, i), members in self.sets.items():
            owners = by_family.setdefault(J, {})
            for k in members:
                if k in owners:
                    raise KingcodeError(f"X^({J},{owners[k]}) and X^({J},{i}) share error index {k}")
                owners[k] = i
        self._owner = by_family

        if coeffs is None:
            coeffs = {(J, i, k): 1.0 for (J, i), ks in self.sets.items() for k in ks}
        norm_coeffs = {tuple(int(x) for x in key): complex(v) for key, v in coeffs.items()}
        expected = {(J, i, k) for (J, i), ks in self.sets.items() for k in ks}
        if set(norm_coeffs) != expected:
            raise KingcodeError("coefficients must be given exactly for members of the index sets")
        self.coeffs = dict(sorted(norm_coeffs.items()))

    def families(self) -> list[int]:
        return sorted(self._owner)

    def outcomes(self, J: int) -> list[int]:
        return sorted(i for (JJ, i) in self.sets if JJ == J)

    def owner(self, k: int, J: int) -> int | None:
        """The ``i`` whose set contains ``k`` for family ``J``, or ``None``."""
        return self._owner.get(J, {}).get(k)

    def universe(self) -> set[int]:
        return {k for ks in self.sets.values() for k in ks}

    def __getitem__(self, key) -> tuple[int, ...]:
        return self.sets[tuple(key)]

    def __eq__(self, other):
        if not isinstance(other, IndexSets):
            return NotImplemented
        return self.sets == other.sets

    def to_json(self) -> dict:
        return {
            "sets": {f"{J},{i}": list(ks) for (J, i), ks in self.sets.items()},
            "coeffs": {f"{J},{i},{k}": [c.real, c.imag] for (J, i, k), c in self.coeffs.items()},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "IndexSets":
        sets = {tuple(int(x) for x in key.split(",")): ks for key, ks in obj["sets"].items()}
        coeffs = None
        if "coeffs" in obj:
            coeffs = {
                tuple(int(x) for x in key.split(",")): complex(re, im)
                for key, (re, im) in obj["coeffs"].items()
            }
        return cls(sets, coeffs)

    def __repr__(self):
        body = ", ".join(f"({J},{i}): {set(ks)}" for (J, i), ks in self.sets.items())
        return f"IndexSets({body})"


def born(op, state: StateVector, tol: Tolerance = DEFAULT_TOL) -> tuple[float, StateVector | None]:
    """Outcome probability ``|op psi|^2`` and the normalized post-measurement ket."""
    op = as_matrix(op, "measurement operator")
    if op.shape != (state.dim, state.dim):
        raise DimensionError(f"operator of shape {op.shape} cannot act on a {state.dim}-dim state")
    out = op @ state.amplitudes
    prob = float(np.vdot(out, out).real)
    if prob < tol.eps_ortho**2:
        return prob, None
    return prob, StateVector(out / math.sqrt(prob), state.factor_dims)


def embed_on_slot(op, slot: int, dims: Sequence[int]) -> np.ndarray:
    """``I (x) ... (x) op (x) ... (x) I`` with ``op`` on the 1-based ``slot``."""
    op = as_matrix(op)
    dims = [int(d) for d in dims]
    if not 1 <= slot <= len(dims):
        raise DimensionError(f"slot {slot} out of range 1..{len(dims)}")
    if op.shape != (dims[slot - 1], dims[slot - 1]):
        raise DimensionError(f"operator shape {op.shape} does not fit slot of dimension {dims[slot - 1]}")
    left = math.prod(dims[: slot - 1])
    right = math.prod(dims[slot:])
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


_KET0 = np.array([1, 0], dtype=complex)
_KET1 = np.array([0, 1], dtype=complex)
_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
_MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2)
_PLUS_Y = np.array([1, 1j], dtype=complex) / math.sqrt(2)
_MINUS_Y = np.array([1, -1j], dtype=complex) / math.sqrt(2)


def _ketbra(v):
    return np.outer(v, v.conj())


def standard_qubit_measurements() -> list[MeasurementFamily]:
    """Projective measurements in the x, y and z eigenbases (J = 1, 2, 3)."""
    return [
        MeasurementFamily(1, (_ketbra(_PLUS), _ketbra(_MINUS))),
        MeasurementFamily(2, (_ketbra(_PLUS_Y), _ketbra(_MINUS_Y))),
        MeasurementFamily(3, (_ketbra(_KET0), _ketbra(_KET1))),
    ]


def example_error_model() -> ErrorModel:
    """The four-operator qubit error whose pairwise sums are the x/y/z projectors."""
    L1 = np.array([[2, 1 - 1j], [1 + 1j, 0]]) / 4
    L2 = np.array([[2, -1 + 1j], [-1 - 1j, 0]]) / 4
    L3 = np.array([[0, 1 + 1j], [1 - 1j, 2]]) / 4
    L4 = np.array([[0, -1 - 1j], [-1 + 1j, 2]]) / 4
    return ErrorModel((L1, L2, L3, L4))


def example_index_sets() -> IndexSets:
    return IndexSets(
        {
            (1, 1): {1, 3},
            (1, 2): {2, 4},
            (2, 1): {1, 4},
            (2, 2): {2, 3},
            (3, 1): {1, 2},
            (3, 2): {3, 4},
        }
    )


def random_schmidt_state(d: int, rng: np.random.Generator, min_eta: float = 0.1) -> SchmidtState:
    """Random Schmidt coefficients (all >= ``min_eta``) with Haar-random local bases."""
    from .numerics import random_unitary

    if min_eta * math.sqrt(d) > 1:
        raise KingcodeError(f"min_eta={min_eta} is infeasible for d={d}")
    while True:
        eta = np.abs(rng.standard_normal(d)) + 1e-3
        eta /= np.linalg.norm(eta)
        if eta.min() >= min_eta:
            break
    return SchmidtState(eta, random_unitary(d, rng), random_unitary(d, rng))
