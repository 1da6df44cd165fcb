"""Dense complex linear algebra with explicit tolerances.

Matrices are plain ``numpy`` arrays of ``complex128``. Kets carry the list of
subsystem dimensions so that tensor products and slot embeddings can be
checked.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, KingcodeError

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "StateVector",
    "as_matrix",
    "tensor",
    "adjoint",
    "orthonormalize",
    "orthonormal_columns",
    "projector",
    "psd_defect",
    "is_hermitian",
    "encode_matrix",
    "decode_matrix",
    "encode_vector",
    "decode_vector",
    "random_unitary",
]


@dataclass(frozen=True)
class Tolerance:
    """Comparison thresholds.

    Parameters
    ----------
    eps_eq : float
        Entrywise / Frobenius equality bound.
    eps_ortho : float
        Bound under which an inner product or residual norm counts as zero.
    eps_psd : float
        Allowed negative eigenvalue magnitude for a PSD test.
    """

    eps_eq: float = 1e-9
    eps_ortho: float = 1e-9
    eps_psd: float = 1e-9

    def __post_init__(self):
        for name in ("eps_eq", "eps_ortho", "eps_psd"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise KingcodeError(f"{name} must be a positive finite number, got {value!r}")

    @classmethod
    def from_env(cls, var: str = "KINGCODE_TOL", **overrides) -> "Tolerance":
        """Default tolerance with ``eps_eq`` taken from an environment variable if set."""
        raw = os.environ.get(var)
        if raw is not None and "eps_eq" not in overrides:
            try:
                overrides["eps_eq"] = float(raw)
            except ValueError as exc:
                raise KingcodeError(f"{var}={raw!r} is not a number") from exc
        return cls(**overrides)


DEFAULT_TOL = Tolerance()


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise KingcodeError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """A ket together with its tensor-factor dimensions."""

    amplitudes: np.ndarray
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"factor_dims must be positive, got {dims}")
        if amps.size != math.prod(dims):
            raise DimensionError(
                f"{amps.size} amplitudes do not match factor_dims {dims} (product {math.prod(dims)})"
            )
        if not np.all(np.isfinite(amps)):
            raise KingcodeError("state has non-finite amplitudes")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "factor_dims", dims)

    @classmethod
    def basis(cls, index: int | Sequence[int], factor_dims: Sequence[int]) -> "StateVector":
        """Computational basis ket; ``index`` is flat or one digit per factor."""
        dims = tuple(factor_dims)
        if not isinstance(index, (int, np.integer)):
            index = int(np.ravel_multi_index(tuple(index), dims))
        amps = np.zeros(math.prod(dims), dtype=complex)
        amps[index] = 1.0
        return cls(amps, dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise KingcodeError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.factor_dims)

    def is_normalized(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol.eps_eq

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def allclose(self, other: "StateVector", tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.factor_dims == other.factor_dims and bool(
            np.max(np.abs(self.amplitudes - other.amplitudes), initial=0.0) <= tol.eps_eq
        )

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"StateVector(dims={self.factor_dims}, amplitudes={np.round(self.amplitudes, 6)})"


def tensor(*operands):
    """Kronecker product of matrices, or of kets with concatenated factor dims."""
    if not operands:
        raise KingcodeError("tensor needs at least one operand")
    if all(isinstance(op, StateVector) for op in operands):
        amps = reduce(np.kron, (op.amplitudes for op in operands))
        dims = sum((op.factor_dims for op in operands), ())
        return StateVector(amps, dims)
    if any(isinstance(op, StateVector) for op in operands):
        raise KingcodeError("cannot mix kets and matrices in tensor")
    return reduce(np.kron, (as_matrix(op) for op in operands))


def adjoint(m) -> np.ndarray:
    return as_matrix(m).conj().T


def is_hermitian(m, tol: Tolerance = DEFAULT_TOL) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol.eps_eq)


def orthonormal_columns(vectors: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Gram-Schmidt over the columns of ``vectors`` in input order.

    Columns whose residual norm drops below ``tol.eps_ortho`` are discarded.
    Each column is orthogonalized twice against the accepted set, which keeps
    the output orthonormal to rounding even for nearly dependent inputs.
    """
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim != 2:
        raise DimensionError("expected a 2-D array of column vectors")
    accepted: list[np.ndarray] = []
    for col in vectors.T:
        v = col.copy()
        for _ in range(2):
            for q in accepted:
                v -= np.vdot(q, v) * q
        n = np.linalg.norm(v)
        if n >= tol.eps_ortho:
            accepted.append(v / n)
    if not accepted:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    return np.stack(accepted, axis=1)


def orthonormalize(vs: Iterable[StateVector], tol: Tolerance = DEFAULT_TOL) -> list[StateVector]:
    """Deterministic Gram-Schmidt on a list of kets sharing factor dims."""
    vs = list(vs)
    if not vs:
        return []
    dims = vs[0].factor_dims
    if any(v.factor_dims != dims for v in vs):
        raise DimensionError("all vectors must share factor_dims")
    q = orthonormal_columns(np.stack([v.amplitudes for v in vs], axis=1), tol)
    return [StateVector(q[:, i], dims) for i in range(q.shape[1])]


def _basis_matrix(basis) -> np.ndarray:
    if isinstance(basis, np.ndarray):
        return as_matrix(basis, "basis")
    basis = list(basis)
    if not basis:
        raise KingcodeError("projector needs a nonempty basis")
    return np.stack([np.asarray(b, dtype=complex) for b in basis], axis=1)


def projector(basis, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``sum_b |b><b|`` for an orthonormal basis (list of kets or matrix of columns)."""
    b = _basis_matrix(basis)
    gram = b.conj().T @ b
    err = float(np.max(np.abs(gram - np.eye(gram.shape[0])), initial=0.0))
    if err > tol.eps_eq:
        raise KingcodeError(f"basis is not orthonormal (max Gram deviation {err:.3e})")
    return b @ b.conj().T


def psd_defect(m, tol: Tolerance = DEFAULT_TOL) -> float:
    """``max(0, -lambda_min(m))`` for Hermitian ``m``."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise KingcodeError("psd_defect requires a Hermitian matrix")
    lam = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return max(0.0, -float(lam[0]))


# JSON wire format: {"rows": R, "cols": C, "data": [[re, im], ...]} row-major.


def encode_matrix(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def decode_matrix(obj: dict) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise KingcodeError(f"malformed matrix object: {exc}") from exc
    if len(data) != rows * cols:
        raise DimensionError(f"matrix data has {len(data)} entries, expected {rows}x{cols}")
    arr = np.array([complex(re, im) for re, im in data], dtype=complex)
    return as_matrix(arr.reshape(rows, cols))


def encode_vector(v: StateVector) -> dict:
    out = encode_matrix(v.amplitudes.reshape(-1, 1))
    out["factor_dims"] = list(v.factor_dims)
    return out


def decode_vector(obj: dict) -> StateVector:
    m = decode_matrix(obj)
    if m.shape[1] != 1:
        raise DimensionError(f"vector must have one column, got {m.shape[1]}")
    dims = obj.get("factor_dims", [m.shape[0]])
    return StateVector(m[:, 0], tuple(dims))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases
