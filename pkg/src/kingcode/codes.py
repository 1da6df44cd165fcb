"""Quantum codes built from solution states, Knill-Laflamme checks, Alice's PVM and recovery."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import clique
from .errors import DimensionError, KingcodeError
from .model import ErrorModel, SchmidtState, embed_on_slot
from .numerics import (
    DEFAULT_TOL,
    StateVector,
    Tolerance,
    as_matrix,
    decode_vector,
    encode_matrix,
    encode_vector,
    orthonormal_columns,
    psd_defect,
)
from .solution import gram_check

__all__ = [
    "QuantumCode",
    "KLReport",
    "DiscriminationPVM",
    "kl_check",
    "embed_errors",
    "build_bipartite_code",
    "ghz_state",
    "shifts_disagree",
    "select_orthogonal_set",
    "build_multipartite_code",
    "discrimination_pvm",
    "build_recovery",
    "apply_channel",
    "code_fidelity",
    "MAX_EXACT_CANDIDATES",
]

MAX_EXACT_CANDIDATES = 4096


class QuantumCode:
    """An orthonormal basis of a subspace of a tensor-product space.

    Parameters
    ----------
    ambient_dims : sequence of int
        Subsystem dimensions of the ambient space.
    basis : array_like of shape (D, d') or list of kets
        Orthonormal code basis, one vector per column.
    labels : sequence, optional
        A label per basis vector (e.g. the shift tuples of GHZ-type states).
    """

    def __init__(self, ambient_dims, basis, labels=None, tol: Tolerance = DEFAULT_TOL):
        self.ambient_dims = tuple(int(d) for d in ambient_dims)
        if isinstance(basis, np.ndarray):
            b = as_matrix(basis, "code basis")
        else:
            b = np.stack([np.asarray(v, dtype=complex).reshape(-1) for v in basis], axis=1)
        if b.shape[0] != math.prod(self.ambient_dims):
            raise DimensionError(
                f"basis vectors have length {b.shape[0]}, ambient dimension is {math.prod(self.ambient_dims)}"
            )
        if b.shape[1] < 1:
            raise KingcodeError("a code needs at least one basis vector")
        dev = np.max(np.abs(b.conj().T @ b - np.eye(b.shape[1])))
        if dev > tol.eps_eq:
            raise KingcodeError(f"code basis is not orthonormal (max deviation {dev:.3e})")
        b.setflags(write=False)
        self.basis = b
        self.labels = None if labels is None else [tuple(x) if isinstance(x, (list, tuple)) else x for x in labels]
        if self.labels is not None and len(self.labels) != b.shape[1]:
            raise KingcodeError("one label per basis vector is required")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def code_dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def states(self) -> list[StateVector]:
        return [StateVector(self.basis[:, i], self.ambient_dims) for i in range(self.code_dim)]

    def encode(self, coeffs) -> StateVector:
        """Code state with the given coordinates in the code basis (normalized)."""
        v = self.basis @ np.asarray(coeffs, dtype=complex)
        return StateVector(v, self.ambient_dims).normalized()

    def random_state(self, rng: np.random.Generator) -> StateVector:
        z = rng.standard_normal(self.code_dim) + 1j * rng.standard_normal(self.code_dim)
        return self.encode(z)

    def to_json(self) -> dict:
        out = {"ambient_dims": list(self.ambient_dims), "basis": [encode_vector(s) for s in self.states()]}
        if self.labels is not None:
            out["labels"] = [list(x) if isinstance(x, tuple) else x for x in self.labels]
        return out

    @classmethod
    def from_json(cls, obj: Mapping, tol: Tolerance = DEFAULT_TOL) -> "QuantumCode":
        basis = [decode_vector(v).amplitudes for v in obj["basis"]]
        return cls(obj["ambient_dims"], basis, obj.get("labels"), tol)

    def __repr__(self):
        return f"QuantumCode(({self.dim}, {self.code_dim}), dims={self.ambient_dims})"


@dataclass
class KLReport:
    alpha_matrix: np.ndarray
    diagonal: bool
    lambdas: list
    max_residual: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "alpha_matrix": encode_matrix(self.alpha_matrix),
            "diagonal": self.diagonal,
            "lambdas": self.lambdas,
            "max_residual": self.max_residual,
            "pass": self.passed,
        }


def _error_blocks(code: QuantumCode, errs) -> np.ndarray:
    """``E_k B`` stacked along the first axis, shape (l, D, d')."""
    blocks = []
    for E in errs:
        E = as_matrix(E, "error operator")
        if E.shape != (code.dim, code.dim):
            raise DimensionError(f"error operator of shape {E.shape} does not act on dimension {code.dim}")
        blocks.append(E @ code.basis)
    if not blocks:
        raise KingcodeError("no error operators given")
    return np.stack(blocks)


def kl_check(code: QuantumCode, errs, require_diagonal: bool = True, tol: Tolerance = DEFAULT_TOL) -> KLReport:
    """Test ``P E_k^dag E_k' P = alpha_kk' P`` for all pairs.

    With ``B`` the code isometry, ``P E^dag E' P - a P = B (B^dag E^dag E' B - a I) B^dag``
    and the Frobenius norm of the outer factors is 1, so the residual is
    computed on ``d' x d'`` blocks.
    """
    blocks = _error_blocks(code, errs)
    d_code = code.code_dim
    inner = np.einsum("kia,mib->kmab", blocks.conj(), blocks)
    alpha = np.trace(inner, axis1=2, axis2=3) / d_code
    resid = inner - alpha[:, :, None, None] * np.eye(d_code)
    max_residual = float(np.max(np.linalg.norm(resid, axis=(2, 3))))
    off = alpha - np.diag(np.diagonal(alpha))
    diagonal = bool(np.max(np.abs(off), initial=0.0) <= tol.eps_ortho)
    herm = (alpha + alpha.conj().T) / 2
    psd_ok = psd_defect(herm, tol) <= tol.eps_psd
    passed = max_residual <= tol.eps_eq and psd_ok and (diagonal or not require_diagonal)
    return KLReport(
        alpha_matrix=alpha,
        diagonal=diagonal,
        lambdas=[float(x) for x in np.real(np.diagonal(alpha))],
        max_residual=max_residual,
        passed=bool(passed),
    )


def embed_errors(err: ErrorModel | Sequence, slot: int, dims: Sequence[int]) -> list[np.ndarray]:
    kraus = err.kraus if isinstance(err, ErrorModel) else err
    return [embed_on_slot(L, slot, dims) for L in kraus]


def build_bipartite_code(state: SchmidtState, dA: int, xi=None, tol: Tolerance = DEFAULT_TOL) -> QuantumCode:
    """Code spanned by ``sum_j eta_j |xi_{d(l-1)+j}> (x) |phi_j>`` for ``l = 1..floor(dA/d)``.

    ``xi`` is an orthonormal basis of the ``dA``-dimensional system given as
    columns; the computational basis is used when omitted.
    """
    d = state.d
    if dA < d:
        raise KingcodeError(f"dA={dA} must be at least d={d}")
    xi = np.eye(dA, dtype=complex) if xi is None else as_matrix(xi, "xi")
    if xi.shape != (dA, dA):
        raise DimensionError(f"xi must be a {dA}x{dA} basis, got {xi.shape}")
    vectors = []
    for l in range(dA // d):
        block = xi[:, d * l : d * (l + 1)]
        vectors.append(np.einsum("j,aj,bj->ab", state.eta, block, state.basis_k).reshape(-1))
    return QuantumCode((dA, d), np.stack(vectors, axis=1), labels=list(range(1, dA // d + 1)), tol=tol)


def _check_tuple(t, n: int | None, d: int) -> tuple[int, ...]:
    t = tuple(int(x) for x in t)
    if len(t) < 2:
        raise KingcodeError(f"shift tuple {t} must have length >= 2")
    if n is not None and len(t) != n:
        raise KingcodeError(f"shift tuple {t} must have length {n}")
    if any(not 0 <= x < d for x in t):
        raise KingcodeError(f"shift tuple {t} has entries outside 0..{d - 1}")
    return t


def ghz_state(eta, phi, t) -> StateVector:
    """``sum_j eta_j |phi_{j+i_1}> (x) ... (x) |phi_{j+i_n}>`` with indices mod d."""
    eta = np.asarray(eta, dtype=float)
    d = eta.size
    phi = np.eye(d, dtype=complex) if phi is None else as_matrix(phi, "phi")
    if phi.shape != (d, d):
        raise DimensionError(f"phi must be a {d}x{d} basis")
    t = _check_tuple(t, None, d)
    amps = np.zeros(d ** len(t), dtype=complex)
    for j in range(d):
        term = phi[:, (j + t[0]) % d]
        for shift in t[1:]:
            term = np.kron(term, phi[:, (j + shift) % d])
        amps += eta[j] * term
    return StateVector(amps, (d,) * len(t))


def shifts_disagree(t, t2, slot: int, d: int) -> bool:
    """True iff two positions other than ``slot`` have different shift differences mod d.

    Such a pair of tuples gives states whose error images are orthogonal.
    With fewer than two positions besides ``slot`` this is always False.
    """
    t = _check_tuple(t, None, d)
    t2 = _check_tuple(t2, len(t), d)
    if not 1 <= slot <= len(t):
        raise KingcodeError(f"slot {slot} out of range 1..{len(t)}")
    diffs = {(a - b) % d for u, (a, b) in enumerate(zip(t, t2), start=1) if u != slot}
    return len(diffs) > 1


def _orthogonality_graph(images: np.ndarray, tol: Tolerance, block: int = 256) -> np.ndarray:
    """Adjacency: every cross inner product between the two states' error images vanishes.

    ``images`` has shape (N, l, D).
    """
    n, l, D = images.shape
    flat = images.reshape(n * l, D)
    adj = np.zeros((n, n), dtype=bool)
    for start in range(0, n, block):
        stop = min(n, start + block)
        g = flat[start * l : stop * l].conj() @ flat.T
        worst = np.abs(g).reshape(stop - start, l, n, l).max(axis=(1, 3))
        adj[start:stop] = worst <= tol.eps_ortho
    np.fill_diagonal(adj, False)
    return adj & adj.T


def _candidates(eta, phi, n: int, tol: Tolerance):
    """Distinct GHZ-type states, each represented by its lexicographically smallest tuple."""
    d = len(eta)
    reps: list[tuple[int, ...]] = []
    vecs: list[np.ndarray] = []
    for t in itertools.product(range(d), repeat=n):
        v = ghz_state(eta, phi, t).amplitudes
        if vecs:
            overlaps = np.abs(np.array(vecs).conj() @ v)
            if np.max(overlaps) > 1 - tol.eps_eq:
                continue
        reps.append(t)
        vecs.append(v)
    return reps, np.array(vecs)


def select_orthogonal_set(
    eta,
    phi,
    n: int,
    slot: int,
    err: ErrorModel,
    mode: str = "greedy",
    tol: Tolerance = DEFAULT_TOL,
) -> list[tuple[int, ...]]:
    """Shift tuples whose states have mutually orthogonal error images.

    Every pair in the result satisfies ``<L_k Psi_t | L_k' Psi_t'> = 0`` for all
    error indices, checked numerically. ``greedy`` scans candidates in
    lexicographic order; ``exact`` solves maximum clique on the orthogonality
    graph.
    """
    eta = np.asarray(eta, dtype=float)
    d = eta.size
    phi = np.eye(d, dtype=complex) if phi is None else as_matrix(phi, "phi")
    if n < 3:
        raise KingcodeError(
            f"n={n}: with fewer than 3 subsystems no two shift tuples can be separated away from "
            "the king's slot, so the construction degenerates to a single state"
        )
    if not 1 <= slot <= n:
        raise KingcodeError(f"slot {slot} out of range 1..{n}")
    if mode not in ("greedy", "exact"):
        raise KingcodeError(f"unknown selection mode {mode!r}")
    if err.dim != d:
        raise DimensionError(f"error operators act on dimension {err.dim}, expected {d}")
    gram = gram_check(SchmidtState(eta, phi, phi, tol), err, tol)
    if not gram.passed:
        raise KingcodeError("error images of the seed state are not orthogonal with equal norms")

    reps, vecs = _candidates(eta, phi, n, tol)
    if mode == "exact" and len(reps) > MAX_EXACT_CANDIDATES:
        raise KingcodeError(f"{len(reps)} candidates exceed the exact-search limit of {MAX_EXACT_CANDIDATES}")
    dims = (d,) * n
    embedded = embed_errors(err, slot, dims)
    images = np.stack([vecs @ E.T for E in embedded], axis=1)  # (N, l, D)
    adj = _orthogonality_graph(images, tol)
    if mode == "greedy":
        chosen = clique.greedy_clique(adj, range(len(reps)))
    else:
        chosen = sorted(clique.max_clique(adj))
    return [reps[i] for i in chosen]


def build_multipartite_code(
    eta,
    phi,
    n: int,
    slot: int,
    err: ErrorModel,
    mode: str = "greedy",
    tol: Tolerance = DEFAULT_TOL,
) -> QuantumCode:
    """Code spanned by a selected set of GHZ-type states on ``n`` subsystems.

    Raises if the resulting code does not satisfy the Knill-Laflamme
    conditions in diagonal form against the errors on ``slot``.
    """
    tuples = select_orthogonal_set(eta, phi, n, slot, err, mode, tol)
    phi_m = None if phi is None else as_matrix(phi)
    basis = np.stack([ghz_state(eta, phi_m, t).amplitudes for t in tuples], axis=1)
    d = len(eta)
    code = QuantumCode((d,) * n, basis, labels=tuples, tol=tol)
    report = kl_check(code, embed_errors(err, slot, code.ambient_dims), True, tol)
    if not report.passed:
        raise KingcodeError(f"selected states violate Knill-Laflamme (residual {report.max_residual:.3e})")
    return code


@dataclass
class DiscriminationPVM:
    """Projectors onto the error images ``V_k = E_k C`` plus the remainder."""

    error_indices: list  # 1-based k for each projector
    projectors: list
    isometries: list  # orthonormal basis of each V_k as columns
    residual: np.ndarray
    lambdas: list = field(default_factory=list)

    def outcome_probabilities(self, state) -> tuple[np.ndarray, float]:
        """Born probabilities of each error outcome and of the remainder."""
        v = np.asarray(state, dtype=complex)
        probs = np.array([np.linalg.norm(V.conj().T @ v) ** 2 for V in self.isometries])
        rest = float(np.vdot(v, self.residual @ v).real)
        return probs, max(rest, 0.0)

    def to_json(self) -> dict:
        return {
            "error_indices": self.error_indices,
            "projectors": [encode_matrix(p) for p in self.projectors],
            "residual": encode_matrix(self.residual),
            "lambdas": self.lambdas,
        }


def discrimination_pvm(code: QuantumCode, errs, tol: Tolerance = DEFAULT_TOL) -> DiscriminationPVM:
    """Alice's measurement that tells apart which error hit the code."""
    report = kl_check(code, errs, True, tol)
    if not report.passed:
        raise KingcodeError(
            f"Knill-Laflamme conditions fail in diagonal form (residual {report.max_residual:.3e}, "
            f"diagonal={report.diagonal})"
        )
    blocks = _error_blocks(code, errs)
    indices, projs, isos, lams = [], [], [], []
    for k, (lam, block) in enumerate(zip(report.lambdas, blocks), start=1):
        if lam <= tol.eps_eq:
            continue
        V = orthonormal_columns(block / math.sqrt(lam), tol)
        indices.append(k)
        isos.append(V)
        projs.append(V @ V.conj().T)
        lams.append(lam)
    total = sum(projs)
    residual = np.eye(code.dim) - total
    for a in range(len(isos)):
        for b in range(a + 1, len(isos)):
            if np.max(np.abs(isos[a].conj().T @ isos[b])) > tol.eps_ortho:
                raise KingcodeError(f"error images {indices[a]} and {indices[b]} overlap")
    return DiscriminationPVM(indices, projs, isos, residual, lams)


def build_recovery(code: QuantumCode, errs, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Kraus operators ``R_k = sum_b |b><E_k b| / sqrt(lambda_k)`` and the remainder projector.

    The result is trace preserving and maps ``sum_k E_k rho E_k^dag`` back to
    a multiple of ``rho`` for every ``rho`` supported on the code.
    """
    pvm = discrimination_pvm(code, errs, tol)
    blocks = _error_blocks(code, errs)
    kraus = []
    for k, lam in zip(pvm.error_indices, pvm.lambdas):
        kraus.append(code.basis @ (blocks[k - 1] / math.sqrt(lam)).conj().T)
    kraus.append(pvm.residual)
    total = sum(R.conj().T @ R for R in kraus)
    dev = float(np.linalg.norm(total - np.eye(code.dim)))
    if dev > math.sqrt(tol.eps_eq):
        raise KingcodeError(f"recovery is not trace preserving (deviation {dev:.3e})")
    return kraus


def apply_channel(kraus, rho) -> np.ndarray:
    """``sum_K K rho K^dag``."""
    rho = as_matrix(rho, "rho")
    return sum(K @ rho @ K.conj().T for K in kraus)


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    # eigenvalues at rounding level are zeros; their square roots would not be
    w = np.where(w > 1e-14 * max(float(w[-1]), 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def code_fidelity(code: QuantumCode, rho, sigma) -> float:
    """Uhlmann fidelity of ``rho`` and the normalized ``sigma`` restricted to the code.

    Weight of ``sigma`` outside the code lowers the result through the
    normalization by the full trace.
    """
    B = code.basis
    r = B.conj().T @ as_matrix(rho) @ B
    s = B.conj().T @ as_matrix(sigma) @ B
    total = float(np.trace(as_matrix(sigma)).real)
    if total <= 0:
        return 0.0
    singular = np.linalg.svd(_sqrt_psd(r) @ _sqrt_psd(s / total), compute_uv=False)
    return float(np.sum(singular) ** 2)
