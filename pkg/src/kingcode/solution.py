"""From a solution pair (entangled state, Alice's PVM) to error operators and index sets.

The error operators are chosen so that ``(I (x) L_k)|Psi> = c |p_k>`` with
``c = sqrt(alpha / d)`` and ``alpha = min_j eta_j**2``; that scale is the
largest one keeping ``sum_k L_k^dag L_k <= I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DecompositionError, DimensionError, KingcodeError
from .model import ErrorModel, IndexSets, MeasurementFamily, SchmidtState, born, embed_on_slot
from .numerics import (
    DEFAULT_TOL,
    StateVector,
    Tolerance,
    decode_vector,
    encode_matrix,
    encode_vector,
    psd_defect,
)

__all__ = [
    "SolutionPair",
    "GramReport",
    "DecompositionReport",
    "SolutionReport",
    "derive_error_operators",
    "gram_check",
    "decompose_families",
    "derive_index_sets",
    "verify_solution",
    "pvm_from_error_model",
]


class SolutionPair:
    """A Schmidt state together with an orthonormal basis of the ``d*d`` space."""

    def __init__(self, state: SchmidtState, pvm_basis, tol: Tolerance = DEFAULT_TOL):
        d = state.d
        if isinstance(pvm_basis, np.ndarray):
            basis = np.asarray(pvm_basis, dtype=complex)
        else:
            basis = np.stack([np.asarray(p, dtype=complex).reshape(-1) for p in pvm_basis], axis=1)
        if basis.shape != (d * d, d * d):
            raise DimensionError(f"PVM basis must have {d * d} vectors of length {d * d}, got {basis.shape}")
        dev = np.max(np.abs(basis.conj().T @ basis - np.eye(d * d)))
        if dev > tol.eps_eq:
            raise KingcodeError(f"PVM basis is not orthonormal (max deviation {dev:.3e})")
        basis.setflags(write=False)
        self.state = state
        self.pvm_basis = basis

    @property
    def d(self) -> int:
        return self.state.d

    def pvm_vectors(self) -> list[StateVector]:
        return [StateVector(self.pvm_basis[:, k], (self.d, self.d)) for k in range(self.d**2)]

    def to_json(self) -> dict:
        st = self.state
        return {
            "eta": st.eta.tolist(),
            "basis_a": [encode_vector(StateVector(st.basis_a[:, j], (st.d,))) for j in range(st.d)],
            "basis_k": [encode_vector(StateVector(st.basis_k[:, j], (st.d,))) for j in range(st.d)],
            "pvm": [encode_vector(v) for v in self.pvm_vectors()],
        }

    @classmethod
    def from_json(cls, obj: Mapping, tol: Tolerance = DEFAULT_TOL) -> "SolutionPair":
        eta = [float(x) for x in obj["eta"]]
        basis_a = [decode_vector(v) for v in obj["basis_a"]] if "basis_a" in obj else None
        basis_k = [decode_vector(v) for v in obj["basis_k"]] if "basis_k" in obj else None
        state = SchmidtState(eta, basis_a, basis_k, tol)
        return cls(state, [decode_vector(v) for v in obj["pvm"]], tol)


@dataclass
class GramReport:
    gram: np.ndarray
    alpha: float
    max_offdiag: float
    diag_spread: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "gram": encode_matrix(self.gram),
            "alpha": self.alpha,
            "max_offdiag": self.max_offdiag,
            "diag_spread": self.diag_spread,
            "pass": self.passed,
        }


def _error_images(state: SchmidtState, err: ErrorModel) -> np.ndarray:
    """Columns ``(I (x) L_k)|Psi>`` for every k."""
    if err.dim != state.d:
        raise DimensionError(f"error operators act on dimension {err.dim}, state has d={state.d}")
    psi = state.vector().amplitudes
    return np.stack([embed_on_slot(L, 2, (state.d, state.d)) @ psi for L in err.kraus], axis=1)


def gram_check(state: SchmidtState, err: ErrorModel, tol: Tolerance = DEFAULT_TOL) -> GramReport:
    """Gram matrix of the error images of ``state`` and whether it is ``alpha/d`` times identity."""
    images = _error_images(state, err)
    gram = images.conj().T @ images
    diag = np.real(np.diagonal(gram))
    off = gram - np.diag(np.diagonal(gram))
    max_off = float(np.max(np.abs(off), initial=0.0))
    spread = float(np.ptp(diag))
    return GramReport(
        gram=gram,
        alpha=float(state.d * np.mean(diag)),
        max_offdiag=max_off,
        diag_spread=spread,
        passed=bool(max_off <= tol.eps_ortho and spread <= tol.eps_eq),
    )


def derive_error_operators(sol: SolutionPair, tol: Tolerance = DEFAULT_TOL) -> ErrorModel:
    """Error operators with ``(I (x) L_k)|Psi> = sqrt(alpha/d) |p_k>``.

    In the king's Schmidt basis, ``L_k |phi_j> = (c / eta_j) sum_j' <psi_j phi_j'|p_k> |phi_j'>``.
    """
    st = sol.state
    d = st.d
    if np.any(st.eta <= tol.eps_eq):
        raise KingcodeError("Schmidt coefficients too small to invert")
    alpha = st.alpha
    c = math.sqrt(alpha / d)
    # amps[k, j, j'] = <psi_j (x) phi_j' | p_k>
    local = np.kron(st.basis_a, st.basis_k)
    amps = (local.conj().T @ sol.pvm_basis).T.reshape(d * d, d, d)
    ops = []
    for k in range(d * d):
        in_phi = c * (amps[k] / st.eta[:, None]).T
        ops.append(st.basis_k @ in_phi @ st.basis_k.conj().T)
    defect = psd_defect(np.eye(d) - sum(L.conj().T @ L for L in ops))
    if defect > tol.eps_psd:
        raise KingcodeError(f"derived operators increase trace (PSD defect {defect:.3e})")
    return ErrorModel(tuple(ops))


def pvm_from_error_model(state: SchmidtState, err: ErrorModel, tol: Tolerance = DEFAULT_TOL) -> SolutionPair:
    """Alice's basis made of the normalized error images ``(I (x) L_k)|Psi>``."""
    images = _error_images(state, err)
    norms = np.linalg.norm(images, axis=0)
    if np.any(norms < tol.eps_ortho):
        raise KingcodeError("an error image vanishes on the state")
    return SolutionPair(state, images / norms, tol)


@dataclass
class DecompositionReport:
    """Expansion of every king's operator over the error operators."""

    coeffs: dict  # (J, i, k) -> complex, all k
    sets: dict  # (J, i) -> tuple of k after disjoint assignment
    residuals: dict  # (J, i) -> Frobenius residual over the assigned support
    overlaps: dict  # J -> sorted k claimed by more than one outcome
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def offending(self) -> list[tuple[int, int]]:
        bad = [key for key, r in self.residuals.items() if r > self.tol.eps_eq]
        bad += [key for key, ks in self.sets.items() if not ks]
        return sorted(set(bad))

    @property
    def ok(self) -> bool:
        return not self.offending and not self.overlaps

    def index_sets(self) -> IndexSets:
        coeffs = {(J, i, k): self.coeffs[(J, i, k)] for (J, i), ks in self.sets.items() for k in ks}
        return IndexSets(self.sets, coeffs)

    def to_json(self) -> dict:
        return {
            "residuals": {f"{J},{i}": r for (J, i), r in self.residuals.items()},
            "overlaps": {str(J): ks for J, ks in self.overlaps.items()},
            "sets": {f"{J},{i}": list(ks) for (J, i), ks in self.sets.items()},
            "max_residual": self.max_residual,
            "ok": self.ok,
        }


def decompose_families(
    state: SchmidtState,
    err: ErrorModel,
    families: Sequence[MeasurementFamily],
    tol: Tolerance = DEFAULT_TOL,
    support_threshold: float | None = None,
) -> DecompositionReport:
    """Expand each ``M_i^(J)`` over the ``L_k`` and split the supports disjointly.

    Coefficients come from ``f_k = <L_k Psi | M Psi> / (alpha/d)``, exact when
    the error images are orthogonal with equal norms. An index ``k`` whose
    coefficient is non-negligible for several outcomes of the same ``J`` is
    kept only by the outcome with the largest ``|f_k|``; the dropped terms
    show up in that outcome's residual.
    """
    report = gram_check(state, err, tol)
    if not report.passed:
        raise KingcodeError(
            f"error images are not orthogonal with equal norms "
            f"(off-diagonal {report.max_offdiag:.3e}, diagonal spread {report.diag_spread:.3e})"
        )
    thr = tol.eps_ortho if support_threshold is None else support_threshold
    scale = report.alpha / state.d
    images = _error_images(state, err)
    psi = state.vector().amplitudes
    dims = (state.d, state.d)

    coeffs: dict = {}
    sets: dict = {}
    residuals: dict = {}
    overlaps: dict = {}
    for fam in families:
        if fam.dim != state.d:
            raise DimensionError(f"family {fam.label} acts on dimension {fam.dim}, expected {state.d}")
        J = fam.label
        f = np.array([images.conj().T @ (embed_on_slot(M, 2, dims) @ psi) / scale for M in fam.ops])
        claims = np.abs(f) > thr  # shape (m, l)
        multi = np.flatnonzero(claims.sum(axis=0) > 1)
        if multi.size:
            overlaps[J] = [int(k) + 1 for k in multi]
        winner = np.argmax(np.abs(f), axis=0)
        for i_idx, M in enumerate(fam.ops):
            i = i_idx + 1
            ks = [k for k in range(len(err)) if claims[i_idx, k] and winner[k] == i_idx]
            for k in range(len(err)):
                coeffs[(J, i, k + 1)] = complex(f[i_idx, k])
            sets[(J, i)] = tuple(k + 1 for k in ks)
            approx = sum((f[i_idx, k] * err.kraus[k] for k in ks), np.zeros_like(M))
            residuals[(J, i)] = float(np.linalg.norm(M - approx))
    return DecompositionReport(coeffs, sets, residuals, overlaps, tol)


def derive_index_sets(
    state: SchmidtState,
    err: ErrorModel,
    families: Sequence[MeasurementFamily],
    tol: Tolerance = DEFAULT_TOL,
    support_threshold: float | None = None,
) -> IndexSets:
    """Index sets and coefficients with ``M_i^(J) = sum_{k in X^(J,i)} f_k L_k``.

    Raises
    ------
    DecompositionError
        If some operator has no exact expansion over a support disjoint from
        the other outcomes of its family.
    """
    rep = decompose_families(state, err, families, tol, support_threshold)
    if not rep.ok:
        parts = []
        if rep.offending:
            worst = ", ".join(f"({J},{i}): {rep.residuals[(J, i)]:.3e}" for J, i in rep.offending)
            parts.append(f"residual too large for {worst}")
        if rep.overlaps:
            parts.append(
                "supports overlap: " + "; ".join(f"J={J} shares k={ks}" for J, ks in rep.overlaps.items())
            )
        raise DecompositionError(
            "measurements do not decompose over disjoint error supports: " + "; ".join(parts),
            offending=rep.offending or [(J, i) for J in rep.overlaps for (JJ, i) in rep.sets if JJ == J],
            residuals=rep.residuals,
        )
    return rep.index_sets()


@dataclass
class SolutionReport:
    verdict: str
    guess_map: dict  # (k, J) -> i
    conflicts: list  # (k, J, i_first, i_other)
    branch_success: dict  # (J, i) -> success probability
    min_success_probability: float

    @property
    def is_solution(self) -> bool:
        return self.verdict == "solution"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "guess_map": {f"{k},{J}": i for (k, J), i in sorted(self.guess_map.items())},
            "conflicts": [list(c) for c in self.conflicts],
            "min_success_probability": self.min_success_probability,
            "residuals": {f"{J},{i}": 1.0 - p for (J, i), p in sorted(self.branch_success.items())},
        }


def verify_solution(
    sol: SolutionPair, families: Sequence[MeasurementFamily], tol: Tolerance = DEFAULT_TOL
) -> SolutionReport:
    """Play every king's choice and outcome against Alice's PVM and look for a guess map.

    The map ``(k, J) -> i`` is filled in enumeration order; a later branch that
    needs a different ``i`` for an already mapped ``(k, J)`` is a conflict and
    rules the pair out.
    """
    d = sol.d
    dims = (d, d)
    psi = sol.state.vector()
    threshold = tol.eps_ortho**2
    guess_map: dict = {}
    conflicts: list = []
    alice: dict = {}
    for fam in families:
        J = fam.label
        for i_idx, M in enumerate(fam.ops):
            i = i_idx + 1
            prob, post = born(embed_on_slot(M, 2, dims), psi, tol)
            if post is None:
                continue
            q = np.abs(sol.pvm_basis.conj().T @ post.amplitudes) ** 2
            alice[(J, i)] = q
            for k_idx in np.flatnonzero(q > threshold):
                k = int(k_idx) + 1
                prev = guess_map.setdefault((k, J), i)
                if prev != i:
                    conflicts.append((k, J, prev, i))
    branch_success = {
        (J, i): float(sum(q[k - 1] for (k, JJ), g in guess_map.items() if JJ == J and g == i))
        for (J, i), q in alice.items()
    }
    min_success = min(branch_success.values(), default=0.0)
    ok = not conflicts and min_success >= 1 - tol.eps_eq
    return SolutionReport(
        verdict="solution" if ok else "not a solution",
        guess_map=guess_map,
        conflicts=conflicts,
        branch_success=branch_success,
        min_success_probability=min_success,
    )
