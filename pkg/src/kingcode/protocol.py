"""The mean king's game played on code states.

Alice prepares a code state, the king measures one subsystem with family
``J`` and gets ``i``, Alice measures the discrimination PVM and gets ``k``,
the king announces ``J`` and Alice answers the unique ``i`` whose index set
contains ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .codes import QuantumCode, discrimination_pvm, embed_errors
from .errors import DimensionError, KingcodeError
from .model import ErrorModel, IndexSets, MeasurementFamily, born, embed_on_slot
from .numerics import DEFAULT_TOL, StateVector, Tolerance

__all__ = [
    "GameConfig",
    "Transcript",
    "ProtocolReport",
    "MonteCarloResult",
    "guess",
    "run_exhaustive",
    "run_montecarlo",
]

ABSTAIN = None


def guess(k: int | None, J: int, sets: IndexSets) -> int | None:
    """Alice's answer for outcome ``k`` once the king reveals ``J``; ``None`` to abstain."""
    if k is None:
        return ABSTAIN
    return sets.owner(k, J)


@dataclass
class GameConfig:
    code: QuantumCode
    families: Sequence[MeasurementFamily]
    err: ErrorModel
    index_sets: IndexSets
    king_slot: int
    rng_seed: int = 0
    n_random_states: int = 20

    def __post_init__(self):
        dims = self.code.ambient_dims
        if not 1 <= self.king_slot <= len(dims):
            raise KingcodeError(f"king slot {self.king_slot} out of range 1..{len(dims)}")
        d = dims[self.king_slot - 1]
        if self.err.dim != d:
            raise DimensionError(f"error operators act on dimension {self.err.dim}, king's system has {d}")
        for fam in self.families:
            if fam.dim != d:
                raise DimensionError(f"family {fam.label} acts on dimension {fam.dim}, king's system has {d}")
        bad = {k for k in self.index_sets.universe() if k > len(self.err)}
        if bad:
            raise KingcodeError(f"index sets mention error indices {sorted(bad)} beyond l={len(self.err)}")
        if self.n_random_states < 0:
            raise KingcodeError("n_random_states must be non-negative")

    def embedded_errors(self) -> list[np.ndarray]:
        return embed_errors(self.err, self.king_slot, self.code.ambient_dims)

    def initial_states(self) -> list[tuple[str, StateVector]]:
        """Code basis states, then seeded random superpositions."""
        states = [(f"basis[{b}]", s) for b, s in enumerate(self.code.states())]
        rng = np.random.default_rng(self.rng_seed)
        states += [(f"random[{r}]", self.code.random_state(rng)) for r in range(self.n_random_states)]
        return states


@dataclass
class Transcript:
    initial: str
    J: int
    king_outcome: int
    king_prob: float
    alice_outcome: int | None
    alice_prob: float
    guess: int | None
    success: bool

    def to_json(self) -> dict:
        return {
            "initial": self.initial,
            "J": self.J,
            "king_outcome": self.king_outcome,
            "king_prob": self.king_prob,
            "alice_outcome": "abstain" if self.alice_outcome is None else self.alice_outcome,
            "alice_prob": self.alice_prob,
            "guess": "abstain" if self.guess is None else self.guess,
            "success": self.success,
        }


@dataclass
class ProtocolReport:
    min_success: float
    max_success: float
    branches: list
    failures: list
    branch_success: dict  # (initial, J, i) -> probability of a correct guess
    king_norm_defect: float
    alice_norm_defect: float
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    @property
    def passed(self) -> bool:
        return not self.failures and self.min_success >= 1 - self.tol.eps_eq

    def to_json(self, include_branches: bool = True) -> dict:
        out = {
            "min_success": self.min_success,
            "max_success": self.max_success,
            "failures": self.failures,
            "king_norm_defect": self.king_norm_defect,
            "alice_norm_defect": self.alice_norm_defect,
            "pass": self.passed,
        }
        if include_branches:
            out["branches"] = [t.to_json() for t in self.branches]
        return out


def run_exhaustive(cfg: GameConfig, tol: Tolerance = DEFAULT_TOL) -> ProtocolReport:
    """Enumerate every initial state, king's choice, king's outcome and Alice's outcome.

    A branch of Alice's outcome with probability above ``eps_eq`` that lies
    outside ``X^(J,i)`` is a leak, and remainder-outcome weight above
    ``eps_eq`` is a failure; both are listed in ``failures``. Smaller weights
    are rounding noise from forming the remainder projector.
    """
    pvm = discrimination_pvm(cfg.code, cfg.embedded_errors(), tol)
    dims = cfg.code.ambient_dims
    threshold = tol.eps_eq
    king_ops = {
        (fam.label, i): embed_on_slot(M, cfg.king_slot, dims)
        for fam in cfg.families
        for i, M in enumerate(fam.ops, start=1)
    }
    branches, failures = [], []
    branch_success = {}
    king_defect = alice_defect = 0.0
    for label, psi in cfg.initial_states():
        for fam in cfg.families:
            J = fam.label
            total_king = 0.0
            for i in range(1, len(fam.ops) + 1):
                king_prob, post = born(king_ops[(J, i)], psi, tol)
                total_king += king_prob
                if post is None:
                    continue
                probs, rest = pvm.outcome_probabilities(post.amplitudes)
                alice_defect = max(alice_defect, abs(float(probs.sum()) + rest - 1.0))
                allowed = set(cfg.index_sets.sets.get((J, i), ()))
                success = 0.0
                for k, q in zip(pvm.error_indices, probs):
                    if q <= threshold:
                        continue
                    g = guess(k, J, cfg.index_sets)
                    ok = g == i
                    success += q if ok else 0.0
                    branches.append(Transcript(label, J, i, king_prob, k, float(q), g, ok))
                    if k not in allowed:
                        failures.append(
                            {"kind": "leak", "initial": label, "J": J, "i": i, "k": k, "prob": float(q)}
                        )
                if rest > threshold:
                    branches.append(Transcript(label, J, i, king_prob, None, rest, None, False))
                    failures.append({"kind": "residual", "initial": label, "J": J, "i": i, "prob": rest})
                branch_success[(label, J, i)] = success
            king_defect = max(king_defect, abs(total_king - 1.0))
    values = list(branch_success.values())
    return ProtocolReport(
        min_success=min(values, default=0.0),
        max_success=max(values, default=0.0),
        branches=branches,
        failures=failures,
        branch_success=branch_success,
        king_norm_defect=king_defect,
        alice_norm_defect=alice_defect,
        tol=tol,
    )


@dataclass
class MonteCarloResult:
    trials: int
    successes: int
    per_family: dict  # J -> (successes, trials)

    @property
    def rate(self) -> float | None:
        return self.successes / self.trials if self.trials else None

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
            "per_family": {str(J): {"successes": s, "trials": t} for J, (s, t) in sorted(self.per_family.items())},
        }


def _sample(rng: np.random.Generator, probs) -> int:
    cdf = np.cumsum(np.clip(np.asarray(probs, dtype=float), 0, None))
    return min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), cdf.size - 1)


def run_montecarlo(cfg: GameConfig, trials: int, tol: Tolerance = DEFAULT_TOL) -> MonteCarloResult:
    """Sampled games: random code state, uniform ``J``, Born-rule outcomes.

    Trial ``t`` draws from its own generator spawned from ``cfg.rng_seed``,
    so any subset of trials can be replayed independently.
    """
    if trials < 0:
        raise KingcodeError("trials must be non-negative")
    pvm = discrimination_pvm(cfg.code, cfg.embedded_errors(), tol)
    dims = cfg.code.ambient_dims
    king_ops = [
        [embed_on_slot(M, cfg.king_slot, dims) for M in fam.ops] for fam in cfg.families
    ]
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(trials)
    per_family = {fam.label: [0, 0] for fam in cfg.families}
    successes = 0
    for seq in seeds:
        rng = np.random.default_rng(seq)
        psi = cfg.code.random_state(rng).amplitudes
        f = int(rng.integers(len(cfg.families)))
        J = cfg.families[f].label
        outs = [op @ psi for op in king_ops[f]]
        i_idx = _sample(rng, [np.vdot(o, o).real for o in outs])
        post = outs[i_idx] / np.linalg.norm(outs[i_idx])
        probs, rest = pvm.outcome_probabilities(post)
        choice = _sample(rng, np.append(probs, rest))
        k = pvm.error_indices[choice] if choice < len(pvm.error_indices) else None
        won = guess(k, J, cfg.index_sets) == i_idx + 1
        successes += won
        per_family[J][0] += won
        per_family[J][1] += 1
    return MonteCarloResult(trials, int(successes), {J: tuple(v) for J, v in per_family.items()})
