"""Payoff matrices, equilibrium enumeration and the convergence assumptions.

Action labels returned by this module are 1-indexed, so ``(1, 1)`` is the
profile where both players choose their first action.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np


class RewardModel(str, Enum):
    GAUSSIAN = "gaussian"  # a ~ N(A_ij, 1)
    BERNOULLI = "bernoulli"  # a ~ Bernoulli(A_ij)

    @classmethod
    def parse(cls, value: "str | RewardModel") -> "RewardModel":
        if isinstance(value, RewardModel):
            return value
        key = str(value).strip().lower()
        aliases = {
            "gaussian": cls.GAUSSIAN,
            "gaussianunitvariance": cls.GAUSSIAN,
            "normal": cls.GAUSSIAN,
            "bernoulli": cls.BERNOULLI,
        }
        if key not in aliases:
            raise ValueError(f"unknown reward model {value!r}")
        return aliases[key]


@dataclass(frozen=True, eq=False)
class PayoffGame:
    """Expected payoff matrices of a two-player game.

    ``A[i, j]`` is Player 1's expected payoff and ``B[i, j]`` Player 2's when
    Player 1 plays row ``i`` and Player 2 plays column ``j``.
    """

    A: np.ndarray
    B: np.ndarray
    reward_model: RewardModel = RewardModel.GAUSSIAN
    name: str = "custom"

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.ndim != 2 or B.ndim != 2:
            raise ValueError("payoff matrices must be two-dimensional")
        if A.shape != B.shape:
            raise ValueError(f"A has shape {A.shape} but B has shape {B.shape}")
        if A.shape[0] < 2 or A.shape[1] < 2:
            raise ValueError("each player needs at least two actions")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("payoffs must be finite")
        model = RewardModel.parse(self.reward_model)
        if model is RewardModel.BERNOULLI:
            if A.min() < 0 or A.max() > 1 or B.min() < 0 or B.max() > 1:
                raise ValueError("Bernoulli rewards need every payoff in [0, 1]")
        A.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "reward_model", model)

    @property
    def n_actions(self) -> tuple[int, int]:
        return self.A.shape

    def with_reward_model(self, model) -> "PayoffGame":
        return PayoffGame(self.A, self.B, RewardModel.parse(model), self.name)


class TieViolation(NamedTuple):
    matrix: str  # "A" or "B"
    line: int  # column of A / row of B, 1-indexed
    pair: tuple[int, int]  # tied actions of the deviating player, 1-indexed


@dataclass
class EquilibriumReport:
    pure_ne: list[tuple[int, int]]
    mixed_ne_2x2: tuple[float, float] | None
    assumption1_holds: bool
    no_ties_holds: bool
    tie_violations: list[TieViolation] = field(default_factory=list)


@dataclass
class StabilityReport:
    holds: bool
    worst_margin: float
    violating_pairs: list[tuple[int, tuple[int, int]]]
    # smallest relative slack 1 - LHS/RHS per player; positive iff that
    # player's inequalities all hold
    epsilon_p1: float = float("nan")
    epsilon_p2: float = float("nan")


PD_A = [[0.2, 5.0], [0.1, 4.0]]
PD_B = [[0.2, 0.1], [5.0, 4.0]]

A1 = [
    [2.5, 1.9, 2.0, 1.9, 1.9],
    [0.1, 0.2, 0.3, 0.3, 0.2],
    [1.6, 1.8, 1.7, 1.8, 1.8],
    [0.5, 0.5, 0.4, 0.4, 0.4],
    [0.9, 0.8, 0.9, 0.8, 0.8],
    [1.2, 1.1, 1.2, 1.2, 1.1],
]
B1 = [
    [2.0, 0.5, 0.1, 1.0, 1.4],
    [1.8, 0.3, 0.2, 1.2, 1.3],
    [2.2, 0.4, 0.1, 1.1, 1.3],
    [1.9, 0.5, 0.1, 1.1, 1.4],
    [1.8, 0.3, 0.2, 1.2, 1.3],
    [1.9, 0.4, 0.2, 1.2, 1.4],
]
A2 = [[0.5, 0.4], [0.2, 0.3]]
B2 = [[0.7, 0.3], [0.6, 0.5]]
A3 = [[0.3, 0.3], [0.4, 0.1]]
B3 = [[0.1, 0.3], [0.4, 0.3]]
A4 = [[0.5, 0.2], [0.1, 0.3]]
B4 = [[0.3, 0.5], [0.7, 0.4]]

_BUILTIN = {
    "pd": (PD_A, PD_B, RewardModel.GAUSSIAN),
    "a1b1": (A1, B1, RewardModel.GAUSSIAN),
    "a2b2": (A2, B2, RewardModel.BERNOULLI),
    "a3b3": (A3, B3, RewardModel.GAUSSIAN),
    "a4b4": (A4, B4, RewardModel.GAUSSIAN),
}

BUILTIN_GAMES = tuple(_BUILTIN)


def builtin_game(key: str) -> PayoffGame:
    """Load one of the named games ``pd``, ``a1b1``, ``a2b2``, ``a3b3``, ``a4b4``."""
    try:
        A, B, model = _BUILTIN[key.lower()]
    except KeyError:
        raise KeyError(f"unknown game {key!r}; choose from {', '.join(BUILTIN_GAMES)}") from None
    return PayoffGame(A, B, model, name=key.lower())


def pure_nash_equilibria(game: PayoffGame) -> list[tuple[int, int]]:
    """All pure profiles where each action is a (weak) best response."""
    A, B = game.A, game.B
    p1_best = A == A.max(axis=0, keepdims=True)
    p2_best = B == B.max(axis=1, keepdims=True)
    rows, cols = np.nonzero(p1_best & p2_best)
    return [(int(i) + 1, int(j) + 1) for i, j in zip(rows, cols)]


def is_pure_nash(game: PayoffGame, ne: tuple[int, int]) -> bool:
    i, j = _zero_based(game, ne)
    return bool(game.A[i, j] >= game.A[:, j].max() and game.B[i, j] >= game.B[i, :].max())


def check_no_ties(game: PayoffGame) -> tuple[bool, list[TieViolation]]:
    """Exact-equality scan for tied payoffs within a column of A or a row of B."""
    violations = []
    I, J = game.n_actions
    for j in range(J):
        for i in range(I):
            for i2 in range(i + 1, I):
                if game.A[i, j] == game.A[i2, j]:
                    violations.append(TieViolation("A", j + 1, (i + 1, i2 + 1)))
    for i in range(I):
        for j in range(J):
            for j2 in range(j + 1, J):
                if game.B[i, j] == game.B[i, j2]:
                    violations.append(TieViolation("B", i + 1, (j + 1, j2 + 1)))
    return not violations, violations


def check_payoff_stability(game: PayoffGame, ne: tuple[int, int]) -> StabilityReport:
    """Evaluate the payoff-stability inequalities relative to the equilibrium ``ne``.

    For Player 1 and every pair of rows ``i < l`` the margin is::

        |A[i, j*] - A[l, j*]| - (dev_A(i) + dev_A(l)),
        dev_A(i) = max_{m != j*} |A[i, j*] - A[i, m]|

    and symmetrically for Player 2 over pairs of columns of ``B`` with the
    deviation taken over rows ``m != i*``.
    """
    if not is_pure_nash(game, ne):
        raise ValueError(f"{ne} is not a pure Nash equilibrium of this game")
    i_star, j_star = _zero_based(game, ne)
    A, B = game.A, game.B

    col = A[:, j_star]
    dev_a = np.abs(np.delete(A, j_star, axis=1) - col[:, None]).max(axis=1)
    row = B[i_star, :]
    dev_b = np.abs(np.delete(B, i_star, axis=0) - row[None, :]).max(axis=0)

    margins = []
    violating = []
    eps = {1: np.inf, 2: np.inf}
    for player, ne_payoffs, dev in ((1, col, dev_a), (2, row, dev_b)):
        n = len(ne_payoffs)
        for a in range(n):
            for b in range(a + 1, n):
                rhs = abs(ne_payoffs[a] - ne_payoffs[b])
                lhs = dev[a] + dev[b]
                margin = rhs - lhs
                margins.append(margin)
                if not margin > 0:
                    violating.append((player, (a + 1, b + 1)))
                ratio = margin / rhs if rhs > 0 else -np.inf
                eps[player] = min(eps[player], ratio)

    worst = float(min(margins))
    return StabilityReport(
        holds=not violating,
        worst_margin=worst,
        violating_pairs=violating,
        epsilon_p1=float(eps[1]),
        epsilon_p2=float(eps[2]),
    )


def mixed_ne_2x2(game: PayoffGame) -> tuple[float, float] | None:
    """Interior mixed equilibrium ``(p, q)`` of a 2x2 game, if any.

    ``p`` is Player 1's probability of action 1 (it makes Player 2
    indifferent) and ``q`` is Player 2's probability of action 1.
    """
    if game.n_actions != (2, 2):
        raise ValueError("mixed_ne_2x2 needs a 2x2 game")
    A, B = game.A, game.B
    den_p = B[0, 0] - B[1, 0] - B[0, 1] + B[1, 1]
    den_q = A[0, 0] - A[0, 1] - A[1, 0] + A[1, 1]
    if den_p == 0 or den_q == 0:
        return None
    p = (B[1, 1] - B[1, 0]) / den_p
    q = (A[1, 1] - A[0, 1]) / den_q
    if 0 < p < 1 and 0 < q < 1:
        return float(p), float(q)
    return None


def analyze(game: PayoffGame) -> EquilibriumReport:
    pure = pure_nash_equilibria(game)
    no_ties, ties = check_no_ties(game)
    mixed = mixed_ne_2x2(game) if game.n_actions == (2, 2) else None
    return EquilibriumReport(
        pure_ne=pure,
        mixed_ne_2x2=mixed,
        assumption1_holds=no_ties and len(pure) == 1,
        no_ties_holds=no_ties,
        tie_violations=ties,
    )


def equilibrium_point(game: PayoffGame, ne: tuple[int, int]):
    """The rest point S* of the mean field for the pure equilibrium ``ne``.

    Posterior means equal the payoffs against the opponent's equilibrium
    action and every variance is zero.
    """
    from .dynamics import SystemState

    if not is_pure_nash(game, ne):
        raise ValueError(f"{ne} is not a pure Nash equilibrium of this game")
    i_star, j_star = _zero_based(game, ne)
    I, J = game.n_actions
    return SystemState(
        x=game.A[:, j_star].copy(),
        y=game.B[i_star, :].copy(),
        w=np.zeros(I),
        v=np.zeros(J),
    )


def _zero_based(game: PayoffGame, ne) -> tuple[int, int]:
    i, j = (int(ne[0]), int(ne[1]))
    I, J = game.n_actions
    if not (1 <= i <= I and 1 <= j <= J):
        raise ValueError(f"action pair {ne} out of range for a {I}x{J} game")
    return i - 1, j - 1
