"""One round of two-player Thompson sampling and its stochastic-approximation form.

State layout follows the vector ``S = (x_1..x_I, y_1..y_J, w_1..w_I, v_1..v_J)``
of posterior means and variances.  Positions inside records and state vectors
are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import _kernels
from .choice import (
    DEFAULT_TOL,
    BeliefVector,
    choice_probabilities_2,
    choice_probabilities_exact,
    degenerate_choice,
)
from .game import PayoffGame, RewardModel


@dataclass(frozen=True, eq=False)
class PlayerState:
    """Pull counts and payoff sums of one player (the prior mean seeds each sum)."""

    pull_counts: np.ndarray
    payoff_sums: np.ndarray
    prior_means: np.ndarray

    @property
    def means(self) -> np.ndarray:
        return self.payoff_sums / (self.pull_counts + 1.0)

    @property
    def variances(self) -> np.ndarray:
        return 1.0 / (self.pull_counts + 1.0)

    @property
    def sds(self) -> np.ndarray:
        return 1.0 / np.sqrt(self.pull_counts + 1.0)

    @property
    def round(self) -> int:
        return int(self.pull_counts.sum())

    def belief(self) -> BeliefVector:
        return BeliefVector(self.means, self.variances)

    def pulled(self, k: int, reward: float) -> "PlayerState":
        counts = self.pull_counts.copy()
        sums = self.payoff_sums.copy()
        counts[k] += 1
        sums[k] += reward
        return PlayerState(counts, sums, self.prior_means)


@dataclass(frozen=True, eq=False)
class SystemState:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "w", "v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.x.shape != self.w.shape or self.y.shape != self.v.shape:
            raise ValueError("means and variances must have matching lengths")

    @classmethod
    def from_players(cls, p1: PlayerState, p2: PlayerState) -> "SystemState":
        return cls(p1.means, p2.means, p1.variances, p2.variances)

    @classmethod
    def from_vector(cls, vec, I: int, J: int) -> "SystemState":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (2 * (I + J),):
            raise ValueError(f"expected a vector of length {2 * (I + J)}")
        return cls(vec[:I], vec[I : I + J], vec[I + J : 2 * I + J], vec[2 * I + J :])

    @property
    def n_actions(self) -> tuple[int, int]:
        return self.x.size, self.y.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate((self.x, self.y, self.w, self.v))


@dataclass(frozen=True, eq=False)
class RoundRecord:
    """Everything the stochastic-approximation view needs about one round.

    ``phi`` and ``psi`` are the choice distributions at the state *before* the
    round; ``noise`` has length ``2(I+J)`` with only the two chosen slots set.
    """

    round: int
    action_p1: int
    action_p2: int
    reward_p1: float
    reward_p2: float
    step_alpha: np.ndarray
    step_beta: np.ndarray
    noise: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @property
    def gamma(self) -> np.ndarray:
        return np.concatenate((self.step_alpha, self.step_beta, self.step_alpha, self.step_beta))


def init_state(prior_means_p1, prior_means_p2) -> tuple[PlayerState, PlayerState]:
    out = []
    for prior in (prior_means_p1, prior_means_p2):
        prior = np.array(prior, dtype=float).ravel()
        if prior.size == 0:
            raise ValueError("prior means must not be empty")
        if prior.size < 2:
            raise ValueError("each player needs at least two actions")
        if not np.all(np.isfinite(prior)):
            raise ValueError("prior means must be finite")
        out.append(PlayerState(np.zeros(prior.size, dtype=np.int64), prior.copy(), prior.copy()))
    return out[0], out[1]


def _side_probabilities(means, variances, tol):
    if np.any(variances < 0):
        raise ValueError("variances must be non-negative")
    if np.all(variances == 0):
        return degenerate_choice(means)
    if np.any(variances == 0):
        raise ValueError("a belief mixing zero and positive variances is not supported")
    if means.size == 2:
        return choice_probabilities_2(means, variances)
    return choice_probabilities_exact(BeliefVector(means, variances), tol).probs


def choice_pair(S: SystemState, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Both players' choice distributions at state ``S``."""
    return _side_probabilities(S.x, S.w, tol), _side_probabilities(S.y, S.v, tol)


def mean_field_from_choices(phi, psi, game: PayoffGame) -> np.ndarray:
    I, J = game.n_actions
    return np.concatenate((game.A @ psi, game.B.T @ phi, np.zeros(I + J)))


def mean_field(S: SystemState, game: PayoffGame, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``F(S)``: expected payoffs against the opponent's current choice distribution, then zeros."""
    if S.n_actions != game.n_actions:
        raise ValueError("state and game dimensions differ")
    phi, psi = choice_pair(S, tol)
    return mean_field_from_choices(phi, psi, game)


def noise_vector(
    action_p1: int,
    action_p2: int,
    reward_p1: float,
    reward_p2: float,
    S_prev: SystemState,
    game: PayoffGame,
    phi: np.ndarray | None = None,
    psi: np.ndarray | None = None,
) -> np.ndarray:
    """Martingale noise of one round: observed reward minus its conditional mean.

    Only the chosen actions' slots are filled; every other slot meets a zero
    step size in the update and is left at zero.
    """
    if phi is None or psi is None:
        phi, psi = choice_pair(S_prev)
    I, J = game.n_actions
    noise = np.zeros(2 * (I + J))
    noise[action_p1] = reward_p1 - game.A[action_p1] @ psi
    noise[I + action_p2] = reward_p2 - game.B[:, action_p2] @ phi
    return noise


def bernoulli_thresholds(game: PayoffGame) -> tuple[np.ndarray, np.ndarray]:
    """Standard-normal quantiles so that ``z < thr`` has probability ``A_ij``."""
    return ndtri(game.A), ndtri(game.B)


def _draw_round(mean1, sd1, mean2, sd2, game, rng, thresholds):
    theta = mean1 + sd1 * rng.standard_normal(mean1.size)
    vartheta = mean2 + sd2 * rng.standard_normal(mean2.size)
    i = int(np.argmax(theta))
    j = int(np.argmax(vartheta))
    za = rng.standard_normal()
    zb = rng.standard_normal()
    if game.reward_model is RewardModel.BERNOULLI:
        thr_A, thr_B = thresholds
        a = 1.0 if za < thr_A[i, j] else 0.0
        b = 1.0 if zb < thr_B[i, j] else 0.0
    else:
        a = game.A[i, j] + za
        b = game.B[i, j] + zb
    return i, j, a, b


def step(
    p1: PlayerState,
    p2: PlayerState,
    game: PayoffGame,
    rng: np.random.Generator,
    tol: float = DEFAULT_TOL,
) -> tuple[PlayerState, PlayerState, RoundRecord]:
    """Play one round and return the updated players with the round's record.

    The Bayesian update is the unit-variance Gaussian rule whatever the
    game's reward model.
    """
    thresholds = bernoulli_thresholds(game) if game.reward_model is RewardModel.BERNOULLI else None
    S_prev = SystemState.from_players(p1, p2)
    phi, psi = choice_pair(S_prev, tol)
    i, j, a, b = _draw_round(p1.means, p1.sds, p2.means, p2.sds, game, rng, thresholds)

    q1 = p1.pulled(i, a)
    q2 = p2.pulled(j, b)
    alpha = np.zeros(p1.pull_counts.size)
    beta = np.zeros(p2.pull_counts.size)
    alpha[i] = q1.variances[i]
    beta[j] = q2.variances[j]
    record = RoundRecord(
        round=p1.round + 1,
        action_p1=i,
        action_p2=j,
        reward_p1=a,
        reward_p2=b,
        step_alpha=alpha,
        step_beta=beta,
        noise=noise_vector(i, j, a, b, S_prev, game, phi, psi),
        phi=phi,
        psi=psi,
    )
    return q1, q2, record


def simulate_records(
    game: PayoffGame,
    p1: PlayerState,
    p2: PlayerState,
    rounds: int,
    rng: np.random.Generator,
    tol: float = DEFAULT_TOL,
) -> tuple[list[RoundRecord], PlayerState, PlayerState]:
    """Run ``rounds`` rounds through :func:`step`, keeping every record."""
    records = []
    for _ in range(int(rounds)):
        p1, p2, rec = step(p1, p2, game, rng, tol)
        records.append(rec)
    return records, p1, p2


def sa_residual(S_prev: SystemState, S_next: SystemState, record: RoundRecord, game: PayoffGame) -> np.ndarray:
    """``S_next - S_prev - gamma * (F(S_prev) - S_prev + noise)``, coordinatewise."""
    F = mean_field_from_choices(record.phi, record.psi, game)
    prev = S_prev.as_vector()
    return S_next.as_vector() - prev - record.gamma * (F - prev + record.noise)


def frozen_noise(
    S: SystemState,
    game: PayoffGame,
    rounds: int,
    rng: np.random.Generator,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Noise vectors of ``rounds`` independent rounds played from the same state.

    Returns an array of shape ``(rounds, 2(I+J))``.  Beliefs are never
    updated, so every row has the same conditional law.
    """
    if np.any(S.w <= 0) or np.any(S.v <= 0):
        raise ValueError("frozen-state sampling needs strictly positive variances")
    thresholds = bernoulli_thresholds(game) if game.reward_model is RewardModel.BERNOULLI else None
    phi, psi = choice_pair(S, tol)
    sd1, sd2 = np.sqrt(S.w), np.sqrt(S.v)
    I, J = game.n_actions
    out = np.zeros((int(rounds), 2 * (I + J)))
    for n in range(int(rounds)):
        i, j, a, b = _draw_round(S.x, sd1, S.y, sd2, game, rng, thresholds)
        out[n] = noise_vector(i, j, a, b, S, game, phi, psi)
    return out


@dataclass
class PathResult:
    """Output of the compiled simulator: statistics at the recorded rounds."""

    record_rounds: np.ndarray
    counts_p1: np.ndarray
    sums_p1: np.ndarray
    counts_p2: np.ndarray
    sums_p2: np.ndarray
    final_p1: PlayerState
    final_p2: PlayerState
    max_abs_x: np.ndarray
    max_abs_y: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.sums_p1 / (self.counts_p1 + 1.0)

    @property
    def y(self) -> np.ndarray:
        return self.sums_p2 / (self.counts_p2 + 1.0)

    @property
    def w(self) -> np.ndarray:
        return 1.0 / (self.counts_p1 + 1.0)

    @property
    def v(self) -> np.ndarray:
        return 1.0 / (self.counts_p2 + 1.0)


def simulate_path(
    game: PayoffGame,
    p1: PlayerState,
    p2: PlayerState,
    rounds: int,
    rng: np.random.Generator,
    record_rounds=None,
) -> PathResult:
    """Advance ``rounds`` rounds with the compiled kernel.

    Consumes ``rng`` exactly as repeated calls to :func:`step` would.
    ``record_rounds`` are absolute round numbers at which to snapshot.
    """
    rounds = int(rounds)
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    start = p1.round
    if p2.round != start:
        raise ValueError("players disagree on the round number")
    rec = np.asarray([] if record_rounds is None else record_rounds, dtype=np.int64)
    rec = rec[(rec > start) & (rec <= start + rounds)]
    if rec.size and np.any(np.diff(rec) <= 0):
        raise ValueError("record rounds must be strictly increasing")
    I, J = game.n_actions
    bern = game.reward_model is RewardModel.BERNOULLI
    thr_A, thr_B = bernoulli_thresholds(game) if bern else (np.zeros((I, J)), np.zeros((I, J)))

    counts1 = p1.pull_counts.astype(np.int64).copy()
    counts2 = p2.pull_counts.astype(np.int64).copy()
    sums1 = p1.payoff_sums.astype(float).copy()
    sums2 = p2.payoff_sums.astype(float).copy()
    rc1 = np.zeros((rec.size, I), dtype=np.int64)
    rs1 = np.zeros((rec.size, I))
    rc2 = np.zeros((rec.size, J), dtype=np.int64)
    rs2 = np.zeros((rec.size, J))
    max1 = np.zeros(I)
    max2 = np.zeros(J)
    written = _kernels.run_rounds(
        rng, np.ascontiguousarray(game.A), np.ascontiguousarray(game.B),
        np.ascontiguousarray(thr_A), np.ascontiguousarray(thr_B), bern,
        counts1, sums1, counts2, sums2, start + 1, start + rounds,
        rec, rc1, rs1, rc2, rs2, max1, max2,
    )  # fmt: skip
    assert written == rec.size
    return PathResult(
        record_rounds=rec,
        counts_p1=rc1,
        sums_p1=rs1,
        counts_p2=rc2,
        sums_p2=rs2,
        final_p1=PlayerState(counts1, sums1, p1.prior_means),
        final_p2=PlayerState(counts2, sums2, p2.prior_means),
        max_abs_x=max1,
        max_abs_y=max2,
    )
