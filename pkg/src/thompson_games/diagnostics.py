"""Numerical checks of the error decomposition used in the convergence analysis.

Coordinates are numbered 1..2(I+J) in the order of the state vector
``(x, y, w, v)``; round numbers are 1-based, so ``records[n - 1]`` describes
the transition from ``S_{n-1}`` to ``S_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import RoundRecord, SystemState, mean_field_from_choices
from .game import PayoffGame, StabilityReport, _zero_based, is_pure_nash, pure_nash_equilibria


@dataclass
class SADecomposition:
    """``S_{k,n} - S*_k = C + D + E`` for one coordinate at the sampled rounds.

    ``C`` is the decayed initial error, ``D`` the accumulated mean-field drift
    and ``E`` the accumulated noise.
    """

    coordinate: int
    rounds: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    error: np.ndarray

    def identity_residual(self) -> np.ndarray:
        """``|error - (C + D + E)|`` relative to the largest of the four terms at each round."""
        scale = np.maximum.reduce([np.abs(self.C), np.abs(self.D), np.abs(self.E), np.abs(self.error)])
        return np.abs(self.error - (self.C + self.D + self.E)) / np.maximum(scale, np.finfo(float).tiny)


def _initial_stats(S0: SystemState):
    counts = []
    for w in (S0.w, S0.v):
        n = np.rint(1.0 / w - 1.0)
        if np.any(n < 0) or not np.allclose(1.0 / (n + 1.0), w, rtol=1e-12, atol=0):
            raise ValueError("S0 variances must be of the form 1/(count+1)")
        counts.append(n)
    c1, c2 = counts
    return c1, S0.x * (c1 + 1.0), c2, S0.y * (c2 + 1.0)


def decompose_path(
    records: Iterable[RoundRecord],
    S0: SystemState,
    Sstar: SystemState,
    game: PayoffGame,
    sample_rounds: Sequence[int] | None = None,
) -> list[SADecomposition]:
    """Run the C/D/E recursions along a recorded path.

    Uses ``C_n = (1-g) C_{n-1}``, ``D_n = (1-g) D_{n-1} + g (F(S_{n-1}) - S*)``
    and ``E_n = (1-g) E_{n-1} + g * noise``, with ``F`` rebuilt from the
    choice distributions stored in each record.  The direct error is
    recomputed from pull counts and payoff sums.  Round 0 is always sampled;
    ``sample_rounds`` (default: every round) adds more.
    """
    I, J = game.n_actions
    if S0.n_actions != (I, J) or Sstar.n_actions != (I, J):
        raise ValueError("state and game dimensions differ")
    if not pure_nash_equilibria(game):
        raise ValueError("the decomposition needs a pure Nash equilibrium rest point")
    wanted = None if sample_rounds is None else set(int(r) for r in sample_rounds)

    star = Sstar.as_vector()
    C = S0.as_vector() - star
    D = np.zeros_like(C)
    E = np.zeros_like(C)
    c1, r1, c2, r2 = _initial_stats(S0)
    r1 = r1.copy()
    r2 = r2.copy()
    c1 = c1.copy()
    c2 = c2.copy()

    out_rounds = [0]
    rows_c, rows_d, rows_e, rows_err = [C.copy()], [D.copy()], [E.copy()], [C.copy()]
    expected = None
    for rec in records:
        if expected is None:
            expected = rec.round
        if rec.round != expected:
            raise ValueError(f"non-contiguous records: expected round {expected}, got {rec.round}")
        expected += 1
        g = rec.gamma
        F = mean_field_from_choices(rec.phi, rec.psi, game)
        keep = 1.0 - g
        C = keep * C
        D = keep * D + g * (F - star)
        E = keep * E + g * rec.noise

        c1[rec.action_p1] += 1
        r1[rec.action_p1] += rec.reward_p1
        c2[rec.action_p2] += 1
        r2[rec.action_p2] += rec.reward_p2
        if wanted is None or rec.round in wanted:
            S = np.concatenate((r1 / (c1 + 1.0), r2 / (c2 + 1.0), 1.0 / (c1 + 1.0), 1.0 / (c2 + 1.0)))
            out_rounds.append(rec.round)
            rows_c.append(C.copy())
            rows_d.append(D.copy())
            rows_e.append(E.copy())
            rows_err.append(S - star)

    rounds = np.asarray(out_rounds, dtype=np.int64)
    Cs, Ds, Es, errs = (np.array(r) for r in (rows_c, rows_d, rows_e, rows_err))
    return [
        SADecomposition(k + 1, rounds, Cs[:, k], Ds[:, k], Es[:, k], errs[:, k])
        for k in range(2 * (I + J))
    ]


def step_sizes(records: Sequence[RoundRecord]) -> np.ndarray:
    """Matrix of per-round step sizes, one row per round."""
    return np.array([r.gamma for r in records])


def stepsize_identity_check(records, k: int, m: int, n: int, gammas: np.ndarray | None = None) -> float:
    """Residual of ``prod_{m..n}(1-g) + sum_{t=m..n} [prod_{s=t+1..n}(1-g_s)] g_t = 1``."""
    G = step_sizes(records) if gammas is None else gammas
    if not (1 <= k <= G.shape[1]):
        raise IndexError(f"coordinate {k} out of range 1..{G.shape[1]}")
    if not (1 <= m <= n <= G.shape[0]):
        raise IndexError(f"need 1 <= m <= n <= {G.shape[0]}, got m={m}, n={n}")
    g = G[m - 1 : n, k - 1]
    tail = np.cumprod((1.0 - g)[::-1])[::-1]
    after = np.append(tail[1:], 1.0)
    return abs(float(tail[0]) + math.fsum(after * g) - 1.0)


def vanishing_product_check(records, k: int, gammas: np.ndarray | None = None) -> float:
    """``prod_t (1 - g_{k,t})`` over the whole path; equals ``1/(pulls + 1)`` from a fresh prior."""
    G = step_sizes(records) if gammas is None else gammas
    if not (1 <= k <= G.shape[1]):
        raise IndexError(f"coordinate {k} out of range 1..{G.shape[1]}")
    return float(np.prod(1.0 - G[:, k - 1]))


def drift_bound(game: PayoffGame, ne: tuple[int, int], k: int) -> float:
    """Upper bound on ``|D|`` for posterior-mean coordinate ``k``."""
    i_star, j_star = _zero_based(game, ne)
    I, J = game.n_actions
    if 1 <= k <= I:
        row = game.A[k - 1]
        return float(np.max(np.abs(np.delete(row, j_star) - row[j_star])))
    if I < k <= I + J:
        col = game.B[:, k - I - 1]
        return float(np.max(np.abs(np.delete(col, i_star) - col[i_star])))
    raise ValueError(f"coordinate {k} is not a posterior-mean coordinate")


def drift_bound_check(decomp: SADecomposition, game: PayoffGame, ne: tuple[int, int], slack: float = 1e-9) -> bool:
    if not is_pure_nash(game, ne):
        raise ValueError(f"{ne} is not a pure Nash equilibrium of this game")
    bound = drift_bound(game, ne, decomp.coordinate)
    return bool(np.all(np.abs(decomp.D) <= bound + slack))


def noise_moment_bound(game: PayoffGame) -> float:
    """``(I+J) + sum(A^2 + B^2)/4``, a bound on the noise vector's second moment."""
    I, J = game.n_actions
    return float(I + J + (np.sum(game.A**2) + np.sum(game.B**2)) / 4.0)


@dataclass
class SeparationResult:
    min_gap: float
    threshold: float
    holds: bool
    borderline: bool  # holds, but by less than a factor of two


def separation_check(
    x_window: np.ndarray,
    game: PayoffGame,
    stability: StabilityReport,
    ne: tuple[int, int],
) -> SeparationResult:
    """Player 1's smallest pairwise posterior-mean gap over a window of rounds.

    ``x_window`` has one row per round.  The threshold is
    ``(eps_1 / 2) * min_{i != k} |A[i, j*] - A[k, j*]|`` with ``eps_1`` the
    relative slack reported by the stability check.
    """
    _, j_star = _zero_based(game, ne)
    x_window = np.atleast_2d(np.asarray(x_window, dtype=float))
    if x_window.shape[0] == 0:
        raise ValueError("empty window")
    I = x_window.shape[1]
    iu = np.triu_indices(I, 1)
    gaps = np.abs(x_window[:, iu[0]] - x_window[:, iu[1]])
    col = game.A[:, j_star]
    payoff_gap = np.abs(col[iu[0]] - col[iu[1]]).min()
    threshold = 0.5 * stability.epsilon_p1 * payoff_gap
    min_gap = float(gaps.min())
    holds = threshold > 0 and min_gap > threshold
    return SeparationResult(min_gap, float(threshold), bool(holds), bool(holds and min_gap < 2 * threshold))
