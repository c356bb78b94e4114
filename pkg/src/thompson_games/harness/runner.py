"""Single-path and ensemble execution plus outcome classification."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..choice import DEFAULT_TOL, choice_probabilities_2, choice_probabilities_exact, BeliefVector
from ..dynamics import PathResult, SystemState, init_state, simulate_path
from ..game import EquilibriumReport, analyze
from .config import SimulationConfig


class OutcomeKind(str, Enum):
    NASH_CONVERGENT = "NashConvergent"
    PURE_PROFILE = "PureProfile"
    OSCILLATING = "Oscillating"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class OutcomeClass:
    kind: OutcomeKind
    profile: tuple[int, int] | None = None  # 1-based, set for the two pure kinds

    @property
    def label(self) -> str:
        if self.profile is None:
            return self.kind.value
        return f"{self.kind.value}({self.profile[0]},{self.profile[1]})"

    def __str__(self):
        return self.label


@dataclass
class PathTrace:
    """Recorded observables of one path.

    ``phi``/``psi`` hold the full choice distributions (one row per recorded
    round); ``phi1``/``psi1`` are their first columns.
    """

    path_index: int
    base_seed: int
    rounds: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    final_state: SystemState
    pull_counts_p1: np.ndarray
    pull_counts_p2: np.ndarray
    prior_p1: np.ndarray
    prior_p2: np.ndarray
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    max_abs_x: np.ndarray | None = None
    max_abs_y: np.ndarray | None = None

    @property
    def phi1(self) -> np.ndarray:
        return self.phi[:, 0]

    @property
    def psi1(self) -> np.ndarray:
        return self.psi[:, 0]


@dataclass
class EnsembleSummary:
    rounds: np.ndarray
    mean_phi1: np.ndarray
    mean_psi1: np.ndarray
    outcomes: list[OutcomeClass]
    config_echo: dict[str, str] = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return len(self.outcomes)

    @property
    def class_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(o.label for o in self.outcomes).items()))

    @property
    def class_fractions(self) -> dict[str, float]:
        return {k: v / self.n_paths for k, v in self.class_counts.items()}

    def profile_fraction(self, profile: tuple[int, int]) -> float:
        """Share of paths locked into ``profile``, whether or not it is an equilibrium."""
        hits = sum(1 for o in self.outcomes if o.profile == tuple(profile))
        return hits / self.n_paths

    def kind_fraction(self, kind: OutcomeKind) -> float:
        return sum(1 for o in self.outcomes if o.kind is kind) / self.n_paths


def path_seeds(base_seed: int, path_index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (prior, simulation) generators for one path."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(path_index,))
    prior_ss, sim_ss = ss.spawn(2)
    return np.random.default_rng(prior_ss), np.random.default_rng(sim_ss)


def _choice_rows(means: np.ndarray, variances: np.ndarray, tol: float) -> np.ndarray:
    if means.shape[1] == 2:
        return choice_probabilities_2(means, variances)
    return np.array([choice_probabilities_exact(BeliefVector(m, v), tol).probs for m, v in zip(means, variances)])


def run_path(config: SimulationConfig, path_index: int = 0, tol: float = DEFAULT_TOL) -> PathTrace:
    """Simulate one path and record exact choice probabilities on the schedule."""
    prior_rng, sim_rng = path_seeds(config.base_seed, path_index)
    I, J = config.game.n_actions
    prior1 = config.prior_p1.draw(I, prior_rng)
    prior2 = config.prior_p2.draw(J, prior_rng)
    p1, p2 = init_state(prior1, prior2)
    rounds = config.record.rounds(config.horizon)
    res: PathResult = simulate_path(config.game, p1, p2, config.horizon, sim_rng, rounds)
    x, y = res.x, res.y
    phi = _choice_rows(x, res.w, tol)
    psi = _choice_rows(y, res.v, tol)
    return PathTrace(
        path_index=path_index,
        base_seed=config.base_seed,
        rounds=res.record_rounds,
        phi=phi,
        psi=psi,
        final_state=SystemState.from_players(res.final_p1, res.final_p2),
        pull_counts_p1=res.final_p1.pull_counts,
        pull_counts_p2=res.final_p2.pull_counts,
        prior_p1=prior1,
        prior_p2=prior2,
        x=x if config.record_beliefs else None,
        y=y if config.record_beliefs else None,
        max_abs_x=res.max_abs_x,
        max_abs_y=res.max_abs_y,
    )


def classify_outcome(
    trace: PathTrace,
    report: EquilibriumReport,
    window_frac: float = 0.1,
    threshold: float = 0.95,
) -> OutcomeClass:
    """Classify a path from the final ``window_frac`` of its recorded rows.

    Both players' largest windowed-mean probabilities above ``threshold``
    give a pure profile (tagged NashConvergent when it is a pure NE); a
    windowed range of phi1 or psi1 above 0.5 means oscillation.
    """
    n = trace.rounds.size
    width = int(math.ceil(window_frac * n))
    if n == 0 or width < 1:
        raise ValueError("empty classification window")
    phi = trace.phi[-width:]
    psi = trace.psi[-width:]
    m1 = phi.mean(axis=0)
    m2 = psi.mean(axis=0)
    i, j = int(np.argmax(m1)), int(np.argmax(m2))
    if m1[i] > threshold and m2[j] > threshold:
        profile = (i + 1, j + 1)
        kind = OutcomeKind.NASH_CONVERGENT if profile in report.pure_ne else OutcomeKind.PURE_PROFILE
        return OutcomeClass(kind, profile)
    if np.ptp(phi[:, 0]) > 0.5 or np.ptp(psi[:, 0]) > 0.5:
        return OutcomeClass(OutcomeKind.OSCILLATING)
    return OutcomeClass(OutcomeKind.UNDETERMINED)


def run_ensemble(
    config: SimulationConfig,
    keep_traces: bool = True,
    tol: float = DEFAULT_TOL,
) -> tuple[EnsembleSummary, list[PathTrace]]:
    """Run ``config.paths`` paths on ``config.threads`` workers.

    Results are gathered in path-index order, so averages and counts do not
    depend on the number of workers.
    """
    report = analyze(config.game)
    rounds = config.record.rounds(config.horizon)
    sum_phi = np.zeros(rounds.size)
    sum_psi = np.zeros(rounds.size)
    outcomes: list[OutcomeClass] = []
    traces: list[PathTrace] = []

    def job(k):
        trace = run_path(config, k, tol)
        return trace, classify_outcome(trace, report, config.window_frac, config.threshold)

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        # map yields in submission order
        for trace, outcome in pool.map(job, range(config.paths)):
            sum_phi += trace.phi1
            sum_psi += trace.psi1
            outcomes.append(outcome)
            if keep_traces:
                traces.append(trace)

    summary = EnsembleSummary(
        rounds=rounds,
        mean_phi1=sum_phi / config.paths,
        mean_psi1=sum_psi / config.paths,
        outcomes=outcomes,
        config_echo=config.echo(),
    )
    return summary, traces
