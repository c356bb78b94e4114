"""Simulation configuration: builtin experiments, prior conventions and TOML files."""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..game import A1, PayoffGame, RewardModel, builtin_game

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_HORIZON = 10**6

# Prior means of the builtin experiments.  The two 2x2 selection games start
# both players at N(0, 1) beliefs.
BUILTIN_PRIORS = {
    "pd": ([4.0736, 4.5290], [0.6349, 4.5669]),
    "a1b1": (
        [0.8147, 0.9058, 0.1270, 0.9134, 0.6324, 0.0975],
        [0.2785, 0.5469, 0.9575, 0.9649, 0.1576],
    ),
    "a2b2": ([0.8147, 0.9058], [0.1270, 0.9134]),
    "a3b3": ([0.0, 0.0], [0.0, 0.0]),
    "a4b4": ([0.0, 0.0], [0.0, 0.0]),
}
assert len(BUILTIN_PRIORS["a1b1"][0]) == len(A1)

_UNIFORM = re.compile(r"^random_uniform\(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)$")


@dataclass(frozen=True)
class PriorSpec:
    """Either explicit prior means or a rule for drawing them per path."""

    kind: str  # "fixed", "normal" or "uniform"
    values: tuple[float, ...] = ()
    low: float = 0.0
    high: float = 1.0

    @classmethod
    def parse(cls, value) -> "PriorSpec":
        if isinstance(value, PriorSpec):
            return value
        if isinstance(value, str):
            text = value.strip().lower()
            if text == "random_standard_normal":
                return cls("normal")
            m = _UNIFORM.match(text)
            if m:
                lo, hi = float(m.group(1)), float(m.group(2))
                if not lo < hi:
                    raise ValueError(f"random_uniform needs lo < hi, got {value!r}")
                return cls("uniform", low=lo, high=hi)
            raise ValueError(f"unrecognised prior {value!r}")
        vals = tuple(float(v) for v in np.asarray(value, dtype=float).ravel())
        return cls("fixed", vals)

    def draw(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "fixed":
            if len(self.values) != size:
                raise ValueError(f"prior has {len(self.values)} entries but the player has {size} actions")
            return np.array(self.values)
        if self.kind == "normal":
            return rng.standard_normal(size)
        return rng.uniform(self.low, self.high, size)

    def describe(self) -> str:
        if self.kind == "fixed":
            return "[" + ", ".join(f"{v:g}" for v in self.values) + "]"
        if self.kind == "normal":
            return "random_standard_normal"
        return f"random_uniform({self.low:g},{self.high:g})"


@dataclass(frozen=True)
class RecordSchedule:
    kind: str = "log"  # "log" or "every"
    every: int = 0
    points: int = 1000

    @classmethod
    def parse(cls, text: str) -> "RecordSchedule":
        text = str(text).strip().lower()
        if text == "log":
            return cls("log")
        m = re.fullmatch(r"every[:(]\s*(\d+)\s*\)?", text)
        if m and int(m.group(1)) >= 1:
            return cls("every", every=int(m.group(1)))
        raise ValueError(f"record schedule must be 'log' or 'every:<k>', got {text!r}")

    def rounds(self, horizon: int) -> np.ndarray:
        """Sorted 1-based rounds to record; the final round is always included."""
        if self.kind == "log":
            grid = np.rint(np.geomspace(1, horizon, self.points)).astype(np.int64)
        else:
            grid = np.arange(self.every, horizon + 1, self.every, dtype=np.int64)
        return np.unique(np.append(grid, horizon))

    def describe(self) -> str:
        return "log" if self.kind == "log" else f"every:{self.every}"


@dataclass(frozen=True)
class SimulationConfig:
    game: PayoffGame
    prior_p1: PriorSpec
    prior_p2: PriorSpec
    horizon: int = DEFAULT_HORIZON
    paths: int = 1
    base_seed: int = 0
    record: RecordSchedule = field(default_factory=RecordSchedule)
    record_beliefs: bool = False
    threads: int = 1
    window_frac: float = 0.1
    threshold: float = 0.95

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.paths < 1:
            raise ValueError("paths must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if not 0 < self.window_frac <= 1:
            raise ValueError("window_frac must lie in (0, 1]")
        I, J = self.game.n_actions
        for prior, size in ((self.prior_p1, I), (self.prior_p2, J)):
            if prior.kind == "fixed" and len(prior.values) != size:
                raise ValueError(f"prior has {len(prior.values)} entries but the player has {size} actions")

    def with_overrides(self, **kwargs) -> "SimulationConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        if "prior_p1" in kwargs:
            kwargs["prior_p1"] = PriorSpec.parse(kwargs["prior_p1"])
        if "prior_p2" in kwargs:
            kwargs["prior_p2"] = PriorSpec.parse(kwargs["prior_p2"])
        if "record" in kwargs and not isinstance(kwargs["record"], RecordSchedule):
            kwargs["record"] = RecordSchedule.parse(kwargs["record"])
        return replace(self, **kwargs)

    def echo(self) -> dict[str, str]:
        return {
            "game": self.game.name,
            "reward_model": self.game.reward_model.value,
            "prior_p1": self.prior_p1.describe(),
            "prior_p2": self.prior_p2.describe(),
            "horizon": str(self.horizon),
            "paths": str(self.paths),
            "base_seed": str(self.base_seed),
            "record": self.record.describe(),
            "record_beliefs": str(self.record_beliefs).lower(),
            "window_frac": f"{self.window_frac:g}",
            "threshold": f"{self.threshold:g}",
        }


def builtin_config(key: str, **overrides) -> SimulationConfig:
    """A builtin game with its experiment's prior means."""
    game = builtin_game(key)
    p1, p2 = BUILTIN_PRIORS[game.name]
    cfg = SimulationConfig(game, PriorSpec.parse(p1), PriorSpec.parse(p2))
    return cfg.with_overrides(**overrides)


def _game_from_table(table) -> PayoffGame:
    if isinstance(table, str):
        return builtin_game(table)
    if "builtin" in table:
        game = builtin_game(table["builtin"])
        if "reward_model" in table:
            game = game.with_reward_model(table["reward_model"])
        return game
    return PayoffGame(
        table["A"],
        table["B"],
        RewardModel.parse(table.get("reward_model", "gaussian")),
        name=table.get("name", "custom"),
    )


def load_config(path: str | Path, **overrides) -> SimulationConfig:
    """Read a TOML config.

    ``game`` is a builtin key or a table with ``A``, ``B`` and optionally
    ``reward_model``.  Builtin games pick up their experiment priors unless
    ``prior_means_p1``/``prior_means_p2`` are given.  Keyword ``overrides``
    (e.g. from the command line) win over file values.
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    if "game" not in doc:
        raise ValueError(f"{path}: missing 'game'")
    game = _game_from_table(doc["game"])
    defaults = BUILTIN_PRIORS.get(game.name) if game.name != "custom" else None
    p1 = doc.get("prior_means_p1", defaults[0] if defaults else None)
    p2 = doc.get("prior_means_p2", defaults[1] if defaults else None)
    if p1 is None or p2 is None:
        raise ValueError(f"{path}: custom games need prior_means_p1 and prior_means_p2")
    cfg = SimulationConfig(
        game=game,
        prior_p1=PriorSpec.parse(p1),
        prior_p2=PriorSpec.parse(p2),
        horizon=int(doc.get("horizon", DEFAULT_HORIZON)),
        paths=int(doc.get("paths", 1)),
        base_seed=int(doc.get("seed", 0)),
        record=RecordSchedule.parse(doc.get("record", "log")),
        record_beliefs=bool(doc.get("record_beliefs", False)),
        threads=int(doc.get("threads", 1)),
        window_frac=float(doc.get("window_frac", 0.1)),
        threshold=float(doc.get("threshold", 0.95)),
    )
    return cfg.with_overrides(**overrides)
