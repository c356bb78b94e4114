"""Command-line entry point: ``thompson-games <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from ..choice import BeliefVector, choice_gradients, choice_probabilities_exact, choice_probabilities_mc, slepian_lower_bound
from ..diagnostics import decompose_path, drift_bound
from ..dynamics import init_state, simulate_records, SystemState
from ..game import BUILTIN_GAMES, analyze, check_payoff_stability, equilibrium_point
from .config import SimulationConfig, builtin_config, load_config
from .output import emit_decomposition_csv, emit_summary, emit_trace_csv, fmt
from .runner import path_seeds, run_ensemble, run_path


def _vector(text: str) -> list[float]:
    return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]


def _add_sim_flags(p: argparse.ArgumentParser, horizon_default: int | None = None):
    p.add_argument("--game", choices=BUILTIN_GAMES, help="builtin game with its experiment priors")
    p.add_argument("--config", type=Path, help="TOML config file (flags override it)")
    p.add_argument("--horizon", type=int, default=horizon_default, help="rounds per path")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--record", help="record schedule: log or every:<k>")
    p.add_argument("--record-beliefs", action="store_true", default=None, help="add posterior means to traces")
    p.add_argument("--prior-p1", help="comma list, random_standard_normal or random_uniform(lo,hi)")
    p.add_argument("--prior-p2", help="comma list, random_standard_normal or random_uniform(lo,hi)")


def _prior_arg(text):
    if text is None:
        return None
    t = text.strip().lower()
    return t if t.startswith("random_") else _vector(text)


def resolve_config(args) -> SimulationConfig:
    overrides = dict(
        horizon=args.horizon,
        base_seed=args.seed,
        record=getattr(args, "record", None),
        record_beliefs=getattr(args, "record_beliefs", None),
        paths=getattr(args, "paths", None),
        threads=getattr(args, "threads", None),
        prior_p1=_prior_arg(getattr(args, "prior_p1", None)),
        prior_p2=_prior_arg(getattr(args, "prior_p2", None)),
    )
    if args.config is not None:
        cfg = load_config(args.config, **overrides)
        if args.game is not None:
            raise SystemExit("use either --game or --config, not both")
        return cfg
    if args.game is None:
        raise SystemExit("one of --game or --config is required")
    return builtin_config(args.game, **overrides)


def _game_from_args(args):
    if args.config is not None:
        return load_config(args.config).game
    if args.game is None:
        raise SystemExit("one of --game or --config is required")
    return builtin_config(args.game).game


def cmd_analyze(args) -> int:
    game = _game_from_args(args)
    rep = analyze(game)
    lines = [
        f"game = {game.name}",
        f"actions = {game.n_actions[0]}x{game.n_actions[1]}",
        "pure_ne = " + (" ".join(f"({i},{j})" for i, j in rep.pure_ne) or "none"),
        f"no_ties = {str(rep.no_ties_holds).lower()}",
        f"assumption1 = {str(rep.assumption1_holds).lower()}",
    ]
    for v in rep.tie_violations:
        lines.append(f"tie = {v.matrix} line {v.line} actions {v.pair}")
    if rep.mixed_ne_2x2 is not None:
        p, q = rep.mixed_ne_2x2
        lines.append(f"mixed_ne = ({fmt(p)}, {fmt(q)})")
    elif game.n_actions == (2, 2):
        lines.append("mixed_ne = none")
    for ne in rep.pure_ne:
        st = check_payoff_stability(game, ne)
        tag = f"assumption2[{ne[0]},{ne[1]}]" if len(rep.pure_ne) > 1 else "assumption2"
        lines.append(f"{tag} = {str(st.holds).lower()}")
        lines.append(f"{tag}.worst_margin = {fmt(st.worst_margin)}")
        for player, pair in st.violating_pairs:
            lines.append(f"{tag}.violation = player {player} actions {pair}")
    if not rep.pure_ne:
        lines.append("assumption2 = n/a")
    _write_lines(lines, args.out)
    return 0


def _write_lines(lines, dest):
    text = "\n".join(lines) + "\n"
    if dest is None:
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    trace = run_path(cfg, path_index=0)
    emit_trace_csv(trace, args.out)
    return 0


def cmd_ensemble(args) -> int:
    cfg = resolve_config(args)
    summary, _ = run_ensemble(cfg, keep_traces=False)
    emit_summary(summary, args.out)
    if args.trace_out:
        emit_trace_csv(summary, args.trace_out)
    return 0


def cmd_probe(args) -> int:
    belief = BeliefVector(_vector(args.means), _vector(args.variances))
    K = len(belief)
    exact = choice_probabilities_exact(belief).probs
    mc, se = choice_probabilities_mc(belief, args.samples, args.seed)
    header = ["action", "exact", "slepian", "mc", "mc_se"]
    header += [f"d_mean{k + 1}" for k in range(K)] + [f"d_var{k + 1}" for k in range(K)]
    rows = []
    for i in range(K):
        g = choice_gradients(belief, i)
        rows.append(
            [str(i + 1), fmt(exact[i]), fmt(slepian_lower_bound(belief, i)), fmt(mc[i]), fmt(se[i])]
            + [fmt(v) for v in g.d_means]
            + [fmt(v) for v in g.d_variances]
        )
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    widths = [max(len(r[c]) for r in rows + [header]) for c in range(len(header))]
    for r in [header] + rows:
        print("  ".join(cell.rjust(wd) for cell, wd in zip(r, widths)))
    return 0


def cmd_decompose(args) -> int:
    cfg = resolve_config(args)
    game = cfg.game
    rep = analyze(game)
    if args.ne:
        ne = tuple(int(t) for t in args.ne.split(","))
    elif rep.pure_ne:
        ne = rep.pure_ne[0]
    else:
        raise SystemExit(f"{game.name} has no pure Nash equilibrium to decompose around")
    prior_rng, sim_rng = path_seeds(cfg.base_seed, 0)
    I, J = game.n_actions
    p1, p2 = init_state(cfg.prior_p1.draw(I, prior_rng), cfg.prior_p2.draw(J, prior_rng))
    S0 = SystemState.from_players(p1, p2)
    records, _, _ = simulate_records(game, p1, p2, cfg.horizon, sim_rng)
    sample = cfg.record.rounds(cfg.horizon)
    decomps = decompose_path(records, S0, equilibrium_point(game, ne), game, sample_rounds=sample)

    out = Path(args.out or "decompose")
    out.mkdir(parents=True, exist_ok=True)
    for d in decomps:
        bound = drift_bound(game, ne, d.coordinate) if d.coordinate <= I + J else 0.0
        emit_decomposition_csv(d, bound, out / f"coordinate_{d.coordinate:02d}.csv")
    print(f"wrote {len(decomps)} coordinate files to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thompson-games", description="Two-player Thompson sampling in matrix games")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="equilibria and assumption checks")
    p.add_argument("--game", choices=BUILTIN_GAMES)
    p.add_argument("--config", type=Path)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="one path to a trace CSV")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ensemble", help="many paths to a key/value summary")
    _add_sim_flags(p)
    p.add_argument("--paths", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--trace-out", help="CSV of path-averaged Phi/Psi")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("probe", help="inspect choice probabilities of one belief")
    p.add_argument("--means", required=True, help="comma-separated posterior means")
    p.add_argument("--variances", required=True, help="comma-separated posterior variances")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="optional CSV copy of the table")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("decompose", help="C/D/E error decomposition CSVs for one path")
    _add_sim_flags(p, horizon_default=10**4)
    p.add_argument("--ne", help="pure equilibrium as i,j (default: first pure NE)")
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
