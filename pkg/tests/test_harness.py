import numpy as np
import pytest

from thompson_games.dynamics import SystemState
from thompson_games.game import analyze, builtin_game
from thompson_games.harness import (
    OutcomeKind,
    PathTrace,
    PriorSpec,
    RecordSchedule,
    builtin_config,
    classify_outcome,
    emit_summary,
    emit_trace_csv,
    load_config,
    run_ensemble,
    run_path,
)
from thompson_games.harness.cli import main


def synthetic_trace(phi1, psi1, I=2, J=2):
    phi1 = np.asarray(phi1, dtype=float)
    psi1 = np.asarray(psi1, dtype=float)
    phi = np.column_stack([phi1] + [(1 - phi1) / (I - 1)] * (I - 1))
    psi = np.column_stack([psi1] + [(1 - psi1) / (J - 1)] * (J - 1))
    n = phi1.size
    return PathTrace(
        path_index=0,
        base_seed=0,
        rounds=np.arange(1, n + 1),
        phi=phi,
        psi=psi,
        final_state=SystemState(np.zeros(I), np.zeros(J), np.ones(I), np.ones(J)),
        pull_counts_p1=np.zeros(I, np.int64),
        pull_counts_p2=np.zeros(J, np.int64),
        prior_p1=np.zeros(I),
        prior_p2=np.zeros(J),
    )


class TestConfig:
    def test_prior_specs(self):
        assert PriorSpec.parse("random_standard_normal").kind == "normal"
        u = PriorSpec.parse("random_uniform(0, 1)")
        assert (u.kind, u.low, u.high) == ("uniform", 0.0, 1.0)
        assert PriorSpec.parse([1, 2]).values == (1.0, 2.0)
        with pytest.raises(ValueError):
            PriorSpec.parse("random_uniform(1, 0)")
        with pytest.raises(ValueError):
            PriorSpec.parse("cauchy")

    def test_uniform_draws_in_range(self):
        x = PriorSpec.parse("random_uniform(0,1)").draw(1000, np.random.default_rng(0))
        assert x.min() >= 0 and x.max() < 1

    def test_log_schedule(self):
        r = RecordSchedule.parse("log").rounds(10**6)
        assert r[0] == 1 and r[-1] == 10**6
        assert np.all(np.diff(r) > 0)
        # 1000 geometric points; rounding merges duplicates among the first few hundred rounds
        assert 700 <= r.size <= 1000

    def test_every_schedule(self):
        r = RecordSchedule.parse("every:300").rounds(1000)
        np.testing.assert_array_equal(r, [300, 600, 900, 1000])
        with pytest.raises(ValueError):
            RecordSchedule.parse("every:0")

    def test_rejects_zero_horizon(self):
        with pytest.raises(ValueError):
            builtin_config("pd", horizon=0)

    def test_rejects_prior_length(self):
        with pytest.raises(ValueError):
            builtin_config("pd", prior_p1=[0, 0, 0])

    def test_builtin_priors_loaded(self):
        cfg = builtin_config("a2b2")
        assert cfg.prior_p1.values == (0.8147, 0.9058)
        assert cfg.game.reward_model.value == "bernoulli"

    def test_toml_custom_game(self, tmp_path):
        path = tmp_path / "game.toml"
        path.write_text(
            'horizon = 50\npaths = 3\nseed = 9\nrecord = "every:10"\n'
            'prior_means_p1 = [0.0, 0.0]\nprior_means_p2 = "random_uniform(0,1)"\n'
            "[game]\nA = [[1.0, 0.0], [0.0, 1.0]]\nB = [[0.0, 1.0], [1.0, 0.0]]\n"
        )
        cfg = load_config(path, paths=4)
        assert cfg.horizon == 50 and cfg.paths == 4 and cfg.base_seed == 9
        assert cfg.prior_p2.kind == "uniform"
        np.testing.assert_array_equal(cfg.game.A, [[1, 0], [0, 1]])

    def test_toml_builtin_gets_priors(self, tmp_path):
        path = tmp_path / "pd.toml"
        path.write_text('game = "pd"\nhorizon = 100\n')
        cfg = load_config(path)
        assert cfg.prior_p1.values == (4.0736, 4.5290)
        assert cfg.horizon == 100


class TestRunPath:
    def test_deterministic(self):
        cfg = builtin_config("pd", horizon=20000, base_seed=5)
        a, b = run_path(cfg, 3), run_path(cfg, 3)
        np.testing.assert_array_equal(a.phi, b.phi)
        np.testing.assert_array_equal(a.final_state.x, b.final_state.x)

    def test_paths_differ(self):
        cfg = builtin_config("pd", horizon=20000, base_seed=5)
        assert not np.array_equal(run_path(cfg, 0).final_state.x, run_path(cfg, 1).final_state.x)

    def test_trace_invariants(self):
        cfg = builtin_config("a1b1", horizon=5000, record_beliefs=True)
        t = run_path(cfg)
        assert np.all((t.phi >= 0) & (t.phi <= 1)) and np.all((t.psi >= 0) & (t.psi <= 1))
        assert np.all(np.diff(t.rounds) > 0)
        np.testing.assert_allclose(t.phi.sum(axis=1), 1, atol=1e-9)
        assert t.x.shape == (t.rounds.size, 6) and t.y.shape == (t.rounds.size, 5)
        assert t.pull_counts_p1.sum() == 5000

    def test_random_priors_drawn_per_path(self):
        cfg = builtin_config("a3b3", horizon=10, prior_p1="random_standard_normal", prior_p2="random_standard_normal")
        assert not np.array_equal(run_path(cfg, 0).prior_p1, run_path(cfg, 1).prior_p1)


class TestClassify:
    rep_pd = analyze(builtin_game("pd"))

    def test_nash(self):
        out = classify_outcome(synthetic_trace(np.ones(100), np.ones(100)), self.rep_pd)
        assert out.kind is OutcomeKind.NASH_CONVERGENT and out.profile == (1, 1)
        assert out.label == "NashConvergent(1,1)"

    def test_collusive_profile(self):
        out = classify_outcome(synthetic_trace(np.full(100, 0.01), np.full(100, 0.02)), self.rep_pd)
        assert out.kind is OutcomeKind.PURE_PROFILE and out.profile == (2, 2)

    def test_oscillating(self):
        phi = 0.5 + 0.4 * np.sin(np.arange(100))
        out = classify_outcome(synthetic_trace(phi, np.full(100, 0.5)), self.rep_pd)
        assert out.kind is OutcomeKind.OSCILLATING and out.profile is None

    def test_undetermined(self):
        out = classify_outcome(synthetic_trace(np.full(100, 0.6), np.full(100, 0.6)), self.rep_pd)
        assert out.kind is OutcomeKind.UNDETERMINED

    def test_only_window_matters(self):
        phi = np.concatenate([np.linspace(0, 1, 90), np.ones(10)])
        out = classify_outcome(synthetic_trace(phi, np.ones(100)), self.rep_pd, window_frac=0.1)
        assert out.kind is OutcomeKind.NASH_CONVERGENT

    def test_empty_window(self):
        with pytest.raises(ValueError):
            classify_outcome(synthetic_trace([], []), self.rep_pd)

    @pytest.mark.slow
    def test_threshold_stability_on_pd(self, pd_ensemble):
        summary, traces = pd_ensemble
        rep = analyze(builtin_game("pd"))
        stable = 0
        for t, base in zip(traces, summary.outcomes):
            labels = {classify_outcome(t, rep, 0.1, th).label for th in (0.93, 0.95, 0.97)}
            stable += labels == {base.label}
        assert stable / len(traces) >= 0.95


class TestEnsemble:
    def test_thread_count_does_not_matter(self):
        cfg = builtin_config("a3b3", horizon=3000, paths=12)
        s1, _ = run_ensemble(cfg.with_overrides(threads=1))
        s4, _ = run_ensemble(cfg.with_overrides(threads=4))
        np.testing.assert_array_equal(s1.mean_phi1, s4.mean_phi1)
        np.testing.assert_array_equal(s1.mean_psi1, s4.mean_psi1)
        assert [o.label for o in s1.outcomes] == [o.label for o in s4.outcomes]

    def test_single_path(self):
        cfg = builtin_config("pd", horizon=5000)
        summary, traces = run_ensemble(cfg)
        np.testing.assert_array_equal(summary.mean_phi1, traces[0].phi1)
        assert list(summary.class_fractions.values()) == [1.0]

    def test_fractions_sum_to_one(self):
        summary, _ = run_ensemble(builtin_config("a3b3", horizon=2000, paths=10), keep_traces=False)
        assert sum(summary.class_fractions.values()) == pytest.approx(1.0)
        assert np.all((summary.mean_phi1 >= 0) & (summary.mean_phi1 <= 1))


class TestOutput:
    def test_trace_csv(self, tmp_path):
        t = run_path(builtin_config("pd", horizon=1000))
        path = tmp_path / "t.csv"
        emit_trace_csv(t, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == "Time,Phi,Psi"
        assert lines[1].split(",")[0] == "1"
        times = [int(line.split(",")[0]) for line in lines[1:]]
        np.testing.assert_array_equal(times, t.rounds)
        assert float(lines[-1].split(",")[1]) == pytest.approx(t.phi1[-1], rel=1e-11)

    def test_belief_columns(self, tmp_path):
        t = run_path(builtin_config("a4b4", horizon=200, record_beliefs=True))
        path = tmp_path / "b.csv"
        emit_trace_csv(t, path)
        header = path.read_text().splitlines()[0]
        assert header == "Time,Phi,Psi,x1,x2,y1,y2"

    def test_number_format(self):
        from thompson_games.harness.output import fmt

        assert fmt(0.123456789012345) == "0.123456789012"
        assert "e" not in fmt(1.5e-12)
        assert fmt(1.0) == "1"

    def test_summary_file(self, tmp_path):
        summary, _ = run_ensemble(builtin_config("a3b3", horizon=2000, paths=5))
        path = tmp_path / "s.txt"
        emit_summary(summary, path)
        kv = dict(line.split(" = ", 1) for line in path.read_text().splitlines())
        assert kv["game"] == "a3b3" and kv["n_paths"] == "5"
        fracs = [float(v) for k, v in kv.items() if k.startswith("fraction.")]
        assert sum(fracs) == pytest.approx(1.0)
        assert "path.4" in kv


class TestCli:
    def test_analyze(self, capsys):
        assert main(["analyze", "--game", "pd"]) == 0
        out = capsys.readouterr().out
        assert "pure_ne = (1,1)" in out
        assert "assumption1 = true" in out and "assumption2 = false" in out

    def test_analyze_a4b4(self, capsys):
        main(["analyze", "--game", "a4b4"])
        out = capsys.readouterr().out
        assert "pure_ne = none" in out and "mixed_ne = (0.6, 0.2)" in out

    def test_simulate(self, tmp_path):
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--game", "a4b4", "--horizon", "500", "--record", "every:100", "--record-beliefs", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "Time,Phi,Psi,x1,x2,y1,y2"
        assert [line.split(",")[0] for line in lines[1:]] == ["100", "200", "300", "400", "500"]

    def test_ensemble(self, tmp_path):
        out = tmp_path / "summary.txt"
        tr = tmp_path / "avg.csv"
        args = ["ensemble", "--game", "a3b3", "--paths", "4", "--horizon", "1000", "--threads", "2", "--out", str(out), "--trace-out", str(tr)]
        assert main(args) == 0
        assert "n_paths = 4" in out.read_text()
        assert tr.read_text().startswith("Time,Phi,Psi\n")

    def test_probe(self, tmp_path, capsys):
        out = tmp_path / "probe.csv"
        assert main(["probe", "--means", "0.3,0.2,0.1", "--variances", "0.04,0.09,0.01", "--samples", "10000", "--out", str(out)]) == 0
        rows = out.read_text().splitlines()
        assert rows[0].startswith("action,exact,slepian,mc,mc_se,d_mean1")
        assert len(rows) == 4
        assert "exact" in capsys.readouterr().out

    def test_decompose(self, tmp_path):
        out = tmp_path / "dec"
        assert main(["decompose", "--game", "pd", "--horizon", "300", "--record", "every:50", "--out", str(out)]) == 0
        files = sorted(p.name for p in out.iterdir())
        assert files == [f"coordinate_{k:02d}.csv" for k in range(1, 9)]
        lines = (out / "coordinate_01.csv").read_text().splitlines()
        assert lines[0] == "round,C,D,E,error,bound"
        assert lines[1].startswith("0,") and lines[1].endswith(",4.8")

    def test_decompose_rejects_a4b4(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["decompose", "--game", "a4b4", "--horizon", "10", "--out", str(tmp_path / "x")])

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.toml"
        cfg.write_text('game = "a1b1"\n')
        assert main(["analyze", "--config", str(cfg)]) == 0
        assert "assumption2 = true" in capsys.readouterr().out

    def test_bad_prior_reports_error(self, capsys):
        assert main(["simulate", "--game", "pd", "--horizon", "10", "--prior-p1", "1,2,3"]) == 2
        assert "error" in capsys.readouterr().err
