import math

import pytest

from c3ppl.errors import EnumerationError, InitializationFailure
from c3ppl.infer import (
    ENGINES, TraceEngine, compare_engines, empirical, enumerate_program, make_engine,
    run_chain, tv_distance,
)
from c3ppl.models import build_model

from programs import fig1


def hmm_posterior_by_hand():
    trans = [[0.7, 0.3], [0.4, 0.6]]
    emit = [[0.9, 0.1], [0.2, 0.8]]
    w = {}
    for s1 in (0, 1):
        for s2 in (0, 1):
            w[(s1, s2)] = trans[0][s1] * emit[s1][0] * trans[s1][s2] * emit[s2][1]
    z = sum(w.values())
    return {k: v / z for k, v in w.items()}


@pytest.mark.parametrize("engine", ENGINES)
def test_deterministic_program_has_no_choices(engine):
    eng = make_engine("(+ 1 2)", engine).init()
    assert eng.num_choices() == 0 and eng.score == 0.0 and eng.retval == 3
    state = eng.rng.getstate()
    rec = eng.step()
    assert rec.address is None and rec.accepted
    assert eng.rng.getstate() == state


@pytest.mark.parametrize("engine", ENGINES)
def test_hmm_init_counts(engine):
    eng = make_engine(build_model("hmm", 10).program, engine).init()
    assert eng.num_choices() == 10
    parts = eng._trace_parts()
    assert len(parts[0]) == 10 and len(parts[1]) == 10
    assert len(eng.query_table()) == 10


@pytest.mark.parametrize("engine", ENGINES)
def test_impossible_evidence_fails_init(engine):
    src = "(let ((x (sample bernoulli 0.5))) (observe bernoulli 0.0 true) x)"
    with pytest.raises(InitializationFailure):
        make_engine(src, engine, max_init_tries=20).init()


@pytest.mark.parametrize("engine", ENGINES)
def test_init_retries_until_finite(engine):
    src = "(let ((x (sample bernoulli 0.5))) (observe bernoulli (if x 1.0 0.0) true) x)"
    eng = make_engine(src, engine, seed=2).init()
    assert eng.retval is True and math.isfinite(eng.score)


@pytest.mark.parametrize("engine", ENGINES)
def test_single_flip_always_accepts(engine):
    eng = make_engine(build_model("single-flip").program, engine, seed=9).init()
    for _ in range(300):
        rec = eng.step()
        assert rec.accepted and rec.log_alpha == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("engine", ENGINES)
def test_branching_switch_creates_and_deletes_two(engine):
    eng = make_engine(build_model("branching").program, engine, seed=1).init()
    seen = 0
    for _ in range(400):
        rec = eng.step()
        if len(rec.address) == 1 and rec.old_value != rec.new_value:
            assert rec.counters["fresh"] == 2 and rec.counters["stale"] == 2
            assert rec.n_before == rec.n_after == 3
            seen += 1
        elif len(rec.address) > 1:
            assert rec.counters["fresh"] == rec.counters["stale"] == 0
    assert seen > 10


def test_branching_fresh_and_stale_sums():
    eng = make_engine(build_model("branching").program, "lightweight", seed=1).init()
    for _ in range(400):
        before = {p: (v, s) for p, _n, _pa, v, s in eng._trace_parts()[0]}
        rec = eng.step()
        if len(rec.address) == 1 and rec.old_value != rec.new_value:
            stale = [s for p, (v, s) in before.items() if p != rec.address]
            assert rec.stale == pytest.approx(math.fsum(stale), abs=1e-12)
            if rec.accepted:
                after = [s for p, _n, _pa, v, s in eng._trace_parts()[0] if p != rec.address]
                assert rec.fresh == pytest.approx(math.fsum(after), abs=1e-12)


def test_log_alpha_formula():
    eng = make_engine(build_model("rectree", 5).program, "lightweight", seed=3).init()
    for _ in range(300):
        r = eng.step()
        if not math.isfinite(r.log_alpha):
            continue
        want = ((r.score_after - r.score_before) + math.log(r.n_before) - math.log(r.n_after)
                + (r.rev - r.fwd) + (r.stale - r.fresh))
        assert r.log_alpha == pytest.approx(want, abs=1e-12)


def test_hmm_counters_c3_constant_lightweight_linear():
    prog = build_model("hmm", 50).program
    lw = run_chain(prog, "lightweight", 300, seed=2)
    c3 = run_chain(prog, "c3", 300, seed=2)
    assert lw.mean_counters["nodes_executed"] == pytest.approx(2 * 50 + 1, rel=0.05)
    assert c3.mean_counters["nodes_executed"] < 8
    assert c3.mean_counters["bodies"] <= 2.5


def test_chain_is_deterministic_given_seed():
    prog = build_model("gmm", 5).program
    a = run_chain(prog, "c3", 300, seed=4)
    b = run_chain(prog, "c3", 300, seed=4)
    assert a.samples == b.samples and a.accept_rate == b.accept_rate


def test_thinning_counts():
    res = run_chain(build_model("single-flip").program, "c3", 10000, thin=10, seed=1)
    assert len(res.samples) == 1000
    res = run_chain(build_model("single-flip").program, "lightweight", 100, thin=10, burn=10)
    assert len(res.samples) == 9


def test_run_chain_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_chain("1", "c3", 0)
    with pytest.raises(ValueError):
        run_chain("1", "c3", 10, thin=0)


def test_engine_aliases():
    assert make_engine("1", "lw").kind == "lightweight"
    assert make_engine("1", "caching-only").kind == "caching"
    with pytest.raises(ValueError):
        make_engine("1", "gibbs")


def test_compare_engines_hmm_all_agree():
    res = compare_engines(build_model("hmm", 10).program, 300, seed=5)
    assert res.ok, res.message
    assert res.score_checks == 3 * len(ENGINES)


class LateFlip(TraceEngine):
    """Reports a wrong accept bit at proposal 7."""

    def step(self, force_reject=False):
        rec = super().step(force_reject)
        if self.proposals == 7:
            rec.accepted = not rec.accepted
        return rec


def test_compare_detects_corrupted_engine():
    fac = {"cps": lambda prog, seed: LateFlip(prog, kind="cps", seed=seed, deterministic=True)}
    res = compare_engines(build_model("tiny-hmm").program, 100, seed=1, factories=fac)
    assert not res.ok and res.divergence == 7
    assert "cps" in res.message and "accept" in res.message


def test_enumerate_single_bernoulli():
    dist = enumerate_program("(sample bernoulli 0.3)")
    assert dist[True] == pytest.approx(0.3, abs=1e-12)
    assert dist[False] == pytest.approx(0.7, abs=1e-12)


def test_enumerate_tiny_hmm_matches_hand_sum():
    dist = enumerate_program(build_model("tiny-hmm").program)
    expected = hmm_posterior_by_hand()
    assert len(dist) == 4
    for (s1, s2), p in expected.items():
        (key,) = [k for k in dist if dict(k) == {1: s1, 2: s2}]
        assert dist[key] == pytest.approx(p, abs=1e-12)


def test_enumerate_variable_length_traces():
    src = "(if (sample bernoulli 0.4) (if (sample bernoulli 0.5) 2 1) 0)"
    dist = enumerate_program(src)
    assert dist == pytest.approx({0: 0.6, 1: 0.2, 2: 0.2}, abs=1e-12)


def test_enumerate_errors():
    with pytest.raises(EnumerationError, match="continuous"):
        enumerate_program("(sample gaussian 0 1)")
    with pytest.raises(EnumerationError, match="paths"):
        enumerate_program(fig1(10), max_paths=100)
    with pytest.raises(EnumerationError, match="zero probability"):
        enumerate_program("(let ((x (sample bernoulli 0.5))) (observe bernoulli 0.0 true) x)")


def test_tv_distance():
    assert tv_distance({"a": 1.0}, {"b": 1.0}) == 1.0
    assert tv_distance({"a": 0.5, "b": 0.5}, {"a": 0.5, "b": 0.5}) == 0.0
    assert empirical([1, 1, 2, 1]) == {1: 0.75, 2: 0.25}


@pytest.mark.parametrize("engine", ENGINES)
def test_short_chain_close_to_enumeration(engine):
    prog = build_model("tiny-hmm").program
    res = run_chain(prog, engine, 6000, burn=600, seed=3)
    assert tv_distance(empirical(res.samples), enumerate_program(prog)) < 0.05


def test_deterministic_mode_from_environment(monkeypatch):
    monkeypatch.setenv("C3_DETERMINISTIC", "1")
    assert make_engine("1", "c3").deterministic
    monkeypatch.delenv("C3_DETERMINISTIC")
    assert not make_engine("1", "c3").deterministic
