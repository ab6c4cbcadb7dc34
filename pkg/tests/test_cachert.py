import math
import random

import pytest

from c3ppl.cachert import AdaptiveStats, ChoiceNode, ChoiceTable, Equivalence, FunctionNode
from c3ppl.infer import make_engine
from c3ppl.lang import Closure
from c3ppl.models import build_model

from programs import fig1


class Item:
    def __init__(self, address):
        self.address = address


def test_choice_table_remove_and_undo_restore_order():
    t = ChoiceTable()
    items = [Item(i) for i in range(6)]
    for it in items:
        t.add(it)
    before = list(t.items)
    log = []
    for victim in (items[1], items[5], items[0]):
        log.append((victim, t.remove(victim)))
    extra = Item(99)
    t.add(extra)
    assert len(t) == 4 and 99 in t and 1 not in t
    assert all(t.items[t.pos[it.address]] is it for it in t.items)
    t.undo_add(extra)
    for entry in reversed(log):
        t.undo_remove(entry)
    assert t.items == before
    assert all(t.pos[it.address] == i for i, it in enumerate(t.items))


def test_choice_table_random_ops_stay_consistent():
    rng = random.Random(0)
    t = ChoiceTable()
    live = {}
    for step in range(2000):
        if live and rng.random() < 0.45:
            it = live.pop(rng.choice(sorted(live)))
            t.remove(it)
        else:
            it = Item(step)
            live[step] = it
            t.add(it)
        assert len(t) == len(live)
    assert {it.address for it in t.items} == set(live)


def closure(lid, **snap):
    return Closure(lid, {}, snap, (), None)


def test_equivalence_scalars():
    eq = Equivalence()
    assert eq.shallow_equal(1, 1) and not eq.shallow_equal(1, 1.0)
    assert eq.shallow_equal(0.5, 0.5) and not eq.shallow_equal(0.0, -0.0)
    assert not eq.shallow_equal(True, 1)
    assert eq.shallow_equal("a", "a")
    # compound values compare by identity only
    t = (1, 2)
    assert eq.shallow_equal(t, t) and not eq.shallow_equal(tuple([1, 2]), tuple([1, 2]))
    assert not eq.shallow_equal(float("nan"), float("nan"))


def test_equivalence_closures_by_tag_and_snapshot():
    eq = Equivalence()
    assert eq.fn_equiv(closure(1, x=1), closure(1, x=1))
    assert not eq.fn_equiv(closure(1, x=1), closure(1, x=2))
    assert not eq.fn_equiv(closure(1, x=1), closure(2, x=1))
    inner_a, inner_b = closure(3, y=0), closure(3, y=0)
    assert eq.fn_equiv(closure(1, f=inner_a), closure(1, f=inner_b))


def test_equivalence_self_reference():
    a, b = closure(1), closure(1)
    a.snapshot["self"] = a
    b.snapshot["self"] = b
    assert Equivalence().fn_equiv(a, b)


def drive(stats, events):
    """events: one list per proposal of 'v' (visit) or 's' (short-circuit)."""
    out = []
    for prop in events:
        for ev in prop:
            (stats.visit if ev == "v" else stats.short_circuit)("s")
        out.append(stats.boundary())
    return out


def test_adaptive_disables_after_n_proposals_and_m_fruitless_visits():
    st = AdaptiveStats()
    res = drive(st, [["v"] * 5] * 12)
    # 5 visits per proposal: 50 fruitless visits by proposal 10
    assert [i for i, r in enumerate(res, 1) if r] == [10]
    assert not st.cached("s") and st.disabled_at["s"] == 10


def test_adaptive_needs_n_proposals():
    st = AdaptiveStats()
    res = drive(st, [["v"] * 100] * 9)
    assert not any(res) and st.cached("s")
    assert drive(st, [["v"]]) == [["s"]]


def test_adaptive_short_circuit_keeps_site_cached():
    st = AdaptiveStats()
    res = drive(st, [["v"] * 49 + ["s"]] + [["v"] * 60] * 20)
    assert not any(res) and st.cached("s")


def test_adaptive_init_visits_not_counted():
    st = AdaptiveStats()
    for _ in range(500):
        st.visit("s")
    st.end_init()
    assert drive(st, [["v"] * 4] * 10) == [[]] * 10
    assert st.proposals_seen("s") == 10


def test_adaptive_can_be_switched_off():
    st = AdaptiveStats(enabled=False)
    assert not any(drive(st, [["v"] * 100] * 20))


ENGINES = ("caching", "c3")


@pytest.mark.parametrize("engine", ENGINES)
def test_rollback_restores_serialization(engine):
    eng = make_engine(build_model("hmm", 10).program, engine, seed=5).init()
    for _ in range(200):
        before = eng.serialize()
        rec = eng.step(force_reject=True)
        assert not rec.accepted
        assert eng.serialize() == before
        eng.step()


@pytest.mark.parametrize("engine", ENGINES)
def test_tree_and_table_agree(engine):
    eng = make_engine(build_model("rectree", 6).program, engine, seed=2).init()
    for _ in range(300):
        eng.step()
        rt = eng.rt
        tree = [n for n in rt.iter_nodes() if isinstance(n, ChoiceNode)]
        assert {n.address for n in tree} == {n.address for n in rt.table.items}
        assert math.isclose(rt.score, rt.recompute_score(), abs_tol=1e-9)
        for n in rt.iter_nodes():
            if n.parent is not None:
                assert n.parent.children[n.index] is n


def test_c3_stages_constant_nodes_on_hmm():
    staged = {}
    for n in (10, 100):
        eng = make_engine(build_model("hmm", n).program, "c3", seed=1).init()
        recs = [eng.step() for _ in range(400)]
        staged[n] = sum(r.counters["staged_nodes"] for r in recs) / len(recs)
    assert staged[100] < 2 * staged[10]


@pytest.mark.parametrize("engine", ENGINES)
def test_counter_sanity(engine):
    eng = make_engine(fig1(10), engine, seed=4, adaptive=False).init()
    for _ in range(200):
        c = eng.step().counters
        assert c["entry_sc"] + c["bodies"] == c["cache_calls"]
        assert c["nodes_executed"] >= 1


def test_c3_exits_early_on_unchanged_return():
    eng = make_engine(build_model("hmm", 50).program, "c3", seed=3).init()
    recs = [eng.step() for _ in range(300)]
    assert sum(r.counters["exit_sc"] for r in recs) > 0


def test_root_node_is_function_node():
    eng = make_engine(fig1(3), "c3").init()
    assert isinstance(eng.rt.root, FunctionNode)
    assert eng.rt.stack_depth() >= 0
