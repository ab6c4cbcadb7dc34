import itertools

import pytest

from c3ppl.infer import make_engine
from c3ppl.lang import (
    Apply, CacheApply, Lambda, Observe, PrimOp, Sample, Tag, eval_direct, parse,
    run_deep, walk,
)
from c3ppl.machine import run_deterministic
from c3ppl.transform import (
    PASS_ORDER, PIPELINES, addressing_transform, caching_transform, cps_transform,
    for_engine, run_pipeline, tagging_transform,
)

from programs import DEEP, corpus, fig1


def nodes(e, t):
    return [x for x in walk(e) if type(x) is t]


def valid_subsets():
    for r in range(len(PASS_ORDER) + 1):
        for sub in itertools.combinations(PASS_ORDER, r):
            if "caching" in sub and not {"tagging", "addressing"} <= set(sub):
                continue
            yield sub


def test_engine_pipelines():
    assert PIPELINES["lightweight"] == ("addressing",)
    assert PIPELINES["caching"] == ("caching", "tagging", "addressing")
    assert PIPELINES["cps"] == ("addressing", "cps")
    assert PIPELINES["c3"] == PASS_ORDER == ("caching", "tagging", "addressing", "cps")


def test_pipeline_runs_in_canonical_order():
    tp = run_pipeline(parse("(define f (lambda (x) x)) (f 1)"), ["cps", "addressing", "tagging", "caching"])
    assert tp.passes == PASS_ORDER
    assert [name for name, _ in tp.stages] == list(PASS_ORDER)
    assert tp.callsite_count == 1 and tp.lambda_count == 1
    assert tp.cps and tp.addressed


def test_pipeline_rejects_bad_pass_sets():
    ast = parse("1")
    with pytest.raises(ValueError, match="unknown"):
        run_pipeline(ast, ["inline"])
    with pytest.raises(ValueError, match="requires"):
        run_pipeline(ast, ["caching"])


def test_caching_wraps_user_calls_only():
    ast = parse("(define f (lambda (x) (+ x 1))) (f (f (sample gaussian 0 1)))")
    out = caching_transform(ast)
    assert not nodes(out, Apply)
    wrapped = nodes(out, CacheApply)
    assert len(wrapped) == 2
    outer = wrapped[0]
    # inner call is an argument of the outer one, so it runs first
    assert type(outer.args[0]) is CacheApply
    assert nodes(out, PrimOp) and nodes(out, Sample)


def test_caching_keeps_callsite_ids():
    ast = parse(fig1())
    ids = sorted(a.callsite_id for a in nodes(ast, Apply))
    assert sorted(c.callsite_id for c in nodes(caching_transform(ast), CacheApply)) == ids


def test_caching_without_calls_is_identity():
    ast = parse("(let ((x (sample bernoulli 0.5))) (if x 1 (+ 2 3)))")
    assert caching_transform(ast) == ast


def test_observation_function_wrapped_but_observe_not():
    out = caching_transform(parse(fig1()))
    callees = {c.callee.name for c in nodes(out, CacheApply)}
    assert {"hmm", "transition", "observation"} <= callees
    assert len(nodes(out, Observe)) == 1


def test_hmm_tag_lists_free_vars():
    out = tagging_transform(parse(fig1()))
    tags = {t.fn.params: t for t in nodes(out, Tag)}
    hmm = tags[("n", "obs")]
    assert set(hmm.free_vars) == {"hmm", "transition", "observation"}
    assert hmm.lambda_id == hmm.fn.lambda_id


def test_closed_lambda_tag_is_empty():
    out = tagging_transform(parse("((lambda (x) x) 1)"))
    (tag,) = nodes(out, Tag)
    assert tag.free_vars == ()


def test_tagging_idempotent():
    ast = parse(fig1())
    once = tagging_transform(ast)
    assert tagging_transform(once) == once


def test_textual_copies_get_distinct_lambda_ids():
    ast = parse("(let ((f (lambda (x) x)) (g (lambda (x) x))) (f (g 1)))")
    lams = nodes(ast, Lambda)
    assert len(lams) == 2 and lams[0].body == lams[1].body
    assert lams[0].lambda_id != lams[1].lambda_id


def trace_addresses(src):
    eng = make_engine(src, "lightweight", seed=3).init()
    return [a.path() for a in eng.trace.db], eng


def test_top_level_call_address():
    ast = parse("(define f (lambda () (sample gaussian 0 1))) (f)")
    (call,) = nodes(ast, Apply)
    (s,) = nodes(ast, Sample)
    paths, _ = trace_addresses("(define f (lambda () (sample gaussian 0 1))) (f)")
    assert paths == [(call.callsite_id, s.site_id)]


def test_hmm_choice_addresses_grow_with_depth():
    n = 5
    ast = parse(fig1(n))
    (s,) = nodes(ast, Sample)
    paths, eng = trace_addresses(fig1(n))
    assert len(paths) == n and len(set(paths)) == n
    assert all(p[-1] == s.site_id for p in paths)
    # the choice made k frames below the top-level call sits at depth k + 2
    assert sorted(len(p) for p in paths) == [k + 2 for k in range(1, n + 1)]
    top = paths[0][0]
    assert all(p[0] == top for p in paths)
    rec = {p[1] for p in paths if len(p) > 3}
    assert len(rec) == 1


def test_sibling_calls_differ_in_last_element():
    src = """
    (define f (lambda () (sample gaussian 0 1)))
    (define g (lambda () (list (f) (f))))
    (g)
    """
    paths, _ = trace_addresses(src)
    a, b = sorted(paths)
    assert a[:1] == b[:1] and a[1] != b[1] and a[2] == b[2]


def test_frame_and_choice_addresses_unique():
    eng = make_engine(fig1(10), "c3", seed=1).init()
    frames = list(eng.rt.iter_nodes())
    paths = [n.address.path() for n in frames]
    assert len(paths) == len(set(paths))


def test_addressing_threads_address():
    out = addressing_transform(parse("(define f (lambda (x) (sample gaussian x 1))) (f 0)"))
    (lam,) = nodes(out, Lambda)
    assert lam.addr_param is not None
    (call,) = nodes(out, Apply)
    assert call.addr is not None
    (s,) = nodes(out, Sample)
    assert s.addr is not None


@pytest.mark.parametrize("src, expected", [
    ("5", 5),
    ("(if true 1 2)", 1),
    ("(define (fact n) (if (= n 0) 1 (* n (fact (- n 1))))) (fact 5)", 120),
])
def test_cps_examples(src, expected):
    ast = parse(src)
    tp = run_pipeline(ast, ["cps"])
    assert run_deterministic(tp) == expected == eval_direct(ast)


def test_cps_functions_take_continuations():
    out = cps_transform(parse("(define f (lambda (x) (+ x 1))) (f 1)"))
    user = [x for x in nodes(out, Lambda) if not x.is_cont]
    assert user and all(x.k_param is not None for x in user)
    assert all(a.k is not None for a in nodes(out, Apply))


@pytest.mark.parametrize("passes", list(valid_subsets()), ids="+".join)
def test_semantics_preserved_on_corpus(passes):
    for src, expected in corpus():
        ast = parse(src)
        want = run_deep(eval_direct, ast)
        if expected is not None:
            assert want == expected
        tp = run_pipeline(ast, passes)
        got = run_deterministic(tp) if tp.cps else run_deep(run_deterministic, tp)
        assert got == want, (passes, src)


@pytest.mark.parametrize("src, expected", DEEP)
def test_cps_deep_recursion_on_default_stack(src, expected):
    for engine in ("cps", "c3"):
        assert run_deterministic(for_engine(parse(src), engine)) == expected


def test_cps_hmm_ten_thousand_states():
    src = """
    (define (walk n) (if (= n 0) 0 (let ((p (walk (- n 1)))) (+ p (if (sample bernoulli 0.5) 1 0)))))
    (walk 10000)
    """
    for engine in ("cps", "c3"):
        eng = make_engine(src, engine, seed=0).init()
        assert eng.num_choices() == 10000
        eng.step()
