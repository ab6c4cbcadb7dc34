"""Surface syntax, AST, runtime values and the reference evaluator.

Programs are s-expressions.  A program is a sequence of ``(define name expr)``
forms followed by one body expression; defines become nested ``Let`` nodes.
Every callsite, lambda and random-primitive site gets an integer ``SourceId``
from a single pre-order walk of the tree, so parsing the same text twice yields
identical ids.
"""

from __future__ import annotations

import bisect
import math
import operator
import re
import sys
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import erp as _erp
from .errors import C3Error


class ParseError(C3Error):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class EvalError(C3Error):
    """Runtime type, arity or unbound-variable error."""


# ---------------------------------------------------------------------------
# AST
#
# The transform passes reuse these node classes and fill in the optional
# ``addr`` / ``k`` fields (addressing and CPS) or wrap nodes in the
# transform-only forms ``CacheApply``, ``Tag``, ``Extend`` and ``KCall``.


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Literal(Expr):
    value: Any


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Lambda(Expr):
    params: tuple
    body: Expr
    lambda_id: int
    free_vars: tuple = ()
    addr_param: Optional[str] = None
    k_param: Optional[str] = None
    # continuation lambdas (introduced by CPS) take one value and carry the
    # name of the address variable of the function frame they belong to
    is_cont: bool = False
    frame: Optional[str] = None


@dataclass(frozen=True)
class Apply(Expr):
    callee: Expr
    args: tuple
    callsite_id: int
    addr: Optional[Expr] = None
    k: Optional[Expr] = None


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    else_: Expr


@dataclass(frozen=True)
class Let(Expr):
    name: str
    bound: Expr
    body: Expr
    rec: bool = False


@dataclass(frozen=True)
class PrimOp(Expr):
    op: str
    args: tuple


@dataclass(frozen=True)
class Sample(Expr):
    erp: str
    params: tuple
    site_id: int
    addr: Optional[Expr] = None
    k: Optional[Expr] = None


@dataclass(frozen=True)
class Observe(Expr):
    erp: str
    params: tuple
    value: Expr
    site_id: int
    addr: Optional[Expr] = None
    k: Optional[Expr] = None


@dataclass(frozen=True)
class QueryAdd(Expr):
    key: Expr
    value: Expr
    site_id: int
    addr: Optional[Expr] = None
    k: Optional[Expr] = None


@dataclass(frozen=True)
class CacheApply(Expr):
    callee: Expr
    args: tuple
    callsite_id: int
    addr: Optional[Expr] = None
    k: Optional[Expr] = None


@dataclass(frozen=True)
class Tag(Expr):
    fn: Lambda
    lambda_id: int
    free_vars: tuple


@dataclass(frozen=True)
class Extend(Expr):
    """Child address: the value of ``base`` extended with ``site_id``."""

    base: Expr
    site_id: int


@dataclass(frozen=True)
class KCall(Expr):
    """Invoke continuation ``k`` on ``value`` (CPS output only)."""

    k: Expr
    value: Expr


# ---------------------------------------------------------------------------
# Runtime values


class Closure:
    """A function value.

    ``snapshot`` maps each free variable of the lambda to its value at
    closure-creation time; together with ``lambda_id`` it is the function tag
    used for cache equivalence.  The compiled evaluators use flat closures, so
    ``env`` and ``snapshot`` are the same dict there.
    """

    __slots__ = ("lambda_id", "env", "snapshot", "params", "code",
                 "addr_param", "k_param", "is_cont", "frame", "tagged")

    def __init__(self, lambda_id, env, snapshot, params, code,
                 addr_param=None, k_param=None, is_cont=False, frame=None, tagged=False):
        self.lambda_id = lambda_id
        self.env = env
        self.snapshot = snapshot
        self.params = params
        self.code = code
        self.addr_param = addr_param
        self.k_param = k_param
        self.is_cont = is_cont
        self.frame = frame
        self.tagged = tagged

    def __repr__(self):
        return f"<closure {self.lambda_id}>"


def value_repr(v) -> str:
    """Surface-syntax rendering of a runtime value."""
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, tuple):
        return "(" + " ".join(value_repr(x) for x in v) + ")"
    if isinstance(v, str):
        return '"' + v.replace('"', '\\"') + '"'
    if isinstance(v, float):
        return repr(v)
    return repr(v)


# ---------------------------------------------------------------------------
# Primitive operators


def _num(x):
    if x.__class__ is bool or not isinstance(x, (int, float)):
        raise EvalError(f"expected a number, got {value_repr(x)}")
    return x


def _add(*xs):
    return sum(_num(x) for x in xs)


def _sub(x, *ys):
    if not ys:
        return -_num(x)
    r = _num(x)
    for y in ys:
        r -= _num(y)
    return r


def _mul(*xs):
    r = 1
    for x in xs:
        r *= _num(x)
    return r


def _div(x, y):
    try:
        return _num(x) / _num(y)
    except ZeroDivisionError:
        raise EvalError("division by zero") from None


def _nth(lst, i):
    if not isinstance(lst, tuple):
        raise EvalError(f"nth: expected a list, got {value_repr(lst)}")
    if i.__class__ is not int:
        raise EvalError(f"nth: index must be an integer, got {value_repr(i)}")
    if not 0 <= i < len(lst):
        raise EvalError(f"nth: index {i} out of range for list of length {len(lst)}")
    return lst[i]


def _len(lst):
    if not isinstance(lst, tuple):
        raise EvalError(f"len: expected a list, got {value_repr(lst)}")
    return len(lst)


def _bools(xs):
    for x in xs:
        if x.__class__ is not bool:
            raise EvalError(f"expected a boolean, got {value_repr(x)}")
    return xs


def _cons(x, lst):
    if not isinstance(lst, tuple):
        raise EvalError(f"cons: expected a list, got {value_repr(lst)}")
    return (x,) + lst


def _append(a, b):
    if not isinstance(a, tuple) or not isinstance(b, tuple):
        raise EvalError("append: expected two lists")
    return a + b


def _log(x):
    x = _num(x)
    if x < 0:
        raise EvalError("log of a negative number")
    return math.log(x) if x > 0 else -math.inf


def _sqrt(x):
    x = _num(x)
    if x < 0:
        raise EvalError("sqrt of a negative number")
    return math.sqrt(x)


def _cmp(fn):
    def op(a, b):
        return fn(_num(a), _num(b))
    return op


# name -> (function, min arity, max arity or None).  The compiled evaluators
# call these directly; argument checks live inside the functions.
PRIMOPS: dict[str, tuple[Callable, int, Optional[int]]] = {
    "+": (_add, 0, None),
    "-": (_sub, 1, None),
    "*": (_mul, 0, None),
    "/": (_div, 2, 2),
    "=": (operator.eq, 2, 2),
    "<": (_cmp(operator.lt), 2, 2),
    ">": (_cmp(operator.gt), 2, 2),
    "<=": (_cmp(operator.le), 2, 2),
    ">=": (_cmp(operator.ge), 2, 2),
    "list": (lambda *xs: xs, 0, None),
    "nth": (_nth, 2, 2),
    "len": (_len, 1, 1),
    "and": (lambda *xs: all(_bools(xs)), 0, None),
    "or": (lambda *xs: any(_bools(xs)), 0, None),
    "not": (lambda x: not _bools((x,))[0], 1, 1),
    "cons": (_cons, 2, 2),
    "append": (_append, 2, 2),
    "log": (_log, 1, 1),
    "exp": (lambda x: math.exp(_num(x)), 1, 1),
    "sqrt": (_sqrt, 1, 1),
}

SPECIAL_FORMS = frozenset(
    ["define", "lambda", "if", "let", "sample", "observe", "query-add", "quote"]
)


# ---------------------------------------------------------------------------
# Reader


class Sym(str):
    """A symbol token; remembers its source position."""

    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int


@dataclass
class Quoted:
    datum: Any
    line: int
    col: int


@dataclass
class Atom:
    value: Any
    line: int
    col: int


_TOKEN = re.compile(
    r"""(?P<ws>\s+)|(?P<comment>;[^\n]*)|(?P<open>\()|(?P<close>\))|(?P<quote>')"""
    r"""|(?P<string>"(?:[^"\\]|\\.)*")|(?P<atom>[^\s()';"]+)|(?P<bad>.)""",
    re.S,
)
_INT = re.compile(r"[+-]?\d+$")
_FLOAT = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+(\.\d*)?[eE][+-]?\d+|\d+\.\d*[eE][+-]?\d+)$")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
        self.tokens = []
        for m in _TOKEN.finditer(text):
            kind = m.lastgroup
            if kind in ("ws", "comment"):
                continue
            line, col = self.pos(m.start())
            if kind == "bad":
                raise ParseError(f"unexpected character {m.group()!r}", line, col)
            self.tokens.append((kind, m.group(), line, col))
        self.i = 0

    def pos(self, offset):
        idx = bisect.bisect_right(self.line_starts, offset) - 1
        return idx + 1, offset - self.line_starts[idx] + 1

    def read_all(self):
        out = []
        while self.i < len(self.tokens):
            out.append(self.read())
        return out

    def read(self):
        if self.i >= len(self.tokens):
            line, col = self.pos(len(self.text))
            raise ParseError("unexpected end of input", line, col)
        kind, text, line, col = self.tokens[self.i]
        self.i += 1
        if kind == "open":
            items = []
            while True:
                if self.i >= len(self.tokens):
                    raise ParseError("unclosed parenthesis", line, col)
                if self.tokens[self.i][0] == "close":
                    self.i += 1
                    return SList(items, line, col)
                items.append(self.read())
        if kind == "close":
            raise ParseError("unexpected ')'", line, col)
        if kind == "quote":
            return Quoted(self.read(), line, col)
        if kind == "string":
            body = text[1:-1].encode("utf-8").decode("unicode_escape")
            return Atom(body, line, col)
        return self.atom(text, line, col)

    @staticmethod
    def atom(text, line, col):
        if text == "true":
            return Atom(True, line, col)
        if text == "false":
            return Atom(False, line, col)
        if _INT.match(text):
            return Atom(int(text), line, col)
        if _FLOAT.match(text):
            return Atom(float(text), line, col)
        s = Sym(text)
        s.line, s.col = line, col
        return s


def _datum(x):
    """Convert a quoted s-expression to a literal value."""
    if isinstance(x, SList):
        return tuple(_datum(i) for i in x.items)
    if isinstance(x, Quoted):
        return _datum(x.datum)
    if isinstance(x, Atom):
        return x.value
    return str(x)


def _where(x):
    if isinstance(x, Sym):
        return x.line, x.col
    return x.line, x.col


# ---------------------------------------------------------------------------
# Parser: s-expressions -> AST


class _Builder:
    """Builds the AST and assigns SourceIds in pre-order."""

    def __init__(self):
        # ids start at 1, so the first lambda of a program is tagged '1'
        self.next_id = 1

    def fresh(self):
        i = self.next_id
        self.next_id += 1
        return i

    def expr(self, x, scope: frozenset):
        if isinstance(x, Atom):
            return Literal(x.value)
        if isinstance(x, Quoted):
            return Literal(_datum(x.datum))
        if isinstance(x, Sym):
            if x not in scope:
                raise ParseError(f"unbound variable {x!s}", x.line, x.col)
            return Var(str(x))
        assert isinstance(x, SList)
        if not x.items:
            raise ParseError("empty application", x.line, x.col)
        head = x.items[0]
        if isinstance(head, Sym) and head not in scope:
            if head in SPECIAL_FORMS:
                return getattr(self, "form_" + head.replace("-", "_"))(x, scope)
            if head in PRIMOPS:
                _, lo, hi = PRIMOPS[head]
                n = len(x.items) - 1
                if n < lo or (hi is not None and n > hi):
                    raise ParseError(f"wrong number of arguments to {head!s}", x.line, x.col)
                return PrimOp(str(head), tuple(self.expr(a, scope) for a in x.items[1:]))
        cid = self.fresh()
        callee = self.expr(head, scope)
        args = tuple(self.expr(a, scope) for a in x.items[1:])
        return Apply(callee, args, cid)

    def body(self, forms, scope, where):
        """Sequence of expressions; all but the last are evaluated for effect."""
        if not forms:
            raise ParseError("empty body", *where)
        exprs = [self.expr(f, scope) for f in forms]
        out = exprs[-1]
        for e in reversed(exprs[:-1]):
            out = Let("_", e, out)
        return out

    def form_quote(self, x, scope):
        if len(x.items) != 2:
            raise ParseError("quote takes one datum", x.line, x.col)
        return Literal(_datum(x.items[1]))

    def form_lambda(self, x, scope, self_name=None):
        if len(x.items) < 3 or not isinstance(x.items[1], SList):
            raise ParseError("lambda needs a parameter list and a body", x.line, x.col)
        params = []
        for p in x.items[1].items:
            if not isinstance(p, Sym):
                raise ParseError("lambda parameters must be symbols", *_where(p))
            if p in params:
                raise ParseError(f"duplicate parameter {p!s}", p.line, p.col)
            params.append(str(p))
        lid = self.fresh()
        body = self.body(x.items[2:], scope | set(params), (x.line, x.col))
        lam = Lambda(tuple(params), body, lid)
        return Lambda(lam.params, body, lid, free_vars_ordered(lam))

    def form_if(self, x, scope):
        if len(x.items) != 4:
            raise ParseError("if takes a condition and two branches", x.line, x.col)
        c, t, e = (self.expr(i, scope) for i in x.items[1:])
        return If(c, t, e)

    def form_let(self, x, scope):
        if len(x.items) < 3 or not isinstance(x.items[1], SList):
            raise ParseError("let needs a binding list and a body", x.line, x.col)
        bindings = []
        for b in x.items[1].items:
            if not (isinstance(b, SList) and len(b.items) == 2 and isinstance(b.items[0], Sym)):
                raise ParseError("let binding must be (name expr)", *_where(b))
            name = b.items[0]
            bindings.append((str(name), self.expr(b.items[1], scope)))
            scope = scope | {str(name)}
        out = self.body(x.items[2:], scope, (x.line, x.col))
        for name, bound in reversed(bindings):
            out = Let(name, bound, out)
        return out

    def _erp_and_params(self, x, scope, n_tail):
        if len(x.items) < 2 or not isinstance(x.items[1], Sym):
            raise ParseError(f"{x.items[0]!s} needs a distribution name", x.line, x.col)
        name = str(x.items[1])
        if name not in _erp.ERPS:
            raise ParseError(f"unknown distribution {name}", x.items[1].line, x.items[1].col)
        want = _erp.ERPS[name].nparams
        got = len(x.items) - 2 - n_tail
        if got != want:
            raise ParseError(f"{name} takes {want} parameter(s), got {got}", x.line, x.col)
        return name

    def form_sample(self, x, scope):
        name = self._erp_and_params(x, scope, 0)
        sid = self.fresh()
        params = tuple(self.expr(p, scope) for p in x.items[2:])
        return Sample(name, params, sid)

    def form_observe(self, x, scope):
        name = self._erp_and_params(x, scope, 1)
        sid = self.fresh()
        params = tuple(self.expr(p, scope) for p in x.items[2:-1])
        return Observe(name, params, self.expr(x.items[-1], scope), sid)

    def form_query_add(self, x, scope):
        if len(x.items) != 3:
            raise ParseError("query-add takes a key and a value", x.line, x.col)
        sid = self.fresh()
        return QueryAdd(self.expr(x.items[1], scope), self.expr(x.items[2], scope), sid)

    def form_define(self, x, scope):
        raise ParseError("define is only allowed at top level", x.line, x.col)

    def program(self, forms):
        if not forms:
            raise ParseError("empty program", 1, 1)
        *defs, last = forms
        scope = frozenset()
        bindings = []
        for d in defs:
            if not (isinstance(d, SList) and d.items and d.items[0] == "define"
                    and isinstance(d.items[0], Sym)):
                raise ParseError("only define forms may precede the program body", *_where(d))
            name, bound, rec = self.define(d, scope)
            if name in (b[0] for b in bindings):
                raise ParseError(f"duplicate define {name}", d.line, d.col)
            bindings.append((name, bound, rec))
            scope = scope | {name}
        if isinstance(last, SList) and last.items and last.items[0] == "define":
            raise ParseError("program must end with an expression", last.line, last.col)
        out = self.expr(last, scope)
        for name, bound, rec in reversed(bindings):
            out = Let(name, bound, out, rec)
        return out

    def define(self, d, scope):
        if len(d.items) < 3:
            raise ParseError("define needs a name and a value", d.line, d.col)
        target = d.items[1]
        if isinstance(target, SList):
            # (define (f x ...) body ...) sugar
            if not target.items or not isinstance(target.items[0], Sym):
                raise ParseError("bad define form", d.line, d.col)
            name = str(target.items[0])
            lam = SList([Sym("lambda"), SList(target.items[1:], target.line, target.col)]
                        + d.items[2:], d.line, d.col)
        else:
            if not isinstance(target, Sym) or len(d.items) != 3:
                raise ParseError("bad define form", d.line, d.col)
            name = str(target)
            lam = d.items[2]
        is_lambda = isinstance(lam, SList) and lam.items and lam.items[0] == "lambda" \
            and "lambda" not in scope
        if is_lambda:
            bound = self.form_lambda(lam, scope | {name})
            return name, bound, name in bound.free_vars
        return name, self.expr(lam, scope), False


def parse(source: str) -> Expr:
    """Parse program text into an AST with SourceIds assigned."""
    forms = _Reader(source).read_all()
    return _Builder().program(forms)


def parse_expr(source: str) -> Expr:
    """Parse a single closed expression (no defines)."""
    forms = _Reader(source).read_all()
    if len(forms) != 1:
        raise ParseError("expected exactly one expression", 1, 1)
    return _Builder().expr(forms[0], frozenset())


# ---------------------------------------------------------------------------
# Free variables


def children(e: Expr):
    """Immediate subexpressions, in evaluation order."""
    t = type(e)
    if t is Lambda:
        return (e.body,)
    if t in (Apply, CacheApply):
        return tuple(x for x in (e.addr, e.k, e.callee) if x is not None) + e.args
    if t is If:
        return (e.cond, e.then, e.else_)
    if t is Let:
        return (e.bound, e.body)
    if t is PrimOp:
        return e.args
    if t is Sample:
        return tuple(x for x in (e.addr, e.k) if x is not None) + e.params
    if t is Observe:
        return tuple(x for x in (e.addr, e.k) if x is not None) + e.params + (e.value,)
    if t is QueryAdd:
        return tuple(x for x in (e.addr, e.k) if x is not None) + (e.key, e.value)
    if t is Tag:
        return (e.fn,)
    if t is Extend:
        return (e.base,)
    if t is KCall:
        return (e.k, e.value)
    return ()


def binders(e: Expr) -> tuple:
    """Names bound by ``e`` over its (non-``bound``) body."""
    if type(e) is Lambda:
        extra = tuple(x for x in (e.addr_param, e.k_param) if x is not None)
        return extra + tuple(e.params)
    if type(e) is Let:
        return (e.name,)
    return ()


def free_vars_ordered(e: Expr) -> tuple:
    """Free variables of ``e`` in order of first occurrence."""
    out: list = []
    seen: set = set()

    # explicit stack: (expr, bound-set)
    stack = [(e, frozenset())]
    while stack:
        x, bound = stack.pop()
        t = type(x)
        if t is Var:
            if x.name not in bound and x.name not in seen:
                seen.add(x.name)
                out.append(x.name)
            continue
        if t is Let:
            inner = bound | {x.name}
            stack.append((x.body, inner))
            stack.append((x.bound, inner if x.rec else bound))
            continue
        b = binders(x)
        inner = bound | set(b) if b else bound
        for c in reversed(children(x)):
            stack.append((c, inner))
    return tuple(out)


def free_variables(e: Expr) -> set:
    """Exact set of free variables."""
    return set(free_vars_ordered(e))


def walk(e: Expr):
    """Pre-order iteration over every node."""
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(children(x)))


# ---------------------------------------------------------------------------
# Reference evaluator


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, vars=None, parent=None):
        self.vars = vars if vars is not None else {}
        self.parent = parent

    def lookup(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        raise EvalError(f"unbound variable {name}")


class Handlers:
    """Hooks for the probabilistic forms; the default rejects them."""

    def sample(self, erp_name, params):
        raise EvalError("sample in a deterministic evaluation")

    def observe(self, erp_name, params, value):
        raise EvalError("observe in a deterministic evaluation")

    def query_add(self, key, value):
        raise EvalError("query-add in a deterministic evaluation")


def eval_direct(e: Expr, env: Optional[Env] = None, handlers: Optional[Handlers] = None):
    """Call-by-value evaluation of a source AST.

    Recursion depth follows the program's call depth; use :func:`run_deep` for
    deeply recursive programs.
    """
    h = handlers or Handlers()
    return _ev(e, env or Env(), h)


def _ev(e, env, h):
    t = type(e)
    if t is Literal:
        return e.value
    if t is Var:
        return env.lookup(e.name)
    if t is If:
        c = _ev(e.cond, env, h)
        if c.__class__ is not bool:
            raise EvalError(f"if: condition must be a boolean, got {value_repr(c)}")
        return _ev(e.then if c else e.else_, env, h)
    if t is Let:
        if e.rec:
            inner = Env({}, env)
            v = _ev(e.bound, inner, h)
            inner.vars[e.name] = v
            if isinstance(v, Closure):
                v.snapshot[e.name] = v
            return _ev(e.body, inner, h)
        v = _ev(e.bound, env, h)
        return _ev(e.body, Env({e.name: v}, env), h)
    if t is Lambda:
        snap = {}
        for n in e.free_vars:
            try:
                snap[n] = env.lookup(n)
            except EvalError:
                pass  # recursive self-reference, patched by the enclosing Let
        return Closure(e.lambda_id, env, snap, e.params, e)
    if t is PrimOp:
        fn = PRIMOPS[e.op][0]
        args = [_ev(a, env, h) for a in e.args]
        try:
            return fn(*args)
        except EvalError:
            raise
        except (TypeError, ValueError, IndexError, OverflowError) as exc:
            raise EvalError(f"{e.op}: {exc}") from None
    if t is Apply:
        f = _ev(e.callee, env, h)
        args = [_ev(a, env, h) for a in e.args]
        if not isinstance(f, Closure):
            raise EvalError(f"cannot apply non-function {value_repr(f)}")
        lam = f.code
        if len(args) != len(lam.params):
            raise EvalError(f"arity mismatch: expected {len(lam.params)} argument(s), got {len(args)}")
        return _ev(lam.body, Env(dict(zip(lam.params, args)), f.env), h)
    if t is Sample:
        return h.sample(e.erp, tuple(_ev(p, env, h) for p in e.params))
    if t is Observe:
        params = tuple(_ev(p, env, h) for p in e.params)
        return h.observe(e.erp, params, _ev(e.value, env, h))
    if t is QueryAdd:
        return h.query_add(_ev(e.key, env, h), _ev(e.value, env, h))
    raise EvalError(f"eval_direct cannot evaluate {t.__name__}")


def run_deep(fn: Callable, *args, stack_mb: int = 512, recursion_limit: int = 1_000_000):
    """Run ``fn(*args)`` on a thread with a large stack and recursion limit."""
    result: dict = {}

    def target():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(recursion_limit)
        try:
            result["value"] = fn(*args)
        except BaseException as exc:  # re-raised in the caller
            result["error"] = exc
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size()
    threading.stack_size(stack_mb * 1024 * 1024)
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
    if "error" in result:
        raise result["error"]
    return result["value"]


# ---------------------------------------------------------------------------
# Pretty printer (used by the transform and cache dumps)


def unparse(e: Expr) -> str:
    t = type(e)
    if t is Literal:
        v = e.value
        if isinstance(v, tuple):
            return "'" + value_repr(v)
        return value_repr(v)
    if t is Var:
        return e.name
    if t is Lambda:
        ps = [p for p in (e.addr_param, e.k_param) if p] + list(e.params)
        head = "klambda" if e.is_cont else "lambda"
        return f"({head} ({' '.join(ps)}) {unparse(e.body)})"
    if t in (Apply, CacheApply):
        parts = ["cache"] if t is CacheApply else []
        if t is CacheApply:
            parts += [unparse(x) for x in (e.addr, e.k) if x is not None]
            parts.append(unparse(e.callee))
        else:
            parts.append(unparse(e.callee))
            parts += [unparse(x) for x in (e.addr, e.k) if x is not None]
        parts += [unparse(a) for a in e.args]
        return "(" + " ".join(parts) + ")"
    if t is If:
        return f"(if {unparse(e.cond)} {unparse(e.then)} {unparse(e.else_)})"
    if t is Let:
        head = "letrec" if e.rec else "let"
        return f"({head} (({e.name} {unparse(e.bound)})) {unparse(e.body)})"
    if t is PrimOp:
        return "(" + " ".join([e.op] + [unparse(a) for a in e.args]) + ")"
    if t in (Sample, Observe, QueryAdd):
        head = {Sample: "sample", Observe: "observe", QueryAdd: "query-add"}[t]
        parts = [head] + [unparse(x) for x in (e.addr, e.k) if x is not None]
        if t is QueryAdd:
            parts += [unparse(e.key), unparse(e.value)]
        else:
            parts.append(e.erp)
            parts += [unparse(p) for p in e.params]
            if t is Observe:
                parts.append(unparse(e.value))
        return "(" + " ".join(parts) + ")"
    if t is Tag:
        return f"(tag {unparse(e.fn)} '{e.lambda_id} ({' '.join(e.free_vars)}))"
    if t is Extend:
        return f"(extend {unparse(e.base)} {e.site_id})"
    if t is KCall:
        return f"({unparse(e.k)} {unparse(e.value)})"
    raise TypeError(t)
