"""Benchmark and test models.

Program text lives in ``corpus/*.c3p`` as templates; a generator draws the
synthetic data from a seeded numpy ``Generator`` and splices it in as literal
lists.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .lang import Expr, parse, value_repr

HMM_STATES = 10
HMM_SYMBOLS = 10
LDA_TOPICS = 10
LDA_VOCAB = 100
LDA_WORDS = 20
GMM_K = 3
GMM_WEIGHTS = (0.3, 0.3, 0.4)
GMM_PRIOR_SD = 5.0
HLR_PRIOR_SD = 5.0
HLR_NOISE_SD = 0.5
HLR_POINTS = 10
RECTREE_SPLIT = 0.5
RECTREE_SIZE_SD = 2.0
SINGLE_FLIP_P = 0.3

# normalized model size k in 1..10 -> size parameter
SIZE_SCALE = {"hmm": 10, "lda": 5, "gmm": 20, "hlr": 5}

# inclusive size ranges and defaults
SIZE_RANGE = {
    "hmm": (10, 100),
    "hmm-list": (10, 100),
    "lda": (5, 50),
    "gmm": (1, 1000),
    "hlr": (1, 100),
    "rectree": (1, 12),
    "branching": (1, 1),
    "single-flip": (1, 1),
    "tiny-hmm": (2, 2),
}
DEFAULT_SIZE = {
    "hmm": 10, "hmm-list": 10, "lda": 5, "gmm": 5, "hlr": 2, "rectree": 4,
    "branching": 1, "single-flip": 1, "tiny-hmm": 2,
}
MODELS = tuple(SIZE_RANGE)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    size: int
    seed: int
    program: str
    data: dict = field(default_factory=dict, compare=False)

    def ast(self) -> Expr:
        return parse(self.program)


def template(name: str) -> str:
    return resources.files("c3ppl").joinpath("corpus").joinpath(f"{name}.c3p").read_text("utf-8")


def lit(x) -> str:
    """Render nested lists/arrays of numbers as a literal datum."""
    if isinstance(x, (list, tuple, np.ndarray)):
        return "(" + " ".join(lit(v) for v in x) + ")"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def normalized_size(name: str, k: int) -> int:
    if name not in SIZE_SCALE:
        raise ValueError(f"model {name!r} has no normalized size mapping")
    if not 1 <= k <= 10:
        raise ValueError("normalized size must be in 1..10")
    return SIZE_SCALE[name] * k


def _hmm_data(rng, n):
    trans = rng.dirichlet(np.ones(HMM_STATES), size=HMM_STATES)
    emit = rng.dirichlet(np.ones(HMM_SYMBOLS), size=HMM_STATES)
    s, obs = 0, []
    for _ in range(n):
        s = int(rng.choice(HMM_STATES, p=trans[s]))
        obs.append(int(rng.choice(HMM_SYMBOLS, p=emit[s])))
    return {"TRANS": trans.tolist(), "EMIT": emit.tolist(), "DATA": obs, "N": n}


def _lda_data(rng, d):
    topics = rng.dirichlet(np.ones(LDA_VOCAB), size=LDA_TOPICS)
    docs = []
    for _ in range(d):
        theta = rng.dirichlet(np.ones(LDA_TOPICS))
        z = rng.choice(LDA_TOPICS, size=LDA_WORDS, p=theta)
        docs.append([int(rng.choice(LDA_VOCAB, p=topics[t])) for t in z])
    return {"ALPHA": [1.0] * LDA_TOPICS, "ETA": [1.0] * LDA_VOCAB, "DOCS": docs,
            "K": LDA_TOPICS, "V": LDA_VOCAB}


def _gmm_data(rng, n):
    means = rng.normal(0.0, GMM_PRIOR_SD, size=GMM_K)
    z = rng.choice(GMM_K, size=n, p=GMM_WEIGHTS)
    xs = rng.normal(means[z], 1.0)
    return {"WEIGHTS": list(GMM_WEIGHTS), "DATA": xs.tolist(), "K": GMM_K,
            "PRIOR_SD": GMM_PRIOR_SD}


def _hlr_data(rng, g):
    mu_a, mu_b = rng.normal(0.0, 2.0, size=2)
    groups = []
    for _ in range(g):
        a, b = rng.normal(mu_a, 1.0), rng.normal(mu_b, 1.0)
        xs = rng.uniform(-1.0, 1.0, size=HLR_POINTS)
        ys = a + b * xs + rng.normal(0.0, HLR_NOISE_SD, size=HLR_POINTS)
        groups.append([xs.tolist(), ys.tolist()])
    return {"GROUPS": groups, "PRIOR_SD": HLR_PRIOR_SD, "NOISE_SD": HLR_NOISE_SD}


def _rectree_data(rng, depth):
    # target size comes from one forward simulation of the same prior
    def grow(d):
        if d == 0 or rng.random() >= RECTREE_SPLIT:
            return 1
        return 1 + grow(d - 1) + grow(d - 1)
    return {"DEPTH": depth, "SPLIT": RECTREE_SPLIT, "SIZE_SD": RECTREE_SIZE_SD,
            "TARGET": float(grow(depth))}


_GENERATORS = {
    "hmm": _hmm_data,
    "hmm-list": _hmm_data,
    "lda": _lda_data,
    "gmm": _gmm_data,
    "hlr": _hlr_data,
    "rectree": _rectree_data,
    "branching": lambda rng, n: {},
    "single-flip": lambda rng, n: {"P": SINGLE_FLIP_P},
    "tiny-hmm": lambda rng, n: {},
}


def build_model(name: str, size: int | None = None, seed: int = 0,
                check_range: bool = True) -> ModelSpec:
    if name not in SIZE_RANGE:
        raise ValueError(f"unknown model {name!r}; expected one of {', '.join(MODELS)}")
    if size is None:
        size = DEFAULT_SIZE[name]
    lo, hi = SIZE_RANGE[name]
    if check_range and not lo <= size <= hi:
        raise ValueError(f"{name}: size {size} outside [{lo}, {hi}]")
    if size < 1:
        raise ValueError("size must be positive")
    data = _GENERATORS[name](np.random.default_rng(seed), size)
    subs = {k: lit(v) if isinstance(v, list) else (value_repr(v) if not isinstance(v, float)
                                                    else repr(v))
            for k, v in data.items()}
    text = string.Template(template(name)).substitute(subs)
    return ModelSpec(name, size, seed, text, data)
