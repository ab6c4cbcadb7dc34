"""Shared test programs: the motivating HMM and a deterministic corpus."""

import random

FIG1_HMM = """
(define trans '((0.7 0.3) (0.4 0.6)))
(define emit '((0.9 0.1) (0.2 0.8)))
(define transition (lambda (prev) (sample categorical (nth trans (if prev 1 0)))))
(define observation (lambda (state o) (observe categorical (nth emit state) o)))
(define hmm
  (lambda (n obs)
    (if (= n 0)
        true
        (let ((prev (hmm (- n 1) obs)))
          (let ((state (transition prev)))
            (observation state (nth obs (- n 1)))
            (= state 1))))))
(hmm $N '(0 1 1 0 1 0 0 1 1 1))
"""


def fig1(n=5):
    return FIG1_HMM.replace("$N", str(n))


HANDWRITTEN = [
    ("42", 42),
    ("(if true 1 2)", 1),
    ("(+ 1 2)", 3),
    ("((lambda (x) x) 7)", 7),
    ("(define (fact n) (if (= n 0) 1 (* n (fact (- n 1))))) (fact 5)", 120),
    ("(define (fib n) (if (< n 2) n (+ (fib (- n 1)) (fib (- n 2))))) (fib 12)", 144),
    ("(let ((f (lambda (x) (lambda (y) (+ x y))))) ((f 3) 4))", 7),
    ("(define (compose f g) (lambda (x) (f (g x)))) ((compose (lambda (x) (* 2 x)) (lambda (x) (+ x 1))) 5)", 12),
    ("(define (map f l i) (if (= i (len l)) '() (cons (f (nth l i)) (map f l (+ i 1))))) (map (lambda (x) (* x x)) '(1 2 3) 0)",
     (1, 4, 9)),
    ("(define (parity n) (if (= n 0) true (not (parity (- n 1))))) (parity 10)", True),
    ("(let ((x 1)) (let ((x (+ x 1))) (* x 10)))", 20),
    ("(define (sum l i acc) (if (= i (len l)) acc (sum l (+ i 1) (+ acc (nth l i))))) (sum '(1 2 3 4) 0 0)", 10),
    ("(if (and (< 1 2) (not (> 1 2))) 'yes 'no)", None),
    ("(define (apply2 f x) (f (f x))) (apply2 (lambda (v) (append v '(0))) '(1))", (1, 0, 0)),
    ("(define (count n) (if (= n 0) 0 (+ 1 (count (- n 1))))) (count 300)", 300),
    ("(let ((a (list 1 2)) (b (list 3))) (len (append a b)))", 3),
    ("(define (k x) (lambda (y) x)) ((k 5) 6)", 5),
    ("(define (loop i acc) (if (= i 0) acc (loop (- i 1) (* 2 acc)))) (loop 10 1)", 1024),
    ("(define (tw f) (lambda (x) (f (f x)))) (((tw tw) (lambda (x) (+ x 3))) 0)", 12),
    ("(define (ack m n) (if (= m 0) (+ n 1) (if (= n 0) (ack (- m 1) 1) (ack (- m 1) (ack m (- n 1)))))) (ack 2 3)", 9),
]

# deep recursion: non-tail, tail, and building a list
DEEP = [
    ("(define (count n) (if (= n 0) 0 (+ 1 (count (- n 1))))) (count 10000)", 10000),
    ("(define (loop i acc) (if (= i 0) acc (loop (- i 1) (+ acc i)))) (loop 10000 0)", 50005000),
    ("(define (build n) (if (= n 0) '() (cons n (build (- n 1))))) (len (build 10000))", 10000),
]


def random_program(rng: random.Random, depth: int = 4) -> str:
    """A closed, deterministic, error-free integer program."""
    names = []

    def num(d):
        r = rng.random()
        if d == 0 or r < 0.2:
            if names and rng.random() < 0.6:
                return rng.choice(names)
            return str(rng.randint(-5, 9))
        if r < 0.45:
            op = rng.choice(["+", "-", "*"])
            return f"({op} {num(d - 1)} {num(d - 1)})"
        if r < 0.6:
            c = rng.choice(["<", "=", ">"])
            return f"(if ({c} {num(d - 1)} {num(d - 1)}) {num(d - 1)} {num(d - 1)})"
        if r < 0.8:
            v = f"v{len(names)}"
            bound = num(d - 1)
            names.append(v)
            body = num(d - 1)
            names.remove(v)
            return f"(let (({v} {bound})) {body})"
        p = f"p{len(names)}"
        names.append(p)
        body = num(d - 1)
        names.remove(p)
        return f"((lambda ({p}) {body}) {num(d - 1)})"

    return num(depth)


def corpus(n_random: int = 27, seed: int = 7):
    """(source, expected-or-None) pairs; at least 50 programs in total."""
    rng = random.Random(seed)
    out = list(HANDWRITTEN) + list(DEEP)
    out += [(random_program(rng), None) for _ in range(n_random)]
    return out
