"""Asymptotic cost forms, constant fitting and iterated logarithms.

A :class:`CostForm` is a named shape ``f(n)`` times a constant ``a``.  Shapes
use real base-2 logarithms without ceilings: they are fit targets, not
charges.  Forms exist for three regimes: ``tm`` (multitape Turing machine
reference), ``unit`` and ``depth`` (the two log-RAM cost models).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Sequence, Tuple

MODELS = ("tm", "unit", "depth")
ALGORITHMS = ("add", "school", "karatsuba", "toom3", "ssc", "ssf", "fr", "dkssr")

LOG2_3 = math.log2(3)
LOG3_5 = math.log(5, 3)


class FitError(ValueError):
    pass


def log_star(n: float) -> int:
    """Number of times log2 must be applied to bring n down to at most 1."""
    if n < 1:
        raise ValueError("log_star needs n >= 1")
    k = 0
    x = n
    while x > 1:
        x = math.log2(x)
        k += 1
    return k


def _lg(n: float) -> float:
    return math.log2(n)


def _lglg(n: float) -> float:
    return math.log2(math.log2(n))


SHAPES: Dict[str, Callable[[float], float]] = {
    "n": lambda n: n,
    "n/log n": lambda n: n / _lg(n),
    "n loglog n/log n": lambda n: n * _lglg(n) / _lg(n),
    "n loglog n": lambda n: n * _lglg(n),
    "n (loglog n)^2": lambda n: n * _lglg(n) ** 2,
    "n log n": lambda n: n * _lg(n),
    "n log^2 n": lambda n: n * _lg(n) ** 2,
    "n log n loglog n": lambda n: n * _lg(n) * _lglg(n),
    "n log n 2^max(0,log* n-4)": lambda n: n * _lg(n) * 2.0 ** max(0, log_star(n) - 4),
    "n log n 2^log* n": lambda n: n * _lg(n) * 2.0 ** log_star(n),
    "n^2": lambda n: float(n) ** 2,
    "(n/log n)^2": lambda n: (n / _lg(n)) ** 2,
    "(n/log n)^2 loglog n": lambda n: (n / _lg(n)) ** 2 * _lglg(n),
    "n^log3": lambda n: float(n) ** LOG2_3,
    "n^log3/log^2 n": lambda n: float(n) ** LOG2_3 / _lg(n) ** 2,
    "n^log3 loglog n/log^2 n": lambda n: float(n) ** LOG2_3 * _lglg(n) / _lg(n) ** 2,
    "n^log3(5)": lambda n: float(n) ** LOG3_5,
    "n^log3(5)/log^2 n": lambda n: float(n) ** LOG3_5 / _lg(n) ** 2,
    "n^log3(5) loglog n/log^2 n": lambda n: float(n) ** LOG3_5 * _lglg(n) / _lg(n) ** 2,
}


@dataclass(frozen=True)
class CostForm:
    algorithm: str
    model: str
    shape: str
    a: float = 1.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if not self.a > 0:
            raise ValueError("constant must be positive")

    def __call__(self, n: float) -> float:
        return self.a * SHAPES[self.shape](n)

    def with_constant(self, a: float) -> "CostForm":
        return replace(self, a=a)


# (algorithm, model) -> shape.  Depth forms of the quadratic and polynomial
# algorithms carry one log log n per operation on top of the unit form.
_TABLE: Dict[Tuple[str, str], str] = {
    ("add", "tm"): "n",
    ("add", "unit"): "n/log n",
    ("add", "depth"): "n loglog n/log n",
    ("school", "tm"): "n^2",
    ("school", "unit"): "(n/log n)^2",
    ("school", "depth"): "(n/log n)^2 loglog n",
    ("karatsuba", "tm"): "n^log3",
    ("karatsuba", "unit"): "n^log3/log^2 n",
    ("karatsuba", "depth"): "n^log3 loglog n/log^2 n",
    ("toom3", "tm"): "n^log3(5)",
    ("toom3", "unit"): "n^log3(5)/log^2 n",
    ("toom3", "depth"): "n^log3(5) loglog n/log^2 n",
    ("ssc", "tm"): "n log^2 n",
    ("ssc", "unit"): "n",
    ("ssc", "depth"): "n loglog n",
    ("ssf", "tm"): "n log n loglog n",
    ("ssf", "unit"): "n loglog n",
    ("ssf", "depth"): "n (loglog n)^2",
    ("fr", "tm"): "n log n 2^max(0,log* n-4)",
    ("fr", "unit"): "n",
    ("fr", "depth"): "n loglog n",
}
for _m in MODELS:
    _TABLE[("dkssr", _m)] = _TABLE[("fr", _m)]


def cost_form(algorithm: str, model: str, published: bool = False, a: float = 1.0) -> CostForm:
    """The form for an algorithm and regime.

    ``published`` selects the ``2^(log* n)`` factor for the Fürer-type
    algorithms in the Turing-machine regime instead of the corrected
    ``2^max(0, log* n - 4)``.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    shape = _TABLE[(algorithm, model)]
    if published and algorithm in ("fr", "dkssr") and model == "tm":
        shape = "n log n 2^log* n"
    return CostForm(algorithm, model, shape, a)


def all_forms() -> List[CostForm]:
    out = [cost_form(alg, m) for alg in ALGORITHMS for m in MODELS]
    out += [cost_form(alg, "tm", published=True) for alg in ("fr", "dkssr")]
    return out


def predict(form: CostForm, n: float) -> float:
    if n < 16:
        raise ValueError("forms are defined for n >= 16")
    return form(n)


def _check_samples(samples: Sequence[Tuple[float, float]], minimum: int):
    if len(samples) < minimum:
        raise FitError(f"need at least {minimum} samples, got {len(samples)}")
    ns = [n for n, _ in samples]
    if len(set(ns)) != len(ns):
        raise FitError("sample sizes must be distinct")
    if any(c <= 0 for _, c in samples):
        raise FitError("measured costs must be positive")
    if any(n < 16 for n in ns):
        raise FitError("sample sizes must be at least 16")


def fit_constant(samples: Sequence[Tuple[float, float]], form: CostForm) -> Tuple[float, float]:
    """Least-squares constant in log space and the worst relative residual.

    The residual is ``max |c - a f(n)| / (a f(n))`` over the samples.
    """
    _check_samples(samples, 3)
    shape = SHAPES[form.shape]
    logs = [math.log(c) - math.log(shape(n)) for n, c in samples]
    a = math.exp(sum(logs) / len(logs))
    resid = max(abs(c - a * shape(n)) / (a * shape(n)) for n, c in samples)
    return a, resid


@dataclass(frozen=True)
class FitResult:
    form: CostForm
    residual: float


def compare_forms(samples: Sequence[Tuple[float, float]],
                  candidates: Sequence[CostForm]) -> List[FitResult]:
    """Fit every candidate and rank them by worst relative residual."""
    _check_samples(samples, 4)
    ns = sorted(n for n, _ in samples)
    if ns[-1] < 8 * ns[0]:
        raise FitError("samples must span at least three doublings")
    results = []
    for form in candidates:
        a, r = fit_constant(samples, form)
        results.append(FitResult(form.with_constant(a), r))
    results.sort(key=lambda fr: (fr.residual, fr.form.shape))
    return results


GENERIC_SHAPES = ("n^2", "(n/log n)^2", "n^log3", "n^log3/log^2 n", "n log n", "n")


def generic_candidates(algorithm: str = "", model: str = "unit",
                       extra: Sequence[str] = ()) -> List[CostForm]:
    """The usual shape line-up, plus the algorithm's own form and ``extra``."""
    shapes = list(GENERIC_SHAPES)
    if algorithm in ALGORITHMS:
        own = cost_form(algorithm, model).shape
        if own not in shapes:
            shapes.append(own)
    shapes += [s for s in extra if s not in shapes]
    return [CostForm(algorithm or "data", model, s) for s in shapes]
