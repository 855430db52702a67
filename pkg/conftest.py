import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), 'backend'))

from hessbb.core.expr import Add, Const, Div, Func, Mul, Neg, PowInt, Sub, Var  # noqa: E402
from hessbb.problems.loader import load_problem  # noqa: E402

PROBLEMS = Path(__file__).parent / "problems"

CORPUS = {
    "e1": "e1_quartic.txt",
    "e2": "e2_trig.txt",
    "e3": "e3_quadratic_sum.txt",
    "e4": "e4_exp.txt",
    "e5": "e5_cubic.txt",
}


@pytest.fixture(scope="session")
def corpus():
    return {key: load_problem(PROBLEMS / name) for key, name in CORPUS.items()}


@pytest.fixture(scope="session")
def problem_path():
    return lambda key: str(PROBLEMS / CORPUS[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_expr(rng):
    """Builder of random expression trees over n variables with bounded values on [-1, 1]^n."""
    def build(depth=3, n=2):
        if depth == 0 or rng.random() < 0.2:
            if rng.random() < 0.6:
                return Var(int(rng.integers(n)))
            return Const(float(rng.integers(1, 4)))
        a = build(depth - 1, n)
        kind = int(rng.integers(7))
        if kind == 0:
            return Add((a, build(depth - 1, n)))
        if kind == 1:
            return Sub(a, build(depth - 1, n))
        if kind == 2:
            return Mul((a, build(depth - 1, n)))
        if kind == 3:
            return Neg(a)
        if kind == 4:
            return PowInt(a, 2)
        if kind == 5:
            return Div(a, Add((PowInt(build(depth - 1, n), 2), Const(1.0))))
        return Func(["sin", "cos"][int(rng.integers(2))], a)

    return build
