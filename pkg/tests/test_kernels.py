"""The compiled kernels must agree with the pure-Python fallback bit for bit."""

import importlib
import os
import subprocess
import sys

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from poissonlr import _kernels_py as py
from poissonlr._kernels_py import FIELD

cy = pytest.importorskip("poissonlr._ckernels")

keys = st.builds(
    lambda i, a, b, c: i | (a << FIELD) | (b << 2 * FIELD) | (c << 3 * FIELD),
    st.integers(0, 1), st.integers(0, 5), st.integers(0, 5), st.integers(0, 5),
)
coeffs = st.builds(mpq, st.integers(-30, 30).filter(bool), st.integers(1, 9))
polys = st.dictionaries(keys, coeffs, max_size=12)


@given(polys, polys)
def test_binary_kernels_agree(a, b):
    for name in ("poly_add", "poly_sub", "poly_mul"):
        assert getattr(cy, name)(a, b) == getattr(py, name)(a, b), name


@given(polys, st.sampled_from([FIELD, 2 * FIELD, 3 * FIELD]), coeffs)
def test_unary_kernels_agree(a, shift, c):
    assert cy.poly_diff(a, shift) == py.poly_diff(a, shift)
    assert cy.poly_scale(a, c) == py.poly_scale(a, c)


@given(st.integers(0, 60), st.integers(0, 60))
def test_integer_kernels_agree(b, g):
    assert cy.weyl_pairs(b, g) == py.weyl_pairs(b, g)
    assert cy.binomial_row(b) == py.binomial_row(b)


def test_binomial_row_values():
    assert py.binomial_row(4) == [1, 4, 6, 4, 1]


def test_weyl_pairs_values():
    # p^2 q^3: j = 0, 1, 2 with C(2, j) * 3!/(3-j)!
    assert py.weyl_pairs(2, 3) == [(0, 1), (1, 6), (2, 6)]


def test_backend_selection_honours_env():
    code = "import poissonlr.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, POISSONLR_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert importlib.import_module("poissonlr.kernels").BACKEND in ("python", "cython")
