"""Exact tensor engine: canonicalization, reduction, identity catalogue."""

import random
import time

import pytest
import sympy as sp

from harnacklab.symbolic import (
    ALPHA, BETA, N,
    TensorError, TensorExpr,
    commute_and_reduce, dg, gpow, kron, laplacian, normalize, ric, riem,
    identity_names, verify_identity,
)
from harnacklab.symbolic.engine import Term, _rename


def is_zero(expr) -> bool:
    return len(normalize(expr).terms) == 0


def exprs_equal(a, b) -> bool:
    return is_zero(a - b)


# -- normalize ----------------------------------------------------------------


def test_first_pair_antisymmetry():
    assert is_zero(riem("i", "j", "k", "l") + riem("j", "i", "k", "l"))
    assert is_zero(riem("i", "j", "k", "l") + riem("i", "j", "l", "k"))
    assert is_zero(riem("i", "j", "k", "l") - riem("k", "l", "i", "j"))


def test_hessian_symmetry():
    assert is_zero(dg("i", "j") - dg("j", "i"))


def test_dummy_renaming_invariance():
    a = dg("k") * dg("k") * gpow(-1)
    b = dg("m") * dg("m") * gpow(-1)
    na, nb = normalize(a), normalize(b)
    assert [(t.factors, t.gexp) for t in na.terms] == \
           [(t.factors, t.gexp) for t in nb.terms]


def test_riemann_internal_trace_is_ricci():
    assert exprs_equal(
        commute_and_reduce(riem("i", "k", "j", "k")), ric("i", "j"))
    assert exprs_equal(
        commute_and_reduce(riem("k", "i", "j", "k")), -1 * ric("i", "j"))


def test_kron_contraction():
    assert exprs_equal(kron("i", "k") * dg("k"), dg("i"))
    # full trace contributes the dimension
    out = normalize(kron("k", "k"))
    assert len(out.terms) == 1 and sp.cancel(out.terms[0].coeff - N) == 0


def test_index_multiplicity_gate():
    bad = Term(sp.Integer(1), sp.Integer(0),
               (("dg", ("i",)), ("dg", ("i",)), ("dg", ("i",))))
    with pytest.raises(TensorError):
        bad.validate()
    with pytest.raises(TensorError):
        dg("i", "j", "k", "l", "m")


def test_product_contracts_shared_free_indices():
    # dummies are internal to each operand: the product of two copies of
    # dg(i) contracts once, and a further dg(i) stays free
    prod = dg("i") * dg("i") * dg("i")
    assert prod.free_indices() == {"i"}


def test_free_index_consistency_gate():
    bad = dg("i") + dg("j")
    with pytest.raises(TensorError):
        bad.free_indices()


# -- commute_and_reduce -------------------------------------------------------


def test_harmonicity_kills_traces():
    assert is_zero(commute_and_reduce(dg("k", "k")))
    assert is_zero(commute_and_reduce(dg("k", "k", "i")))
    assert is_zero(commute_and_reduce(dg("k", "k", "i", "j")))


def test_gradient_of_laplacian_string():
    # string with the trace in outer positions reduces to Ric grad G
    assert exprs_equal(
        commute_and_reduce(dg("i", "k", "k")),
        commute_and_reduce(ric("i", "k") * dg("k")))


def test_third_derivative_commutator():
    lhs = commute_and_reduce(dg("i", "j", "k") - dg("i", "k", "j"))
    rhs = commute_and_reduce(riem("j", "k", "l", "i") * dg("l"))
    assert exprs_equal(lhs, rhs)


def test_derivative_string_cap():
    with pytest.raises(TensorError):
        laplacian(dg("i", "j", "k"))


# -- laplacian ----------------------------------------------------------------


def test_power_rule_exact():
    got = laplacian(gpow(BETA))
    want = commute_and_reduce(BETA * (BETA - 1) * gpow(BETA - 2) * dg("k") * dg("k"))
    assert exprs_equal(got, want)
    # all coefficients are exact sympy expressions, never floats
    for t in got.terms:
        assert not t.coeff.atoms(sp.Float)


def test_laplacian_of_gradient_square():
    got = laplacian(dg("i") * dg("j"))
    want = commute_and_reduce(
        ric("i", "k") * dg("j") * dg("k") + ric("j", "k") * dg("i") * dg("k")
        + 2 * dg("i", "k") * dg("j", "k"))
    assert exprs_equal(got, want)


def test_laplacian_of_hessian():
    got = laplacian(dg("i", "j"))
    want = commute_and_reduce(
        ric("j", "k") * dg("i", "k") + ric("i", "k") * dg("j", "k")
        - 2 * riem("i", "k", "j", "l") * dg("k", "l"))
    assert exprs_equal(got, want)


def test_alpha_power_coefficient():
    got = laplacian(gpow(ALPHA))
    assert len(got.terms) == 1
    t = got.terms[0]
    assert sp.cancel(t.coeff - 2 * N / (2 - N) ** 2) == 0
    assert sp.cancel(t.gexp - (ALPHA - 2)) == 0


# -- identity catalogue -------------------------------------------------------


ZERO_NAMES = [n for n in identity_names() if n != "lap_of_harnack.literal"]


@pytest.mark.parametrize("name", ZERO_NAMES)
def test_identity_reduces_to_zero(name):
    res = verify_identity(name)
    assert res.zero, f"{name}: residual {res.residual}"


def test_literal_reading_is_malformed():
    res = verify_identity("lap_of_harnack.literal")
    assert not res.zero and res.ok
    assert "free" in res.note


def test_unknown_identity_name():
    with pytest.raises(TensorError):
        verify_identity("nonsense")


def test_catalogue_runtime_budget():
    t0 = time.time()
    for name in identity_names():
        verify_identity(name)
    assert time.time() - t0 < 30.0


# -- property tests -----------------------------------------------------------


_POOL = ["i", "j", "k", "l", "m", "p"]


def _random_term(rng: random.Random):
    """A random well-formed product of small factors (retry until valid)."""
    while True:
        nfac = rng.randint(1, 3)
        factors = []
        for _ in range(nfac):
            kind = rng.choice(["dg", "dg", "riem", "ric", "kron"])
            if kind == "dg":
                k = rng.randint(1, 3)
                factors.append(("dg", tuple(rng.choice(_POOL) for _ in range(k))))
            elif kind == "riem":
                factors.append(("riem", tuple(rng.choice(_POOL) for _ in range(4))))
            elif kind == "ric":
                factors.append(("ric", tuple(rng.choice(_POOL) for _ in range(2))))
            else:
                factors.append(("kron", tuple(rng.choice(_POOL) for _ in range(2))))
        coeff = sp.Rational(rng.randint(-5, 5), rng.randint(1, 4))
        if coeff == 0:
            coeff = sp.Integer(1)
        gexp = rng.choice([0, -1, 1, ALPHA])
        term = Term(coeff, sp.sympify(gexp), tuple(factors))
        try:
            term.validate()
        except TensorError:
            continue
        counts = term.index_census()
        if all(v <= 2 for v in counts.values()):
            return term


def test_normalize_idempotent_on_random_expressions():
    rng = random.Random(20240817)
    for _ in range(1000):
        expr = TensorExpr([_random_term(rng) for _ in range(rng.randint(1, 3))])
        try:
            once = normalize(expr)
        except TensorError:
            continue  # mixed free-index terms are fine for idempotence only
        twice = normalize(once)
        assert [(t.factors, sp.cancel(t.coeff), sp.cancel(t.gexp)) for t in once.terms] \
            == [(t.factors, sp.cancel(t.coeff), sp.cancel(t.gexp)) for t in twice.terms]


def test_reduction_confluence_under_presentation_changes():
    # reduction result must not depend on term order or dummy naming
    rng = random.Random(7)
    for _ in range(60):
        terms = [_random_term(rng) for _ in range(rng.randint(1, 3))]
        expr = TensorExpr(terms)
        try:
            ref = commute_and_reduce(expr)
        except TensorError:
            continue
        shuffled = list(terms)
        rng.shuffle(shuffled)
        renamed = []
        for t in shuffled:
            dummies = [k for k, v in t.index_census().items() if v == 2]
            mapping = {d: f"q{idx}_{rng.randint(0, 999)}"
                       for idx, d in enumerate(dummies)}
            renamed.append(_rename(t, mapping))
        other = commute_and_reduce(TensorExpr(renamed))
        assert exprs_equal(ref, other)


def test_reduction_respects_subexpression_splitting():
    # reduce(a + b) == reduce(reduce(a) + reduce(b)) on catalogue-sized input
    a = laplacian(dg("i") * dg("j"))
    b = -2 * dg("i", "k") * dg("j", "k")
    whole = commute_and_reduce((dg("i") * dg("j") * gpow(0)) + b)
    parts = commute_and_reduce(commute_and_reduce(dg("i") * dg("j")) +
                               commute_and_reduce(b))
    assert exprs_equal(whole, parts)
    assert exprs_equal(a + b, commute_and_reduce(a) + b)
