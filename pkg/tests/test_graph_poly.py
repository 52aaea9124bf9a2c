"""Kirchhoff/Symanzik polynomials, quadratic form, generic condition."""

import random
from fractions import Fraction

import pytest

from feynpar import corpus
from feynpar.graph_poly import (
    MomentumData,
    MomentumNotConserved,
    SingularAtPoint,
    generic_condition,
    kirchhoff_matrix,
    psi_polynomial,
    r_form_evaluator,
    second_symanzik,
    v_function,
)
from feynpar.graphs import FeynmanGraph
from feynpar.poly import MultiPoly
from feynpar.slicing import verify_deletion_contraction


def test_kirchhoff_matrix_examples():
    m = kirchhoff_matrix(corpus.get("bubble"))
    t1, t2 = MultiPoly.variables(2)
    assert m == [[t1 + t2]]
    m3 = kirchhoff_matrix(corpus.get("banana3"))
    t1, t2, t3 = MultiPoly.variables(3)
    assert m3 == [[t1 + t2, t1], [t1, t1 + t3]]


def test_psi_examples():
    t1, t2 = MultiPoly.variables(2)
    assert psi_polynomial(corpus.get("bubble"), "trees") == t1 + t2
    t1, t2, t3 = MultiPoly.variables(3)
    assert psi_polynomial(corpus.get("triangle"), "det") == t1 + t2 + t3
    assert (
        psi_polynomial(corpus.get("banana3"), "det")
        == t1 * t2 + t1 * t3 + t2 * t3
    )


def test_psi_det_equals_trees_corpus():
    for name in corpus.CORPUS_NAMES:
        g = corpus.get(name)
        assert psi_polynomial(g, "det") == psi_polynomial(g, "trees"), name


def test_psi_degree_and_multilinearity():
    for name in corpus.CORPUS_NAMES:
        g = corpus.get(name)
        homog, deg, per_var = psi_polynomial(g, "trees").homogeneity()
        assert homog and deg == g.loop_number(), name
        assert all(v <= 1 for v in per_var), name


def test_deletion_contraction_corpus():
    for name in corpus.CORPUS_NAMES:
        assert all(verify_deletion_contraction(corpus.get(name)).values()), name


def test_euler_identity_corpus():
    for name in corpus.CORPUS_NAMES:
        g = corpus.get(name)
        psi = psi_polynomial(g, "trees")
        n = g.n_edges
        euler = sum(
            (MultiPoly.variable(n, i) * psi.partial(i) for i in range(n)),
            MultiPoly(n),
        )
        assert euler == psi.scale(g.loop_number()), name


def test_second_symanzik_examples():
    mom = MomentumData.two_leg()
    t = MultiPoly.variables(3)
    p_bub = second_symanzik(corpus.get("bubble"), mom)
    assert p_bub == MultiPoly(3, {(1, 1, 1): 1})  # p2 t1 t2 (p2 is last slot)
    p_b3 = second_symanzik(corpus.get("banana3"), mom)
    assert p_b3 == MultiPoly(4, {(1, 1, 1, 1): 1})
    # degree = loops + 1 and homogeneity in t
    for name in ("bubble", "triangle", "banana3", "nested2loop", "wheel3"):
        g = corpus.get(name)
        p = second_symanzik(g, MomentumData.two_leg(Fraction(1)))
        homog, deg, _ = p.homogeneity()
        assert homog and deg == g.loop_number() + 1, name


def test_second_symanzik_zero_momenta():
    # all cut coefficients vanish when the two legs sit at the same vertex
    desc = corpus.DESCRIPTIONS["triangle"] | {
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v1", "momentum": "-p"},
        ]
    }
    g = FeynmanGraph.validate(desc)
    assert second_symanzik(g, MomentumData.two_leg()).is_zero()


def test_tree_route_equals_cutset_route():
    for name in ("bubble", "triangle", "banana3", "banana4", "square",
                 "nested2loop", "doubletriangle", "wheel3", "bridge"):
        g = corpus.get(name)
        mom = MomentumData.two_leg()
        assert second_symanzik(g, mom, "cutsets") == second_symanzik(
            g, mom, "trees"
        ), name


def test_conservation_checks():
    desc = corpus.DESCRIPTIONS["bubble"] | {
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v2", "momentum": "p"},
        ]
    }
    g = FeynmanGraph.validate(desc)
    with pytest.raises(MomentumNotConserved):
        second_symanzik(g, MomentumData.two_leg())
    tri3 = FeynmanGraph.validate(
        corpus.DESCRIPTIONS["triangle"]
        | {
            "external": [
                {"id": "x1", "vertex": "v1", "momentum": "p1"},
                {"id": "x2", "vertex": "v2", "momentum": "p2"},
                {"id": "x3", "vertex": "v3", "momentum": "p3"},
            ]
        }
    )
    labels, gram = corpus.random_gram(tri3, 3)
    assert second_symanzik(tri3, MomentumData.from_gram(labels, gram)) is not None
    bad_gram = [[x + 1 for x in row] for row in gram]
    with pytest.raises(MomentumNotConserved):
        second_symanzik(tri3, MomentumData.from_gram(labels, bad_gram))


def test_v_function_massive_bubble():
    g = corpus.get("bubble")
    p_eff, psi = v_function(g, MomentumData.two_leg(mass_squared=1))
    t1, t2, p2 = MultiPoly.variables(3)
    assert psi == t1.extend_arity(3) * 0 + MultiPoly(3, {(1, 0, 0): 1, (0, 1, 0): 1})
    assert p_eff == MultiPoly(3, {(1, 1, 1): 1, (1, 0, 0): 1, (0, 1, 0): 1})


def test_r_form_examples():
    ev = r_form_evaluator(corpus.get("bubble"), MomentumData.two_leg(1))
    assert ev([1, 1]) == Fraction(1, 2)
    assert ev([1, 3]) == Fraction(3, 4)
    with pytest.raises(SingularAtPoint):
        ev([0, 1])


def test_r_form_zero_momenta():
    desc = corpus.DESCRIPTIONS["triangle"] | {
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v1", "momentum": "-p"},
        ]
    }
    g = FeynmanGraph.validate(desc)
    ev = r_form_evaluator(g, MomentumData.two_leg(1))
    assert ev([1, 1, 1]) == 0


def test_ratio_identity_gram_mode():
    """Psi(t) * (p^T R(t) p) = P(t, p) exactly at random rational points."""
    rng = random.Random(11)
    for name in ("bubble", "triangle", "banana3", "square", "nested2loop"):
        g = corpus.get(name)
        labels, gram = corpus.random_gram(g, seed=5)
        mom = MomentumData.from_gram(labels, gram)
        psi = psi_polynomial(g, "det")
        p = second_symanzik(g, mom, "cutsets")
        ev = r_form_evaluator(g, mom)
        for _ in range(20):
            t = [Fraction(rng.randint(1, 12), rng.randint(1, 7)) for _ in range(g.n_edges)]
            assert psi.eval(t) * ev(t) == p.eval(t), (name, t)


def test_generic_condition():
    mom = MomentumData.two_leg()
    holds, cert = generic_condition(corpus.get("bubble"), mom)
    assert holds and cert["mode"] == "two-leg"
    holds, _ = generic_condition(corpus.get("banana3"), mom)
    assert holds
    desc = corpus.DESCRIPTIONS["triangle"] | {
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v1", "momentum": "-p"},
        ]
    }
    g = FeynmanGraph.validate(desc)
    holds, cert = generic_condition(g, MomentumData.two_leg())
    assert not holds and cert["reason"] == "P vanishes"


def test_generic_condition_gram_mode():
    g = corpus.get("triangle")
    labels, gram = corpus.random_gram(g, seed=2)
    holds, cert = generic_condition(g, MomentumData.from_gram(labels, gram))
    assert holds
    assert any(c["kind"].startswith("perturbation") for c in cert["checks"])
