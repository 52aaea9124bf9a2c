"""Built-in graph corpus used by the test suite and the `check` command."""

from __future__ import annotations

from fractions import Fraction

from .graphs import FeynmanGraph


def _banana(n):
    return {
        "name": f"banana{n}",
        "vertices": ["v1", "v2"],
        "edges": [{"id": f"e{i+1}", "src": "v1", "tgt": "v2"} for i in range(n)],
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v2", "momentum": "-p"},
        ],
        "theory": {"power": max(3, n)},
    }


DESCRIPTIONS = {
    "bubble": _banana(2) | {"name": "bubble"},
    "banana3": _banana(3),
    "banana4": _banana(4),
    "banana5": _banana(5),
    "triangle": {
        "name": "triangle",
        "vertices": ["v1", "v2", "v3"],
        "edges": [
            {"id": "e1", "src": "v1", "tgt": "v2"},
            {"id": "e2", "src": "v2", "tgt": "v3"},
            {"id": "e3", "src": "v3", "tgt": "v1"},
        ],
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v2", "momentum": "-p"},
        ],
        "theory": {"power": 3},
    },
    "square": {
        "name": "square",
        "vertices": ["v1", "v2", "v3", "v4"],
        "edges": [
            {"id": "e1", "src": "v1", "tgt": "v2"},
            {"id": "e2", "src": "v2", "tgt": "v3"},
            {"id": "e3", "src": "v3", "tgt": "v4"},
            {"id": "e4", "src": "v4", "tgt": "v1"},
        ],
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v3", "momentum": "-p"},
        ],
        "theory": {"power": 3},
    },
    "wheel3": {
        "name": "wheel3",
        "vertices": ["v1", "v2", "v3", "v4"],
        "edges": [
            {"id": "e1", "src": "v1", "tgt": "v2"},
            {"id": "e2", "src": "v2", "tgt": "v3"},
            {"id": "e3", "src": "v3", "tgt": "v1"},
            {"id": "e4", "src": "v1", "tgt": "v4"},
            {"id": "e5", "src": "v2", "tgt": "v4"},
            {"id": "e6", "src": "v3", "tgt": "v4"},
        ],
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v2", "momentum": "-p"},
        ],
        "theory": {"power": 4},
    },
    # Bubble inserted on one internal line: the unique divergent subgraph at
    # D=4 is the inner bubble {e2,e3}.
    "nested2loop": {
        "name": "nested2loop",
        "vertices": ["v1", "v2", "v3"],
        "edges": [
            {"id": "e1", "src": "v1", "tgt": "v2"},
            {"id": "e2", "src": "v2", "tgt": "v3"},
            {"id": "e3", "src": "v2", "tgt": "v3"},
            {"id": "e4", "src": "v3", "tgt": "v1"},
        ],
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v2", "momentum": "-p"},
        ],
        "theory": {"power": 4},
    },
    "doubletriangle": {
        "name": "doubletriangle",
        "vertices": ["v1", "v2", "v3", "v4"],
        "edges": [
            {"id": "e1", "src": "v1", "tgt": "v2"},
            {"id": "e2", "src": "v2", "tgt": "v3"},
            {"id": "e3", "src": "v3", "tgt": "v1"},
            {"id": "e4", "src": "v2", "tgt": "v4"},
            {"id": "e5", "src": "v4", "tgt": "v1"},
        ],
        "external": [
            {"id": "x1", "vertex": "v3", "momentum": "p"},
            {"id": "x2", "vertex": "v4", "momentum": "-p"},
        ],
        "theory": {"power": 4},
    },
    # Two bubbles joined by a bridge edge: the 1PI negative control.
    "bridge": {
        "name": "bridge",
        "vertices": ["v1", "v2", "v3", "v4"],
        "edges": [
            {"id": "e1", "src": "v1", "tgt": "v2"},
            {"id": "e2", "src": "v1", "tgt": "v2"},
            {"id": "e3", "src": "v2", "tgt": "v3"},
            {"id": "e4", "src": "v3", "tgt": "v4"},
            {"id": "e5", "src": "v3", "tgt": "v4"},
        ],
        "external": [
            {"id": "x1", "vertex": "v1", "momentum": "p"},
            {"id": "x2", "vertex": "v4", "momentum": "-p"},
        ],
        "theory": {"power": 3},
    },
    # Self-loop convention check: zero incidence column, never in a tree.
    "tadpole": {
        "name": "tadpole",
        "vertices": ["v1", "v2"],
        "edges": [
            {"id": "e1", "src": "v1", "tgt": "v1"},
            {"id": "e2", "src": "v1", "tgt": "v2"},
        ],
        "external": [
            {"id": "x1", "vertex": "v2", "momentum": "p"},
            {"id": "x2", "vertex": "v2", "momentum": "-p"},
        ],
        "theory": {"power": 3},
    },
}

CORPUS_NAMES = list(DESCRIPTIONS)


def get(name) -> FeynmanGraph:
    return FeynmanGraph.validate(DESCRIPTIONS[name])


def all_graphs():
    return [get(name) for name in CORPUS_NAMES]


def random_leg_vectors(g: FeynmanGraph, seed: int, dim: int = 4):
    """Exact random momenta per leg label, conserving the total sum.

    Every leg gets its own fresh label except signed reuses; we resolve by
    assigning vectors to *labels* so that the signed sum over legs vanishes.
    Returns (labels, {label: vector of Fractions}).
    """
    import random

    rng = random.Random(seed)
    labels = []
    signs = []
    for leg in g.external_legs:
        lab, s = leg.signed_label()
        labels.append(lab)
        signs.append(s)
    uniq = sorted(set(labels))
    vecs = {}
    for lab in uniq[:-1]:
        vecs[lab] = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(dim)]
    # Solve for the last label so the signed sum over legs is zero.
    last = uniq[-1]
    coeff_last = sum(s for lab, s in zip(labels, signs) if lab == last)
    if coeff_last == 0:
        vecs[last] = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(dim)]
    else:
        total = [Fraction(0)] * dim
        for lab, s in zip(labels, signs):
            if lab != last:
                total = [t + s * v for t, v in zip(total, vecs[lab])]
        vecs[last] = [-t / coeff_last for t in total]
    # Check conservation exactly.
    resid = [Fraction(0)] * dim
    for lab, s in zip(labels, signs):
        resid = [r + s * v for r, v in zip(resid, vecs[lab])]
    assert all(r == 0 for r in resid)
    return uniq, vecs


def random_gram(g: FeynmanGraph, seed: int, dim: int = 4):
    """Gram matrix over the graph's momentum labels, conservation-exact."""
    labels, vecs = random_leg_vectors(g, seed, dim)
    gram = [
        [sum(a * b for a, b in zip(vecs[l1], vecs[l2])) for l2 in labels]
        for l1 in labels
    ]
    return labels, gram
