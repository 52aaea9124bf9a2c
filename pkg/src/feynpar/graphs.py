"""Feynman graphs: validation, matrices, trees, cut-sets, subgraphs, edits.

Graphs are immutable after construction. Orientation is fixed by the edge
(source, target) pairs; the homology basis is the set of fundamental cycles
of the lexicographically-first spanning tree, so circuit matrices (and hence
everything built on them) are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations


class MalformedGraph(ValueError):
    pass


class UnknownEdge(KeyError):
    pass


class NotASubgraph(ValueError):
    pass


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    tgt: str


@dataclass(frozen=True)
class ExternalLeg:
    id: str
    vertex: str
    momentum: str  # label with optional sign, e.g. "p" or "-p"

    def signed_label(self):
        if self.momentum.startswith("-"):
            return self.momentum[1:], -1
        return self.momentum, 1


@dataclass(frozen=True)
class FeynmanGraph:
    name: str
    vertices: tuple
    internal_edges: tuple
    external_legs: tuple = ()
    theory_power: int = 4

    # -- construction / validation ------------------------------------------

    @staticmethod
    def validate(description) -> "FeynmanGraph":
        """Build a graph from a dict description, checking every invariant."""
        name = description.get("name", "graph")
        vertices = tuple(description["vertices"])
        if len(set(vertices)) != len(vertices):
            raise MalformedGraph(f"{name}: duplicate vertex ids")
        vset = set(vertices)
        edges = []
        seen = set()
        for e in description.get("edges", []):
            eid, src, tgt = e["id"], e["src"], e["tgt"]
            if eid in seen:
                raise MalformedGraph(f"{name}: duplicate edge id {eid}")
            seen.add(eid)
            if src not in vset or tgt not in vset:
                raise MalformedGraph(f"{name}: edge {eid} has dangling endpoint")
            edges.append(Edge(eid, src, tgt))
        legs = []
        seen_legs = set()
        for leg in description.get("external", []):
            lid = leg["id"]
            if lid in seen_legs:
                raise MalformedGraph(f"{name}: duplicate external id {lid}")
            seen_legs.add(lid)
            if leg["vertex"] not in vset:
                raise MalformedGraph(f"{name}: external leg {lid} at unknown vertex")
            legs.append(ExternalLeg(lid, leg["vertex"], leg["momentum"]))
        power = description.get("theory", {}).get("power", 4)
        if power < 3:
            raise MalformedGraph(f"{name}: theory power must be >= 3")
        g = FeynmanGraph(name, vertices, tuple(edges), tuple(legs), power)
        if not g._is_connected(set(g.edge_ids())):
            raise MalformedGraph(f"{name}: disconnected")
        return g

    def describe(self):
        return {
            "name": self.name,
            "vertices": list(self.vertices),
            "edges": [{"id": e.id, "src": e.src, "tgt": e.tgt} for e in self.internal_edges],
            "external": [
                {"id": l.id, "vertex": l.vertex, "momentum": l.momentum}
                for l in self.external_legs
            ],
            "theory": {"power": self.theory_power},
        }

    def canonical_key(self):
        """Stable serialized form of the labeled graph; Hopf generator key."""
        edges = ",".join(f"{e.id}:{e.src}>{e.tgt}" for e in sorted(self.internal_edges, key=lambda e: e.id))
        legs = ",".join(f"{l.id}@{l.vertex}={l.momentum}" for l in sorted(self.external_legs, key=lambda l: l.id))
        return f"V[{','.join(sorted(self.vertices))}]E[{edges}]X[{legs}]"

    # -- basic structure ------------------------------------------------------

    def edge_ids(self):
        return [e.id for e in self.internal_edges]

    def edge(self, eid) -> Edge:
        for e in self.internal_edges:
            if e.id == eid:
                return e
        raise UnknownEdge(eid)

    def edge_index(self, eid) -> int:
        for i, e in enumerate(self.internal_edges):
            if e.id == eid:
                return i
        raise UnknownEdge(eid)

    @property
    def n_edges(self):
        return len(self.internal_edges)

    def _adjacency(self, edge_subset):
        adj = {v: [] for v in self.vertices}
        for e in self.internal_edges:
            if e.id in edge_subset:
                adj[e.src].append((e.tgt, e.id))
                adj[e.tgt].append((e.src, e.id))
        return adj

    def _components(self, edge_subset, vertex_subset=None):
        verts = list(vertex_subset) if vertex_subset is not None else list(self.vertices)
        adj = self._adjacency(edge_subset)
        remaining = set(verts)
        comps = []
        while remaining:
            start = min(remaining)  # determinism
            stack = [start]
            comp = set()
            while stack:
                v = stack.pop()
                if v in comp:
                    continue
                comp.add(v)
                for w, _ in adj[v]:
                    if w in remaining and w not in comp:
                        stack.append(w)
            remaining -= comp
            comps.append(sorted(comp))
        return comps

    def _is_connected(self, edge_subset):
        return len(self._components(edge_subset)) <= 1

    def loop_number(self) -> int:
        return self.n_edges - len(self.vertices) + 1

    # -- matrices -------------------------------------------------------------

    def incidence_matrix(self):
        """|V| x n integer matrix; +1 at target, -1 at source, 0 for self-loops."""
        rows = []
        for v in self.vertices:
            row = []
            for e in self.internal_edges:
                val = 0
                if e.tgt == v:
                    val += 1
                if e.src == v:
                    val -= 1
                row.append(val)
            rows.append(row)
        return rows

    def spanning_trees(self, cap=10**6):
        """All spanning trees as sorted tuples of edge ids, lexicographic order."""
        n_tree = len(self.vertices) - 1
        ids = self.edge_ids()
        from math import comb

        if comb(len(ids), n_tree) > cap:
            raise TooLarge("spanning tree enumeration exceeds cap")
        trees = []
        for subset in combinations(ids, n_tree):
            s = set(subset)
            comps = self._components(s)
            if len(comps) == 1 and self._acyclic(s):
                trees.append(tuple(subset))
        return trees

    def _acyclic(self, edge_subset):
        # union-find over the subset; a self-loop is an immediate cycle
        parent = {v: v for v in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for e in self.internal_edges:
            if e.id not in edge_subset:
                continue
            a, b = find(e.src), find(e.tgt)
            if a == b:
                return False
            parent[a] = b
        return True

    def circuit_matrix(self):
        """n x loop_number matrix of fundamental cycles of the first tree."""
        ell = self.loop_number()
        ids = self.edge_ids()
        if ell == 0:
            return [[] for _ in ids]
        tree = set(self.spanning_trees()[0])
        chords = [e for e in self.internal_edges if e.id not in tree]
        # Cycle orientation follows the tree path (chord enters reversed),
        # so the bubble basis comes out as e1 - e2.
        eta = [[0] * ell for _ in ids]
        for k, chord in enumerate(chords):
            if chord.src == chord.tgt:
                eta[self.edge_index(chord.id)][k] = -1
                continue
            path = self._tree_path(tree, chord.src, chord.tgt)
            eta[self.edge_index(chord.id)][k] = -1
            for eid, direction in path:
                eta[self.edge_index(eid)][k] = direction
        return eta

    def _tree_path(self, tree, start, goal):
        """Path start -> goal inside the tree; [(edge id, +-1 traversal sign)]."""
        adj = {v: [] for v in self.vertices}
        for e in self.internal_edges:
            if e.id in tree:
                adj[e.src].append((e.tgt, e.id, 1))
                adj[e.tgt].append((e.src, e.id, -1))
        prev = {start: None}
        stack = [start]
        while stack:
            v = stack.pop()
            if v == goal:
                break
            for w, eid, sgn in adj[v]:
                if w not in prev:
                    prev[w] = (v, eid, sgn)
                    stack.append(w)
        path = []
        v = goal
        while prev[v] is not None:
            u, eid, sgn = prev[v]
            path.append((eid, sgn))
            v = u
        path.reverse()
        return path

    def cut_sets(self, cap=10**6):
        """Size-(loops+1) edge sets whose removal leaves exactly 2 components.

        Returns [(edge id tuple, (V1, V2))] with the deterministic bipartition.
        """
        k = self.loop_number() + 1
        ids = self.edge_ids()
        from math import comb

        if comb(len(ids), k) > cap:
            raise TooLarge("cut-set enumeration exceeds cap")
        out = []
        for subset in combinations(ids, k):
            rest = set(ids) - set(subset)
            comps = self._components(rest)
            if len(comps) == 2:
                out.append((tuple(subset), (tuple(comps[0]), tuple(comps[1]))))
        return out

    def is_one_pi(self) -> bool:
        ids = set(self.edge_ids())
        for eid in self.edge_ids():
            if not self._is_connected(ids - {eid}):
                return False
        return True

    # -- edits ------------------------------------------------------------------

    def delete_edge(self, eid) -> "FeynmanGraph":
        e = self.edge(eid)
        rest = [x for x in self.internal_edges if x.id != eid]
        g = FeynmanGraph(
            f"{self.name}-del-{eid}",
            self.vertices,
            tuple(rest),
            self.external_legs,
            self.theory_power,
        )
        if not g._is_connected(set(g.edge_ids())):
            raise MalformedGraph(f"deleting bridge {eid} disconnects the graph")
        return g

    def contract_subgraph(self, edge_subset) -> "FeynmanGraph":
        """Contract each connected component of the subgraph to one vertex."""
        subset = set(edge_subset)
        unknown = subset - set(self.edge_ids())
        if unknown:
            raise NotASubgraph(f"edges not in graph: {sorted(unknown)}")
        if not subset:
            return FeynmanGraph(
                self.name, self.vertices, self.internal_edges,
                self.external_legs, self.theory_power,
            )
        touched = set()
        for e in self.internal_edges:
            if e.id in subset:
                touched.update((e.src, e.tgt))
        comps = self._components(subset, touched)
        rep = {}
        for comp in comps:
            label = min(comp)
            for v in comp:
                rep[v] = label
        mapped = lambda v: rep.get(v, v)
        new_vertices = tuple(sorted({mapped(v) for v in self.vertices}))
        new_edges = tuple(
            Edge(e.id, mapped(e.src), mapped(e.tgt))
            for e in self.internal_edges
            if e.id not in subset
        )
        new_legs = tuple(
            ExternalLeg(l.id, mapped(l.vertex), l.momentum) for l in self.external_legs
        )
        return FeynmanGraph(
            f"{self.name}/{'+'.join(sorted(subset))}",
            new_vertices,
            new_edges,
            new_legs,
            self.theory_power,
        )

    # -- subgraphs ---------------------------------------------------------------

    def subgraph_components(self, edge_subset):
        """Connected components of the edge-induced subgraph, as edge-id sets."""
        subset = set(edge_subset)
        touched = set()
        for e in self.internal_edges:
            if e.id in subset:
                touched.update((e.src, e.tgt))
        comps = self._components(subset, touched)
        out = []
        for comp in comps:
            cset = set(comp)
            edges = sorted(
                e.id for e in self.internal_edges
                if e.id in subset and e.src in cset and e.tgt in cset
            )
            if edges:
                out.append((tuple(edges), tuple(sorted(comp))))
        return out

    def component_graph(self, edge_ids, vertex_ids):
        edges = tuple(e for e in self.internal_edges if e.id in set(edge_ids))
        return FeynmanGraph(
            f"{self.name}[{'+'.join(edge_ids)}]",
            tuple(vertex_ids),
            edges,
            (),
            self.theory_power,
        )


@dataclass(frozen=True)
class Subgraph:
    """Edge-subset subgraph of a parent graph; vertices are induced."""

    parent: FeynmanGraph
    edge_ids: tuple

    def __post_init__(self):
        unknown = set(self.edge_ids) - set(self.parent.edge_ids())
        if unknown:
            raise NotASubgraph(f"edges not in parent: {sorted(unknown)}")

    def induced_vertices(self):
        out = set()
        for e in self.parent.internal_edges:
            if e.id in set(self.edge_ids):
                out.update((e.src, e.tgt))
        return tuple(sorted(out))

    def components(self):
        return self.parent.subgraph_components(self.edge_ids)

    def quotient(self):
        return self.parent.contract_subgraph(self.edge_ids)

    def __iter__(self):
        return iter(self.edge_ids)

    def __len__(self):
        return len(self.edge_ids)

    def __eq__(self, other):
        if isinstance(other, tuple):
            return self.edge_ids == other
        return (
            isinstance(other, Subgraph)
            and self.edge_ids == other.edge_ids
            and self.parent is other.parent
        )

    def __hash__(self):
        return hash(self.edge_ids)


@dataclass(frozen=True)
class DivergencePredicate:
    """Default power-counting rule: components 1PI with D*loops - 2*edges >= 0."""

    spacetime_dimension: int = 4
    theory_power: int = 4

    def component_divergent(self, loops, edges):
        return self.spacetime_dimension * loops - 2 * edges >= 0


def divergent_subgraphs(g: FeynmanGraph, rule: DivergencePredicate):
    """Proper nonempty subgraphs whose components are all 1PI and divergent."""
    ids = g.edge_ids()
    out = []
    for r in range(1, len(ids)):
        for subset in combinations(ids, r):
            comps = g.subgraph_components(subset)
            if sum(len(c[0]) for c in comps) != len(subset):
                continue
            ok = True
            for edge_ids, vertex_ids in comps:
                comp = g.component_graph(edge_ids, vertex_ids)
                loops = comp.loop_number()
                if loops < 1 or not comp.is_one_pi():
                    ok = False
                    break
                if not rule.component_divergent(loops, comp.n_edges):
                    ok = False
                    break
            if ok:
                out.append(Subgraph(g, tuple(subset)))
    return out


def matrix_tree_count(g: FeynmanGraph) -> int:
    """det of the reduced integer Laplacian; cross-check for spanning_trees."""
    verts = list(g.vertices)
    n = len(verts)
    if n == 1:
        return 1
    idx = {v: i for i, v in enumerate(verts)}
    lap = [[0] * n for _ in range(n)]
    for e in g.internal_edges:
        if e.src == e.tgt:
            continue  # self-loops never enter spanning trees
        i, j = idx[e.src], idx[e.tgt]
        lap[i][i] += 1
        lap[j][j] += 1
        lap[i][j] -= 1
        lap[j][i] -= 1
    red = [row[1:] for row in lap[1:]]
    return _int_det(red)


def _int_det(m):
    """Bareiss integer determinant."""
    n = len(m)
    if n == 0:
        return 1
    m = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]
