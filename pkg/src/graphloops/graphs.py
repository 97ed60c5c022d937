"""Finite bipartite graphs with Perron-Frobenius data and loop enumeration.

Vertices carry a parity (+1 even / -1 odd).  Base edges always run from an
even vertex to an odd vertex; every base edge also exists with the opposite
orientation.  Oriented edges are integers: base edge ``i`` gives the
positively oriented edge ``2*i`` and its opposite ``2*i + 1``, so
``opp(e) == e ^ 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

EVEN = +1
ODD = -1

_PARITY_NAMES = {"+": EVEN, "-": ODD, "+1": EVEN, "-1": ODD}


class GraphError(ValueError):
    """Raised for malformed graph descriptions."""


@dataclass(frozen=True)
class BipartiteGraph:
    """Connected finite bipartite graph with named vertices and base edges."""

    vertex_names: tuple[str, ...]
    parity: tuple[int, ...]                 # +1 / -1 per vertex
    edge_names: tuple[str, ...]             # base edge names
    edge_source: tuple[int, ...]            # even endpoint of each base edge
    edge_target: tuple[int, ...]            # odd endpoint of each base edge
    _vertex_index: dict[str, int] = field(repr=False, default_factory=dict)

    # -- construction ------------------------------------------------

    @staticmethod
    def build(vertices, edges) -> "BipartiteGraph":
        """Build and validate a graph.

        `vertices`: iterable of (name, parity) with parity in {"+", "-"}.
        `edges`: iterable of (name, from_name, to_name), written positively
        oriented (even -> odd).
        """
        names, pars = [], []
        seen = set()
        for name, par in vertices:
            if name in seen:
                raise GraphError(f"duplicate vertex name {name!r}")
            seen.add(name)
            names.append(name)
            pars.append(_PARITY_NAMES.get(par, par))
            if pars[-1] not in (EVEN, ODD):
                raise GraphError(f"bad parity {par!r} for vertex {name!r}")
        vindex = {n: i for i, n in enumerate(names)}

        enames, esrc, etgt = [], [], []
        eseen = set()
        for name, u, v in edges:
            if name in eseen or name in vindex:
                raise GraphError(f"duplicate edge name {name!r}")
            eseen.add(name)
            try:
                ui, vi = vindex[u], vindex[v]
            except KeyError as exc:
                raise GraphError(f"edge {name!r} uses unknown vertex {exc}") from None
            if pars[ui] != EVEN or pars[vi] != ODD:
                raise GraphError(
                    f"edge {name!r} must run from an even (+) to an odd (-) vertex"
                )
            enames.append(name)
            esrc.append(ui)
            etgt.append(vi)

        g = BipartiteGraph(tuple(names), tuple(pars), tuple(enames),
                           tuple(esrc), tuple(etgt), vindex)
        if not g._connected():
            raise GraphError("graph is not connected")
        return g

    def _connected(self) -> bool:
        n = len(self.vertex_names)
        if n == 0:
            return False
        adj = [[] for _ in range(n)]
        for u, v in zip(self.edge_source, self.edge_target):
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == n

    # -- vertices ------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_names)

    def vertex(self, name: str) -> int:
        return self._vertex_index[name]

    def vertices_of_parity(self, parity: int) -> list[int]:
        return [v for v in range(self.n_vertices) if self.parity[v] == parity]

    # -- oriented edges -------------------------------------------------
    # oriented edge id: 2*base for the +1 orientation, 2*base+1 for opposite

    @property
    def n_base_edges(self) -> int:
        return len(self.edge_names)

    @property
    def oriented_edges(self) -> range:
        return range(2 * self.n_base_edges)

    def positive_edges(self) -> list[int]:
        return [2 * i for i in range(self.n_base_edges)]

    def negative_edges(self) -> list[int]:
        return [2 * i + 1 for i in range(self.n_base_edges)]

    @staticmethod
    def opp(e: int) -> int:
        return e ^ 1

    def src(self, e: int) -> int:
        i, rev = divmod(e, 2)
        return self.edge_target[i] if rev else self.edge_source[i]

    def tgt(self, e: int) -> int:
        i, rev = divmod(e, 2)
        return self.edge_source[i] if rev else self.edge_target[i]

    def edges_from(self, v: int) -> list[int]:
        return [e for e in self.oriented_edges if self.src(e) == v]

    def edges_into(self, v: int) -> list[int]:
        return [e for e in self.oriented_edges if self.tgt(e) == v]

    def oriented_name(self, e: int) -> str:
        i, rev = divmod(e, 2)
        return self.edge_names[i] + ("'" if rev else "")

    def oriented_edge_by_name(self, token: str) -> int:
        rev = token.endswith("'")
        base = token[:-1] if rev else token
        try:
            i = self.edge_names.index(base)
        except ValueError:
            raise GraphError(f"unknown edge {token!r}") from None
        return 2 * i + (1 if rev else 0)

    # -- adjacency -------------------------------------------------------

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices))
        for u, v in zip(self.edge_source, self.edge_target):
            a[u, v] += 1.0
            a[v, u] += 1.0
        return a

    def to_json_dict(self) -> dict:
        return {
            "vertices": [
                {"name": n, "parity": "+" if p == EVEN else "-"}
                for n, p in zip(self.vertex_names, self.parity)
            ],
            "edges": [
                {"name": n, "from": self.vertex_names[u], "to": self.vertex_names[v]}
                for n, u, v in zip(self.edge_names, self.edge_source, self.edge_target)
            ],
        }


def load_graph(spec) -> BipartiteGraph:
    """Load a graph from a JSON document (dict, JSON string, or file path)."""
    if isinstance(spec, str):
        text = spec
        if not spec.lstrip().startswith("{"):
            with open(spec, "r", encoding="utf-8") as fh:
                text = fh.read()
        spec = json.loads(text)
    vertices = [(v["name"], v["parity"]) for v in spec["vertices"]]
    edges = [(e["name"], e["from"], e["to"]) for e in spec["edges"]]
    return BipartiteGraph.build(vertices, edges)


@dataclass(frozen=True)
class PFData:
    """Perron-Frobenius eigenvalue and eigenvector of the adjacency matrix.

    ``mu`` is normalized so its minimum is 1; only ratios of mu at adjacent
    vertices enter any formula downstream.
    """

    graph: BipartiteGraph
    delta: float
    mu: tuple[float, ...]
    tol: float

    def sigma(self, e: int) -> float:
        """Edge weight sqrt(mu(target)/mu(source)) of an oriented edge."""
        return (self.mu[self.graph.tgt(e)] / self.mu[self.graph.src(e)]) ** 0.5

    def norm_sq(self, e: int) -> float:
        """Squared Fock length of an edge vector, the inverse of sigma."""
        return 1.0 / self.sigma(e)

    def residual(self) -> float:
        a = self.graph.adjacency()
        mu = np.asarray(self.mu)
        return float(np.max(np.abs(a @ mu - self.delta * mu)) / np.max(np.abs(mu)))


def pf_from_mu(g: BipartiteGraph, mu: dict[str, float],
               tol: float = 1e-9) -> PFData:
    """Build PF data from a user-supplied eigenvector (the optional `mu`
    block of the graph schema).  The eigen-equation is validated to `tol`
    and the vector renormalized to min 1; delta is recovered as the Rayleigh
    ratio."""
    vec = np.array([mu[name] for name in g.vertex_names], dtype=float)
    if np.any(vec <= 0):
        raise GraphError("mu override must be strictly positive")
    a = g.adjacency()
    ratios = (a @ vec) / vec
    delta = float(np.mean(ratios))
    if float(np.max(np.abs(a @ vec - delta * vec))) > tol * float(np.max(vec)):
        raise GraphError("mu override does not satisfy the eigen-equation")
    vec = vec / vec.min()
    return PFData(g, delta, tuple(float(x) for x in vec), tol)


def perron_frobenius(g: BipartiteGraph, tol: float = 1e-12,
                     max_iter: int = 10 ** 6) -> PFData:
    """Power iteration for (delta, mu) with A mu = delta mu, mu > 0.

    Iterates on A + I; the adjacency of a bipartite graph has spectrum
    symmetric about 0, so the shift makes the top eigenvalue dominant.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = g.adjacency()
    n = a.shape[0]
    v = np.ones(n)
    lam = 0.0
    for _ in range(max_iter):
        w = a @ v + v
        lam = float(np.max(w))
        v = w / lam
        resid = float(np.max(np.abs(a @ v - (lam - 1.0) * v)))
        if resid <= tol * float(np.max(np.abs(v))):
            break
    else:
        raise RuntimeError(f"power iteration did not converge within {max_iter} steps")
    delta = lam - 1.0
    mu = v / np.min(v)
    return PFData(g, delta, tuple(float(x) for x in mu), tol)


def loops_at(g: BipartiteGraph, v: int, k: int) -> list[tuple[int, ...]]:
    """All closed composable edge sequences of length 2k based at v.

    Deterministic order (depth-first, edges in id order).  Returns edge-id
    tuples; the empty tuple for k = 0.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    out: list[tuple[int, ...]] = []

    def walk(at: int, prefix: tuple[int, ...]):
        if len(prefix) == 2 * k:
            if at == v:
                out.append(prefix)
            return
        for e in g.edges_from(at):
            walk(g.tgt(e), prefix + (e,))

    walk(v, ())
    return out


# -- built-in graphs used throughout the test-suite and the CLI ---------

def builtin_graph(name: str) -> BipartiteGraph:
    """Small named graphs: a2, a3, star-S4, path-An."""
    key = name.lower()
    if key == "a2":
        return BipartiteGraph.build([("v", "+"), ("w", "-")], [("e", "v", "w")])
    if key == "a3":
        return BipartiteGraph.build(
            [("m", "+"), ("l", "-"), ("r", "-")],
            [("e1", "m", "l"), ("e2", "m", "r")],
        )
    if key in ("s4", "star4", "star-s4"):
        return BipartiteGraph.build(
            [("c", "+")] + [(f"p{i}", "-") for i in range(1, 5)],
            [(f"e{i}", "c", f"p{i}") for i in range(1, 5)],
        )
    if key.startswith("a") and key[1:].isdigit():
        n = int(key[1:])
        if n < 2:
            raise GraphError("path graphs need at least 2 vertices")
        verts = [(f"v{i}", "+" if i % 2 == 0 else "-") for i in range(n)]
        edges = []
        for i in range(n - 1):
            lo, hi = (i, i + 1) if i % 2 == 0 else (i + 1, i)
            edges.append((f"e{i}", f"v{lo}", f"v{hi}"))
        return BipartiteGraph.build(verts, edges)
    raise GraphError(f"unknown builtin graph {name!r}")
