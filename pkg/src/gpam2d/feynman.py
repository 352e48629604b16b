"""Rooted Feynman multigraphs, Wick pairings and canonical forms.

Vertices are of three kinds (the origin, integration nodes, noise nodes);
edges carry a kernel tag from a fixed taxonomy, optionally an axis index or
two, and an individual epsilon power.  Stochastic graphs (with noise nodes)
turn into plain Feynman graphs by pairing noise nodes across copies and
contracting each pair, which composes the two attached mollifiers into a
single mollifier edge by convolution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

ROOT = "root"
INT = "int"
NOISE = "noise"

# Kernel tags.  Mollifier-derived tags carry the number of noise derivatives
# they hold; 'Reps' is the renormalised product kernel and belongs to both the
# mollifier and the kernel families; 'Geps' is the epsilon-scale square kernel.
MOLLIFIER_TAGS = {"Rho", "DRho", "DDRho", "Reps"}
KERNEL_TAGS = {"K", "K1", "K2", "dK", "dK1", "dK2", "ddK", "Reps"}
TEST_TAGS = {"Test", "DTest", "XTest"}
OTHER_TAGS = {"MulX", "XK", "XdK", "Geps"}
ALL_TAGS = MOLLIFIER_TAGS | KERNEL_TAGS | TEST_TAGS | OTHER_TAGS

M3_TAGS = {"DDRho", "Reps"}
M1_TAGS = {"Rho"}
K0_TAGS = {"K", "K1", "K2"}
K1_TAGS = {"dK", "dK1", "dK2"}

_INDEXED = {"dK": 1, "dK1": 1, "dK2": 1, "MulX": 1, "XK": 1, "XdK": 2, "DTest": 1, "XTest": 1}
_MOLLIFIER_DERIVS = {"Rho": 0, "DRho": 1, "DDRho": 2}

# Kernels that are even functions of their argument: the drawn orientation of
# such an edge is a presentation choice, not structure.
DIRECTION_FREE = {"K", "ddK", "Rho", "DDRho", "Reps", "Geps", "XdK"}


@dataclass(frozen=True)
class EdgeType:
    tag: str
    j: int = 0
    k: int = 0

    def __post_init__(self):
        if self.tag not in ALL_TAGS:
            raise ValueError(f"unknown edge tag {self.tag!r}")
        want = _INDEXED.get(self.tag, 0)
        have = (self.j != 0) + (self.k != 0)
        if have != want:
            raise ValueError(f"tag {self.tag} takes {want} axis indices")

    def __str__(self):
        if self.tag == "XdK":
            return f"{self.tag}:{self.k},{self.j}"
        if self.j:
            return f"{self.tag}:{self.j}"
        return self.tag


def parse_edge_type(text: str) -> EdgeType:
    if ":" not in text:
        return EdgeType(text)
    tag, idx = text.split(":", 1)
    if "," in idx:
        k, j = idx.split(",")
        return EdgeType(tag, j=int(j), k=int(k))
    return EdgeType(tag, j=int(idx))


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    etype: EdgeType
    eps: Fraction = Fraction(0)

    def touches(self, v: int) -> bool:
        return v in (self.tail, self.head)

    def other(self, v: int) -> int:
        return self.head if v == self.tail else self.tail


@dataclass
class FeynmanGraph:
    """A rooted multigraph with per-edge epsilon powers and a loose budget."""

    kinds: dict[int, str]
    edges: list[Edge]
    prefactor: Fraction = Fraction(0)
    coeff: Fraction = Fraction(1)
    name: str = ""
    expect: str | None = None

    def __post_init__(self):
        roots = [v for v, k in self.kinds.items() if k == ROOT]
        if len(roots) != 1:
            raise ValueError(f"{self.name or 'graph'}: need exactly one root")
        self._root = roots[0]
        for e in self.edges:
            if e.tail not in self.kinds or e.head not in self.kinds:
                raise ValueError(f"{self.name}: edge endpoint missing")
            if e.etype.tag in TEST_TAGS and e.head != self._root:
                raise ValueError(f"{self.name}: test edges must point at the root")

    @property
    def root(self) -> int:
        return self._root

    def vertices(self) -> list[int]:
        return sorted(self.kinds)

    def noise_vertices(self) -> list[int]:
        """Noise nodes in declaration (= numbering) order."""
        return [v for v in self.kinds if self.kinds[v] == NOISE]

    def tested_vertices(self) -> set[int]:
        """V_*: the root plus every non-root endpoint of a test edge."""
        out = {self.root}
        for e in self.edges:
            if e.etype.tag in TEST_TAGS:
                out.add(e.tail)
        return out

    def eps_total(self) -> Fraction:
        return self.prefactor + sum((e.eps for e in self.edges), Fraction(0))

    def is_connected(self) -> bool:
        verts = self.vertices()
        seen = {verts[0]}
        stack = [verts[0]]
        adj: dict[int, set[int]] = {v: set() for v in verts}
        for e in self.edges:
            adj[e.tail].add(e.head)
            adj[e.head].add(e.tail)
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(verts)

    def renamed(self, mapping: dict[int, int], name: str | None = None) -> "FeynmanGraph":
        return FeynmanGraph(
            kinds={mapping[v]: k for v, k in self.kinds.items()},
            edges=[replace(e, tail=mapping[e.tail], head=mapping[e.head]) for e in self.edges],
            prefactor=self.prefactor,
            coeff=self.coeff,
            name=name if name is not None else self.name,
            expect=self.expect,
        )

    def with_edges(self, edges: list[Edge], name: str | None = None) -> "FeynmanGraph":
        return FeynmanGraph(
            kinds=dict(self.kinds),
            edges=list(edges),
            prefactor=self.prefactor,
            coeff=self.coeff,
            name=name if name is not None else self.name,
            expect=self.expect,
        )


# ---------------------------------------------------------------------------
# Edge classes


def edge_classes(graph: FeynmanGraph) -> dict[str, set[int]]:
    """Partition edge indices into the kernel families (with overlaps)."""
    out = {key: set() for key in ("E_M", "E_K", "E_*", "E_M3", "E_M1", "E_K0", "E_K1")}
    for i, e in enumerate(graph.edges):
        tag = e.etype.tag
        if tag in MOLLIFIER_TAGS:
            out["E_M"].add(i)
        if tag in KERNEL_TAGS:
            out["E_K"].add(i)
        if tag in TEST_TAGS:
            out["E_*"].add(i)
        if tag in M3_TAGS:
            out["E_M3"].add(i)
        if tag in M1_TAGS:
            out["E_M1"].add(i)
        if tag in K0_TAGS:
            out["E_K0"].add(i)
        if tag in K1_TAGS:
            out["E_K1"].add(i)
    return out


# ---------------------------------------------------------------------------
# Structure report

_FORBIDDEN_IN_CORPUS = {"Rho", "DRho", "dK1", "dK2", "ddK", "DTest"}

# Renormalisation orders under the canonical labelling (one epsilon spent per
# mollifier); used by the structural checks on r_e.
CANONICAL_R = {
    "K": 0, "K1": 1, "K2": 2, "dK": 0, "dK1": 1, "dK2": 2, "ddK": -1,
    "MulX": 0, "XK": 0, "XdK": 0, "Rho": 0, "DRho": -1, "DDRho": -2,
    "Reps": -2, "Geps": -1, "Test": 0, "DTest": 0, "XTest": 0,
}


@dataclass
class StructureReport:
    items: dict[int, bool] = field(default_factory=dict)
    offenders: dict[int, list] = field(default_factory=dict)

    def ok(self) -> bool:
        return all(self.items.values())

    def __str__(self):
        lines = []
        for i in sorted(self.items):
            status = "pass" if self.items[i] else f"FAIL {self.offenders[i]}"
            lines.append(f"item {i}: {status}")
        return "\n".join(lines)


def validate_structure(graph: FeynmanGraph) -> StructureReport:
    """Check the seven structural properties of corpus graphs."""
    rep = StructureReport()
    classes = edge_classes(graph)
    root = graph.root

    bad1 = [i for i, e in enumerate(graph.edges) if e.etype.tag in _FORBIDDEN_IN_CORPUS]
    rep.items[1], rep.offenders[1] = not bad1, bad1

    matched: dict[int, list[int]] = {v: [] for v in graph.kinds if v != root}
    ok2 = True
    for i in classes["E_M"]:
        e = graph.edges[i]
        for v in (e.tail, e.head):
            if v == root:
                ok2 = False
            else:
                matched[v].append(i)
    bad2 = [v for v, es in matched.items() if len(es) != 1]
    rep.items[2], rep.offenders[2] = ok2 and not bad2, bad2

    tested = graph.tested_vertices()
    bad3 = []
    for v in graph.kinds:
        outgoing = [i for i in classes["E_K"] if graph.edges[i].tail == v]
        if v in tested:
            if outgoing:
                bad3.append(v)
        elif graph.kinds[v] != NOISE and len(outgoing) != 1:
            bad3.append(v)
    rep.items[3], rep.offenders[3] = not bad3, bad3

    bad4 = []
    neg_at: dict[int, int] = {}
    for i, e in enumerate(graph.edges):
        r = CANONICAL_R[e.etype.tag]
        if r != 0 and e.touches(root):
            bad4.append(i)
        if r < 0:
            # Negative-renormalisation edges are counted per incident vertex;
            # for the even kernels the drawn direction carries no meaning.
            neg_at[e.tail] = neg_at.get(e.tail, 0) + 1
            neg_at[e.head] = neg_at.get(e.head, 0) + 1
    bad4 += [v for v, n in neg_at.items() if n > 1]
    rep.items[4], rep.offenders[4] = not bad4, bad4

    # The recentred/differentiated budget: at most two {K2, dK} edges in
    # total, and at most two renormalised product kernels.  (Counting the
    # three types jointly would reject the square of the graph that carries
    # one of each.)
    recentred = [i for i, e in enumerate(graph.edges) if e.etype.tag in ("K2", "dK")]
    renorm = [i for i, e in enumerate(graph.edges) if e.etype.tag == "Reps"]
    ok5 = len(recentred) <= 2 and len(renorm) <= 2
    rep.items[5], rep.offenders[5] = ok5, [] if ok5 else recentred + renorm

    bad6 = [
        i for i, e in enumerate(graph.edges)
        if e.etype.tag == "dK" and not e.touches(root)
    ]
    rep.items[6], rep.offenders[6] = not bad6, bad6

    bad7 = [
        i for i, e in enumerate(graph.edges)
        if e.etype.tag == "K2" and e.head not in tested - {root}
    ]
    rep.items[7], rep.offenders[7] = not bad7, bad7
    return rep


# ---------------------------------------------------------------------------
# Wick pairings


def _mollifier_stub(graph: FeynmanGraph, v: int) -> Edge:
    """The single mollifier edge hanging off a noise node."""
    incident = [e for e in graph.edges if e.touches(v)]
    moll = [e for e in incident if e.etype.tag in ("Rho", "DRho", "DDRho")]
    if len(incident) != 1 or len(moll) != 1:
        raise ValueError(f"noise node {v} must carry exactly one mollifier edge")
    return moll[0]


def _merge_mollifiers(e1: Edge, p1: int, e2: Edge, p2: int) -> tuple[Edge, int]:
    """Contract a noise pair: convolve the two mollifiers into one edge.

    Returns the merged edge from the second copy's endpoint to the first's,
    together with the sign (-1)^(derivatives of the reflected factor).
    """
    d1 = _MOLLIFIER_DERIVS[e1.etype.tag]
    d2 = _MOLLIFIER_DERIVS[e2.etype.tag]
    total = d1 + d2
    if total > 2:
        raise ValueError("mollifier merge with more than two derivatives")
    tag = {0: "Rho", 1: "DRho", 2: "DDRho"}[total]
    sign = -1 if d2 % 2 else 1
    return Edge(p2, p1, EdgeType(tag), e1.eps + e2.eps), sign


def _parse_sigma_constraint(constraint, n: int):
    if constraint in (None, "all"):
        return lambda sigma: True
    if isinstance(constraint, str):
        if "-" in constraint:
            lhs, rhs = constraint.split("-")
            indices = [int(c) for c in lhs + rhs]
            if any(i < 1 or i > n for i in indices):
                raise ValueError(f"constraint {constraint!r} references noise beyond {n}")
            if len(lhs) == 1:
                i, j = int(lhs), int(rhs)
                return lambda sigma: sigma[i - 1] == j
            src = {int(c) for c in lhs}
            dst = {int(c) for c in rhs}
            return lambda sigma: {sigma[i - 1] for i in src} == dst
        raise ValueError(f"bad pairing constraint {constraint!r}")
    return constraint


def wick_pairings(stochastic: FeynmanGraph, constraint="all") -> list[FeynmanGraph]:
    """Second-moment pairings: one Feynman graph per admitted permutation.

    Two copies are taken, noise node i of the first is paired with node
    sigma(i) of the second, each pair is contracted (composing mollifiers),
    and the two roots are identified.  Epsilon budgets add.
    """
    noises = stochastic.noise_vertices()
    n = len(noises)
    admit = _parse_sigma_constraint(constraint, n)
    if n == 0:
        return [stochastic]

    out = []
    base = max(stochastic.kinds) + 1
    for sigma in itertools.permutations(range(1, n + 1)):
        if not admit(sigma):
            continue
        copy2 = stochastic.renamed(
            {v: (stochastic.root if v == stochastic.root else v + base) for v in stochastic.kinds}
        )
        noises2 = [v + base for v in noises]
        kinds = dict(stochastic.kinds) | dict(copy2.kinds)
        edges: list[Edge] = []
        sign = 1
        for copy, noise_list in ((stochastic, noises), (copy2, noises2)):
            for e in copy.edges:
                if copy.kinds[e.tail] != NOISE and copy.kinds[e.head] != NOISE:
                    edges.append(e)
        for i, v in enumerate(noises):
            w = noises2[sigma[i] - 1]
            e1 = _mollifier_stub(stochastic, v)
            e2 = _mollifier_stub(copy2, w)
            merged, s = _merge_mollifiers(e1, e1.other(v), e2, e2.other(w))
            edges.append(merged)
            sign *= s
            del kinds[v], kinds[w]
        out.append(
            FeynmanGraph(
                kinds=kinds,
                edges=edges,
                prefactor=2 * stochastic.prefactor,
                coeff=stochastic.coeff * stochastic.coeff * sign,
                name=f"{stochastic.name}|{''.join(map(str, sigma))}",
            )
        )
    return out


def fourth_cumulant_graphs(stochastic: FeynmanGraph, dedup: bool = True) -> list[FeynmanGraph]:
    """Connected pairings of four copies, one graph per pairing.

    Connectivity is that of the copy quotient: a perfect matching of the
    4n noise nodes contributes if the multigraph on the four copies induced
    by cross-copy pairs is connected (the cumulant diagram rule, under which
    a purely Gaussian input has no connected pairing at all).  With ``dedup``
    the result is reduced modulo isomorphism.
    """
    noises = stochastic.noise_vertices()
    n = len(noises)
    if n == 0:
        return []
    base = max(stochastic.kinds) + 1
    copies = [
        stochastic.renamed(
            {v: (stochastic.root if v == stochastic.root else v + c * base) for v in stochastic.kinds}
        )
        for c in range(4)
    ]
    items = [(c, v + c * base) for c in range(4) for v in noises]

    def pairings(pool):
        if not pool:
            yield []
            return
        first, rest = pool[0], pool[1:]
        for i, second in enumerate(rest):
            for tail in pairings(rest[:i] + rest[i + 1:]):
                yield [(first, second)] + tail

    out = []
    seen: set[str] = set()
    for matching in pairings(items):
        comp = list(range(4))

        def find(c):
            while comp[c] != c:
                comp[c] = comp[comp[c]]
                c = comp[c]
            return c

        cross = True
        for (c1, _), (c2, _) in matching:
            if c1 == c2:
                cross = False
                break
            comp[find(c1)] = find(c2)
        if not cross or len({find(c) for c in range(4)}) != 1:
            continue

        kinds: dict[int, str] = {}
        for copy in copies:
            kinds |= copy.kinds
        edges: list[Edge] = []
        sign = 1
        for copy in copies:
            for e in copy.edges:
                if copy.kinds[e.tail] != NOISE and copy.kinds[e.head] != NOISE:
                    edges.append(e)
        for (c1, v), (c2, w) in matching:
            e1 = _mollifier_stub(copies[c1], v)
            e2 = _mollifier_stub(copies[c2], w)
            merged, s = _merge_mollifiers(e1, e1.other(v), e2, e2.other(w))
            edges.append(merged)
            sign *= s
            del kinds[v], kinds[w]
        graph = FeynmanGraph(
            kinds=kinds,
            edges=edges,
            prefactor=4 * stochastic.prefactor,
            coeff=stochastic.coeff ** 4 * sign,
            name=f"{stochastic.name}|k4",
        )
        if dedup:
            key = canonical_form(graph)
            if key in seen:
                continue
            seen.add(key)
        out.append(graph)
    return out


# ---------------------------------------------------------------------------
# Canonical form

_KIND_CODE = {ROOT: 0, INT: 1, NOISE: 2}


def _edge_ends(e: Edge, order: dict[int, int]) -> tuple[int, int]:
    t, h = order[e.tail], order[e.head]
    if e.etype.tag in DIRECTION_FREE and t > h:
        t, h = h, t
    return t, h


def _graph_code(graph: FeynmanGraph, order: dict[int, int]) -> tuple:
    edges = sorted(
        _edge_ends(e, order) + (str(e.etype), e.eps) for e in graph.edges
    )
    kinds = tuple(k for _, k in sorted((order[v], graph.kinds[v]) for v in graph.kinds))
    return (kinds, tuple(edges))


def canonical_form(graph: FeynmanGraph) -> str:
    """Isomorphism-invariant encoding (root fixed, kinds respected).

    Brute-force minimisation over kind-preserving bijections, pruned by an
    iterated neighbourhood-colour refinement.
    """
    verts = graph.vertices()
    if len(verts) > 16:
        raise ValueError("canonical_form caps at 16 vertices")

    colours = {v: (_KIND_CODE[graph.kinds[v]], 1 if v == graph.root else 0) for v in verts}
    for _ in range(len(verts)):
        new = {}
        for v in verts:
            profile = sorted(
                (
                    str(e.etype),
                    e.eps,
                    e.tail == v if e.etype.tag not in DIRECTION_FREE else True,
                    colours[e.other(v)],
                )
                for e in graph.edges
                if e.touches(v)
            )
            new[v] = (colours[v], tuple(profile))
        ranks = {c: i for i, c in enumerate(sorted(set(new.values()), key=repr))}
        refreshed = {v: (ranks[new[v]],) for v in verts}
        if len(set(refreshed.values())) == len(set(colours.values())):
            colours = refreshed
            break
        colours = refreshed

    groups: dict[tuple, list[int]] = {}
    for v in verts:
        if v == graph.root:
            continue
        key = (_KIND_CODE[graph.kinds[v]],) + colours[v]
        groups.setdefault(key, []).append(v)

    best: tuple | None = None
    group_list = sorted(groups.items(), key=lambda kv: repr(kv[0]))

    def assign(idx: int, order: dict[int, int], next_rank: int):
        nonlocal best
        if idx == len(group_list):
            code = _graph_code(graph, order)
            if best is None or code < best:
                best = code
            return
        _, members = group_list[idx]
        for perm in itertools.permutations(members):
            new_order = dict(order)
            for offset, v in enumerate(perm):
                new_order[v] = next_rank + offset
            assign(idx + 1, new_order, next_rank + len(members))

    assign(0, {graph.root: 0}, 1)
    assert best is not None
    return repr(best)


def isomorphic(a: FeynmanGraph, b: FeynmanGraph) -> bool:
    return canonical_form(a) == canonical_form(b)
