"""Simple and bipartite graphs plus direct independent-set counters.

The direct counters enumerate vertex subsets and are the reference
against which the CSP encodings of independent-set counting are checked.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, PreconditionError, ResourceLimitError
from .relations import strip_comment

DEFAULT_VERTEX_CAP = 24


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices named '1'..'n'."""

    n: int
    edges: tuple[tuple[int, int], ...]  # 1-based, u < v, deduplicated

    def __post_init__(self):
        if self.n < 0:
            raise PreconditionError("vertex count must be nonnegative")
        seen = set()
        for u, v in self.edges:
            if not (1 <= u < v <= self.n):
                raise PreconditionError(f"bad edge ({u}, {v})")
            if (u, v) in seen:
                raise PreconditionError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        norm = []
        seen = set()
        for u, v in edges:
            if u == v:
                raise PreconditionError(f"self-loop at vertex {u}")
            e = (min(u, v), max(u, v))
            if e not in seen:
                seen.add(e)
                norm.append(e)
        return cls(n, tuple(norm))

    def vertex_names(self) -> tuple[str, ...]:
        return tuple(str(i) for i in range(1, self.n + 1))


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph with parts 'L1'..'Ln_left' and 'R1'..'Rn_right'."""

    n_left: int
    n_right: int
    edges: tuple[tuple[int, int], ...]  # (left index, right index), 1-based

    def __post_init__(self):
        if self.n_left < 0 or self.n_right < 0:
            raise PreconditionError("part sizes must be nonnegative")
        seen = set()
        for u, v in self.edges:
            if not (1 <= u <= self.n_left and 1 <= v <= self.n_right):
                raise PreconditionError(f"bad edge (L{u}, R{v})")
            if (u, v) in seen:
                raise PreconditionError(f"duplicate edge (L{u}, R{v})")
            seen.add((u, v))

    def left_names(self) -> tuple[str, ...]:
        return tuple(f"L{i}" for i in range(1, self.n_left + 1))

    def right_names(self) -> tuple[str, ...]:
        return tuple(f"R{i}" for i in range(1, self.n_right + 1))


def count_independent_sets(g: Graph, cap: int = DEFAULT_VERTEX_CAP) -> int:
    """Number of independent sets, the empty set included, by subset enumeration."""
    if g.n > cap:
        raise ResourceLimitError(f"{g.n} vertices exceed the enumeration cap of {cap}")
    edge_masks = [(1 << (u - 1)) | (1 << (v - 1)) for u, v in g.edges]
    count = 0
    for s in range(1 << g.n):
        if all((s & m) != m for m in edge_masks):
            count += 1
    return count


def count_independent_sets_bipartite(b: BipartiteGraph, cap: int = DEFAULT_VERTEX_CAP) -> int:
    g = Graph.from_edges(
        b.n_left + b.n_right,
        [(u, b.n_left + v) for u, v in b.edges],
    )
    return count_independent_sets(g, cap)


def parse_graph(text: str) -> Graph | BipartiteGraph:
    """Parse the graph format:

        graph <n>                  # vertices named 1..n
        edge <u> <v>

    or

        bipartite <nLeft> <nRight> # vertices L1..LnLeft, R1..RnRight
        edge <Li> <Rj>
    """
    kind = None
    n = n_left = n_right = 0
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw)
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "graph":
            if kind is not None:
                raise ParseError("duplicate graph header", lineno)
            if len(parts) != 2:
                raise ParseError("expected 'graph <n>'", lineno)
            kind = "graph"
            n = _parse_count(parts[1], lineno)
        elif head == "bipartite":
            if kind is not None:
                raise ParseError("duplicate graph header", lineno)
            if len(parts) != 3:
                raise ParseError("expected 'bipartite <nLeft> <nRight>'", lineno)
            kind = "bipartite"
            n_left = _parse_count(parts[1], lineno)
            n_right = _parse_count(parts[2], lineno)
        elif head == "edge":
            if kind is None:
                raise ParseError("edge before graph header", lineno)
            if len(parts) != 3:
                raise ParseError("expected 'edge <u> <v>'", lineno)
            if kind == "graph":
                u = _parse_vertex(parts[1], n, lineno)
                v = _parse_vertex(parts[2], n, lineno)
                if u == v:
                    raise ParseError("self-loops are not allowed", lineno)
                edges.append((min(u, v), max(u, v)))
            else:
                edges.append((_parse_side(parts[1], "L", n_left, lineno),
                              _parse_side(parts[2], "R", n_right, lineno)))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)
    if kind is None:
        raise ParseError("missing graph header")
    try:
        if kind == "graph":
            return Graph.from_edges(n, edges)
        return BipartiteGraph(n_left, n_right, tuple(dict.fromkeys(edges)))
    except PreconditionError as exc:
        raise ParseError(str(exc)) from None


def _parse_count(token: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", lineno) from None
    if value < 0:
        raise ParseError("vertex count must be nonnegative", lineno)
    return value


def _parse_vertex(token: str, n: int, lineno: int) -> int:
    try:
        v = int(token)
    except ValueError:
        raise ParseError(f"expected a vertex number, got {token!r}", lineno) from None
    if not 1 <= v <= n:
        raise ParseError(f"vertex {v} out of range 1..{n}", lineno)
    return v


def _parse_side(token: str, side: str, size: int, lineno: int) -> int:
    if not token.startswith(side):
        raise ParseError(f"expected an {side}-side vertex, got {token!r}", lineno)
    try:
        v = int(token[1:])
    except ValueError:
        raise ParseError(f"expected {side}<index>, got {token!r}", lineno) from None
    if not 1 <= v <= size:
        raise ParseError(f"vertex {token} out of range", lineno)
    return v


def serialize_graph(g: Graph | BipartiteGraph) -> str:
    out = []
    if isinstance(g, Graph):
        out.append(f"graph {g.n}")
        for u, v in g.edges:
            out.append(f"edge {u} {v}")
    else:
        out.append(f"bipartite {g.n_left} {g.n_right}")
        for u, v in g.edges:
            out.append(f"edge L{u} R{v}")
    return "\n".join(out) + "\n"
