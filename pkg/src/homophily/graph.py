"""Mutual-friend social graph: loading, lookup and basic statistics.

The graph is stored in compressed sparse row form over the sorted user ids,
so ``ids[i]`` is the user at position ``i`` and its mutual friends are
``ids[indices[indptr[i]:indptr[i + 1]]]`` (ascending).
"""

from dataclasses import dataclass

import numpy as np

from ._io import open_lines, source_name
from .errors import NotFoundError, ParseError, ValidationError

MAX_ID = 2**63 - 1


def parse_user_id(token, line_no=None, path=None):
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"invalid user id {token!r}", line_no, path) from None
    if value < 0 or value > MAX_ID:
        raise ParseError(f"user id {value} outside [0, 2^63)", line_no, path)
    return value


class SocialGraph:
    """Immutable undirected graph over opaque non-negative integer user ids."""

    __slots__ = ("ids", "indptr", "indices")

    def __init__(self, ids, indptr, indices):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        for arr in (self.ids, self.indptr, self.indices):
            arr.setflags(write=False)

    @classmethod
    def from_pairs(cls, src, dst, users=None):
        """Build from endpoint arrays; drops self-loops and merges duplicates."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        keep = src != dst
        lo = np.minimum(src[keep], dst[keep])
        hi = np.maximum(src[keep], dst[keep])
        if users is None:
            # every id named in the input is a user, even one seen only on a self-loop
            ids = np.unique(np.concatenate([src, dst]))
        else:
            ids = np.unique(np.asarray(users, dtype=np.int64))
        a = np.searchsorted(ids, lo)
        b = np.searchsorted(ids, hi)
        # (lo, hi) canonical pairs, deduplicated
        order = np.lexsort((b, a))
        a, b = a[order], b[order]
        if a.size:
            first = np.ones(a.size, dtype=bool)
            first[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
            a, b = a[first], b[first]
        rows = np.concatenate([a, b])
        cols = np.concatenate([b, a])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(ids.size + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=ids.size), out=indptr[1:])
        return cls(ids, indptr, cols)

    @property
    def n_users(self):
        return int(self.ids.size)

    @property
    def n_edges(self):
        return int(self.indices.size // 2)

    def degrees(self):
        return np.diff(self.indptr)

    def position(self, u):
        """Row index of user ``u``; raises :class:`NotFoundError` if absent."""
        i = int(np.searchsorted(self.ids, u))
        if i >= self.ids.size or self.ids[i] != u:
            raise NotFoundError(f"unknown user {u}", [u])
        return i

    def positions(self, users):
        """Sorted row indices for a collection of user ids (duplicates merged)."""
        users = np.unique(np.fromiter(users, dtype=np.int64))
        pos = np.searchsorted(self.ids, users)
        found = pos < self.ids.size
        found[found] = self.ids[pos[found]] == users[found]
        if not found.all():
            missing = users[~found].tolist()
            raise NotFoundError(f"unknown users: {_preview(missing)}", missing)
        return pos

    def neighbor_positions(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def __contains__(self, u):
        try:
            self.position(u)
        except NotFoundError:
            return False
        return True

    def __len__(self):
        return self.n_users

    def __eq__(self, other):
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return (np.array_equal(self.ids, other.ids)
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None

    def __repr__(self):
        return f"SocialGraph(n_users={self.n_users}, n_edges={self.n_edges})"

    def edge_array(self):
        """Canonical ``(k, 2)`` id array: each pair once, smaller id first, sorted."""
        rows = np.repeat(np.arange(self.n_users), self.degrees())
        mask = rows < self.indices
        return np.column_stack([self.ids[rows[mask]], self.ids[self.indices[mask]]])

    def iter_edges(self):
        for a, b in self.edge_array().tolist():
            yield a, b


def _preview(items, limit=10):
    shown = ", ".join(map(str, items[:limit]))
    return shown + (f", ... ({len(items)} total)" if len(items) > limit else "")


def load_graph(edge_source, user_universe=None):
    """Read an edge list into a :class:`SocialGraph`.

    Every non-comment line must hold exactly two user ids.  Self-loops are
    dropped and repeated or reversed pairs are merged.  When ``user_universe``
    is given it defines the user set, so universe members without edges become
    isolated users and an edge endpoint outside it is a :class:`ValidationError`.
    """
    path = source_name(edge_source)
    src, dst, line_nos = [], [], []
    with open_lines(edge_source) as rows:
        for line_no, fields in rows:
            if len(fields) != 2:
                raise ParseError(f"expected 2 fields, got {len(fields)}", line_no, path)
            src.append(parse_user_id(fields[0], line_no, path))
            dst.append(parse_user_id(fields[1], line_no, path))
            line_nos.append(line_no)
    src = np.array(src, dtype=np.int64)
    dst = np.array(dst, dtype=np.int64)
    if user_universe is not None:
        universe = np.unique(np.fromiter(user_universe, dtype=np.int64))
        outside = ~(np.isin(src, universe) & np.isin(dst, universe))
        if outside.any():
            k = int(np.argmax(outside))
            bad = src[k] if not np.isin(src[k], universe) else dst[k]
            where = f"{path}:" if path else ""
            raise ValidationError(
                f"{where}{line_nos[k]}: edge endpoint {bad} is not a known user"
                f" ({int(outside.sum())} offending lines)")
        return SocialGraph.from_pairs(src, dst, users=universe)
    return SocialGraph.from_pairs(src, dst)


def write_edges(g, fh):
    """Write the canonical edge list (tab-separated, one pair per line)."""
    edges = g.edge_array()
    if isinstance(fh, (str, bytes)) or hasattr(fh, "__fspath__"):
        with open(fh, "w", encoding="utf-8", newline="\n") as out:
            _write_pairs(edges, out)
    else:
        _write_pairs(edges, fh)


def _write_pairs(edges, out):
    out.write("".join(f"{a}\t{b}\n" for a, b in edges.tolist()))


def neighbors(g, u):
    """Mutual friends of ``u`` as a frozenset of ids (empty if isolated)."""
    i = g.position(u)
    return frozenset(g.ids[g.neighbor_positions(i)].tolist())


@dataclass(frozen=True)
class GraphStats:
    n_users: int
    n_isolated: int
    n_edges: int
    mean_degree: float
    degree_dispersion: float
    median_degree: float

    COLUMNS = ("|V|", "|I|", "|E|", "K_out", "S_out", "M_out")

    def row(self):
        """Table-style cells: counts as integers, K_out/S_out to 2 decimals."""
        med = self.median_degree
        med_s = f"{int(med)}" if float(med).is_integer() else f"{med:.1f}"
        return [str(self.n_users), str(self.n_isolated), str(self.n_edges),
                f"{self.mean_degree:.2f}", f"{self.degree_dispersion:.2f}", med_s]

    def to_dict(self):
        return {
            "n_users": self.n_users,
            "n_isolated": self.n_isolated,
            "n_edges": self.n_edges,
            "mean_degree": self.mean_degree,
            "degree_dispersion": self.degree_dispersion,
            "median_degree": self.median_degree,
        }


def graph_stats(g):
    deg = g.degrees()
    if deg.size == 0:
        return GraphStats(0, 0, 0, 0.0, 0.0, 0.0)
    return GraphStats(
        n_users=g.n_users,
        n_isolated=int(np.count_nonzero(deg == 0)),
        n_edges=g.n_edges,
        mean_degree=float(deg.mean()),
        degree_dispersion=float(deg.std()),
        median_degree=float(np.median(deg)),
    )
