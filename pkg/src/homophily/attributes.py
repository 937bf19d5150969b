"""Per-user profile attributes, distribution summaries and rank correlation."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._io import open_lines, source_name
from .errors import NotFoundError, ParseError, ValidationError
from .graph import parse_user_id

ATTRIBUTES = ("friends", "followers", "ratio")
ATTRIBUTE_LABELS = {
    "friends": "#friends",
    "followers": "#followers",
    "ratio": "#friends/#followers",
}


def follow_ratio(friends, followers):
    """(#friends + 1) / (#followers + 1); every user is taken to follow itself."""
    return (np.asarray(friends, dtype=np.float64) + 1.0) / (np.asarray(followers, dtype=np.float64) + 1.0)


class AttributeTable:
    """Friend/follower counts keyed by user id, with the follow ratio stored eagerly."""

    def __init__(self, ids, friends, followers):
        ids = np.asarray(ids, dtype=np.int64)
        friends = np.asarray(friends, dtype=np.int64)
        followers = np.asarray(followers, dtype=np.int64)
        if not (ids.shape == friends.shape == followers.shape):
            raise ValidationError("attribute columns differ in length")
        if (friends < 0).any() or (followers < 0).any():
            raise ValidationError("attribute counts must be non-negative")
        order = np.argsort(ids, kind="stable")
        ids = ids[order]
        dup = ids[1:][ids[1:] == ids[:-1]]
        if dup.size:
            raise ValidationError(f"duplicate user ids in attribute table: {np.unique(dup)[:10].tolist()}")
        self.ids = ids
        self.friends = friends[order]
        self.followers = followers[order]
        self.ratio = follow_ratio(self.friends, self.followers)
        for arr in (self.ids, self.friends, self.followers, self.ratio):
            arr.setflags(write=False)

    def __len__(self):
        return int(self.ids.size)

    def __contains__(self, u):
        i = int(np.searchsorted(self.ids, u))
        return i < self.ids.size and self.ids[i] == u

    def column(self, which):
        if which == "friends":
            return self.friends
        if which == "followers":
            return self.followers
        if which == "ratio":
            return self.ratio
        raise ValueError(f"unknown attribute {which!r}; expected one of {ATTRIBUTES}")

    def lookup(self, which, users):
        """Attribute values for ``users`` (array of ids) in the given order."""
        col = self.column(which)
        users = np.asarray(users, dtype=np.int64)
        pos = np.searchsorted(self.ids, users)
        found = pos < self.ids.size
        found[found] = self.ids[pos[found]] == users[found]
        if not found.all():
            missing = users[~found].tolist()
            shown = ", ".join(map(str, missing[:10]))
            raise NotFoundError(f"no attributes for {len(missing)} user(s): {shown}", missing)
        return col[pos]

    def record(self, u):
        i = int(np.searchsorted(self.ids, u))
        if i >= self.ids.size or self.ids[i] != u:
            raise NotFoundError(f"no attributes for user {u}", [u])
        return int(self.friends[i]), int(self.followers[i]), float(self.ratio[i])


def load_attributes(source):
    """Read ``id<TAB>friends_count<TAB>followers_count`` lines."""
    path = source_name(source)
    ids, friends, followers = [], [], []
    seen = set()
    with open_lines(source) as rows:
        for line_no, fields in rows:
            if len(fields) != 3:
                raise ParseError(f"expected 3 fields, got {len(fields)}", line_no, path)
            u = parse_user_id(fields[0], line_no, path)
            try:
                f, fo = int(fields[1]), int(fields[2])
            except ValueError:
                raise ParseError(f"invalid count in {fields[1:]!r}", line_no, path) from None
            if f < 0 or fo < 0:
                raise ValidationError(f"{path or ''}:{line_no}: negative count for user {u}")
            if u in seen:
                raise ValidationError(f"{path or ''}:{line_no}: duplicate user id {u}")
            seen.add(u)
            ids.append(u)
            friends.append(f)
            followers.append(fo)
    return AttributeTable(ids, friends, followers)


def write_attributes(t, fh):
    lines = "".join(f"{u}\t{f}\t{fo}\n" for u, f, fo in
                    zip(t.ids.tolist(), t.friends.tolist(), t.followers.tolist()))
    fh.write(lines)


def attribute_values(t, which, users):
    """Values of attribute ``which`` for ``users``, ordered by ascending user id."""
    ids = np.unique(np.fromiter(users, dtype=np.int64))
    return t.lookup(which, ids).astype(np.float64)


@dataclass(frozen=True)
class BoxStats:
    p5: float
    p25: float
    p50: float
    p75: float
    p95: float
    mean: float
    n: int

    def to_dict(self):
        return {"p5": self.p5, "p25": self.p25, "p50": self.p50, "p75": self.p75,
                "p95": self.p95, "mean": self.mean, "n": self.n}


def box_stats(values):
    """Whisker (5/95), box (25/75), median and mean of ``values``.

    Percentiles use linear interpolation between order statistics at
    fractional index ``q * (n - 1)``.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("box_stats needs at least one value")
    p5, p25, p50, p75, p95 = np.percentile(v, [5, 25, 50, 75, 95], method="linear")
    # fsum is correctly rounded, so the mean does not depend on input order
    return BoxStats(float(p5), float(p25), float(p50), float(p75), float(p95),
                    math.fsum(v.tolist()) / v.size, int(v.size))


def average_ranks(x):
    """1-based ranks; tied values share the mean of the ranks they span."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    n = xs.size
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], n]
    group_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def spearman(x, y):
    """Spearman's rho as the Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("spearman needs at least two observations")
    rx = average_ranks(x)
    ry = average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    sxx = float(rx @ rx)
    syy = float(ry @ ry)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("spearman is undefined for a constant vector")
    rho = float(rx @ ry) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, rho)))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pairwise Spearman coefficients; ``None`` where a column is constant."""

    friends_followers: Optional[float]
    friends_ratio: Optional[float]
    followers_ratio: Optional[float]

    COLUMNS = ("friends--followers", "friends--ratio", "followers--ratio")

    def row(self):
        return ["-" if v is None else f"{v:.2f}" for v in self.values()]

    def values(self):
        return (self.friends_followers, self.friends_ratio, self.followers_ratio)

    def get(self, a, b):
        if a == b:
            return 1.0
        key = {frozenset(("friends", "followers")): self.friends_followers,
               frozenset(("friends", "ratio")): self.friends_ratio,
               frozenset(("followers", "ratio")): self.followers_ratio}
        return key[frozenset((a, b))]

    def to_dict(self):
        return dict(zip(("friends_followers", "friends_ratio", "followers_ratio"), self.values()))


def _defined_spearman(x, y):
    if np.all(x == x[0]) or np.all(y == y[0]):
        return None
    return spearman(x, y)


def correlation_matrix(t):
    if len(t) < 2:
        raise ValueError("correlation needs at least two users")
    return CorrelationMatrix(
        friends_followers=_defined_spearman(t.friends, t.followers),
        friends_ratio=_defined_spearman(t.friends, t.ratio),
        followers_ratio=_defined_spearman(t.followers, t.ratio),
    )
