"""Majority-vote home-location inference with leave-one-out evaluation.

Each user is predicted from the labels of its mutual friends; the user's own
label never takes part because the graph has no self-loops, so no masking or
graph mutation is needed.  Ties go to the lexicographically smallest label.
Neighbours without a label do not vote.
"""

import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from ._io import open_lines, source_name
from .errors import NotFoundError, ParseError, ValidationError
from .graph import parse_user_id

NO_LABEL = -1


def load_labels(source):
    """Read ``id<TAB>label`` lines into a ``{user_id: label}`` dict."""
    path = source_name(source)
    labels = {}
    with open_lines(source) as rows:
        for line_no, fields in rows:
            if len(fields) != 2:
                raise ParseError(f"expected 2 fields, got {len(fields)}", line_no, path)
            u = parse_user_id(fields[0], line_no, path)
            if u in labels:
                raise ValidationError(f"{path or ''}:{line_no}: duplicate user id {u}")
            labels[u] = fields[1]
    return labels


def write_labels(labels, fh):
    fh.write("".join(f"{u}\t{labels[u]}\n" for u in sorted(labels)))


def infer_one(g, labels, u):
    """Majority label among ``u``'s labelled neighbours, or ``None``."""
    i = g.position(u)
    votes = Counter()
    for v in g.ids[g.neighbor_positions(i)].tolist():
        lab = labels.get(v)
        if lab is not None:
            votes[lab] += 1
    if not votes:
        return None
    best = max(votes.values())
    return min(lab for lab, c in votes.items() if c == best)


class Predictions:
    """Leave-one-out predictions for every user of a graph.

    ``predicted`` and ``truth`` are label codes aligned with ``graph.ids``;
    codes index ``vocab`` (sorted, so the smallest code is the
    lexicographically smallest label).  ``NO_LABEL`` marks absence.
    """

    def __init__(self, graph, vocab, truth, predicted):
        self.graph = graph
        self.vocab = vocab
        self.truth = truth
        self.predicted = predicted
        self.estimable = predicted != NO_LABEL
        self.correct = self.estimable & (predicted == truth)

    def label_of(self, u):
        code = self.predicted[self.graph.position(u)]
        return None if code == NO_LABEL else self.vocab[code]

    def counts(self, mask=None):
        """(n_correct, n_estimable) over users selected by a boolean mask."""
        if mask is None:
            return int(self.correct.sum()), int(self.estimable.sum())
        return int(np.count_nonzero(self.correct & mask)), int(np.count_nonzero(self.estimable & mask))


def encode_labels(g, labels):
    """Map a label dict onto graph row order; returns ``(vocab, codes)``."""
    keys = np.fromiter(labels.keys(), dtype=np.int64, count=len(labels))
    extra = keys[~np.isin(keys, g.ids)]
    if extra.size:
        raise ValidationError(f"{extra.size} labelled user(s) are not in the graph, e.g. {np.sort(extra)[:5].tolist()}")
    vocab = sorted(set(labels.values()))
    if any(not lab for lab in vocab):
        raise ValidationError("labels must be non-empty tokens")
    index = {lab: k for k, lab in enumerate(vocab)}
    codes = np.fromiter((index.get(labels.get(u), NO_LABEL) if u in labels else NO_LABEL
                         for u in g.ids.tolist()), dtype=np.int64, count=g.n_users)
    return vocab, codes


def _vote_block(g, codes, lo, hi):
    start, stop = g.indptr[lo], g.indptr[hi]
    deg = np.diff(g.indptr[lo:hi + 1])
    rows = np.repeat(np.arange(hi - lo, dtype=np.int64), deg)
    labs = codes[g.indices[start:stop]]
    keep = labs != NO_LABEL
    rows, labs = rows[keep], labs[keep]
    out = np.full(hi - lo, NO_LABEL, dtype=np.int64)
    if rows.size == 0:
        return out
    n_labels = int(codes.max()) + 1
    key = rows * n_labels + labs
    uniq, cnt = np.unique(key, return_counts=True)
    urow, ulab = uniq // n_labels, uniq % n_labels
    # per row: highest count first, then smallest label code
    order = np.lexsort((ulab, -cnt, urow))
    urow, ulab = urow[order], ulab[order]
    first = np.r_[True, urow[1:] != urow[:-1]]
    out[urow[first]] = ulab[first]
    return out


def resolve_workers(workers):
    if workers in (None, "auto", 0):
        return os.cpu_count() or 1
    workers = int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return workers


def predict(g, labels, workers=1, block_edges=1 << 20):
    """Run the neighbour vote for all users.

    Users are split into contiguous blocks of roughly ``block_edges`` edge
    endpoints; blocks are independent and reassembled in row order, so the
    result does not depend on ``workers``.
    """
    vocab, codes = encode_labels(g, labels)
    n = g.n_users
    bounds = [0]
    if n:
        targets = np.arange(block_edges, int(g.indptr[-1]), block_edges)
        cuts = np.searchsorted(g.indptr, targets).tolist()
        bounds += [c for c in cuts if 0 < c < n]
    bounds.append(n)
    bounds = sorted(set(bounds))
    blocks = list(zip(bounds[:-1], bounds[1:]))
    workers = resolve_workers(workers)
    if workers == 1 or len(blocks) <= 1:
        parts = [_vote_block(g, codes, lo, hi) for lo, hi in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _vote_block(g, codes, *b), blocks))
    predicted = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    return Predictions(g, vocab, codes, predicted)


@dataclass(frozen=True)
class EvalResult:
    n_correct: int
    n_estimable: int
    n_universe: int

    @property
    def accuracy(self) -> Optional[float]:
        return None if self.n_estimable == 0 else self.n_correct / self.n_estimable

    @property
    def coverage(self) -> float:
        return 0.0 if self.n_universe == 0 else self.n_estimable / self.n_universe

    def exact_accuracy(self):
        return None if self.n_estimable == 0 else Fraction(self.n_correct, self.n_estimable)

    def exact_coverage(self):
        return Fraction(0) if self.n_universe == 0 else Fraction(self.n_estimable, self.n_universe)

    def to_dict(self):
        return {
            "n_correct": self.n_correct,
            "n_estimable": self.n_estimable,
            "n_universe": self.n_universe,
            "accuracy": self.accuracy,
            "coverage": self.coverage,
        }


def target_mask(g, labels, targets):
    if targets is None:
        mask = np.ones(g.n_users, dtype=bool)
        missing = [u for u in g.ids.tolist() if u not in labels]
    else:
        pos = g.positions(targets)
        mask = np.zeros(g.n_users, dtype=bool)
        mask[pos] = True
        missing = [u for u in g.ids[pos].tolist() if u not in labels]
    if missing:
        raise ValidationError(f"{len(missing)} target(s) have no true label, e.g. {missing[:5]}")
    return mask


def evaluate(g, labels, targets=None, workers=1, predictions=None):
    """Accuracy and coverage of the neighbour vote over ``targets``.

    ``targets=None`` means every user.  Coverage is always relative to the
    full user set of ``g``.
    """
    mask = target_mask(g, labels, targets)
    if predictions is None:
        predictions = predict(g, labels, workers=workers)
    n_correct, n_estimable = predictions.counts(mask)
    return EvalResult(n_correct, n_estimable, g.n_users)
