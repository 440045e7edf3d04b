"""Partially complete clustered pre-post data.

A study has ``T`` intervention groups, each observed in two periods (pre and
post).  Independent clusters contribute a vector of repeated observations to
one or both periods.  Clusters with data in both periods are *complete*, the
rest are *incomplete*.

Design cells are addressed by 1-based ``(group, period)`` labels in the public
API.  Arrays indexed by cell use the 0-based lexicographic order
``(1,1), (1,2), ..., (T,1), (T,2)``, i.e. ``cell = 2 * (group - 1) + period - 1``.

Missingness is assumed to be completely at random; nothing here can check
that assumption.
"""
import csv
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    DuplicateKey,
    EmptyCell,
    MalformedRow,
    NonContiguousGroups,
)

HEADER = ("group", "cluster", "period", "visit", "value")
LARGE_CLUSTER = 50


class PeriodLabel(enum.IntEnum):
    PRE = 1
    POST = 2


class ClusterStatus(enum.Enum):
    COMPLETE = "complete"
    INCOMPLETE_PRE = "incomplete_pre"
    INCOMPLETE_POST = "incomplete_post"


def cell_index(group, period):
    """0-based lexicographic position of the 1-based cell ``(group, period)``."""
    return 2 * (group - 1) + (period - 1)


def cell_label(index):
    """Inverse of :func:`cell_index`."""
    return index // 2 + 1, index % 2 + 1


@dataclass(frozen=True)
class ClusterRecord:
    """One independent cluster.

    ``pre`` and ``post`` hold the repeated observations of each period in
    visit order; either may be empty but not both.
    """

    group: int
    cluster_id: str
    pre: tuple = ()
    post: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pre", tuple(float(x) for x in self.pre))
        object.__setattr__(self, "post", tuple(float(x) for x in self.post))
        if not self.pre and not self.post:
            raise DataError(f"cluster {self.cluster_id!r} in group {self.group} has no observations")
        for x in self.pre + self.post:
            if not math.isfinite(x):
                raise DataError(f"cluster {self.cluster_id!r}: non-finite value {x}")

    @property
    def status(self):
        if self.pre and self.post:
            return ClusterStatus.COMPLETE
        return ClusterStatus.INCOMPLETE_PRE if self.pre else ClusterStatus.INCOMPLETE_POST

    @property
    def is_complete(self):
        return bool(self.pre) and bool(self.post)

    def period(self, label):
        return self.pre if label == PeriodLabel.PRE else self.post


@dataclass(frozen=True)
class StudyData:
    """A full ``T x 2`` design of clusters.

    Construction checks that every group label lies in ``1..T`` and that every
    design cell holds at least one observation.  Derived counts and flattened
    observation arrays are computed lazily and cached; the object is otherwise
    immutable.
    """

    T: int
    clusters: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        if self.T < 1:
            raise DataError(f"need at least one group, got T={self.T}")
        seen = set()
        for c in self.clusters:
            if not 1 <= c.group <= self.T:
                raise DataError(f"cluster {c.cluster_id!r}: group {c.group} outside 1..{self.T}")
            key = (c.group, c.cluster_id)
            if key in seen:
                raise DataError(f"cluster {c.cluster_id!r} appears twice in group {c.group}")
            seen.add(key)
        counts = self.N_jl
        for j in range(self.T):
            for l in range(2):
                if counts[j, l] == 0:
                    raise EmptyCell(j + 1, l + 1)

    @property
    def n_cells(self):
        return 2 * self.T

    @cached_property
    def cluster_group(self):
        """0-based group of each cluster."""
        return np.array([c.group - 1 for c in self.clusters], dtype=np.intp)

    @cached_property
    def cluster_complete(self):
        return np.array([c.is_complete for c in self.clusters], dtype=bool)

    @cached_property
    def cluster_sizes(self):
        """``(n_clusters, 2)`` observation counts per period, 0 where absent."""
        return np.array([(len(c.pre), len(c.post)) for c in self.clusters], dtype=np.intp).reshape(-1, 2)

    @cached_property
    def _flat(self):
        values, cells, owners = [], [], []
        for k, c in enumerate(self.clusters):
            for l, obs in enumerate((c.pre, c.post)):
                values.extend(obs)
                cells.extend([2 * (c.group - 1) + l] * len(obs))
                owners.extend([k] * len(obs))
        return (
            np.asarray(values, dtype=float),
            np.asarray(cells, dtype=np.intp),
            np.asarray(owners, dtype=np.intp),
        )

    @property
    def values(self):
        """All observations, cluster by cluster, pre before post."""
        return self._flat[0]

    @property
    def obs_cell(self):
        return self._flat[1]

    @property
    def obs_cluster(self):
        return self._flat[2]

    @cached_property
    def cell_values(self):
        """Per-cell observation arrays in lexicographic cell order."""
        vals, cells = self._flat[0], self._flat[1]
        return tuple(vals[cells == a] for a in range(self.n_cells))

    @cached_property
    def sorted_cell_values(self):
        return tuple(np.sort(v) for v in self.cell_values)

    @cached_property
    def n_complete(self):
        """Complete clusters per group, shape ``(T,)``."""
        return np.bincount(self.cluster_group[self.cluster_complete], minlength=self.T)

    @cached_property
    def n_incomplete(self):
        """Incomplete clusters per cell, shape ``(T, 2)``."""
        out = np.zeros((self.T, 2), dtype=np.intp)
        sizes = self.cluster_sizes
        for k in np.flatnonzero(~self.cluster_complete):
            out[self.cluster_group[k], 0 if sizes[k, 0] else 1] += 1
        return out

    @property
    def n_j(self):
        return self.n_complete + self.n_incomplete.sum(axis=1)

    def _obs_counts(self, mask):
        out = np.zeros((self.T, 2), dtype=np.intp)
        np.add.at(out, self.cluster_group[mask], self.cluster_sizes[mask])
        return out

    @cached_property
    def N_complete(self):
        return self._obs_counts(self.cluster_complete)

    @cached_property
    def N_incomplete(self):
        return self._obs_counts(~self.cluster_complete)

    @cached_property
    def N_jl(self):
        return self._obs_counts(np.ones(len(self.clusters), dtype=bool))

    @property
    def N_cell(self):
        """Observation count per cell in lexicographic order, shape ``(2T,)``."""
        return self.N_jl.reshape(-1)

    @property
    def N_j(self):
        return self.N_jl.sum(axis=1)

    @property
    def N(self):
        return int(self.N_jl.sum())

    def transform(self, func):
        """Apply ``func`` elementwise to every observation."""
        return StudyData(
            self.T,
            tuple(
                ClusterRecord(
                    c.group,
                    c.cluster_id,
                    tuple(func(np.asarray(c.pre))) if c.pre else (),
                    tuple(func(np.asarray(c.post))) if c.post else (),
                )
                for c in self.clusters
            ),
        )


def load_csv(path):
    """Read a study from a ``group,cluster,period,visit,value`` CSV file.

    Lines starting with ``#`` are skipped.  Observations are grouped into one
    :class:`ClusterRecord` per ``(group, cluster)`` pair and ordered by visit
    within each period.
    """
    rows = {}
    order = []
    header_seen = False
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = next(csv.reader([stripped]))
            fields = [f.strip() for f in fields]
            if not header_seen:
                if tuple(f.lower() for f in fields) != HEADER:
                    raise MalformedRow(lineno, f"expected header {','.join(HEADER)}")
                header_seen = True
                continue
            if len(fields) != len(HEADER):
                raise MalformedRow(lineno, f"expected {len(HEADER)} fields, got {len(fields)}")
            g, cid, per, visit, val = fields
            try:
                group = int(g)
                period = int(per)
                visit = int(visit)
                value = float(val)
            except ValueError as exc:
                raise MalformedRow(lineno, str(exc)) from None
            if group < 1:
                raise MalformedRow(lineno, f"group must be >= 1, got {group}")
            if period not in (1, 2):
                raise MalformedRow(lineno, f"period must be 1 or 2, got {period}")
            if not math.isfinite(value):
                raise MalformedRow(lineno, f"value must be finite, got {val}")
            if not cid:
                raise MalformedRow(lineno, "empty cluster id")
            key = (group, cid)
            if key not in rows:
                rows[key] = {1: {}, 2: {}}
                order.append(key)
            if visit in rows[key][period]:
                raise DuplicateKey(lineno, (group, cid, period, visit))
            rows[key][period][visit] = value
    if not header_seen:
        raise MalformedRow(0, "missing header")
    groups = sorted({g for g, _ in order})
    if not groups or groups != list(range(1, groups[-1] + 1)):
        raise NonContiguousGroups(f"group labels must be 1..T without gaps, got {groups}")
    clusters = []
    for group, cid in order:
        periods = rows[(group, cid)]
        pre = [periods[1][v] for v in sorted(periods[1])]
        post = [periods[2][v] for v in sorted(periods[2])]
        clusters.append(ClusterRecord(group, cid, pre, post))
    return StudyData(groups[-1], tuple(clusters))


def dump_csv(data, path):
    """Write ``data`` in the format read by :func:`load_csv`."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for c in data.clusters:
            for period, obs in ((1, c.pre), (2, c.post)):
                for v, x in enumerate(obs, start=1):
                    writer.writerow((c.group, c.cluster_id, period, v, repr(x)))
    return path


def validate(data):
    """Estimability warnings for the covariance estimator (never raises)."""
    out = []
    for j in range(data.T):
        if data.n_complete[j] <= 1:
            out.append(f"tau not estimable for group {j + 1}")
    for j in range(data.T):
        for l in range(2):
            if data.n_incomplete[j, l] <= 1:
                out.append(f"eta({j + 1},{l + 1}) contribution set to zero")
    biggest = int(data.cluster_sizes.max(initial=0))
    if biggest > LARGE_CLUSTER:
        out.append(f"cluster size {biggest} exceeds {LARGE_CLUSTER}; bounded cluster sizes are assumed")
    return out
