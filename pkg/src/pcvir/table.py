from dataclasses import dataclass

import numpy as np

from .exceptions import DataError
from .glm import LabelCoding

DEFAULT_GROUP = "all"


@dataclass(frozen=True)
class FeatureTable:
    """Observation-by-feature matrix with 0/1 labels and optional group ids."""

    feature_names: tuple
    rows: np.ndarray
    labels: np.ndarray
    coding: LabelCoding = LabelCoding("0", "1")
    groups: np.ndarray = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if rows.ndim != 2:
            raise DataError(f"rows must be 2-D, got shape {rows.shape}")
        if len(self.feature_names) != rows.shape[1]:
            raise DataError(
                f"{len(self.feature_names)} feature names for {rows.shape[1]} columns")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DataError("feature names must be unique")
        if labels.shape != (rows.shape[0],):
            raise DataError("one label per row is required")
        if not np.all((labels == 0) | (labels == 1)):
            raise DataError("labels must be coded 0/1")
        if not np.all(np.isfinite(rows)):
            raise DataError("table contains missing or non-finite values")
        if self.groups is not None:
            groups = np.asarray(self.groups, dtype=object).astype(str)
            if groups.shape != (rows.shape[0],):
                raise DataError("one group id per row is required")
            object.__setattr__(self, "groups", groups)

    @property
    def n_rows(self):
        return self.rows.shape[0]

    @property
    def n_features(self):
        return self.rows.shape[1]

    def group_ids(self):
        """Group ids in order of first appearance."""
        if self.groups is None:
            return [DEFAULT_GROUP]
        return list(dict.fromkeys(self.groups.tolist()))

    def group_mask(self, gid):
        if self.groups is None:
            if gid != DEFAULT_GROUP:
                raise KeyError(gid)
            return np.ones(self.n_rows, dtype=bool)
        return self.groups == gid

    def take(self, index):
        index = np.asarray(index)
        return FeatureTable(self.feature_names, self.rows[index], self.labels[index],
                            self.coding, None if self.groups is None else self.groups[index])

    def group(self, gid):
        return self.take(np.flatnonzero(self.group_mask(gid)))

    def iter_groups(self):
        for gid in self.group_ids():
            yield gid, self.group(gid)

    def select(self, names):
        """Table restricted to the named feature columns, in the given order."""
        lookup = {name: j for j, name in enumerate(self.feature_names)}
        missing = [n for n in names if n not in lookup]
        if missing:
            raise DataError(f"unknown feature(s): {', '.join(missing)}")
        cols = [lookup[n] for n in names]
        return FeatureTable(tuple(names), self.rows[:, cols], self.labels,
                            self.coding, self.groups)
