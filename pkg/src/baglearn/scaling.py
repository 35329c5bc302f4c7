"""Bag-aware min-max feature scaling.

The scaler is fitted on every instance of every bag of a dataset and maps
each feature linearly so that the fitted range becomes [0, 1]. Values seen
at transform time outside the fitted range are extrapolated, not clipped.
Features that were constant during fitting map to 0.
"""

import numpy as np

from .bags import BagDataset
from .errors import DataError


class BagMinMaxScaler:
    """Min-max scaler over all instances of all bags."""

    def __init__(self):
        self.mins_ = None
        self.maxs_ = None

    def fit(self, dataset):
        bags = dataset.bags if isinstance(dataset, BagDataset) else list(dataset)
        if len(bags) == 0:
            raise DataError("cannot fit scaler on an empty dataset")
        mins = np.asarray(bags[0], dtype=np.float64).min(axis=0).copy()
        maxs = np.asarray(bags[0], dtype=np.float64).max(axis=0).copy()
        for bag in bags[1:]:
            np.minimum(mins, bag.min(axis=0), out=mins)
            np.maximum(maxs, bag.max(axis=0), out=maxs)
        self.mins_ = mins
        self.maxs_ = maxs
        return self

    def _check_fitted(self, dim):
        if self.mins_ is None:
            raise DataError("scaler is not fitted")
        if dim != self.mins_.shape[0]:
            raise DataError(f"scaler fitted with dim {self.mins_.shape[0]}, data has dim {dim}")

    def transform_bags(self, bags):
        """Scale a sequence of bags; returns a list of new arrays."""
        span = self.maxs_ - self.mins_
        constant = span == 0
        safe = np.where(constant, 1.0, span)
        out = []
        for bag in bags:
            bag = np.asarray(bag, dtype=np.float64)
            self._check_fitted(bag.shape[1])
            scaled = (bag - self.mins_) / safe
            if constant.any():
                scaled[:, constant] = 0.0
            out.append(scaled)
        return out

    def transform(self, dataset):
        """Scale every bag of a dataset; labels, masks and contributions pass through."""
        self._check_fitted(dataset.dim)
        return BagDataset(
            bags=tuple(self.transform_bags(dataset.bags)),
            labels=dataset.labels,
            task=dataset.task,
            key_masks=dataset.key_masks,
            contributions=dataset.contributions,
            metadata=dict(dataset.metadata),
        )

    def fit_transform(self, dataset):
        return self.fit(dataset).transform(dataset)

    def to_dict(self):
        return {"mins": self.mins_.tolist(), "maxs": self.maxs_.tolist()}

    @classmethod
    def from_dict(cls, payload):
        scaler = cls()
        scaler.mins_ = np.asarray(payload["mins"], dtype=np.float64)
        scaler.maxs_ = np.asarray(payload["maxs"], dtype=np.float64)
        if np.any(scaler.mins_ > scaler.maxs_):
            raise DataError("scaler state has mins > maxs")
        return scaler
