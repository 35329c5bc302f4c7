"""JSONL dataset format: one bag per line.

Line schema:
    {"bag_id": int, "instances": [[real, ...], ...], "label": real,
     "key_mask": [bool, ...],        # optional
     "contributions": [real, ...]}   # optional

Floats are written with Python's shortest exact representation, so a
write/read round trip reproduces every value bit-for-bit. The task is not
part of the format; on read it is inferred (labels all in {0, 1} means
classification) unless passed explicitly.
"""

import json

import numpy as np

from .bags import BagDataset, CLASSIFICATION, REGRESSION, TASKS
from .errors import ConfigError, FormatError


def write_bags_jsonl(dataset, path):
    """Write a dataset as one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, bag in enumerate(dataset.bags):
            record = {
                "bag_id": i,
                "instances": bag.tolist(),
                "label": float(dataset.labels[i]),
            }
            if dataset.key_masks is not None:
                record["key_mask"] = [bool(v) for v in dataset.key_masks[i]]
            if dataset.contributions is not None:
                record["contributions"] = dataset.contributions[i].tolist()
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")


_ALLOWED_KEYS = {"bag_id", "instances", "label", "key_mask", "contributions"}


def read_bags_jsonl(path, task=None):
    """Read a JSONL dataset written by write_bags_jsonl; an empty file yields
    an empty dataset."""
    bags, labels, masks, contribs = [], [], [], []
    have_mask = have_contrib = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise FormatError(f"{path}:{lineno}: expected a JSON object")
            unknown = set(record) - _ALLOWED_KEYS
            if unknown:
                raise FormatError(f"{path}:{lineno}: unknown keys {sorted(unknown)}")
            if "instances" not in record or "label" not in record:
                raise FormatError(f"{path}:{lineno}: missing 'instances' or 'label'")
            try:
                bag = np.asarray(record["instances"], dtype=np.float64)
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: instances are not a rectangular numeric array") from exc
            if bag.ndim != 2 or bag.shape[0] < 1:
                raise FormatError(f"{path}:{lineno}: instances must be a non-empty list of vectors")
            if bags and bag.shape[1] != bags[0].shape[1]:
                raise FormatError(
                    f"{path}:{lineno}: dimension {bag.shape[1]} differs from {bags[0].shape[1]}"
                )
            n = bag.shape[0]
            mask = record.get("key_mask")
            if mask is not None and len(mask) != n:
                raise FormatError(f"{path}:{lineno}: key_mask length {len(mask)} for {n} instances")
            contrib = record.get("contributions")
            if contrib is not None and len(contrib) != n:
                raise FormatError(f"{path}:{lineno}: contributions length {len(contrib)} for {n} instances")
            bags.append(bag)
            labels.append(float(record["label"]))
            masks.append(mask)
            contribs.append(contrib)
            have_mask = have_mask or mask is not None
            have_contrib = have_contrib or contrib is not None
    if have_mask and any(m is None for m in masks):
        raise FormatError(f"{path}: key_mask present on some lines but not all")
    if have_contrib and any(c is None for c in contribs):
        raise FormatError(f"{path}: contributions present on some lines but not all")
    labels_arr = np.asarray(labels)
    if task is None:
        task = CLASSIFICATION if np.all(np.isin(labels_arr, (0.0, 1.0))) else REGRESSION
    elif task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
    return BagDataset(
        bags=tuple(bags),
        labels=labels_arr,
        task=task,
        key_masks=tuple(masks) if have_mask else None,
        contributions=tuple(contribs) if have_contrib else None,
    )
