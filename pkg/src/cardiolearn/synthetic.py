"""Seeded synthetic stand-in table matching the heart-risk schema.

Not a substitute for the published file: the class-conditional draws only
plant a learnable signal with the same column domains, a positive-majority
class balance, and a sprinkle of zero-cholesterol rows, so pipelines and
demos can run end to end without the real data.
"""

from __future__ import annotations

import numpy as np

from .dataset import DEFAULT_SCHEMA, Dataset, Provenance


def _categorical(rng: np.random.Generator, levels, probs, size: int) -> np.ndarray:
    return rng.choice(np.asarray(levels, dtype=np.float64), p=probs, size=size)


def make_synthetic_dataset(n_rows: int = 1190, seed: int = 7) -> Dataset:
    """Generate a schema-conforming table with class-dependent feature shifts."""
    rng = np.random.default_rng(seed)
    t = (rng.random(n_rows) < 0.53).astype(np.float64)
    pos = t == 1.0
    n = n_rows

    age = np.round(rng.normal(54, 9, n) + 3 * t).clip(28, 80)
    sex = np.where(rng.random(n) < np.where(pos, 0.82, 0.62), 1.0, 0.0)

    chest = np.empty(n)
    chest[pos] = _categorical(rng, [1, 2, 3, 4], [0.04, 0.08, 0.15, 0.73], int(pos.sum()))
    chest[~pos] = _categorical(rng, [1, 2, 3, 4], [0.12, 0.33, 0.35, 0.20], int((~pos).sum()))

    resting_bp = np.round(rng.normal(131, 17, n) + 4 * t).clip(90, 210)
    cholesterol = np.round(rng.normal(243, 53, n) - 8 * t).clip(85, 600)
    zero_chol = rng.random(n) < np.where(pos, 0.25, 0.04)
    cholesterol[zero_chol] = 0.0

    fbs = np.where(rng.random(n) < np.where(pos, 0.29, 0.13), 1.0, 0.0)

    ecg = np.empty(n)
    ecg[pos] = _categorical(rng, [0, 1, 2], [0.52, 0.27, 0.21], int(pos.sum()))
    ecg[~pos] = _categorical(rng, [0, 1, 2], [0.68, 0.14, 0.18], int((~pos).sum()))

    max_hr = np.round(rng.normal(152, 22, n) - 17 * t).clip(60, 205)
    angina = np.where(rng.random(n) < np.where(pos, 0.62, 0.15), 1.0, 0.0)
    oldpeak = np.round(np.abs(rng.normal(0.25 + 0.85 * t, 0.75, n)), 1).clip(0.0, 6.2)

    slope = np.empty(n)
    slope[pos] = _categorical(rng, [0, 1, 2, 3], [0.01, 0.17, 0.62, 0.20], int(pos.sum()))
    slope[~pos] = _categorical(rng, [0, 1, 2, 3], [0.01, 0.64, 0.28, 0.07], int((~pos).sum()))

    features = np.column_stack(
        [age, sex, chest, resting_bp, cholesterol, fbs, ecg, max_hr, angina, oldpeak, slope]
    )
    return Dataset(
        features=features,
        target=t,
        schema=DEFAULT_SCHEMA,
        provenance=Provenance(f"synthetic(seed={seed})", n_rows),
    )
