"""Shared numeric helpers."""

import numpy as np


def largest_remainder(total: int, shares) -> list:
    """Apportion `total` integer units proportionally to `shares`.

    Floors the quotas, then hands the remaining units to the largest
    fractional parts (ties broken by lower index). Sum of the result is
    exactly `total`.
    """
    shares = np.asarray(shares, dtype=float)
    if total < 0:
        raise ValueError("total must be non-negative")
    s = shares.sum()
    if s <= 0:
        if total:
            raise ValueError("cannot apportion a positive total over zero shares")
        return [0] * len(shares)
    quotas = total * shares / s
    base = np.floor(quotas).astype(int)
    remainder = total - int(base.sum())
    if remainder:
        frac = quotas - base
        order = np.lexsort((np.arange(len(shares)), -frac))
        base[order[:remainder]] += 1
    return base.tolist()
