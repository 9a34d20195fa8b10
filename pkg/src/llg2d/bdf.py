"""Backward-difference and extrapolation weight tables for orders 1 to 3.

``a_weights`` combine the solution history in the implicit difference
quotient ``(alpha*u^{n+1} - A_k(u)) / dt``.  ``b_weights`` are the
(k-1)-point extrapolation used for the multiplier term, which only needs
order k-1 because the corrector re-closes it; ``bext_weights`` are the
k-point extrapolation used for terms that appear explicitly only (they must
carry the full order).  ``HALF_STEP_WEIGHTS`` extrapolate to the half level
t^{n+1/2} for the Crank-Nicolson family.

All history sequences are ordered newest first.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["BdfTable", "BDF_TABLES", "HALF_STEP_WEIGHTS", "extrapolate"]


@dataclass(frozen=True)
class BdfTable:
    k: int
    alpha: float
    a_weights: tuple[float, ...]
    b_weights: tuple[float, ...]
    bext_weights: tuple[float, ...]


BDF_TABLES: dict[int, BdfTable] = {
    1: BdfTable(1, 1.0, (1.0,), (), (1.0,)),
    2: BdfTable(2, 1.5, (2.0, -0.5), (1.0,), (2.0, -1.0)),
    3: BdfTable(3, 11.0 / 6.0, (3.0, -1.5, 1.0 / 3.0), (2.0, -1.0), (3.0, -3.0, 1.0)),
}

HALF_STEP_WEIGHTS: dict[int, tuple[float, ...]] = {
    1: (1.0,),
    2: (1.5, -0.5),
}


def extrapolate(weights, values):
    """Weighted combination of history values (newest first).

    Returns 0.0 when ``weights`` is empty so callers can add the result
    without allocating a zero field.
    """
    acc = 0.0
    for w, v in zip(weights, values):
        acc = acc + w * v
    return acc
