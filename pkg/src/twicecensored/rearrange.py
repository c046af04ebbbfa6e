"""Exact monotone rearrangement of step functions on a compact interval.

The increasing rearrangement replaces a bounded function on ``[j1, j2]`` by
the nondecreasing function with the same value distribution (under Lebesgue
measure).  For step functions this is computed exactly: decompose the
interval into constancy pieces, sort the (level, length) pairs by level and
re-attach them left to right.  The companion operator ``psi_tilde`` maps a
(possibly non-monotone) distribution estimate straight to a monotone
quantile value; on nondecreasing inputs it coincides with the
right-continuous generalized inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stepfun import StepFunction


@dataclass(frozen=True)
class RearrangeDomain:
    """Compact rearrangement interval [j1, j2]."""

    j1: float
    j2: float

    def __post_init__(self):
        object.__setattr__(self, "j1", float(self.j1))
        object.__setattr__(self, "j2", float(self.j2))
        if not self.j1 < self.j2:
            raise ValueError("need j1 < j2, got [%r, %r]" % (self.j1, self.j2))

    @classmethod
    def from_times(cls, ys):
        ys = np.asarray(ys, dtype=float)
        return cls(ys.min(), ys.max())

    @property
    def length(self):
        return self.j2 - self.j1


def _pieces(f: StepFunction, dom: RearrangeDomain):
    """Constancy pieces of ``f`` on [j1, j2].

    Returns (levels, lengths, breakpoints): ``f`` equals ``levels[k]`` on
    ``[breakpoints[k], breakpoints[k+1])``.  The endpoint j2 itself carries
    no length; its value ``f(j2)`` is handled separately by callers.
    """
    locs = f.locations
    interior = locs[(locs > dom.j1) & (locs < dom.j2)]
    bps = np.concatenate(([dom.j1], interior, [dom.j2]))
    levels = f(bps[:-1])
    lengths = np.diff(bps)
    return levels, lengths, bps


def psi_tilde(f: StepFunction, dom: RearrangeDomain, y) -> float:
    """``j1 +`` Lebesgue measure of ``{u in [j1, j2] : f(u) <= y}``.

    Nondecreasing and right continuous in ``y`` with range inside
    [j1, j2].  When the sublevel set is an interval starting at j1 (always
    the case for nondecreasing ``f``) the exact boundary point is returned,
    free of summation rounding.
    """
    levels, lengths, bps = _pieces(f, dom)
    if np.isscalar(y):
        return _psi_value(levels, lengths, bps, dom, float(y))
    y = np.asarray(y, dtype=float)
    return np.array([_psi_value(levels, lengths, bps, dom, v) for v in y.ravel()]).reshape(y.shape)


def _psi_value(levels, lengths, bps, dom, y):
    mask = levels <= y
    k = int(mask.sum())
    if k == 0:
        return dom.j1
    if mask[:k].all():
        # prefix run: measure telescopes to bps[k] - j1 exactly
        return float(bps[k])
    total = float(lengths[mask].sum())
    return float(min(dom.j1 + total, dom.j2))


def phi_tilde(f: StepFunction, dom: RearrangeDomain) -> StepFunction:
    """Increasing rearrangement of ``f`` over [j1, j2].

    Below j1 the output keeps ``f(j1-)``; on [j1, j2) it carries the sorted
    levels of ``f`` over pieces of the matching lengths; at and beyond j2 it
    takes ``max(largest level, f(j2))`` (the value of ``f`` at the endpoint
    participates as a zero-length piece, and monotonicity of the output
    requires the upper envelope there).  Nondecreasing inputs are reproduced
    bit-for-bit.
    """
    levels, lengths, bps = _pieces(f, dom)
    if (np.diff(levels) >= 0).all():
        # already monotone on J: keep the original breakpoints exactly
        slev = levels
        boundaries = bps[1:]
    else:
        order = np.argsort(levels, kind="stable")
        slev = levels[order]
        boundaries = np.minimum(dom.j1 + np.cumsum(lengths[order]), dom.j2)
        boundaries[-1] = dom.j2
    end_value = max(float(f(dom.j2)), float(slev[-1]))
    locs = np.concatenate(([dom.j1], boundaries))
    vals = np.concatenate((slev, [end_value]))
    # rounding in the summed boundaries can produce zero-length pieces; drop them
    keep = np.empty(locs.size, dtype=bool)
    keep[-1] = True
    keep[:-1] = np.diff(locs) > 0
    base = f.left_limit(dom.j1)
    out = StepFunction.from_values(locs[keep], vals[keep], base=base)
    return out.drop_null_atoms()


def clamp01(f: StepFunction) -> StepFunction:
    """Pointwise truncation of ``f`` to [0, 1].

    Functions already inside [0, 1] are returned unchanged (same object).
    """
    vals = f.values
    lo = float(vals.min()) if vals.size else f.base
    hi = float(vals.max()) if vals.size else f.base
    if 0.0 <= min(lo, f.base) and max(hi, f.base) <= 1.0:
        return f
    out = StepFunction.from_values(
        f.locations, np.clip(vals, 0.0, 1.0), base=min(max(f.base, 0.0), 1.0))
    return out.drop_null_atoms()


def rearranged_weights(h: StepFunction, dom: RearrangeDomain, ys) -> np.ndarray:
    """Nonnegative jump masses of the rearranged, [0, 1]-truncated estimate.

    ``h`` must jump only at points of the strictly increasing grid ``ys``
    and start at (or below) 0 left of the grid.  The level sequence of
    ``h`` at the grid points is clamped to [0, 1] and sorted; the returned
    weights are the increments of that sorted sequence, i.e. the jumps of
    the monotone rearrangement of ``clamp01(h)`` taken along the grid.
    Their sum equals the clamped total mass and never exceeds 1.
    """
    ys = np.asarray(ys, dtype=float).ravel()
    if ys.size == 0:
        return np.empty(0)
    if ys.size > 1 and not (np.diff(ys) > 0).all():
        raise ValueError("ys must be strictly increasing")
    inside = np.isin(h.locations, ys)
    if not inside.all():
        raise ValueError("h has jumps off the ys grid")
    levels = np.clip(np.asarray(h(ys), dtype=float), 0.0, 1.0)
    base = min(max(h.left_limit(ys[0]), 0.0), 1.0)
    if base > levels.min() + 1e-12:
        raise ValueError("h must start at or below its smallest level")
    if (np.diff(levels) >= 0).all():
        sorted_levels = levels
    else:
        sorted_levels = np.sort(levels)
    w = np.diff(np.concatenate(([base], sorted_levels)))
    return np.maximum(w, 0.0)
