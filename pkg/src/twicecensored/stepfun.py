"""Exact algebra on right-continuous step functions.

Every (sub)distribution, hazard and reverse-hazard estimate in this package
is a finite right-continuous step function.  This module is the common
carrier for all of them: evaluation with left limits, atomic increments,
guarded measure ratios and the forward/backward product-limit transforms.
All arithmetic operates on sorted atom lists, never on value grids, so the
product-limit identities hold to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MassOutOfRange, NonzeroOverZero

#: atom masses within this distance of 0 or 1 are treated as rounding noise
MASS_TOL = 1e-12


def _atom_arrays(locations, masses):
    locs = np.asarray(locations, dtype=float).ravel()
    mass = np.asarray(masses, dtype=float).ravel()
    if locs.shape != mass.shape:
        raise ValueError("locations and masses must have equal length")
    if locs.size and not np.isfinite(locs).all():
        raise ValueError("atom locations must be finite")
    if locs.size > 1 and not (np.diff(locs) > 0).all():
        raise ValueError("atom locations must be strictly increasing")
    return locs, mass


def _merge_ties(locations, masses):
    locs = np.asarray(locations, dtype=float).ravel()
    mass = np.asarray(masses, dtype=float).ravel()
    order = np.argsort(locs, kind="stable")
    locs, mass = locs[order], mass[order]
    if locs.size > 1 and (np.diff(locs) == 0).any():
        uniq, inverse = np.unique(locs, return_inverse=True)
        summed = np.zeros(uniq.size)
        np.add.at(summed, inverse, mass)
        return uniq, summed
    return locs, mass


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Finite atomic measure: masses at strictly increasing locations."""

    locations: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        locs, mass = _atom_arrays(self.locations, self.masses)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "masses", mass)

    @classmethod
    def from_atoms(cls, locations, masses):
        """Build a measure from possibly unsorted atoms; equal locations are
        merged by summing their masses."""
        return cls(*_merge_ties(locations, masses))

    @property
    def n_atoms(self):
        return self.locations.size

    def total(self):
        return float(self.masses.sum())


@dataclass(frozen=True, eq=False)
class StepFunction:
    """``f(t) = base + sum of masses at jump locations <= t``.

    Right continuous by construction; ``left_limit`` excludes the atom at
    the evaluation point.
    """

    locations: np.ndarray
    masses: np.ndarray
    base: float = 0.0

    def __post_init__(self):
        locs, mass = _atom_arrays(self.locations, self.masses)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "masses", mass)
        object.__setattr__(self, "base", float(self.base))
        vals = np.empty(mass.size + 1)
        vals[0] = self.base
        np.cumsum(mass, out=vals[1:])
        vals[1:] += self.base
        object.__setattr__(self, "_padded_values", vals)

    @classmethod
    def from_atoms(cls, locations, masses, base=0.0):
        return cls(*_merge_ties(locations, masses), base=base)

    @classmethod
    def from_values(cls, locations, values, base=0.0):
        """Step function taking ``values[i]`` on ``[locations[i], locations[i+1])``."""
        values = np.asarray(values, dtype=float).ravel()
        masses = np.diff(np.concatenate(([base], values)))
        return cls(locations, masses, base=base)

    @classmethod
    def constant(cls, value):
        return cls(np.empty(0), np.empty(0), base=float(value))

    @property
    def values(self):
        """Function values at the jump locations."""
        return self._padded_values[1:]

    def __call__(self, t):
        idx = np.searchsorted(self.locations, t, side="right")
        out = self._padded_values[idx]
        return float(out) if np.isscalar(t) else out

    def left_limit(self, t):
        idx = np.searchsorted(self.locations, t, side="left")
        out = self._padded_values[idx]
        return float(out) if np.isscalar(t) else out

    def sup(self):
        """Largest attained value."""
        if self.locations.size == 0:
            return self.base
        return float(max(self.base, self.values.max()))

    def is_nondecreasing(self, tol=0.0):
        return bool((self.masses >= -tol).all())

    def drop_null_atoms(self):
        """Remove atoms with exactly zero mass."""
        keep = self.masses != 0.0
        if keep.all():
            return self
        return StepFunction(self.locations[keep], self.masses[keep], self.base)

    def _binary(self, other, sign):
        if isinstance(other, StepFunction):
            locs = np.union1d(self.locations, other.locations)
            vals = self(locs) + sign * other(locs)
            base = self.base + sign * other.base
            return StepFunction.from_values(locs, vals, base=base)
        other = float(other)
        return StepFunction(self.locations, self.masses, self.base + sign * other)

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)


def increments(f: StepFunction) -> SignedMeasure:
    """The atomic increment measure df of a step function."""
    return SignedMeasure(f.locations, f.masses)


def ratio_measure(num: SignedMeasure, denom: StepFunction, mode: str = "at-point") -> SignedMeasure:
    """Atomwise ratio ``num({t}) / denom(t)`` under the convention 0/0 = 0.

    ``mode`` selects the denominator evaluation: ``"at-point"`` uses
    ``denom(t)`` and ``"left-limit"`` uses ``denom(t-)``.  An atom with
    nonzero mass over a zero denominator raises :class:`NonzeroOverZero`.
    """
    if mode == "at-point":
        den = denom(num.locations)
    elif mode == "left-limit":
        den = denom.left_limit(num.locations)
    else:
        raise ValueError("mode must be 'at-point' or 'left-limit'")
    out = np.zeros(num.n_atoms)
    nz = num.masses != 0.0
    if nz.any():
        if (den[nz] == 0.0).any():
            t = num.locations[nz][den[nz] == 0.0][0]
            raise NonzeroOverZero(
                "nonzero mass over zero denominator at t=%r" % t)
        out[nz] = num.masses[nz] / den[nz]
    return SignedMeasure(num.locations, out)


def _checked_masses(m: SignedMeasure):
    mm = m.masses
    bad = (mm < -MASS_TOL) | (mm > 1.0 + MASS_TOL)
    if bad.any():
        raise MassOutOfRange(
            "product-limit atom mass %r at t=%r outside [0, 1]"
            % (mm[bad][0], m.locations[bad][0]))
    return np.clip(mm, 0.0, 1.0)


def product_limit(m: SignedMeasure, direction: str = "forward") -> StepFunction:
    """Discrete product integral ``prod (1 - m({s}))`` of an atomic measure.

    ``"forward"`` returns ``S(t) = prod_{s <= t} (1 - m({s}))``, the
    survival-type nonincreasing function started at 1.  ``"reverse"``
    returns ``P(t) = prod_{s > t} (1 - m({s}))``, nondecreasing and equal
    to 1 above the last atom.  All atom masses must lie in [0, 1] (within
    tolerance), otherwise :class:`MassOutOfRange` is raised.
    """
    mm = _checked_masses(m)
    if direction == "forward":
        vals = np.cumprod(1.0 - mm)
        return StepFunction.from_values(m.locations, vals, base=1.0)
    if direction == "reverse":
        incl = np.cumprod((1.0 - mm)[::-1])[::-1]  # prod over s >= t_i
        vals = np.empty(mm.size)
        if mm.size:
            vals[:-1] = incl[1:]
            vals[-1] = 1.0
            base = incl[0]
        else:
            base = 1.0
        return StepFunction.from_values(m.locations, vals, base=base)
    raise ValueError("direction must be 'forward' or 'reverse'")
