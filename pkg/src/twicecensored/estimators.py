"""Conditional distribution and quantile estimation under twice censoring.

Observed data are triples ``(y, x, delta)`` with ``y = max(min(T, R), L)``
for a lifetime ``T``, a right-censoring time ``R`` and a left-censoring
time ``L``; ``delta`` records which of the three was observed (0 the
lifetime, 1 the right-censoring time, 2 the left-censoring time).  The
lifetime distribution is reconstructed in two steps: the left-censoring
distribution from the reverse hazard of the ``delta = 2`` subdistribution,
then the lifetime hazard from the ``delta = 0`` subdistribution, each
turned into a distribution by a product limit.

Two quantile estimators are provided.  The plugin estimator inverts the
raw reconstruction through the isotonizing inversion ``psi_tilde``; the
rearranged ("ip") estimator first monotonizes the cumulative weight
function by sorting its clamped level sequence, then inverts the resulting
increasing distribution estimate directly.  With nonnegative weights the
two pipelines coincide bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import LemmaViolation, MassOutOfRange, NonzeroOverZero
from .rearrange import RearrangeDomain, psi_tilde
from .smoothing import KernelSpec, WeightVector, ll_weights, nw_weights
from .stepfun import SignedMeasure, StepFunction

#: processing order of censoring classes at tied observation times:
#: left-censoring mass (2) first, then events (0), then right censoring (1)
_TIE_RANK = np.array([1, 2, 0], dtype=np.int64)

_VALID_DELTAS = frozenset((0, 1, 2))


@dataclass(frozen=True)
class Observation:
    """One observed triple from the twice-censored model."""

    y: float
    x: tuple
    delta: int


class Sample:
    """Columnar container for twice-censored observations."""

    def __init__(self, y, x, delta):
        y = np.asarray(y, dtype=float).ravel()
        x = np.asarray(x, dtype=float)
        delta = np.asarray(delta)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] != y.size:
            raise ValueError("covariates must be (n,) or (n, d) aligned with y")
        if delta.dtype.kind == "f" and not np.array_equal(delta, np.round(delta)):
            raise ValueError("delta must be integer valued")
        delta = delta.astype(np.int64).ravel()
        if delta.size != y.size:
            raise ValueError("delta must be aligned with y")
        if y.size and not np.isfinite(y).all():
            raise ValueError("observed times must be finite")
        if not np.isin(delta, (0, 1, 2)).all():
            raise ValueError("delta values must lie in {0, 1, 2}")
        self.y = y
        self.x_mat = x
        self.delta = delta
        self._tie_order = None
        self._has_tied_atoms = None

    def __len__(self):
        return self.y.size

    @property
    def n(self):
        return self.y.size

    @property
    def d(self):
        return self.x_mat.shape[1]

    @property
    def x(self):
        """Covariates, as a vector when one-dimensional."""
        return self.x_mat[:, 0] if self.d == 1 else self.x_mat

    @property
    def tie_order(self):
        """Permutation sorting observations by (y, class rank 2 < 0 < 1)."""
        if self._tie_order is None:
            self._tie_order = np.lexsort((_TIE_RANK[self.delta], self.y))
            ys = self.y[self._tie_order]
            ds = self.delta[self._tie_order]
            self._has_tied_atoms = bool(
                ((np.diff(ys) == 0) & (np.diff(ds) == 0)).any())
        return self._tie_order

    def domain(self) -> RearrangeDomain:
        """Inversion interval [min y, max y] over the full sample."""
        return RearrangeDomain.from_times(self.y)

    def drop(self, index) -> "Sample":
        """Copy of the sample without the given observation (leave-one-out)."""
        keep = np.ones(self.n, dtype=bool)
        keep[index] = False
        return Sample(self.y[keep], self.x_mat[keep], self.delta[keep])

    def __iter__(self):
        for i in range(self.n):
            yield Observation(float(self.y[i]), tuple(self.x_mat[i]), int(self.delta[i]))


@dataclass(frozen=True, eq=False)
class SubdistSet:
    """Weighted subdistribution estimates, one per censoring class.

    ``H`` is the cumulative weight function of all observations and equals
    ``H0 + H1 + H2`` pointwise; all four jump at observation times only.
    """

    H: StepFunction
    H0: StepFunction
    H1: StepFunction
    H2: StepFunction
    domain: RearrangeDomain
    last_weighted: float | None = None


@dataclass(frozen=True, eq=False)
class DistributionEstimate:
    """Estimated conditional lifetime distribution plus inversion metadata."""

    cdf: StepFunction
    domain: RearrangeDomain
    sup_value: float
    variant: str                      # "plugin" | "ip"
    tail_policy: str = "undefined"    # "undefined" | "force-one"
    hazard: SignedMeasure | None = None
    last_weighted: float | None = None


@dataclass(frozen=True)
class QuantileResult:
    """A quantile value, or None when the estimate is undefined at tau."""

    value: float | None
    tau: float

    @property
    def defined(self):
        return self.value is not None


def _weights_array(weights, n):
    w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    if w.size != n:
        raise ValueError("weights not aligned with sample (%d vs %d)" % (w.size, n))
    return w


def _pseudo_atoms(sample: Sample, weights):
    """Weighted atoms in processing order.

    Observations are sorted by (y, class rank), zero-weight entries are
    dropped and entries with identical (y, delta) are merged by summing
    their weights.  Atoms sharing a time but differing in class stay
    distinct and are consumed sequentially by the scans.
    """
    w = _weights_array(weights, sample.n)
    order = sample.tie_order
    ys = sample.y[order]
    ds = sample.delta[order]
    ws = w[order]
    if sample._has_tied_atoms:
        group = np.empty(ys.size, dtype=bool)
        if ys.size:
            group[0] = True
            group[1:] = (np.diff(ys) != 0) | (np.diff(ds) != 0)
        starts = np.flatnonzero(group)
        ws = np.add.reduceat(ws, starts) if starts.size else ws
        ys = ys[group]
        ds = ds[group]
    keep = ws != 0.0
    if not keep.all():
        ys, ds, ws = ys[keep], ds[keep], ws[keep]
    return ys, ds, ws


def _merged_step(ys, vals, base):
    """Step function with the value after the last atom at each location."""
    if ys.size == 0:
        return StepFunction.constant(base)
    last = np.empty(ys.size, dtype=bool)
    last[-1] = True
    last[:-1] = np.diff(ys) != 0
    return StepFunction.from_values(ys[last], vals[last], base=base).drop_null_atoms()


def subdist(sample: Sample, weights) -> SubdistSet:
    """Weighted subdistribution functions H and H_k, k = 0, 1, 2."""
    ys, ds, ws = _pseudo_atoms(sample, weights)
    parts = {}
    for k in (0, 1, 2):
        mask = ds == k
        parts[k] = StepFunction.from_atoms(ys[mask], ws[mask])
    return SubdistSet(
        H=StepFunction.from_atoms(ys, ws),
        H0=parts[0], H1=parts[1], H2=parts[2],
        domain=sample.domain(),
        last_weighted=float(ys[-1]) if ys.size else None,
    )


def _pseudo_from_subdist(s: SubdistSet):
    """Reconstruct the processing-order atoms of a subdistribution set."""
    locs = np.concatenate((s.H2.locations, s.H0.locations, s.H1.locations))
    ds = np.concatenate((
        np.full(s.H2.locations.size, 2, dtype=np.int64),
        np.full(s.H0.locations.size, 0, dtype=np.int64),
        np.full(s.H1.locations.size, 1, dtype=np.int64),
    ))
    ws = np.concatenate((s.H2.masses, s.H0.masses, s.H1.masses))
    order = np.lexsort((_TIE_RANK[ds], locs))
    return locs[order], ds[order], ws[order]


def _raise_for_status(status, bad, ys, variant):
    if status == _accel.STATUS_OK:
        return
    t = float(ys[bad]) if 0 <= bad < ys.size else float("nan")
    if status in (_accel.STATUS_M2_NONZERO_OVER_ZERO, _accel.STATUS_HAZ_NONZERO_OVER_ZERO):
        raise NonzeroOverZero("nonzero mass over zero denominator at t=%r" % t)
    if variant == "ip":
        raise LemmaViolation(
            "rearranged hazard atom outside [0, 1] at t=%r" % t)
    raise MassOutOfRange("hazard atom outside [0, 1] at t=%r" % t)


def _scan(ys, ds, ws, variant):
    m2, fl_at, fl_left, lam, ft, status, bad = _accel.core_scan(
        ds, ws, _accel.MASS_TOL, _accel.HAZARD_TOL)
    _raise_for_status(status, bad, ys, variant)
    return m2, fl_at, fl_left, lam, ft


def estimate_FL(s: SubdistSet) -> StepFunction:
    """Left-censoring distribution by the backward product limit of the
    reverse hazard ``dH2 / H``; identically 1 when no class-2 mass exists."""
    ys, ds, ws = _pseudo_from_subdist(s)
    _, fl_at, fl_left, _, _ = _scan(ys, ds, ws, "plugin")
    base = float(fl_left[0]) if ys.size else 1.0
    return _merged_step(ys, fl_at, base)


def _build_estimate(ys, ds, lam, ft, domain, variant, tail_policy):
    cdf = _merged_step(ys, ft, 0.0)
    haz_mask = (ds == 0) & (lam != 0.0)
    hazard = SignedMeasure(ys[haz_mask], lam[haz_mask])
    return DistributionEstimate(
        cdf=cdf,
        domain=domain,
        sup_value=cdf.sup(),
        variant=variant,
        tail_policy=tail_policy,
        hazard=hazard,
        last_weighted=float(ys[-1]) if ys.size else None,
    )


def estimate_FT(s: SubdistSet, FL: StepFunction | None = None,
                tail_policy: str = "undefined") -> DistributionEstimate:
    """Plugin lifetime distribution estimate.

    The hazard atom at an uncensored time t is ``dH0(t)`` over
    ``FL(t-) - H(t-)`` (convention 0/0 = 0); the distribution is one minus
    its forward product limit.  It vanishes below the first uncensored atom
    with nonzero weight and is constant at and above the last one.  ``FL``
    defaults to :func:`estimate_FL` of the same subdistribution set; pass
    an explicit step function to override (tie-free data assumed then).
    """
    _check_policy(tail_policy)
    ys, ds, ws = _pseudo_from_subdist(s)
    if FL is None:
        _, _, _, lam, ft = _scan(ys, ds, ws, "plugin")
    else:
        hat = np.cumsum(ws)
        hleft = np.empty(ys.size)
        if ys.size:
            hleft[0] = 0.0
            hleft[1:] = hat[:-1]
        lam = np.zeros(ys.size)
        mask = (ds == 0) & (ws != 0.0)
        den = FL.left_limit(ys[mask]) - hleft[mask]
        if (den == 0.0).any():
            t = ys[mask][den == 0.0][0]
            raise NonzeroOverZero("nonzero mass over zero denominator at t=%r" % t)
        vals = ws[mask] / den
        out = (vals < -_accel.HAZARD_TOL) | (vals > 1.0 + _accel.HAZARD_TOL)
        if out.any():
            raise MassOutOfRange(
                "hazard atom outside [0, 1] at t=%r" % ys[mask][out][0])
        lam[mask] = np.clip(vals, 0.0, 1.0)
        ft = 1.0 - np.cumprod(1.0 - lam)
    return _build_estimate(ys, ds, lam, ft, s.domain, "plugin", tail_policy)


def estimate_FT_ip(sample: Sample, weights, domain: RearrangeDomain | None = None,
                   tail_policy: str = "undefined") -> DistributionEstimate:
    """Rearranged lifetime distribution estimate.

    The cumulative weight function is truncated to [0, 1] and monotonized
    by sorting its level sequence along the observation grid; the sorted
    increments replace the raw weights in the reconstruction.  Every
    resulting hazard atom is guaranteed to lie in [0, 1]; a violation
    beyond 1e-10 raises :class:`LemmaViolation`.  With nonnegative weights
    the rearrangement is the identity and the result coincides exactly
    with :func:`estimate_FT`.
    """
    _check_policy(tail_policy)
    ys, ds, ws = _pseudo_atoms(sample, weights)
    wip = _accel.rearranged_masses(ws)
    _, _, _, lam, ft = _scan(ys, ds, wip, "ip")
    dom = domain if domain is not None else sample.domain()
    return _build_estimate(ys, ds, lam, ft, dom, "ip", tail_policy)


def _check_policy(tail_policy):
    if tail_policy not in ("undefined", "force-one"):
        raise ValueError("tail_policy must be 'undefined' or 'force-one'")


def _check_tau(tau):
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise ValueError("quantile level must lie in (0, 1)")
    return tau


def _effective_cdf(est: DistributionEstimate):
    """The cdf actually inverted, honouring the tail policy."""
    if (est.tail_policy == "force-one" and est.last_weighted is not None
            and est.sup_value < 1.0):
        t = est.last_weighted
        keep = est.cdf.locations < t
        locs = np.concatenate((est.cdf.locations[keep], [t]))
        jump = 1.0 - est.cdf.left_limit(t)
        masses = np.concatenate((est.cdf.masses[keep], [jump]))
        return StepFunction(locs, masses, base=est.cdf.base), 1.0
    return est.cdf, est.sup_value


def quantile_psi(est: DistributionEstimate, tau) -> QuantileResult:
    """Quantile by isotonizing inversion of the (plugin) estimate.

    Returns an undefined result when the largest attained cdf value stays
    strictly below tau under the ``undefined`` tail policy; under
    ``force-one`` the cdf is set to 1 at the last nonzero-weight
    observation before inverting.
    """
    tau = _check_tau(tau)
    cdf, sup = _effective_cdf(est)
    if est.tail_policy == "undefined" and sup < tau:
        return QuantileResult(None, tau)
    return QuantileResult(float(psi_tilde(cdf, est.domain, tau)), tau)


def quantile_ip(est: DistributionEstimate, tau) -> QuantileResult:
    """Quantile by right-continuous generalized inverse of the increasing
    (rearranged) estimate, restricted to the inversion interval."""
    tau = _check_tau(tau)
    cdf, sup = _effective_cdf(est)
    if est.tail_policy == "undefined" and sup < tau:
        return QuantileResult(None, tau)
    vals = cdf.values
    k = int(np.searchsorted(vals, tau, side="right"))
    if k >= cdf.locations.size:
        value = est.domain.j2
    else:
        value = min(max(float(cdf.locations[k]), est.domain.j1), est.domain.j2)
    return QuantileResult(float(value), tau)


def fit_conditional_cdf(sample: Sample, x, bandwidth,
                        weight_family: str = "nw", estimator: str = "ip",
                        kernel: KernelSpec = KernelSpec(),
                        tail_policy: str = "undefined") -> DistributionEstimate:
    """Kernel-localised lifetime distribution estimate at covariate ``x``."""
    if weight_family == "nw":
        w = nw_weights(x, sample.x_mat, bandwidth, kernel)
    elif weight_family == "ll":
        w = ll_weights(x, sample.x_mat, bandwidth, kernel)
    else:
        raise ValueError("weight_family must be 'nw' or 'll'")
    if estimator == "ip":
        return estimate_FT_ip(sample, w, tail_policy=tail_policy)
    if estimator == "psi":
        return estimate_FT(subdist(sample, w), tail_policy=tail_policy)
    raise ValueError("estimator must be 'ip' or 'psi'")


def conditional_quantiles(sample: Sample, x, bandwidth, taus,
                          weight_family: str = "nw", estimator: str = "ip",
                          kernel: KernelSpec = KernelSpec(),
                          tail_policy: str = "undefined") -> np.ndarray:
    """Conditional quantile curve values at ``x``; NaN where undefined."""
    est = fit_conditional_cdf(sample, x, bandwidth, weight_family, estimator,
                              kernel, tail_policy)
    invert = quantile_ip if estimator == "ip" else quantile_psi
    out = np.full(len(np.atleast_1d(taus)), np.nan)
    for i, tau in enumerate(np.atleast_1d(taus)):
        q = invert(est, tau)
        if q.defined:
            out[i] = q.value
    return out
