"""Hot numeric scans with a numba fast path and a pure-numpy fallback.

The estimation pipeline reduces to a handful of sequential scans over the
(time-ordered) atoms of a weighted sample: cumulative sums, guarded ratio
measures and forward/backward partial products.  Those scans are compiled
with ``numba.njit`` when numba is importable; setting the environment
variable ``TWICECENSORED_NO_NUMBA=1`` (before import) forces the vectorised
numpy implementations instead.  Both implementations perform the identical
floating-point operations in the identical order, so results agree bitwise;
``python -m twicecensored.benchmark`` times and cross-checks the two.

Error conditions are reported as integer status codes (numba cannot raise
rich exceptions cheaply); callers translate them:

======  =====================================================
status  meaning
======  =====================================================
0       ok
1       reverse-hazard atom with nonzero mass over zero denominator
2       reverse-hazard atom outside [0, 1] beyond tolerance
3       hazard atom with nonzero mass over zero denominator
4       hazard atom outside [0, 1] beyond tolerance
======  =====================================================
"""

import os

import numpy as np

#: tolerance below/above which product-limit atom masses are snapped to [0, 1]
MASS_TOL = 1e-12
#: tolerance for the hazard-atom range checks (plugin check and the
#: rearranged-pipeline jump-size guarantee)
HAZARD_TOL = 1e-10

_env = os.environ.get("TWICECENSORED_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _env in {"1", "true", "yes", "on"}

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by TWICECENSORED_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # no-op decorator stand-in
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


STATUS_OK = 0
STATUS_M2_NONZERO_OVER_ZERO = 1
STATUS_M2_OUT_OF_RANGE = 2
STATUS_HAZ_NONZERO_OVER_ZERO = 3
STATUS_HAZ_OUT_OF_RANGE = 4


# ---------------------------------------------------------------------------
# loop implementations (numba targets)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _core_scan_loop(delta, w, m2_tol, haz_tol):
    n = w.size
    m2 = np.zeros(n)
    fl_at = np.empty(n)
    fl_left = np.empty(n)
    lam = np.zeros(n)
    ft = np.empty(n)
    status = STATUS_OK
    bad = -1

    # cumulative subdistribution H at/before each atom
    hat = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc += w[i]
        hat[i] = acc

    # reverse-hazard atoms dH2 / H(s), convention 0/0 = 0
    for i in range(n):
        if delta[i] == 2 and w[i] != 0.0:
            if hat[i] == 0.0:
                return m2, fl_at, fl_left, lam, ft, STATUS_M2_NONZERO_OVER_ZERO, i
            v = w[i] / hat[i]
            if v < -m2_tol or v > 1.0 + m2_tol:
                return m2, fl_at, fl_left, lam, ft, STATUS_M2_OUT_OF_RANGE, i
            if v < 0.0:
                v = 0.0
            elif v > 1.0:
                v = 1.0
            m2[i] = v

    # left-censoring distribution by backward product limit
    acc = 1.0
    for i in range(n - 1, -1, -1):
        fl_at[i] = acc
        acc *= 1.0 - m2[i]
        fl_left[i] = acc

    # lifetime hazard atoms dH0 / (FL(s-) - H(s-)), then forward product limit
    acc = 1.0
    hleft = 0.0
    for i in range(n):
        if delta[i] == 0 and w[i] != 0.0:
            den = fl_left[i] - hleft
            if den == 0.0:
                return m2, fl_at, fl_left, lam, ft, STATUS_HAZ_NONZERO_OVER_ZERO, i
            v = w[i] / den
            if v < -haz_tol or v > 1.0 + haz_tol:
                return m2, fl_at, fl_left, lam, ft, STATUS_HAZ_OUT_OF_RANGE, i
            if v < 0.0:
                v = 0.0
            elif v > 1.0:
                v = 1.0
            lam[i] = v
        acc *= 1.0 - lam[i]
        ft[i] = 1.0 - acc
        hleft = hat[i]

    return m2, fl_at, fl_left, lam, ft, status, bad


@njit(cache=True)
def _rearranged_masses_loop(w):
    n = w.size
    out = np.empty(n)
    nonneg = True
    for i in range(n):
        if w[i] < 0.0:
            nonneg = False
            break
    if nonneg:
        # already-monotone levels: rearrangement is the identity, keep the
        # original masses bit-for-bit
        for i in range(n):
            out[i] = w[i]
        return out
    lev = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc += w[i]
        v = acc
        if v < 0.0:
            v = 0.0
        elif v > 1.0:
            v = 1.0
        lev[i] = v
    slev = np.sort(lev)
    prev = 0.0
    for i in range(n):
        out[i] = slev[i] - prev
        prev = slev[i]
    return out


# ---------------------------------------------------------------------------
# vectorised numpy implementations
# ---------------------------------------------------------------------------

def _core_scan_numpy(delta, w, m2_tol, haz_tol):
    n = w.size
    m2 = np.zeros(n)
    lam = np.zeros(n)
    ones = np.ones(n)
    hat = np.cumsum(w)
    hleft = np.empty(n)
    if n:
        hleft[0] = 0.0
        hleft[1:] = hat[:-1]

    def _fail(code, bad):
        return m2, ones, ones, lam, ones, code, int(bad)

    m2_mask = (delta == 2) & (w != 0.0)
    if m2_mask.any():
        den = hat[m2_mask]
        if (den == 0.0).any():
            return _fail(STATUS_M2_NONZERO_OVER_ZERO,
                         np.flatnonzero(m2_mask)[np.argmax(den == 0.0)])
        vals = w[m2_mask] / den
        out = (vals < -m2_tol) | (vals > 1.0 + m2_tol)
        if out.any():
            return _fail(STATUS_M2_OUT_OF_RANGE,
                         np.flatnonzero(m2_mask)[np.argmax(out)])
        m2[m2_mask] = np.clip(vals, 0.0, 1.0)

    fl_left = np.cumprod((1.0 - m2)[::-1])[::-1]
    fl_at = np.empty(n)
    if n:
        fl_at[:-1] = fl_left[1:]
        fl_at[-1] = 1.0

    haz_mask = (delta == 0) & (w != 0.0)
    if haz_mask.any():
        den = fl_left[haz_mask] - hleft[haz_mask]
        if (den == 0.0).any():
            return _fail(STATUS_HAZ_NONZERO_OVER_ZERO,
                         np.flatnonzero(haz_mask)[np.argmax(den == 0.0)])
        vals = w[haz_mask] / den
        out = (vals < -haz_tol) | (vals > 1.0 + haz_tol)
        if out.any():
            return _fail(STATUS_HAZ_OUT_OF_RANGE,
                         np.flatnonzero(haz_mask)[np.argmax(out)])
        lam[haz_mask] = np.clip(vals, 0.0, 1.0)

    ft = 1.0 - np.cumprod(1.0 - lam)
    return m2, fl_at, fl_left, lam, ft, STATUS_OK, -1


def _rearranged_masses_numpy(w):
    if not (w < 0.0).any():
        return w.copy()
    lev = np.clip(np.cumsum(w), 0.0, 1.0)
    slev = np.sort(lev)
    out = np.empty_like(slev)
    out[0] = slev[0]
    out[1:] = slev[1:] - slev[:-1]
    return out


# ---------------------------------------------------------------------------
# backend binding
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    BACKEND = "numba"
    core_scan = _core_scan_loop
    rearranged_masses = _rearranged_masses_loop
else:
    BACKEND = "numpy"
    core_scan = _core_scan_numpy
    rearranged_masses = _rearranged_masses_numpy


def warm_up():
    """Trigger jit compilation (no-op on the numpy backend)."""
    d = np.array([2, 0, 1], dtype=np.int64)
    w = np.array([0.2, 0.5, 0.3])
    core_scan(d, w, MASS_TOL, HAZARD_TOL)
    rearranged_masses(np.array([0.6, -0.1, 0.5]))
