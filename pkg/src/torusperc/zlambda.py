"""The excursion-length limit: W(t) = B(t) + lambda*t - t^2/2 on a grid.

The limit object is the descending list of lengths of excursions of W above
its running minimum. Paths are simulated on a plain Euler grid (Gaussian
increments of variance dt plus the deterministic drift increment); the
discretization bias shrinks like sqrt(dt) and is monitored by the
halving-stability check in the tests rather than hidden behind an unvalidated
exact scheme.

The horizon is adaptive: simulation continues until the path sits at its
running minimum at a time past max(2*lambda, 0) where the drift lambda - t
has fallen below -2, and then further until an analytic excursion-intensity
bound certifies that excursions longer than `tol` are unlikely beyond the
horizon. That bound is recorded in the output, never silently dropped.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import RangeError, TruncationError


@dataclass(frozen=True)
class ExcursionVector:
    """Descending excursion lengths of one sampled path."""

    lam: float
    dt: float
    horizon: float
    lengths: np.ndarray
    truncation_mass_bound: float

    def l2_norm(self):
        return float(np.sqrt(np.sum(self.lengths**2)))


def sample_path(lam, dt, T, seed, noise=1.0):
    """W on the grid {0, dt, ..., ~T}: Brownian motion plus lambda*t - t^2/2.

    noise=0 gives the deterministic drift path (debug mode). Returns
    (times, values); values[0] = 0.
    """
    if dt <= 0:
        raise RangeError(f"dt must be positive, got {dt}")
    if T < dt:
        raise RangeError(f"horizon {T} shorter than one step {dt}")
    steps = int(np.ceil(T / dt))
    t = np.arange(steps + 1, dtype=np.float64) * dt
    drift = lam * t - 0.5 * t**2
    w = drift.copy()
    if noise != 0.0:
        gen = rng.generator(seed, 5)
        incs = gen.normal(0.0, np.sqrt(dt), size=steps) * noise
        w[1:] += np.cumsum(incs)
    return t, w


def excursion_lengths(path_values, dt=1.0):
    """Descending lengths of maximal excursions above the running minimum.

    The reflected process R = W - cummin(W) is nonnegative; each maximal run
    of R > 0 is an excursion, whose length spans from the last grid point at
    the minimum before the run to the first return (or the end of the path if
    the final excursion is still open).
    """
    w = np.asarray(path_values, dtype=np.float64)
    if w.size == 0:
        return np.array([])
    if w[0] != 0.0:
        raise RangeError("path must start at 0")
    r = w - np.minimum.accumulate(w)
    pos = r > 0.0
    if not pos.any():
        return np.array([])
    # boundaries of maximal positive runs
    padded = np.concatenate([[False], pos, [False]])
    flips = np.flatnonzero(padded[1:] != padded[:-1])
    starts, ends = flips[0::2], flips[1::2]
    # run over grid indices [start, end); excursion spans (start-1, end)
    lengths = (ends - (starts - 1)).astype(np.float64)
    open_at_end = pos[-1]
    if open_at_end:
        lengths[-1] -= 1.0  # no closing return; span ends at the last point
    return np.sort(lengths)[::-1] * dt


def _intensity_bound(mu, ell):
    """Analytic envelope on excursions of length >= ell against drift <= -mu.

    An excursion of length ell requires the driving Brownian motion to beat a
    slope-mu line over an interval of length ell; integrating the Gaussian
    tail exp(-mu^2 ell / 2) against the growing drift magnitude gives an
    envelope of the form exp(-x)/x with x = mu^2 ell / 2.
    """
    x = 0.5 * mu * mu * ell
    if x <= 0:
        return np.inf
    return float(np.exp(-x) / x)


def sample_zlambda(lam, dt, seed, tol=0.05, max_horizon=None, noise=1.0):
    """Sample the descending excursion-length vector for drift lambda - t.

    The horizon extends in chunks until the path has returned to its running
    minimum after time max(2*lambda, 0) with drift <= -2, and the intensity
    bound for excursions of length >= tol has dropped below tol. The bound at
    the accepted horizon is recorded as truncation_mass_bound. Raises
    TruncationError (carrying partial data) if max_horizon is hit first.
    """
    if tol <= 0:
        raise RangeError(f"tol must be positive, got {tol}")
    if dt <= 0:
        raise RangeError(f"dt must be positive, got {dt}")
    if max_horizon is None:
        max_horizon = max(4.0 * abs(lam), 8.0) + 256.0
    t_req = max(2.0 * lam, 0.0, lam + 2.0)
    gen = rng.generator(seed, 5)
    chunk = max(int(np.ceil(max(t_req, 1.0) / dt)), 1024)
    values = [np.zeros(1)]
    total_steps = 0
    run_min = 0.0
    last = 0.0
    sqrt_dt = np.sqrt(dt)
    accepted_T = None
    bound = np.inf
    while True:
        t0 = total_steps * dt
        incs = lam * dt - 0.5 * (2.0 * t0 + (2.0 * np.arange(chunk) + 1.0) * dt) * dt
        if noise != 0.0:
            incs = incs + gen.normal(0.0, sqrt_dt, size=chunk) * noise
        w = last + np.cumsum(incs)
        values.append(w)
        total_steps += chunk
        last = float(w[-1])
        # candidate stopping points: at the running minimum, past t_req,
        # with the intensity bound below tol
        chunk_t = (np.arange(total_steps - chunk, total_steps) + 1) * dt
        new_min = np.minimum.accumulate(np.minimum(w, run_min))
        at_min = (w <= new_min) & (chunk_t >= t_req)
        if at_min.any():
            idx = np.flatnonzero(at_min)
            mus = chunk_t[idx] - lam
            bounds = np.array([_intensity_bound(mu, tol) for mu in mus])
            ok = bounds <= tol
            if ok.any():
                j = idx[np.argmax(ok)]
                accepted_T = float(chunk_t[j])
                bound = float(bounds[np.argmax(ok)])
                cut = total_steps - chunk + j + 1
                path = np.concatenate(values)[: cut + 1]
                break
        run_min = float(new_min[-1])
        if total_steps * dt >= max_horizon:
            path = np.concatenate(values)
            partial = excursion_lengths(path, dt)
            raise TruncationError(
                f"horizon cap {max_horizon} reached before settling",
                partial=partial,
            )
    lengths = excursion_lengths(path, dt)
    return ExcursionVector(
        lam=float(lam), dt=float(dt), horizon=accepted_T,
        lengths=lengths, truncation_mass_bound=bound,
    )


def l2_distance(a, b):
    """Euclidean distance of two descending vectors after zero-padding."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = max(a.size, b.size)
    pa = np.zeros(n)
    pa[: a.size] = a
    pb = np.zeros(n)
    pb[: b.size] = b
    return float(np.linalg.norm(pa - pb))
