"""Pure-NumPy implementations of the hot loops.

These define the reference semantics; ``_core.pyx`` must agree with them to
rounding.  See ``_backend`` for selection.
"""
import numpy as np

CONVERGED = 0
MAX_ITERATIONS = 1
NONPOSITIVE = 2
NONFINITE = 3

# consecutive sign-alternating steps before damping kicks in
OSCILLATION_WINDOW = 3
FALLBACK_DAMPING = 0.5


def lowrank_extremes(left, right):
    """Min and max of ``sum_r left[r, i] * right[r, j]`` over all (i, j).

    Returns ``(vmin, vmax, imin, jmin, imax, jmax)``.
    """
    left = np.ascontiguousarray(left, dtype=float)
    right = np.ascontiguousarray(right, dtype=float)
    vals = left.T @ right
    imin, jmin = np.unravel_index(np.argmin(vals), vals.shape)
    imax, jmax = np.unravel_index(np.argmax(vals), vals.shape)
    return float(vals[imin, jmin]), float(vals[imax, jmax]), int(imin), int(jmin), int(imax), int(jmax)


def _apply_a(kw, zw, f, k):
    wf = kw @ f
    z = float(zw @ f)
    if not np.isfinite(z) or not np.all(np.isfinite(wf)):
        return None, NONFINITE
    if z <= 0.0 or np.any(wf <= 0.0):
        return None, NONPOSITIVE
    return (wf / z) ** k, CONVERGED


def iterate_composed(kw, zw, f0, k, theta, tol, max_iter, blowup):
    """Damped iteration of f -> A_k(A_k f) on weighted Nystrom data.

    ``kw[i, j] = K(t_i, u_j) w_j`` and ``zw[j] = K(0, u_j) w_j``.  Stops when
    the sup-distance between successive iterates is at most
    ``tol * max(1, sup|f|)``.

    Returns ``(f, g, iterations, status, theta_used, last_diff)`` where
    ``g = A_k f`` when converged.
    """
    kw = np.ascontiguousarray(kw, dtype=float)
    zw = np.ascontiguousarray(zw, dtype=float)
    f = np.array(f0, dtype=float)
    th = float(theta)
    prev = None
    streak = 0
    d = np.inf
    for it in range(1, int(max_iter) + 1):
        g, status = _apply_a(kw, zw, f, k)
        if g is None:
            return f, None, it, status, th, d
        h, status = _apply_a(kw, zw, g, k)
        if h is None:
            return f, None, it, status, th, d
        new = (1.0 - th) * f + th * h
        diff = new - f
        d = float(np.max(np.abs(diff)))
        top = float(np.max(np.abs(new)))
        if not np.isfinite(d) or top > blowup:
            return new, None, it, NONFINITE, th, d
        if prev is not None and float(diff @ prev) < 0.0:
            streak += 1
            if streak >= OSCILLATION_WINDOW and th > FALLBACK_DAMPING:
                th = FALLBACK_DAMPING
                streak = 0
        else:
            streak = 0
        prev = diff
        f = new
        if d <= tol * max(1.0, top):
            g, status = _apply_a(kw, zw, f, k)
            if g is None:
                return f, None, it, status, th, d
            return f, g, it, CONVERGED, th, d
    return f, None, int(max_iter), MAX_ITERATIONS, th, d
