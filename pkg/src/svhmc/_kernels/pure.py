"""Pure-Python kernel backend.

Mirrors the compiled extension operation for operation: the single-site
sweep uses the exact same scalar arithmetic (so accept/reject decisions are
bit-identical given the same uniforms), and the vectorised energy/gradient
differ from the compiled loops only by summation order.
"""

from __future__ import annotations

import math

import numpy as np

from svhmc.errors import NumericalRangeError

# exp(-h) overflows IEEE double a little below h = -745; -700 leaves headroom
H_OVERFLOW = -700.0


def _overflow_message(i, value):
    return f"exp(-h[{i}]) overflows (h[{i}] = {value:.6g} < {H_OVERFLOW:g})"


def _nonfinite_message(i):
    return f"non-finite energy term at site {i}"


def _gradient_raw(y2, h, mu, phi, s2):
    """Gradient of the latent-path potential; returns (g, fail_index).

    fail_index is -1 on success, else the first site whose term left the
    representable range (g is then None).
    """
    bad = np.flatnonzero(h < H_OVERFLOW)
    if bad.size:
        return None, int(bad[0])
    d = h - mu
    e = d[1:] - phi * d[:-1]
    g = 0.5 - 0.5 * y2 * np.exp(-h)
    g[0] += (1.0 - phi * phi) * d[0] / s2
    g[1:] += e / s2
    g[:-1] -= phi * e / s2
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        return None, int(bad[0])
    return g, -1


def potential_energy(y2, h, mu, phi, s2):
    """U(h) = sum_t [h_t/2 + (y_t^2/2) e^{-h_t}] + AR(1) quadratic terms."""
    bad = np.flatnonzero(h < H_OVERFLOW)
    if bad.size:
        i = int(bad[0])
        raise NumericalRangeError(_overflow_message(i, h[i]))
    obs = 0.5 * h + 0.5 * y2 * np.exp(-h)
    d = h - mu
    e = d[1:] - phi * d[:-1]
    u = float(np.sum(obs) + (1.0 - phi * phi) * d[0] * d[0] / (2.0 * s2)
              + np.dot(e, e) / (2.0 * s2))
    if not math.isfinite(u):
        bad = np.flatnonzero(~np.isfinite(obs))
        if bad.size:
            raise NumericalRangeError(_nonfinite_message(int(bad[0])))
        bad = np.flatnonzero(~np.isfinite(e))
        i = int(bad[0]) + 1 if bad.size else 0
        raise NumericalRangeError(_nonfinite_message(i))
    return u


def potential_gradient(y2, h, mu, phi, s2):
    """Analytic dU/dh_t as a new array."""
    g, bad = _gradient_raw(y2, h, mu, phi, s2)
    if bad >= 0:
        if h[bad] < H_OVERFLOW:
            raise NumericalRangeError(_overflow_message(bad, h[bad]))
        raise NumericalRangeError(_nonfinite_message(bad))
    return g


def leapfrog_trajectory(y2, h, p, mu, phi, s2, step_size, n_steps):
    """Integrate n_steps of (half-kick, drift, half-kick).

    Returns (h_new, p_new, ok, fail_index); ok is False when a gradient
    evaluation left the representable range, marking the trajectory
    divergent.  Inputs are not modified.
    """
    h = np.array(h, dtype=np.float64)
    p = np.array(p, dtype=np.float64)
    g, bad = _trajectory_gradient(y2, h, mu, phi, s2)
    if bad >= 0:
        return h, p, False, bad
    half = 0.5 * step_size
    for _ in range(n_steps):
        p -= half * g
        h += step_size * p
        g, bad = _trajectory_gradient(y2, h, mu, phi, s2)
        if bad >= 0:
            return h, p, False, bad
        p -= half * g
    return h, p, True, -1


# seam for integrator tests (e.g. substituting a zero-force field)
_trajectory_gradient = _gradient_raw


def metropolis_sweep(y2, h, mu, phi, s2, width, u_prop, u_acc):
    """One sequential single-site sweep; mutates h in place.

    Site t proposes h_t + width*(2*u_prop[t]-1) and accepts with
    min{1, exp(-dU)} using u_acc[t], where dU touches only the terms that
    contain h_t.  Proposals below the exp overflow bound are rejected.
    Returns the number of accepted sites.
    """
    n = h.shape[0]
    if n < 2:
        raise ValueError("latent path must have at least 2 sites")
    inv_2s2 = 0.5 / s2
    one_minus_phi2 = 1.0 - phi * phi
    hl = h.tolist()
    y2l = y2.tolist()
    up = u_prop.tolist()
    ua = u_acc.tolist()
    accepted = 0
    for i in range(n):
        hi = hl[i]
        hp = hi + width * (2.0 * up[i] - 1.0)
        if hp < H_OVERFLOW:
            continue
        if y2l[i] > 0.0:
            dobs = 0.5 * (hp - hi) + 0.5 * y2l[i] * (math.exp(-hp) - math.exp(-hi))
        else:
            dobs = 0.5 * (hp - hi)
        di = hi - mu
        dp = hp - mu
        if i == 0:
            e1 = (hl[1] - mu) - phi * di
            e1p = (hl[1] - mu) - phi * dp
            dpr = one_minus_phi2 * (dp * dp - di * di) * inv_2s2 \
                + (e1p * e1p - e1 * e1) * inv_2s2
        elif i == n - 1:
            em = di - phi * (hl[i - 1] - mu)
            emp = dp - phi * (hl[i - 1] - mu)
            dpr = (emp * emp - em * em) * inv_2s2
        else:
            em = di - phi * (hl[i - 1] - mu)
            emp = dp - phi * (hl[i - 1] - mu)
            e1 = (hl[i + 1] - mu) - phi * di
            e1p = (hl[i + 1] - mu) - phi * dp
            dpr = (emp * emp - em * em) * inv_2s2 \
                + (e1p * e1p - e1 * e1) * inv_2s2
        du = dobs + dpr
        if du <= 0.0 or ua[i] < math.exp(-du):
            hl[i] = hp
            accepted += 1
    h[:] = hl
    return accepted
