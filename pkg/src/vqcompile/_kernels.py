"""Compiled inner loops for the angle optimiser.

Mirrors :class:`vqcompile.optimize.Landscape` operation for operation; the
numpy class stays the readable reference and the tests pin the two together.
Operation encoding: ``kinds[i] == 0`` is a fixed matrix ``fixed[i]``,
``kinds[i] == 1`` a rotation ``cos(t/2) I - i sin(t/2) Sigma`` with
``(Sigma M)[r] = phases[i, r] * M[perms[i, r]]`` and ``t = theta[pidx[i]]``.
"""
from __future__ import annotations

import numpy as np
from numba import njit

HALF_PI = np.pi / 2


@njit(cache=True)
def _left(kind, fx, perm, phase, c, s, m, out):
    d = m.shape[0]
    if kind == 0:
        out[:, :] = np.dot(fx, m)
    else:
        for r in range(d):
            pr = perm[r]
            f = -1j * s * phase[r]
            for col in range(d):
                out[r, col] = c * m[r, col] + f * m[pr, col]


@njit(cache=True)
def _right(kind, fx, perm, phase, c, s, m, out):
    d = m.shape[0]
    if kind == 0:
        out[:, :] = np.dot(m, fx)
    else:
        for col in range(d):
            pc = perm[col]
            f = -1j * s * phase[pc]
            for r in range(d):
                out[r, col] = c * m[r, col] + f * m[r, pc]


@njit(cache=True)
def _prefixes(theta, kinds, fixed, perms, phases, pidx):
    m = kinds.shape[0]
    d = fixed.shape[1]
    pre = np.zeros((m + 1, d, d), dtype=np.complex128)
    for r in range(d):
        pre[0, r, r] = 1.0
    for i in range(m):
        t = theta[pidx[i]] if kinds[i] == 1 else 0.0
        _left(kinds[i], fixed[i], perms[i], phases[i], np.cos(t / 2), np.sin(t / 2), pre[i], pre[i + 1])
    return pre


@njit(cache=True)
def _clamp(x):
    if x < 0.0 and x > -1e-12:
        return 0.0
    return x


@njit(cache=True)
def _global_from_trace(t, d2):
    return _clamp(1.0 - (t.real * t.real + t.imag * t.imag) / d2)


@njit(cache=True)
def _local_cost(wx, wy, c, s, n):
    # W = c Wx + i s Wy;  cost = 1 - mean_j ||Tr_j(W)||^2 / (2d)
    d = wx.shape[0]
    total = 0.0
    for j in range(n):
        b = 1 << j
        for r in range(d):
            if r & b:
                continue
            for col in range(d):
                if col & b:
                    continue
                z = c * (wx[r, col] + wx[r | b, col | b]) + 1j * s * (wy[r, col] + wy[r | b, col | b])
                total += z.real * z.real + z.imag * z.imag
    return _clamp(1.0 - total / (2.0 * d * n))


@njit(cache=True)
def value_and_grad(theta, kinds, fixed, fixed_dag, perms, phases, pidx, u, local, n):
    m = kinds.shape[0]
    d = u.shape[0]
    d2 = float(d) * float(d)
    pre = _prefixes(theta, kinds, fixed, perms, phases, pidx)
    grad = np.zeros(theta.shape[0])
    tmp = np.empty((d, d), dtype=np.complex128)
    if not local:
        t = 0j
        for r in range(d):
            for col in range(d):
                t += np.conj(u[r, col]) * pre[m, r, col]
        value = _global_from_trace(t, d2)
        c = np.empty((d, d), dtype=np.complex128)
        for r in range(d):
            for col in range(d):
                c[r, col] = np.conj(u[col, r])
        for i in range(m - 1, -1, -1):
            th = theta[pidx[i]] if kinds[i] == 1 else 0.0
            if kinds[i] == 1:
                a = pre[i]
                perm = perms[i]
                phase = phases[i]
                tr0 = 0j
                tr1 = 0j
                for r in range(d):
                    pr = perm[r]
                    ph = phase[r]
                    for k in range(d):
                        ck = c[k, r]
                        tr0 += a[r, k] * ck
                        tr1 += ph * a[pr, k] * ck
                phi = th + HALF_PI
                cp = _global_from_trace(np.cos(phi / 2) * tr0 - 1j * np.sin(phi / 2) * tr1, d2)
                phi = th - HALF_PI
                cm = _global_from_trace(np.cos(phi / 2) * tr0 - 1j * np.sin(phi / 2) * tr1, d2)
                grad[pidx[i]] = 0.5 * (cp - cm)
            _right(kinds[i], fixed[i], perms[i], phases[i], np.cos(th / 2), np.sin(th / 2), c, tmp)
            c, tmp = tmp, c
        return value, grad
    # G_i = U A_i^dag, built forward; bd = B^dag (suffix adjoint), built backward.
    # With rotation i at angle phi: U V^dag = cos(phi/2) G_i bd + i sin(phi/2) (G_i Sigma) bd.
    g = np.empty((m + 1, d, d), dtype=np.complex128)
    g[0] = u
    for i in range(m):
        th = theta[pidx[i]] if kinds[i] == 1 else 0.0
        _right(kinds[i], fixed_dag[i], perms[i], phases[i], np.cos(th / 2), -np.sin(th / 2), g[i], g[i + 1])
    value = _local_cost(g[m], g[m], 1.0, 0.0, n)
    bd = np.zeros((d, d), dtype=np.complex128)
    for r in range(d):
        bd[r, r] = 1.0
    gs = np.empty((d, d), dtype=np.complex128)
    for i in range(m - 1, -1, -1):
        th = theta[pidx[i]] if kinds[i] == 1 else 0.0
        if kinds[i] == 1:
            gi = g[i]
            perm = perms[i]
            phase = phases[i]
            for col in range(d):
                pc = perm[col]
                f = phase[pc]
                for r in range(d):
                    gs[r, col] = gi[r, pc] * f
            wx = np.dot(gi, bd)
            wy = np.dot(gs, bd)
            phi = th + HALF_PI
            cp = _local_cost(wx, wy, np.cos(phi / 2), np.sin(phi / 2), n)
            phi = th - HALF_PI
            cm = _local_cost(wx, wy, np.cos(phi / 2), np.sin(phi / 2), n)
            grad[pidx[i]] = 0.5 * (cp - cm)
        _left(kinds[i], fixed_dag[i], perms[i], phases[i], np.cos(th / 2), -np.sin(th / 2), bd, tmp)
        bd, tmp = tmp, bd
    return value, grad


@njit(cache=True)
def descend(theta, step, growth, max_iter, tol, kinds, fixed, fixed_dag, perms, phases, pidx, u, local, n):
    """Gradient descent; a step that raises the cost is rejected and the step halved,
    an accepted step multiplies the step size by ``growth``."""
    f, g = value_and_grad(theta, kinds, fixed, fixed_dag, perms, phases, pidx, u, local, n)
    eta = step
    it = 0
    while it < max_iter:
        it += 1
        cand = theta - eta * g
        fc, gc = value_and_grad(cand, kinds, fixed, fixed_dag, perms, phases, pidx, u, local, n)
        if fc <= f:
            improvement = f - fc
            theta = cand
            f = fc
            g = gc
            eta *= growth
            if improvement < tol:
                break
        else:
            eta *= 0.5
            if eta < 1e-12:
                break
    return theta, f, it


@njit(cache=True)
def pick_max(row, u):
    """Index of a maximum of ``row``; among ties the ``floor(u * count)``-th one."""
    best = row[0]
    count = 1
    for j in range(1, row.shape[0]):
        if row[j] > best:
            best = row[j]
            count = 1
        elif row[j] == best:
            count += 1
    k = int(u * count)
    if k >= count:
        k = count - 1
    for j in range(row.shape[0]):
        if row[j] == best:
            if k == 0:
                return j
            k -= 1
    return 0


@njit(cache=True)
def replay_updates(q1, q2, written, actions, r_T, draws, alpha, gamma, size, terminal_full):
    """Double Q-learning passes over a minibatch of trajectories.

    ``draws[b, 0]`` picks the updated table for entry b, ``draws[b, t + 1]``
    breaks argmax ties at transition t.
    """
    batch, L = actions.shape
    for b in range(batch):
        if draws[b, 0] < 0.5:
            upd, ev = q1, q2
        else:
            upd, ev = q2, q1
        step = r_T[b] / L
        sid = 0
        for t in range(L):
            a = actions[b, t]
            nxt = 1 + t * size + a
            if t + 1 < L:
                boot = ev[nxt, pick_max(upd[nxt], draws[b, t + 1])]
                r = step
            else:
                boot = 0.0
                r = r_T[b] if terminal_full else step
            upd[sid, a] = (1 - alpha) * upd[sid, a] + alpha * (r + gamma * boot)
            written[sid, a] = True
            sid = nxt
