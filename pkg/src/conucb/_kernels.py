"""Compiled inner loops shared by the public API and the experiment runner.

Every public function in :mod:`conucb` that touches rounding, the per-round
LP, Exp3.M probabilities or reward draws goes through the kernels below, so
the object-level policies and the fast simulation loops perform the same
floating point operations in the same order.
"""

import numba as nb
import numpy as np

SNAP_TOL = 1e-12

INFEASIBLE = 0
OPTIMAL = 1

# diagnostics slots filled by run_conucb when tracking is on
D_PAIRS = 0
D_CONC_A = 1
D_CONC_G = 2
D_OPT_A = 3
D_OPT_G = 4
D_ANY = 5
D_OPT_ROUNDS = 6
D_GAP_FAIL = 7
D_INFEASIBLE = 8
N_DIAG = 9

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO53 = 1.0 / 9007199254740992.0


# ---------------------------------------------------------------- reward draws


@nb.njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def counter_uniform(key, t, arm, level):
    """Uniform in [0, 1) addressed by (stream key, round, arm, level)."""
    z = _mix64(np.uint64(key) + np.uint64(t) * _GOLDEN)
    z = _mix64(z ^ ((np.uint64(arm) * np.uint64(2) + np.uint64(level) + np.uint64(1)) * _GOLDEN))
    return np.float64(z >> _S11) * _TWO53


@nb.njit(cache=True)
def draw_pair(key, t, arm, a_mean, b_mean):
    a = 1.0 if counter_uniform(key, t, arm, 0) < a_mean else 0.0
    b = 1.0 if counter_uniform(key, t, arm, 1) < b_mean else 0.0
    return a, b


# ---------------------------------------------------------- dependent rounding


@nb.njit(cache=True)
def _snap(v):
    if v < SNAP_TOL:
        return 0.0
    if v > 1.0 - SNAP_TOL:
        return 1.0
    return v


@nb.njit(cache=True)
def _next_fractional(x, start):
    k = start
    while k < x.shape[0] and (x[k] == 0.0 or x[k] == 1.0):
        k += 1
    return k


@nb.njit(cache=True)
def dependent_round(x, rng, out):
    """Round ``x`` in place to a 0/1 vector and write the chosen indices to ``out``.

    Pairs are taken as the two lowest-indexed fractional coordinates.
    Returns the number of indices written.
    """
    K = x.shape[0]
    for k in range(K):
        x[k] = _snap(x[k])
    i = _next_fractional(x, 0)
    j = _next_fractional(x, i + 1)
    while i < K:
        if j >= K:
            # a lone fractional coordinate can only be float residue of an integral sum
            x[i] = 1.0 if x[i] >= 0.5 else 0.0
            break
        xi = x[i]
        xj = x[j]
        p = min(1.0 - xi, xj)
        q = min(xi, 1.0 - xj)
        if p + q > 0.0:
            if rng.random() < q / (p + q):
                x[i] = _snap(xi + p)
                x[j] = _snap(xj - p)
            else:
                x[i] = _snap(xi - q)
                x[j] = _snap(xj + q)
        if x[i] == 0.0 or x[i] == 1.0:
            i = j if (x[j] != 0.0 and x[j] != 1.0) else _next_fractional(x, j + 1)
            j = _next_fractional(x, i + 1)
        else:
            j = _next_fractional(x, j + 1)
    m = 0
    for k in range(K):
        if x[k] == 1.0:
            if m < out.shape[0]:
                out[m] = k
            m += 1
    return m


# ------------------------------------------------------------------ linear program


@nb.njit(cache=True)
def top_l_sum(v, L):
    s = np.sort(v)
    total = 0.0
    for k in range(v.shape[0] - L, v.shape[0]):
        total += s[k]
    return total


@nb.njit(cache=True)
def top_l_by_index(v, L, mask):
    """Top-L entries of ``v``, ties to the lower index."""
    order = np.argsort(-v, kind="mergesort")
    mask[:] = False
    for k in range(L):
        mask[order[k]] = True


@nb.njit(cache=True)
def _top_set(primary, secondary, L, mask):
    """Top-L by ``primary``; ties at the boundary go to larger ``secondary``, then lower index."""
    K = primary.shape[0]
    order = np.argsort(-primary, kind="mergesort")
    nu = primary[order[L - 1]]
    mask[:] = False
    c = 0
    n_tied = 0
    for k in range(K):
        if primary[k] > nu:
            mask[k] = True
            c += 1
        elif primary[k] == nu:
            n_tied += 1
    tied = np.empty(n_tied, np.int64)
    m = 0
    for k in range(K):
        if primary[k] == nu:
            tied[m] = k
            m += 1
    sub = np.argsort(-secondary[tied], kind="mergesort")
    for k in range(L - c):
        mask[tied[sub[k]]] = True


@nb.njit(cache=True)
def _masked_sum(v, mask):
    s = 0.0
    for k in range(v.shape[0]):
        if mask[k]:
            s += v[k]
    return s


@nb.njit(cache=True)
def solve_lp(g, a, L, h, x):
    """Maximise x.g over {0<=x<=1, sum x = L, x.a >= h}; result written to ``x``.

    Returns (status, objective). The search walks pieces of the concave
    Lagrangian dual: for a multiplier lam the relaxed maximiser is the top-L
    set by g + lam*a. Once the optimal lam is bracketed by a set below the
    threshold and one above it, the two sets are joined by single swaps and
    the crossing swap is split fractionally, which leaves at most two
    fractional coordinates.
    """
    K = g.shape[0]
    x[:] = 0.0
    if top_l_sum(a, L) < h:
        return INFEASIBLE, 0.0

    mask = np.zeros(K, np.bool_)
    top_l_by_index(g, L, mask)
    if _masked_sum(a, mask) >= h:
        for k in range(K):
            if mask[k]:
                x[k] = 1.0
        return OPTIMAL, _masked_sum(g, mask)

    lo = np.zeros(K, np.bool_)
    _top_set(g, a, L, lo)
    A_lo = _masked_sum(a, lo)
    if A_lo >= h:
        for k in range(K):
            if lo[k]:
                x[k] = 1.0
        return OPTIMAL, _masked_sum(g, lo)
    G_lo = _masked_sum(g, lo)

    hi = np.zeros(K, np.bool_)
    _top_set(a, g, L, hi)
    A_hi = _masked_sum(a, hi)
    G_hi = _masked_sum(g, hi)

    score = np.empty(K)
    for _ in range(4 * K + 8):
        lam = (G_lo - G_hi) / (A_hi - A_lo)
        for k in range(K):
            score[k] = g[k] + lam * a[k]
        _top_set(score, a, L, mask)
        value = _masked_sum(score, mask)
        line = G_lo + lam * A_lo
        if value <= line + 1e-13 * (1.0 + abs(line)):
            break
        G = _masked_sum(g, mask)
        A = _masked_sum(a, mask)
        if A >= h:
            if G == G_hi and A == A_hi:
                break
            hi[:] = mask
            G_hi = G
            A_hi = A
        else:
            if G == G_lo and A == A_lo:
                break
            lo[:] = mask
            G_lo = G
            A_lo = A

    # walk from lo to hi one swap at a time, largest a-gain first
    n_out = 0
    for k in range(K):
        if lo[k] and not hi[k]:
            n_out += 1
    outs = np.empty(n_out, np.int64)
    ins = np.empty(n_out, np.int64)
    m_out = 0
    m_in = 0
    for k in range(K):
        if lo[k] and not hi[k]:
            outs[m_out] = k
            m_out += 1
        elif hi[k] and not lo[k]:
            ins[m_in] = k
            m_in += 1
    outs = outs[np.argsort(a[outs], kind="mergesort")]
    ins = ins[np.argsort(-a[ins], kind="mergesort")]

    for k in range(K):
        if lo[k]:
            x[k] = 1.0
    A = A_lo
    crossed = False
    for s in range(n_out):
        i = outs[s]
        j = ins[s]
        d = a[j] - a[i]
        if A + d >= h and d > 0.0:
            theta = (h - A) / d
            x[i] = 1.0 - theta
            x[j] = theta
            crossed = True
            break
        x[i] = 0.0
        x[j] = 1.0
        A += d
    if not crossed:
        for k in range(K):
            x[k] = 1.0 if hi[k] else 0.0
    obj = 0.0
    for k in range(K):
        obj += x[k] * g[k]
    return OPTIMAL, obj


@nb.njit(cache=True)
def fallback(a, L, x):
    order = np.argsort(-a, kind="mergesort")
    x[:] = 0.0
    for k in range(L):
        x[order[k]] = 1.0


# ---------------------------------------------------------------- index helpers


@nb.njit(cache=True)
def radius(mu, n, gamma):
    return np.sqrt(gamma * mu / n) + gamma / n


@nb.njit(cache=True)
def ucb_from_sums(n, s, gamma, out):
    for k in range(n.shape[0]):
        ne = n[k] + 1.0
        mu = s[k] / ne
        v = mu + 2.0 * radius(mu, ne, gamma)
        out[k] = v if v < 1.0 else 1.0


@nb.njit(cache=True)
def cucb_index(n, sg, t, out):
    lt = np.log(t)
    for k in range(n.shape[0]):
        if n[k] == 0:
            out[k] = np.inf
        else:
            out[k] = sg[k] / (n[k] + 1.0) + np.sqrt(3.0 * lt / (2.0 * n[k]))


@nb.njit(cache=True)
def exp3m_probs(logw, L, gam, p, capped):
    """Exp3.M selection probabilities with weight capping, from log-weights."""
    K = logw.shape[0]
    capped[:] = False
    if gam >= 1.0 or L >= K:
        p[:] = L / K
        if L >= K:
            capped[:] = True
        return
    w = np.exp(logw - np.max(logw))
    total = w.sum()
    c = (1.0 / L - gam / K) / (1.0 - gam)
    if np.max(w) >= c * total:
        order = np.argsort(-w, kind="mergesort")
        # suffix sums of the sorted weights; subtracting from the total cancels badly
        suffix = np.zeros(K + 1)
        for j in range(K - 1, -1, -1):
            suffix[j] = suffix[j + 1] + w[order[j]]
        alpha = 0.0
        for k in range(1, L):
            alpha = c * suffix[k] / (1.0 - k * c)
            if alpha <= w[order[k - 1]] and alpha >= w[order[k]]:
                break
        for k in range(K):
            if w[k] >= alpha:
                w[k] = alpha
                capped[k] = True
        total = w.sum()
    for k in range(K):
        if capped[k]:
            p[k] = 1.0
        else:
            p[k] = min(L * ((1.0 - gam) * w[k] / total + gam / K), 1.0)


# --------------------------------------------------------------- run loops


@nb.njit(cache=True)
def run_conucb(a_mean, b_mean, L, h, gamma, T, key, rng, sum_a, sum_g, track, x_star, opt_value, diag):
    K = a_mean.shape[0]
    n = np.zeros(K)
    sa = np.zeros(K)
    sg = np.zeros(K)
    a_hat = np.empty(K)
    g_hat = np.empty(K)
    x = np.empty(K)
    sel = np.empty(L, np.int64)
    for t in range(1, T + 1):
        ucb_from_sums(n, sa, gamma, a_hat)
        ucb_from_sums(n, sg, gamma, g_hat)
        status, obj = solve_lp(g_hat, a_hat, L, h, x)
        if status == INFEASIBLE:
            fallback(a_hat, L, x)
        if track:
            _track_round(a_mean, b_mean, n, sa, sg, a_hat, g_hat, gamma, x_star, opt_value, obj, status, diag)
        dependent_round(x, rng, sel)
        ra = 0.0
        rg = 0.0
        for s in range(L):
            i = sel[s]
            av, bv = draw_pair(key, t, i, a_mean[i], b_mean[i])
            n[i] += 1.0
            sa[i] += av
            sg[i] += av * bv
            ra += av
            rg += av * bv
        sum_a[t - 1] = ra
        sum_g[t - 1] = rg


@nb.njit(cache=True)
def _track_round(a_mean, b_mean, n, sa, sg, a_hat, g_hat, gamma, x_star, opt_value, obj, status, diag):
    K = a_mean.shape[0]
    optimistic = True
    for i in range(K):
        ne = n[i] + 1.0
        ab = sa[i] / ne
        gb = sg[i] / ne
        ai = a_mean[i]
        gi = a_mean[i] * b_mean[i]
        bad = False
        diag[D_PAIRS] += 1
        if abs(ab - ai) > 2.0 * radius(ab, ne, gamma):
            diag[D_CONC_A] += 1
            bad = True
        if abs(gb - gi) > 2.0 * radius(gb, ne, gamma):
            diag[D_CONC_G] += 1
            bad = True
        if ai > a_hat[i]:
            diag[D_OPT_A] += 1
            bad = True
            optimistic = False
        if gi > g_hat[i]:
            diag[D_OPT_G] += 1
            bad = True
            optimistic = False
        if bad:
            diag[D_ANY] += 1
    if status == INFEASIBLE:
        diag[D_INFEASIBLE] += 1
    if optimistic:
        diag[D_OPT_ROUNDS] += 1
        if status == INFEASIBLE or obj < opt_value - 1e-9:
            diag[D_GAP_FAIL] += 1


@nb.njit(cache=True)
def run_cucb(a_mean, b_mean, L, T, key, sum_a, sum_g):
    K = a_mean.shape[0]
    n = np.zeros(K)
    sg = np.zeros(K)
    idx = np.empty(K)
    for t in range(1, T + 1):
        cucb_index(n, sg, t, idx)
        order = np.argsort(-idx, kind="mergesort")
        ra = 0.0
        rg = 0.0
        for s in range(L):
            i = order[s]
            av, bv = draw_pair(key, t, i, a_mean[i], b_mean[i])
            n[i] += 1.0
            sg[i] += av * bv
            ra += av
            rg += av * bv
        sum_a[t - 1] = ra
        sum_g[t - 1] = rg


@nb.njit(cache=True)
def run_exp3m(a_mean, b_mean, L, gam, T, key, rng, sum_a, sum_g):
    K = a_mean.shape[0]
    logw = np.zeros(K)
    p = np.empty(K)
    x = np.empty(K)
    capped = np.zeros(K, np.bool_)
    sel = np.empty(L, np.int64)
    for t in range(1, T + 1):
        exp3m_probs(logw, L, gam, p, capped)
        x[:] = p
        dependent_round(x, rng, sel)
        ra = 0.0
        rg = 0.0
        for s in range(L):
            i = sel[s]
            av, bv = draw_pair(key, t, i, a_mean[i], b_mean[i])
            if not capped[i]:
                logw[i] += L * gam * (av * bv) / (K * p[i])
            ra += av
            rg += av * bv
        sum_a[t - 1] = ra
        sum_g[t - 1] = rg


@nb.njit(cache=True)
def run_fixed(a_mean, b_mean, L, x_fixed, T, key, rng, sum_a, sum_g):
    x = np.empty(a_mean.shape[0])
    sel = np.empty(L, np.int64)
    for t in range(1, T + 1):
        x[:] = x_fixed
        dependent_round(x, rng, sel)
        ra = 0.0
        rg = 0.0
        for s in range(L):
            i = sel[s]
            av, bv = draw_pair(key, t, i, a_mean[i], b_mean[i])
            ra += av
            rg += av * bv
        sum_a[t - 1] = ra
        sum_g[t - 1] = rg


@nb.njit(cache=True)
def uniform_subset(K, L, rng, out, scratch):
    for k in range(K):
        scratch[k] = k
    for s in range(L):
        r = s + int(rng.random() * (K - s))
        if r >= K:
            r = K - 1
        tmp = scratch[s]
        scratch[s] = scratch[r]
        scratch[r] = tmp
        out[s] = scratch[s]


@nb.njit(cache=True)
def run_uniform(a_mean, b_mean, L, T, key, rng, sum_a, sum_g):
    K = a_mean.shape[0]
    sel = np.empty(L, np.int64)
    scratch = np.empty(K, np.int64)
    for t in range(1, T + 1):
        uniform_subset(K, L, rng, sel, scratch)
        ra = 0.0
        rg = 0.0
        for s in range(L):
            i = sel[s]
            av, bv = draw_pair(key, t, i, a_mean[i], b_mean[i])
            ra += av
            rg += av * bv
        sum_a[t - 1] = ra
        sum_g[t - 1] = rg
