"""Compiled Levenberg-Marquardt loop over the nonlinear LPPL parameters.

The state vector is ``(t_c, alpha, omega, phi)`` (or ``(t_c, alpha)`` for the
power law).  At every trial point the linear coefficients ``(A, B, C2)`` are
re-solved from 3x3 normal equations, so the residual is the variable-projection
residual.  The Jacobian is taken at fixed linear coefficients; because the
linear part is optimal, ``J^T r`` is still the exact gradient.
"""
import numpy as np
from numba import njit

OK = 0
BAD_DOMAIN = 1
BAD_DESIGN = 2
B_ZERO = 3

CONVERGED_GRAD = 1
CONVERGED_STEP = 2
MAX_ITERS = 3
ALL_REJECTED = 4
INIT_INVALID = 5

MAX_CONDITION = 1e12
B_ZERO_RTOL = 1e-12
REJECT_LIMIT = 1e12
DECREMENT_RTOL = 1e-12


@njit(cache=True, nogil=True)
def _chol_solve(M, b, out):
    """Solve ``M out = b`` for small SPD ``M``; returns False if not SPD."""
    n = b.shape[0]
    L = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            acc = M[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            if i == j:
                if not acc > 0.0:
                    return False
                L[i, i] = np.sqrt(acc)
            else:
                L[i, j] = acc / L[j, j]
    z = np.empty(n)
    for i in range(n):
        acc = b[i]
        for k in range(i):
            acc -= L[i, k] * z[k]
        z[i] = acc / L[i, i]
    for i in range(n - 1, -1, -1):
        acc = z[i]
        for k in range(i + 1, n):
            acc -= L[k, i] * out[k]
        out[i] = acc / L[i, i]
    return True


@njit(cache=True, nogil=True)
def evaluate(t, y, x, n_nl, lo, hi, yscale, r, J, theta):
    """Residual, projected Jacobian and linear coefficients at ``x``.

    ``x`` must lie in the open box ``(lo, hi)``; ``lo[0]`` is the window end.

    ``J`` must have ``n_nl + 3`` columns: the first ``n_nl`` receive the
    Jacobian with the span of the linear design projected out (Kaufman's
    variable-projection Jacobian), the rest hold the design columns.
    Returns ``(status, sse)``.
    """
    n = t.shape[0]
    tc = x[0]
    alpha = x[1]
    omega = 0.0
    phi = 0.0
    if n_nl == 4:
        omega = x[2]
        phi = x[3]
    for a in range(n_nl):
        if not (lo[a] < x[a] < hi[a]):
            return BAD_DOMAIN, np.inf
    m = 3 if n_nl == 4 else 2
    X0 = n_nl  # first design column

    G = np.zeros((m, m))
    rhs = np.zeros(m)
    for i in range(n):
        dt = tc - t[i]
        L = np.log(dt)
        u = np.exp(alpha * L)
        J[i, X0] = 1.0
        J[i, X0 + 1] = u
        # raw Jacobian pieces, finished once (A, B, C2) are known
        J[i, 0] = L
        if n_nl == 4:
            arg = omega * L + phi
            c = np.cos(arg)
            J[i, 2] = c
            J[i, 3] = np.sin(arg)
            J[i, X0 + 2] = u * c
        for a in range(m):
            xa = J[i, X0 + a]
            rhs[a] += y[i] * xa
            for b in range(a, m):
                G[a, b] += xa * J[i, X0 + b]
    for a in range(m):
        for b in range(a):
            G[a, b] = G[b, a]

    d = np.empty(m)
    for a in range(m):
        if not (G[a, a] > 0.0 and np.isfinite(G[a, a])):
            return BAD_DESIGN, np.inf
        d[a] = np.sqrt(G[a, a])
    Ge = np.empty((m, m))
    for a in range(m):
        for b in range(m):
            Ge[a, b] = G[a, b] / (d[a] * d[b])
    if not np.all(np.isfinite(Ge)):
        return BAD_DESIGN, np.inf
    ev = np.linalg.eigvalsh(Ge)
    if not ev[0] > 0.0 or ev[m - 1] / ev[0] > MAX_CONDITION:
        return BAD_DESIGN, np.inf
    be = np.empty(m)
    for a in range(m):
        be[a] = rhs[a] / d[a]
    sol = np.empty(m)
    if not _chol_solve(Ge, be, sol):
        return BAD_DESIGN, np.inf
    for a in range(m):
        theta[a] = sol[a] / d[a]
    if m == 2:
        theta[2] = 0.0
    A = theta[0]
    B = theta[1]
    C2 = theta[2]
    if abs(B) < B_ZERO_RTOL * yscale:
        return B_ZERO, np.inf

    sse = 0.0
    for i in range(n):
        L = J[i, 0]
        u = J[i, X0 + 1]
        dt = tc - t[i]
        if n_nl == 4:
            c = J[i, 2]
            s = J[i, 3]
            f = A + B * u + C2 * u * c
            J[i, 0] = u / dt * (alpha * (B + C2 * c) - C2 * omega * s)
            J[i, 1] = (B + C2 * c) * u * L
            J[i, 2] = -C2 * u * s * L
            J[i, 3] = -C2 * u * s
        else:
            f = A + B * u
            J[i, 0] = B * alpha * u / dt
            J[i, 1] = B * u * L
        ri = f - y[i]
        r[i] = ri
        sse += ri * ri
    if not np.isfinite(sse):
        return BAD_DOMAIN, np.inf

    # J <- (I - X (X^T X)^-1 X^T) J
    XtJ = np.zeros(m)
    z = np.empty(m)
    for j in range(n_nl):
        for a in range(m):
            acc = 0.0
            for i in range(n):
                acc += J[i, X0 + a] * J[i, j]
            XtJ[a] = acc / d[a]
        _chol_solve(Ge, XtJ, z)
        for a in range(m):
            z[a] /= d[a]
        for i in range(n):
            acc = 0.0
            for a in range(m):
                acc += J[i, X0 + a] * z[a]
            J[i, j] -= acc
    return OK, sse


@njit(cache=True, nogil=True)
def _gradient_cosine(J, r, n_nl):
    """Largest |cos| between the residual and a Jacobian column."""
    n = r.shape[0]
    rr = 0.0
    for i in range(n):
        rr += r[i] * r[i]
    if rr == 0.0:
        return 0.0
    worst = 0.0
    for j in range(n_nl):
        jr = 0.0
        jj = 0.0
        for i in range(n):
            jr += J[i, j] * r[i]
            jj += J[i, j] * J[i, j]
        if jj > 0.0:
            c = abs(jr) / np.sqrt(jj * rr)
            if c > worst:
                worst = c
    return worst


@njit(cache=True, nogil=True)
def _stationary_to_rounding(JtJ, g, sse):
    """True when even the full Gauss-Newton step predicts a decrease of the
    sum of squares below ``DECREMENT_RTOL * sse`` (the Newton decrement)."""
    n_nl = g.shape[0]
    step = np.empty(n_nl)
    if not _chol_solve(JtJ, g, step):
        return False
    dec = 0.0
    for a in range(n_nl):
        dec += g[a] * step[a]
    return dec <= DECREMENT_RTOL * sse


@njit(cache=True, nogil=True)
def _normal(J, r, JtJ, g):
    n = r.shape[0]
    n_nl = g.shape[0]
    for a in range(n_nl):
        acc = 0.0
        for i in range(n):
            acc += J[i, a] * r[i]
        g[a] = acc
        for b in range(a + 1):
            acc = 0.0
            for i in range(n):
                acc += J[i, a] * J[i, b]
            JtJ[a, b] = acc
            JtJ[b, a] = acc


@njit(cache=True, nogil=True)
def lm(t, y, x0, lo, hi, max_iters, grad_tol, step_tol, tau, nu, x_out, theta_out, hist):
    """One damped Gauss-Newton descent.

    Returns ``(status, iterations, n_hist, sse)``; ``hist[:n_hist]`` holds the
    SSE after every accepted step (starting with the initial point).
    """
    n = t.shape[0]
    n_nl = x0.shape[0]
    yscale = 0.0
    for i in range(n):
        if abs(y[i]) > yscale:
            yscale = abs(y[i])

    x = x0.copy()
    r = np.empty(n)
    J = np.empty((n, n_nl + 3))
    theta = np.zeros(3)
    r_try = np.empty(n)
    J_try = np.empty((n, n_nl + 3))
    theta_try = np.zeros(3)

    st, sse = evaluate(t, y, x, n_nl, lo, hi, yscale, r, J, theta)
    x_out[:n_nl] = x
    theta_out[:] = theta
    if st != OK:
        return INIT_INVALID, 0, 0, np.inf
    hist[0] = sse
    n_hist = 1

    JtJ = np.zeros((n_nl, n_nl))
    g = np.zeros(n_nl)

    _normal(J, r, JtJ, g)
    mu = 0.0
    for a in range(n_nl):
        if JtJ[a, a] > mu:
            mu = JtJ[a, a]
    mu *= tau
    if not mu > 0.0:
        mu = tau
    streak_mu = mu

    M = np.empty((n_nl, n_nl))
    neg_g = np.empty(n_nl)
    delta = np.empty(n_nl)
    x_try = np.empty(n_nl)
    status = MAX_ITERS
    it = 0
    while it < max_iters:
        if _gradient_cosine(J, r, n_nl) <= grad_tol:
            status = CONVERGED_GRAD
            break
        if _stationary_to_rounding(JtJ, g, sse):
            status = CONVERGED_GRAD
            break
        it += 1
        for a in range(n_nl):
            for b in range(n_nl):
                M[a, b] = JtJ[a, b]
            M[a, a] += mu
            neg_g[a] = -g[a]
        solved = _chol_solve(M, neg_g, delta)
        dnorm = 0.0
        xnorm = 0.0
        for a in range(n_nl):
            x_try[a] = x[a] + delta[a]
            dnorm += delta[a] * delta[a]
            xnorm += x[a] * x[a]
        small = solved and np.sqrt(dnorm) <= step_tol * (np.sqrt(xnorm) + step_tol)
        accepted = False
        if solved:
            st, sse_try = evaluate(t, y, x_try, n_nl, lo, hi, yscale, r_try, J_try, theta_try)
            if st == OK and sse_try < sse:
                accepted = True
        if accepted:
            x[:] = x_try
            sse = sse_try
            r, r_try = r_try, r
            J, J_try = J_try, J
            theta, theta_try = theta_try, theta
            hist[n_hist] = sse
            n_hist += 1
            _normal(J, r, JtJ, g)
            mu /= nu
            streak_mu = mu
        else:
            mu *= nu
        if small:
            status = CONVERGED_STEP
            break
        if not accepted and mu > REJECT_LIMIT * streak_mu:
            status = ALL_REJECTED
            break

    x_out[:n_nl] = x
    theta_out[:] = theta
    return status, it, n_hist, sse


@njit(cache=True, nogil=True)
def multistart(t, y, inits, lo, hi, max_iters, grad_tol, step_tol, tau, nu,
               x_out, theta_out, status_out, iters_out, sse_out):
    hist = np.empty(max_iters + 1)
    for k in range(inits.shape[0]):
        st, it, nh, sse = lm(t, y, inits[k], lo, hi, max_iters, grad_tol, step_tol,
                             tau, nu, x_out[k], theta_out[k], hist)
        status_out[k] = st
        iters_out[k] = it
        sse_out[k] = sse
