"""Pure numpy implementations of the hot kernels.

Signatures and semantics match the compiled ``_kernels`` extension exactly;
:mod:`steertrust.kernels` picks one of the two at import time.
"""
import numpy as np

BAND_LOW = 0.9995
BAND_HIGH = 1.0 - 1e-9
MAX_BISECTIONS = 200


def _deviation(theta, h):
    s = np.sin(0.5 * theta[:, None] * h)
    return 4.0 * np.sum(s * s, axis=1)


def calibrate_angles(h, targets):
    """Rotation angles ``theta`` with ``sum_k 4 sin^2(theta h_k / 2)`` in band.

    For each row ``h[r]`` (eigenvalues of a Hermitian direction) find ``theta``
    in ``[0, pi / max|h|]`` such that the deviation lies in
    ``[BAND_LOW * t, BAND_HIGH * t]``. On that interval the deviation is
    monotone. Rows whose target is out of reach get ``nan``.
    """
    h = np.ascontiguousarray(h, dtype=np.float64)
    t = np.ascontiguousarray(targets, dtype=np.float64)
    rows = h.shape[0]
    theta = np.zeros(rows)
    hmax = np.max(np.abs(h), axis=1)
    active = (t > 0.0) & (hmax > 0.0)
    theta[(t > 0.0) & ~(hmax > 0.0)] = np.nan
    if not np.any(active):
        return theta
    upper = np.where(active, np.pi / np.where(hmax > 0, hmax, 1.0), 0.0)
    lo_t = BAND_LOW * t
    hi_t = BAND_HIGH * t
    reach = _deviation(upper, h)
    unreachable = active & (reach < lo_t)
    theta[unreachable] = np.nan
    at_top = active & ~unreachable & (reach <= hi_t)
    theta[at_top] = upper[at_top]
    todo = active & ~unreachable & ~at_top
    lo = np.zeros(rows)
    hi = upper.copy()
    for _ in range(MAX_BISECTIONS):
        if not np.any(todo):
            break
        mid = 0.5 * (lo + hi)
        v = _deviation(mid, h)
        above = todo & (v > hi_t)
        below = todo & (v < lo_t)
        hit = todo & ~above & ~below
        theta[hit] = mid[hit]
        hi[above] = mid[above]
        lo[below] = mid[below]
        todo &= ~hit
    theta[todo] = lo[todo]
    return theta


def fact1_statistics(rhos, sigma, taus):
    """Imprecise-tomography reconstruction plus the per-sample proof quantities.

    Parameters
    ----------
    rhos : (S, d, d) complex
        True states.
    sigma : (m, d, d) complex
        Ideal basis, identity first.
    taus : (S, m, d, d) complex
        Observables actually measured, one set per sample.

    Returns
    -------
    inferred : (S, d, d) complex
        ``sum_i q_i sigma_i`` with ``q_i = Tr(rho tau_i^dagger) / d``,
        ``q_0 = Tr(rho)/d`` (the identity is measured exactly), then
        Hermitian-symmetrized.
    deviation : (S,)
        ``Tr((inferred - rho)(inferred - rho)^dagger)``.
    coef_err : (S,)
        ``max_i |Re r_i - Re q_i|`` against the ideal coefficients.
    self_min, self_max : (S,)
        Extremes of ``Re Tr(sigma_i tau_i^dagger)`` over ``i``.
    cross_max : (S,)
        ``max_{i != j} |Re Tr(tau_i sigma_j^dagger)|``.
    """
    rhos = np.asarray(rhos, dtype=np.complex128)
    sigma = np.asarray(sigma, dtype=np.complex128)
    taus = np.asarray(taus, dtype=np.complex128)
    d = sigma.shape[1]
    m = sigma.shape[0]
    q = np.einsum("sab,siab->si", rhos, taus.conj()) / d
    q[:, 0] = np.einsum("saa->s", rhos).real / d
    r = np.einsum("sab,iab->si", rhos, sigma.conj()) / d
    inferred = np.einsum("si,iab->sab", q, sigma)
    inferred = 0.5 * (inferred + np.conj(np.swapaxes(inferred, 1, 2)))
    diff = inferred - rhos
    deviation = np.sum(diff.real**2 + diff.imag**2, axis=(1, 2))
    coef_err = np.max(np.abs(r.real - q.real), axis=1)
    gram = np.einsum("siab,jab->sij", taus, sigma.conj()).real
    diag = np.einsum("sii->si", gram)
    self_min = diag.min(axis=1)
    self_max = diag.max(axis=1)
    off = np.abs(gram)
    off[:, np.arange(m), np.arange(m)] = 0.0
    cross_max = off.reshape(off.shape[0], -1).max(axis=1)
    return inferred, deviation, coef_err, self_min, self_max, cross_max


def strategy_values(F, chunk=4096):
    """Top eigenvalue of ``sum_y F[y, f(y)]`` for every deterministic ``f``.

    ``F`` has shape ``(n_inputs, n_outcomes, d, d)``. Strategies are indexed
    in lexicographic order of ``(f(0), ..., f(n-1))``, i.e. mixed radix with
    input 0 most significant.
    """
    F = np.asarray(F, dtype=np.complex128)
    n_in, n_out, d, _ = F.shape
    total = n_out**n_in
    values = np.empty(total)
    weights = n_out ** np.arange(n_in - 1, -1, -1)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = (idx[:, None] // weights[None, :]) % n_out
        ops = np.zeros((idx.size, d, d), dtype=np.complex128)
        for y in range(n_in):
            ops += F[y, digits[:, y]]
        ops = 0.5 * (ops + np.conj(np.swapaxes(ops, 1, 2)))
        values[start:start + idx.size] = np.linalg.eigvalsh(ops)[:, -1]
    return values
