"""Matrix functionals: lp->lq operator norms, Hermitian spectra, singular values,
Schatten and Ky Fan norms, and partial eigenvalue sums.

Operator norms between lp spaces have no closed form outside a few classical
cases; ``opnorm_pq`` combines those closed forms with a monotone multi-start
dual-ascent iteration whose output is always a certified feasible lower bound.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from scipy import optimize

from .vecnorms import lp_norm, _conjugate

__all__ = [
    "opnorm_pq",
    "opnorm_is_exact",
    "opnorm_pq_oracle",
    "hoelder_vec_bound",
    "eigvals_hermitian",
    "singular_values",
    "schatten_norm",
    "kyfan_norm",
    "partial_eig_sums",
]

_HERM_TOL = 1e-12


def _check_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("expected a nonempty 2-d matrix")
    if not np.all(np.isfinite(A.real)) or (np.iscomplexobj(A) and not np.all(np.isfinite(A.imag))):
        raise ValueError("matrix entries must be finite")
    return A


def _check_exponents(p: float, q: float):
    if p < 1 or q < 1:
        raise ValueError(f"operator norm exponents must satisfy p, q >= 1; got p={p}, q={q}")


def _phase(z: np.ndarray) -> np.ndarray:
    a = np.abs(z)
    with np.errstate(invalid="ignore", divide="ignore"):
        ph = np.where(a > 0, z / np.where(a > 0, a, 1.0), 1.0)
    return ph


def _dual_q(y: np.ndarray, q: float) -> np.ndarray:
    # u with ||u||_{q'} = 1 and Re<u, y> = ||y||_q, columnwise
    a = np.abs(y)
    if q == 1:
        return _phase(y)
    if math.isinf(q):
        u = np.zeros_like(y)
        idx = a.argmax(axis=0)
        cols = np.arange(y.shape[1])
        u[idx, cols] = _phase(y[idx, cols])
        return u
    nrm = np.maximum((a ** q).sum(axis=0) ** (1.0 / q), 1e-300)
    return _phase(y) * (a / nrm) ** (q - 1.0)


def _primal_p(z: np.ndarray, p: float) -> np.ndarray:
    # x with ||x||_p = 1 maximizing Re<z, x>, columnwise
    a = np.abs(z)
    if math.isinf(p):
        return _phase(z)
    if p == 1:
        x = np.zeros_like(z)
        idx = a.argmax(axis=0)
        cols = np.arange(z.shape[1])
        x[idx, cols] = _phase(z[idx, cols])
        return x
    pp = _conjugate(p)
    nrm = np.maximum((a ** pp).sum(axis=0) ** (1.0 / pp), 1e-300)
    return _phase(z) * (a / nrm) ** (pp - 1.0)


def _normalize_p(x: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(x)
    if math.isinf(p):
        nrm = a.max(axis=0)
    else:
        nrm = (a ** p).sum(axis=0) ** (1.0 / p)
    nrm = np.maximum(nrm, 1e-300)
    return x / nrm


def _qnorms(y: np.ndarray, q: float) -> np.ndarray:
    a = np.abs(y)
    if math.isinf(q):
        return a.max(axis=0)
    return (a ** q).sum(axis=0) ** (1.0 / q)


def _ascent(A: np.ndarray, p: float, q: float, n_random: int, maxiter: int, tol: float,
            seed: int) -> float:
    m, n = A.shape
    cplx = np.iscomplexobj(A)
    rng = np.random.default_rng(seed)
    cols = [np.eye(n, dtype=complex if cplx else float)]
    r = rng.standard_normal((n, n_random))
    if cplx:
        r = r + 1j * rng.standard_normal((n, n_random))
    cols.append(r)
    cols.append(np.ones((n, 1), dtype=complex if cplx else float))
    X = _normalize_p(np.concatenate(cols, axis=1), p)
    best = 0.0
    prev = np.zeros(X.shape[1])
    for _ in range(maxiter):
        Y = A @ X
        vals = _qnorms(Y, q)
        best = max(best, float(vals.max()))
        if np.all(np.abs(vals - prev) <= tol * np.maximum(1.0, vals)):
            break
        prev = vals
        U = _dual_q(Y, q)
        Z = A.conj().T @ U
        X = _primal_p(Z, p)
    return best


def opnorm_is_exact(p: float, q: float) -> bool:
    """True when opnorm_pq evaluates a closed form rather than an ascent bound."""
    return p == 1 or math.isinf(q) or (p == 2 and q == 2)


def opnorm_pq(A, p: float, q: float, *, n_random: int = 16, maxiter: int = 500,
              tol: float = 1e-12, seed: int = 0x5EED) -> float:
    """Operator norm of A from lp^n to lq^m; exact when a closed form exists,
    otherwise the best value found by monotone dual ascent from multiple starts
    (always a feasible lower bound on the true norm)."""
    A = _check_matrix(A)
    _check_exponents(p, q)
    if p == 1:
        return max(lp_norm(A[:, j], q) for j in range(A.shape[1]))
    if math.isinf(q):
        pp = _conjugate(p)
        return max(lp_norm(A[i, :], pp) for i in range(A.shape[0]))
    if p == 2 and q == 2:
        return float(np.linalg.svd(A, compute_uv=False)[0])
    primal = _ascent(A, p, q, n_random, maxiter, tol, seed)
    dual = _ascent(A.conj().T, _conjugate(q), _conjugate(p), n_random, maxiter, tol, seed + 1)
    return max(primal, dual)


def opnorm_pq_oracle(A, p: float, q: float, resolution: int = 4096) -> float:
    """Brute-force lp->lq norm for real matrices with at most 3 columns.

    Dense parametrization of the lp unit sphere (angular grid for n=2,
    spherical grid for n=3) followed by local refinement of the best peaks.
    """
    A = _check_matrix(A)
    if np.iscomplexobj(A):
        raise ValueError("the grid oracle handles real matrices only")
    _check_exponents(p, q)
    A = A.astype(float)
    m, n = A.shape
    if n > 3:
        raise ValueError(f"unsupported dimension: oracle needs n <= 3, got n={n}")
    if n == 1:
        return lp_norm(A[:, 0], q)

    def pnormalize(U):
        if math.isinf(p):
            nrm = np.abs(U).max(axis=0)
        else:
            nrm = (np.abs(U) ** p).sum(axis=0) ** (1.0 / p)
        return U / np.maximum(nrm, 1e-300)

    if n == 2:
        theta = np.linspace(0.0, 2.0 * np.pi, int(resolution), endpoint=False)
        U = np.vstack([np.cos(theta), np.sin(theta)])
        vals = _qnorms(A @ pnormalize(U), q)

        def f(th):
            u = np.array([[math.cos(th)], [math.sin(th)]])
            return -float(_qnorms(A @ pnormalize(u), q)[0])

        best = float(vals.max())
        order = np.argsort(vals)[::-1][:8]
        h = 2.0 * np.pi / resolution
        for i in order:
            res = optimize.minimize_scalar(f, bounds=(theta[i] - h, theta[i] + h),
                                           method="bounded",
                                           options={"xatol": 1e-12})
            best = max(best, -float(res.fun))
        return best

    n_theta = max(64, int(math.sqrt(2.0 * resolution)))
    n_phi = max(32, n_theta // 2)
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    phi = np.linspace(0.0, np.pi, n_phi)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    U = np.vstack([(np.sin(P) * np.cos(T)).ravel(),
                   (np.sin(P) * np.sin(T)).ravel(),
                   np.cos(P).ravel()])
    vals = _qnorms(A @ pnormalize(U), q)

    def f3(ang):
        th, ph = ang
        u = np.array([[math.sin(ph) * math.cos(th)],
                      [math.sin(ph) * math.sin(th)],
                      [math.cos(ph)]])
        return -float(_qnorms(A @ pnormalize(u), q)[0])

    best = float(vals.max())
    order = np.argsort(vals)[::-1][:8]
    for i in order:
        x0 = np.array([T.ravel()[i], P.ravel()[i]])
        res = optimize.minimize(f3, x0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
        best = max(best, -float(res.fun))
    return best


def hoelder_vec_bound(A, p: float, q: float) -> float:
    """Entrywise lr norm banner bound with r = min{p', q}, valid for 1 < p <= 2 <= q < inf."""
    A = _check_matrix(A)
    if not (1.0 < p <= 2.0 <= q) or math.isinf(q):
        raise ValueError(f"need 1 < p <= 2 <= q < inf; got p={p}, q={q}")
    r = min(_conjugate(p), q)
    return lp_norm(A.ravel(), r)


def eigvals_hermitian(A) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, sorted nonincreasingly.

    Inputs Hermitian to within 1e-12 relative Frobenius deviation are silently
    symmetrized; larger deviations raise.
    """
    A = _check_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got {A.shape}")
    scale = max(float(np.linalg.norm(A)), 1e-300)
    dev = float(np.linalg.norm(A - A.conj().T))
    if dev > _HERM_TOL * scale * 10:
        raise ValueError(f"matrix is not Hermitian (relative deviation {dev / scale:.2e})")
    H = (A + A.conj().T) / 2.0
    vals = np.linalg.eigvalsh(H)
    return vals[::-1].copy()


def singular_values(A) -> np.ndarray:
    """Singular values of an m x n matrix, nonincreasing."""
    A = _check_matrix(A)
    return np.linalg.svd(A, compute_uv=False)


def schatten_norm(A, p: float) -> float:
    """lp norm of the singular values; p in [1, inf]."""
    if p < 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    return lp_norm(singular_values(A), p)


def kyfan_norm(A, k: int) -> float:
    """Sum of the k largest singular values."""
    s = singular_values(A)
    if not 1 <= k <= s.size:
        raise ValueError(f"Ky Fan index k={k} out of range [1, {s.size}]")
    return float(s[:k].sum())


def partial_eig_sums(A, k: int) -> Tuple[float, float]:
    """(F_k, G_k): sums of the k largest and k smallest eigenvalues of Hermitian A."""
    lam = eigvals_hermitian(A)
    n = lam.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    fk = float(lam[:k].sum())
    gk = float(lam[n - k:].sum())
    return fk, gk
