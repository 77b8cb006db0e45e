"""Convex-hull distance on product spaces and exhaustive isoperimetry checks.

For a product space Omega = Omega_1 x ... x Omega_N, a subset A and a point x,
the convex distance is

    f_c(A, x) = min{ |z| : z in conv{ h(x, y) : y in A } },

where h(x, y) is the 0/1 coordinate disagreement pattern.  The isoperimetric
inequality  integral exp(f_c^2/4) dP <= 1 / P(A)  is checked by exact
enumeration of small spaces; every f_c value is produced by a min-norm-point
solver with a Wolfe optimality certificate, because a proven theorem is being
asserted against it and any failure must implicate the solver, not the bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .vecnorms import UnconditionalNorm, ke_numeric

__all__ = [
    "ProductSpace",
    "hamming_pattern",
    "convex_distance",
    "convex_distance_q",
    "min_norm_point_01",
    "verify_isoperimetry",
    "IsoperimetryReport",
    "verify_ke_dist_bound",
    "KeDistReport",
    "dist_to_hull",
]

_MAX_ENUM = 1 << 20


def _points_equal(a, b) -> bool:
    if isinstance(a, (tuple, list, np.ndarray)) or isinstance(b, (tuple, list, np.ndarray)):
        return np.array_equal(np.asarray(a), np.asarray(b))
    return a == b


def hamming_pattern(x: Sequence, y: Sequence) -> np.ndarray:
    """Coordinatewise disagreement indicator h(x, y) in {0,1}^N."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return np.array([0.0 if _points_equal(a, b) else 1.0 for a, b in zip(x, y)])


# ---------------------------------------------------------------------------
# min-norm point over the convex hull of 0/1 patterns
# ---------------------------------------------------------------------------


def _affine_min_norm(Vs: np.ndarray):
    # min |Vs^T a|^2 subject to sum(a) = 1 (no sign constraint); KKT solve
    k = Vs.shape[0]
    G = Vs @ Vs.T
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = 2.0 * G
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    a = sol[:k]
    return a, float(a @ G @ a)


def _exact_small_hull(V: np.ndarray) -> float:
    # exact face enumeration; V has at most a handful of rows
    best = math.inf
    rows = range(V.shape[0])
    for r in range(1, V.shape[0] + 1):
        for S in itertools.combinations(rows, r):
            Vs = V[list(S)]
            if r == 1:
                best = min(best, float(Vs[0] @ Vs[0]))
                continue
            a, val = _affine_min_norm(Vs)
            if a.min() >= -1e-12:
                best = min(best, max(val, 0.0))
    return math.sqrt(max(best, 0.0))


def _nnls_weights(Vact: np.ndarray) -> Optional[np.ndarray]:
    # min |Vact^T a| over the simplex, via penalty-augmented NNLS
    k = Vact.shape[0]
    B = Vact.T
    rho = 128.0 * (1.0 + float(np.abs(B).max(initial=0.0)))
    aug = np.vstack([B, rho * np.ones((1, k))])
    b = np.zeros(aug.shape[0])
    b[-1] = rho
    try:
        a, _ = optimize.nnls(aug, b)
    except Exception:
        return None
    s = a.sum()
    if s <= 0:
        return None
    return a / s


def min_norm_point_01(patterns, tol: float = 1e-10, max_iter: int = 100000) -> Tuple[float, float]:
    """Minimum Euclidean norm over the convex hull of 0/1 vectors.

    Frank-Wolfe with away steps plus periodic active-set projection; exact
    face enumeration for hulls with few vertices.  Returns (norm, wolfe_gap);
    the gap certifies |result^2 - optimum^2| <= gap.
    """
    V = np.unique(np.asarray(patterns, dtype=np.int8), axis=0)
    s = V.sum(axis=1)
    if bool((s == 0).any()):
        return 0.0, 0.0
    order = np.argsort(s, kind="stable")
    V = V[order]
    s = s[order]
    if V.shape[0] > 48:
        # drop rows that coordinatewise dominate another row: the hull point of
        # minimum norm never needs them (replacing v by the dominated u <= v
        # only shrinks every nonnegative coordinate of a hull combination)
        Vf64 = V.astype(np.float64)
        G = Vf64 @ Vf64.T
        sf = s.astype(np.float64)
        dom = (G >= sf[:, None] - 0.5) & (sf[:, None] < sf[None, :])
        keep = ~dom.any(axis=0)
        V = V[keep]
        s = s[keep]
    Vf = V.astype(np.float64)
    M, N = Vf.shape
    if M == 1:
        return math.sqrt(float(s[0])), 0.0
    if M <= 6:
        return _exact_small_hull(Vf), 0.0

    weights = {0: 1.0}
    z = Vf[0].copy()
    f = float(z @ z)
    gap = math.inf
    for it in range(max_iter):
        Vz = Vf @ z
        i_fw = int(np.argmin(Vz))
        gap = 2.0 * (f - float(Vz[i_fw]))
        if gap <= tol:
            break
        act = np.fromiter(weights.keys(), dtype=np.int64)
        i_aw = int(act[int(np.argmax(Vz[act]))])
        fw_gain = f - float(Vz[i_fw])
        aw_gain = float(Vz[i_aw]) - f
        use_fw = fw_gain >= aw_gain or len(weights) == 1
        if use_fw:
            d = Vf[i_fw] - z
            gamma_max = 1.0
        else:
            a = weights[i_aw]
            d = z - Vf[i_aw]
            gamma_max = a / (1.0 - a) if a < 1.0 else 1.0
        dd = float(d @ d)
        if dd <= 1e-18:
            break
        gamma = min(gamma_max, max(0.0, -float(z @ d) / dd))
        if gamma <= 0.0:
            break
        if use_fw:
            for k in weights:
                weights[k] *= (1.0 - gamma)
            weights[i_fw] = weights.get(i_fw, 0.0) + gamma
        else:
            for k in weights:
                weights[k] *= (1.0 + gamma)
            weights[i_aw] -= gamma
        weights = {k: v for k, v in weights.items() if v > 1e-15}
        z = z + gamma * d
        f = float(z @ z)
        if (it + 1) % 8 == 0 and len(weights) > 1:
            act = np.fromiter(weights.keys(), dtype=np.int64)
            a = _nnls_weights(Vf[act])
            if a is not None:
                z_new = Vf[act].T @ a
                f_new = float(z_new @ z_new)
                if f_new <= f:
                    z, f = z_new, f_new
                    weights = {int(i): float(v) for i, v in zip(act, a) if v > 1e-15}
    return math.sqrt(max(f, 0.0)), gap


def convex_distance(A: Sequence[Sequence], x: Sequence) -> float:
    """Talagrand convex-hull distance f_c(A, x) with certified accuracy."""
    A = list(A)
    if not A:
        raise ValueError("f_c(A, x) needs a nonempty A")
    patterns = np.array([hamming_pattern(x, y) for y in A])
    val, gap = min_norm_point_01(patterns)
    if gap > 1e-8 * max(1.0, val * val):
        raise RuntimeError(f"min-norm-point certificate failed (gap {gap:.2e})")
    return val


def convex_distance_q(A: Sequence[Sequence], x: Sequence, q: float,
                      tol: float = 1e-8, max_iter: int = 20000) -> float:
    """lq variant f_q(A, x) = min ||z||_q over the same hull, 1 < q < inf.

    Plain Frank-Wolfe with golden-section line search; no inequality is
    attached to this generalization, it is exposed for exploration only.
    """
    if not 1.0 < q < math.inf:
        raise ValueError("convex_distance_q needs 1 < q < inf")
    A = list(A)
    if not A:
        raise ValueError("f_q(A, x) needs a nonempty A")
    V = np.unique(np.array([hamming_pattern(x, y) for y in A]), axis=0)
    if bool((V.sum(axis=1) == 0).any()):
        return 0.0
    z = V[int(np.argmin((V ** q).sum(axis=1)))].astype(float).copy()
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(max_iter):
        nz = float((z ** q).sum() ** (1.0 / q))
        if nz == 0.0:
            return 0.0
        grad = (z / nz) ** (q - 1.0)
        scores = V @ grad
        i = int(np.argmin(scores))
        gap = float(z @ grad) - float(scores[i])
        if gap <= tol:
            break
        d = V[i] - z

        def fval(g):
            w = z + g * d
            return float((w ** q).sum() ** (1.0 / q))

        a, b = 0.0, 1.0
        c1, c2 = b - invphi * (b - a), a + invphi * (b - a)
        f1, f2 = fval(c1), fval(c2)
        for _ in range(60):
            if f1 <= f2:
                b, c2, f2 = c2, c1, f1
                c1 = b - invphi * (b - a)
                f1 = fval(c1)
            else:
                a, c1, f1 = c1, c2, f2
                c2 = a + invphi * (b - a)
                f2 = fval(c2)
        z = z + 0.5 * (a + b) * d
    return float((z ** q).sum() ** (1.0 / q))


# ---------------------------------------------------------------------------
# product spaces and exhaustive verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductSpace:
    """Finite product probability space; factor points are scalars or tuples."""

    supports: Tuple[Tuple, ...]
    probs: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.supports) != len(self.probs):
            raise ValueError("supports and probs must align factor by factor")
        for pts, pr in zip(self.supports, self.probs):
            if len(pts) != len(pr) or not pts:
                raise ValueError("each factor needs matching nonempty points/probs")
            if any(p < 0 for p in pr) or abs(sum(pr) - 1.0) > 1e-12:
                raise ValueError("factor probabilities must be nonnegative and sum to 1")

    @classmethod
    def uniform_binary(cls, n: int) -> "ProductSpace":
        return cls(tuple((0, 1) for _ in range(n)),
                   tuple((0.5, 0.5) for _ in range(n)))

    @classmethod
    def uniform(cls, supports) -> "ProductSpace":
        supports = tuple(tuple(pts) for pts in supports)
        return cls(supports, tuple(tuple(1.0 / len(p) for _ in p) for p in supports))

    @property
    def n_factors(self) -> int:
        return len(self.supports)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(p) for p in self.supports)

    @property
    def n_points(self) -> int:
        return int(np.prod([len(p) for p in self.supports], dtype=np.int64))

    def enumerate_indices(self) -> np.ndarray:
        if self.n_points > _MAX_ENUM:
            raise ValueError(f"space too large to enumerate ({self.n_points} > {_MAX_ENUM})")
        grids = np.meshgrid(*[np.arange(k) for k in self.sizes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int16)

    def point(self, idx) -> Tuple:
        return tuple(self.supports[j][int(i)] for j, i in enumerate(idx))

    def point_probs(self, idx_rows: np.ndarray) -> np.ndarray:
        out = np.ones(idx_rows.shape[0])
        for j in range(self.n_factors):
            out *= np.asarray(self.probs[j])[idx_rows[:, j]]
        return out


@dataclass
class IsoperimetryReport:
    n_factors: int
    prob_A: float
    lhs: float
    rhs: float
    margin: float
    passed: bool
    max_fc: float
    tail_t: List[float] = field(default_factory=list)
    tail_prob: List[float] = field(default_factory=list)
    tail_bound: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_factors": self.n_factors,
            "prob_A": self.prob_A,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": self.passed,
            "max_fc": self.max_fc,
            "tail": [{"t": t, "prob": p, "bound": b}
                     for t, p, b in zip(self.tail_t, self.tail_prob, self.tail_bound)],
        }


def _fc_all_points(space: ProductSpace, a_mask: np.ndarray):
    idx = space.enumerate_indices()
    a_rows = idx[a_mask]
    fc = np.zeros(idx.shape[0])
    for i in range(idx.shape[0]):
        if a_mask[i]:
            continue
        patterns = (idx[i][None, :] != a_rows)
        val, gap = min_norm_point_01(patterns)
        if gap > 1e-8 * max(1.0, val * val):
            raise RuntimeError(f"min-norm-point certificate failed (gap {gap:.2e})")
        fc[i] = val
    return idx, fc


def verify_isoperimetry(space: ProductSpace, a_mask, t_grid=None) -> IsoperimetryReport:
    """Exact check of  integral exp(f_c^2/4) dP <= 1/P(A)  by full enumeration.

    ``a_mask`` is a boolean indicator over the enumeration order of the space.
    Also reports the Chebyshev tail form P(f_c >= t) <= exp(-t^2/4)/P(A).
    """
    a_mask = np.asarray(a_mask, dtype=bool)
    if a_mask.shape != (space.n_points,):
        raise ValueError(f"indicator must have shape ({space.n_points},)")
    if not a_mask.any():
        raise ValueError("P(A) = 0: isoperimetry bound is undefined")
    idx, fc = _fc_all_points(space, a_mask)
    probs = space.point_probs(idx)
    p_a = float(probs[a_mask].sum())
    lhs = float(np.dot(probs, np.exp(fc * fc / 4.0)))
    rhs = 1.0 / p_a
    if t_grid is None:
        t_grid = np.linspace(0.0, math.sqrt(space.n_factors), 9)[1:]
    tail_prob = [float(probs[fc >= t].sum()) for t in t_grid]
    tail_bound = [math.exp(-t * t / 4.0) / p_a for t in t_grid]
    return IsoperimetryReport(
        n_factors=space.n_factors,
        prob_A=p_a,
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        passed=bool(lhs <= rhs * (1.0 + 1e-9)),
        max_fc=float(fc.max()),
        tail_t=[float(t) for t in t_grid],
        tail_prob=tail_prob,
        tail_bound=tail_bound,
    )


# ---------------------------------------------------------------------------
# distance in an E-sum of normed factors, and the K_E(dist) <= f_c check
# ---------------------------------------------------------------------------


def _as_factor_vectors(point) -> List[np.ndarray]:
    return [np.atleast_1d(np.asarray(c, dtype=float)) for c in point]


def _sum_norm_value(E: UnconditionalNorm, x_parts, combo_parts) -> float:
    comps = [float(np.linalg.norm(xp - cp)) for xp, cp in zip(x_parts, combo_parts)]
    return E.value(np.array(comps))


def dist_to_hull(E: UnconditionalNorm, x_point, a_points, restarts: int = 8,
                 seed: int = 7) -> float:
    """Distance from x to conv(A) in the E-sum norm of Euclidean factors,
    minimized over convex-combination weights on a simplex (convex problem;
    SLSQP multi-start plus pairwise golden-section polish)."""
    x_parts = _as_factor_vectors(x_point)
    a_parts = [_as_factor_vectors(y) for y in a_points]
    k = len(a_parts)
    if k == 0:
        raise ValueError("distance to the hull of an empty set is undefined")

    def combo(theta):
        return [sum(t * yp[j] for t, yp in zip(theta, a_parts)) for j in range(len(x_parts))]

    def g(theta):
        return _sum_norm_value(E, x_parts, combo(theta))

    if k == 1:
        return g(np.array([1.0]))

    rng = np.random.default_rng(seed)
    starts = [np.full(k, 1.0 / k)]
    starts += [rng.dirichlet(np.ones(k)) for _ in range(restarts)]
    eye = np.eye(k)
    vals = [g(eye[i]) for i in range(k)]
    starts.append(eye[int(np.argmin(vals))])

    best_theta, best = None, math.inf
    cons = [{"type": "eq", "fun": lambda th: th.sum() - 1.0}]
    for th0 in starts:
        res = optimize.minimize(g, th0, bounds=[(0.0, 1.0)] * k, constraints=cons,
                                method="SLSQP", options={"maxiter": 400, "ftol": 1e-14})
        cand = np.clip(res.x, 0.0, 1.0)
        ssum = cand.sum()
        if ssum <= 0:
            continue
        cand = cand / ssum
        val = g(cand)
        if val < best:
            best, best_theta = val, cand

    # pairwise mass-transfer polish with exact 1-d golden search
    theta = best_theta
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(24):
        improved = False
        for i in range(k):
            for j in range(i + 1, k):
                tot = theta[i] + theta[j]
                if tot <= 0:
                    continue

                def h(u):
                    th = theta.copy()
                    th[i] = u * tot
                    th[j] = (1.0 - u) * tot
                    return g(th)

                a, b = 0.0, 1.0
                c1, c2 = b - invphi * (b - a), a + invphi * (b - a)
                f1, f2 = h(c1), h(c2)
                for _ in range(48):
                    if f1 <= f2:
                        b, c2, f2 = c2, c1, f1
                        c1 = b - invphi * (b - a)
                        f1 = h(c1)
                    else:
                        a, c1, f1 = c1, c2, f2
                        c2 = a + invphi * (b - a)
                        f2 = h(c2)
                u = 0.5 * (a + b)
                val = h(u)
                if val < best - 1e-14:
                    theta = theta.copy()
                    theta[i] = u * tot
                    theta[j] = (1.0 - u) * tot
                    best = val
                    improved = True
        if not improved:
            break
    return best


@dataclass
class KeDistReport:
    dist: float
    ke_of_dist: float
    fc: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {"dist": self.dist, "ke_of_dist": self.ke_of_dist, "fc": self.fc,
                "slack": self.slack, "passed": self.passed}


def verify_ke_dist_bound(space: ProductSpace, E: UnconditionalNorm, a_indices,
                         x_index, slack: float = 1e-8) -> KeDistReport:
    """Check K_E(dist(x, conv A)) <= f_c(A, x) for one instance.

    Factors must live in normed spaces of diameter <= 1; A and x are given by
    factor-index tuples into the space's supports.
    """
    if E.dim != space.n_factors:
        raise ValueError("norm dimension must equal the number of factors")
    for pts in space.supports:
        vecs = [np.atleast_1d(np.asarray(p, dtype=float)) for p in pts]
        for a in range(len(vecs)):
            for b in range(a + 1, len(vecs)):
                if np.linalg.norm(vecs[a] - vecs[b]) > 1.0 + 1e-9:
                    raise ValueError("factor support has diameter > 1")
    a_points = [space.point(i) for i in a_indices]
    x_point = space.point(x_index)
    fc = convex_distance(a_points, x_point)
    d = dist_to_hull(E, x_point, a_points)
    ke = 0.0 if d <= 1e-12 else ke_numeric(E, d)
    passed = bool(ke <= fc + slack)
    return KeDistReport(dist=d, ke_of_dist=ke, fc=fc, slack=slack, passed=passed)
