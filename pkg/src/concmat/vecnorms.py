"""Vector norms (lp, Lorentz, Orlicz) and the box-constrained Euclidean modulus K_E.

For a 1-unconditional norm ``||.||_E`` on R^N the modulus

    K_E(t) = inf{ |x|_2 : ||x||_E >= t, ||x||_inf <= 1 },    inf(empty) = +inf,

converts Lipschitz control in E into Euclidean isoperimetric control.  This
module evaluates the three norm families, computes K_E numerically with a
certificate, and provides the closed-form lower bounds for K_E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import optimize

__all__ = [
    "LorentzWeights",
    "OrliczFunction",
    "UnconditionalNorm",
    "lp_norm",
    "lorentz_norm",
    "orlicz_norm",
    "ke_numeric",
    "ke_bound",
]

_CONVEXITY_GRID = np.geomspace(1e-3, 1e3, 64)


def lp_norm(v, p: float) -> float:
    """lp norm of a real or complex vector; p in [1, inf]."""
    if p < 1:
        raise ValueError(f"lp_norm requires p >= 1, got p={p}")
    a = np.abs(np.asarray(v, dtype=complex)).real
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(np.sqrt((a * a).sum()))
    m = a.max()
    if m == 0.0:
        return 0.0
    # scale out the max to avoid overflow for large p
    return float(m * ((a / m) ** p).sum() ** (1.0 / p))


def _conjugate(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class LorentzWeights:
    """Strictly positive, nonincreasing weight sequence of a Lorentz norm."""

    w: Tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d sequence")
        if not np.all(w > 0):
            raise ValueError("Lorentz weights must be strictly positive")
        if np.any(np.diff(w) > 1e-15):
            raise ValueError("Lorentz weights must be nonincreasing")
        object.__setattr__(self, "w", tuple(float(x) for x in w))

    def __len__(self):
        return len(self.w)

    def asarray(self) -> np.ndarray:
        return np.asarray(self.w, dtype=float)


def lorentz_norm(v, weights: LorentzWeights, p: float) -> float:
    """Weighted lp norm of the nonincreasing rearrangement of |v|."""
    if p < 1:
        raise ValueError(f"lorentz_norm requires p >= 1, got p={p}")
    a = np.abs(np.asarray(v, dtype=complex)).real
    w = weights.asarray()
    if a.shape != w.shape:
        raise ValueError(f"length mismatch: vector {a.shape} vs weights {w.shape}")
    a = np.sort(a)[::-1]
    m = a.max(initial=0.0)
    if m == 0.0:
        return 0.0
    return float(m * np.dot(w, (a / m) ** p) ** (1.0 / p))


class OrliczFunction:
    """Convex nondecreasing psi: [0, inf) -> [0, inf) with psi(0) = 0, psi -> inf.

    Three constructions are supported: ``power`` (t^p), ``scaled_power``
    (c * t^p) and ``piecewise_linear`` (convex polyline through given knots,
    extended linearly by its last slope).  Validity (monotonicity, convexity
    via midpoint inequality on a geometric grid, growth) is checked at
    construction time.
    """

    def __init__(self, kind: str, *, p: Optional[float] = None, c: Optional[float] = None,
                 knots: Optional[Tuple[Tuple[float, float], ...]] = None):
        self.kind = kind
        self.p = p
        self.c = c
        self.knots = tuple((float(a), float(b)) for (a, b) in knots) if knots is not None else None
        self._validate()

    @classmethod
    def power(cls, p: float) -> "OrliczFunction":
        return cls("power", p=float(p))

    @classmethod
    def scaled_power(cls, c: float, p: float) -> "OrliczFunction":
        return cls("scaled_power", p=float(p), c=float(c))

    @classmethod
    def piecewise_linear(cls, knots) -> "OrliczFunction":
        return cls("piecewise_linear", knots=tuple(tuple(k) for k in knots))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return t ** self.p
        if self.kind == "scaled_power":
            return self.c * t ** self.p
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        out = np.interp(t, xs, ys)
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        beyond = t > xs[-1]
        out = np.where(beyond, ys[-1] + slope * (t - xs[-1]), out)
        return out if out.ndim else float(out)

    def _validate(self):
        if self.kind in ("power", "scaled_power"):
            if self.p is None or self.p < 1:
                raise ValueError("power-type psi needs exponent p >= 1 for convexity")
            if self.kind == "scaled_power" and (self.c is None or self.c <= 0):
                raise ValueError("scaled_power needs a positive scale")
        elif self.kind == "piecewise_linear":
            if self.knots is None or len(self.knots) < 2:
                raise ValueError("piecewise_linear needs at least two knots")
            xs = np.array([k[0] for k in self.knots])
            ys = np.array([k[1] for k in self.knots])
            if xs[0] != 0.0 or ys[0] != 0.0:
                raise ValueError("piecewise_linear must start at the knot (0, 0)")
            if np.any(np.diff(xs) <= 0):
                raise ValueError("knot abscissae must be strictly increasing")
            slopes = np.diff(ys) / np.diff(xs)
            if np.any(slopes < -1e-15) or np.any(np.diff(slopes) < -1e-12):
                raise ValueError("knots must describe a nondecreasing convex polyline")
            if slopes[-1] <= 0:
                raise ValueError("final slope must be positive so that psi -> inf")
        else:
            raise ValueError(f"unknown Orlicz kind {self.kind!r}")
        g = _CONVEXITY_GRID
        vals = self(g)
        if float(self(0.0)) != 0.0:
            raise ValueError("psi(0) must be 0")
        if np.any(np.diff(vals) < -1e-12):
            raise ValueError("psi must be nondecreasing")
        mid = self((g[:-1] + g[1:]) / 2.0)
        if np.any(mid > (vals[:-1] + vals[1:]) / 2.0 + 1e-10):
            raise ValueError("psi failed the midpoint convexity check")

    def inverse(self, y: float) -> float:
        """Smallest u >= 0 with psi(u) >= y (bisection; inf if unreachable on [0, big])."""
        if y <= 0:
            return 0.0
        hi = 1.0
        for _ in range(200):
            if float(self(hi)) >= y:
                break
            hi *= 2.0
        else:
            return math.inf
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(self(mid)) >= y:
                hi = mid
            else:
                lo = mid
        return hi

    def __eq__(self, other):
        return (isinstance(other, OrliczFunction)
                and (self.kind, self.p, self.c, self.knots) == (other.kind, other.p, other.c, other.knots))

    def __hash__(self):
        return hash((self.kind, self.p, self.c, self.knots))

    def __repr__(self):
        if self.kind == "power":
            return f"OrliczFunction.power({self.p})"
        if self.kind == "scaled_power":
            return f"OrliczFunction.scaled_power({self.c}, {self.p})"
        return f"OrliczFunction.piecewise_linear({self.knots})"


def orlicz_norm(v, psi: OrliczFunction) -> float:
    """Luxemburg norm inf{rho > 0 : sum psi(|v_j| / rho) <= 1} by bisection."""
    a = np.abs(np.asarray(v, dtype=complex)).real
    if a.size == 0 or a.max() == 0.0:
        return 0.0

    def total(rho):
        return float(np.sum(psi(a / rho)))

    # bracket: lo infeasible (sum > 1), hi feasible (sum <= 1)
    hi = max(float(a.max()), 1e-300)
    for _ in range(400):
        if total(hi) <= 1.0:
            break
        hi *= 2.0
    lo = hi
    for _ in range(400):
        lo *= 0.5
        if total(lo) > 1.0:
            break
    else:
        return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return float(hi)


@dataclass(frozen=True)
class UnconditionalNorm:
    """A 1-unconditional norm on R^N: lq, Lorentz or Orlicz."""

    kind: str  # "lq" | "lorentz" | "orlicz"
    dim: int
    q: Optional[float] = None
    weights: Optional[LorentzWeights] = None
    p: Optional[float] = None
    psi: Optional[OrliczFunction] = None

    @classmethod
    def lq(cls, q: float, dim: int) -> "UnconditionalNorm":
        if q < 1:
            raise ValueError("lq norm needs q >= 1")
        return cls("lq", dim=int(dim), q=float(q))

    @classmethod
    def lorentz(cls, weights, p: float) -> "UnconditionalNorm":
        if not isinstance(weights, LorentzWeights):
            weights = LorentzWeights(tuple(weights))
        if p < 1 or math.isinf(p):
            raise ValueError("Lorentz norm needs finite p >= 1")
        return cls("lorentz", dim=len(weights), weights=weights, p=float(p))

    @classmethod
    def orlicz(cls, psi: OrliczFunction, dim: int) -> "UnconditionalNorm":
        return cls("orlicz", dim=int(dim), psi=psi)

    def value(self, v) -> float:
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {v.shape}")
        if self.kind == "lq":
            return lp_norm(v, self.q)
        if self.kind == "lorentz":
            return lorentz_norm(v, self.weights, self.p)
        return orlicz_norm(v, self.psi)

    def full_ones_value(self) -> float:
        return self.value(np.ones(self.dim))

    def label(self) -> str:
        if self.kind == "lq":
            return f"l{self.q:g}^{self.dim}"
        if self.kind == "lorentz":
            return f"lorentz(p={self.p:g}, N={self.dim})"
        return f"orlicz({self.psi!r}, N={self.dim})"


# ---------------------------------------------------------------------------
# K_E numeric solver
# ---------------------------------------------------------------------------
#
# By unconditionality and symmetry of the objective the minimizer can be taken
# in [0,1]^N sorted nonincreasingly.  For lq/lorentz with exponent >= 2 the
# separable Lagrangian x^2 - lam*w*x^e has its per-coordinate minimum at an
# endpoint {0,1}, so the optimum is (1,...,1,c,0,...,0) and enumeration over
# the number of ones is exact.  For exponent < 2 the per-coordinate minimum is
# interior, the multiplier map is continuous, and bisection on the multiplier
# closes the duality gap exactly.


def _ke_enumerate_prefix(weight_arr: np.ndarray, e: float, t: float) -> float:
    # candidates (1^k, c, 0^...) with sum_{j<=k} w_j + w_{k+1} c^e = t^e
    w = weight_arr
    n = w.size
    te = t ** e
    prefix = np.concatenate([[0.0], np.cumsum(w)])
    best = math.inf
    for k in range(n + 1):
        if prefix[k] >= te * (1.0 - 1e-12):
            best = min(best, math.sqrt(k))
            continue
        if k < n:
            frac = (te - prefix[k]) / w[k]
            if 0.0 <= frac <= 1.0 + 1e-12:
                c = min(frac, 1.0) ** (1.0 / e)
                best = min(best, math.sqrt(k + c * c))
    return best


def _ke_dual_subhomogeneous(weight_arr: np.ndarray, e: float, t: float) -> float:
    # exponent e in [1, 2): per-coordinate minimizer of x^2 - lam*w*x^e on [0,1]
    w = weight_arr
    te = t ** e

    def x_of(lam):
        return np.minimum(1.0, (lam * e * w / 2.0) ** (1.0 / (2.0 - e)))

    def g(lam):
        return float(np.dot(w, x_of(lam) ** e))

    hi = 1.0
    for _ in range(600):
        if g(hi) >= te:
            break
        hi *= 2.0
    else:
        return math.sqrt(w.size)  # norm constraint equals full box
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) >= te:
            hi = mid
        else:
            lo = mid
    x = x_of(hi)
    return float(np.sqrt((x * x).sum()))


def _ke_lq(q: float, n: int, t: float) -> float:
    if math.isinf(q):
        return t if t <= 1.0 else math.inf
    if q >= 2.0:
        return _ke_enumerate_prefix(np.ones(n), q, t)
    # equal spread is the unique separable dual solution for q < 2
    return float(t * n ** (0.5 - 1.0 / q))


def _ke_lorentz(weights: LorentzWeights, p: float, t: float) -> float:
    w = weights.asarray()
    if p >= 2.0:
        return _ke_enumerate_prefix(w, p, t)
    return _ke_dual_subhomogeneous(w, p, t)


def _ke_orlicz(psi: OrliczFunction, n: int, t: float) -> float:
    # Convex surrogate for the feasible set: h(x) = sum psi(x_j / t) >= 1.
    candidates = []

    def psi1(u):
        return float(psi(u / t))

    def solve_level(target):
        # smallest u in [0,1] with psi(u/t) >= target, or None
        if target <= 0:
            return 0.0
        if psi1(1.0) < target - 1e-15:
            return None
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if psi1(mid) >= target:
                hi = mid
            else:
                lo = mid
        return hi

    # (a) ones + one fractional coordinate
    top = psi1(1.0)
    for k in range(n):
        residual = 1.0 - k * top
        if residual <= 0:
            candidates.append(math.sqrt(k))
            break
        c = solve_level(residual)
        if c is not None:
            candidates.append(math.sqrt(k + c * c))
    if n * top >= 1.0:
        candidates.append(math.sqrt(n))

    # (b) equal spread
    a = solve_level(1.0 / n)
    if a is not None:
        candidates.append(math.sqrt(n) * a)

    # (c) two-level mix from the separable Lagrangian dual
    grid = np.unique(np.concatenate([np.linspace(0.0, 1.0, 513),
                                     np.geomspace(1e-8, 1.0, 257)]))
    psig = np.asarray(psi(grid / t), dtype=float)

    def argmin_levels(lam):
        vals = grid * grid - lam * psig
        m = vals.min()
        near = np.flatnonzero(vals <= m + 1e-12 * max(1.0, abs(m)))
        return grid[near[0]], grid[near[-1]]

    def hval(lam):
        lo_lvl, hi_lvl = argmin_levels(lam)
        return n * psi1(hi_lvl)

    lam_hi = 1.0
    for _ in range(300):
        if hval(lam_hi) >= 1.0:
            break
        lam_hi *= 2.0
    lam_lo = 0.0
    for _ in range(120):
        mid = 0.5 * (lam_lo + lam_hi)
        if hval(mid) >= 1.0:
            lam_hi = mid
        else:
            lam_lo = mid
    u_lvl, _ = argmin_levels(lam_lo) if lam_lo > 0 else (0.0, 0.0)
    _, v_lvl = argmin_levels(lam_hi)
    pu, pv = psi1(u_lvl), psi1(v_lvl)
    for n_v in range(n):
        residual = 1.0 - n_v * pv - (n - 1 - n_v) * pu
        if residual < 0:
            continue
        wlv = solve_level(residual)
        if wlv is None:
            continue
        candidates.append(math.sqrt(n_v * v_lvl ** 2 + wlv ** 2 + (n - 1 - n_v) * u_lvl ** 2))

    best = min(c for c in candidates if np.isfinite(c))

    # (d) SLSQP polish of the best candidate (feasibility re-verified)
    x0 = np.full(n, min(1.0, best / math.sqrt(n)))
    try:
        res = optimize.minimize(
            lambda x: float((x * x).sum()),
            x0,
            jac=lambda x: 2.0 * x,
            bounds=[(0.0, 1.0)] * n,
            constraints=[{"type": "ineq",
                          "fun": lambda x: float(np.sum(psi(np.abs(x) / t))) - 1.0}],
            method="SLSQP",
            options={"maxiter": 300, "ftol": 1e-14},
        )
        if res.success:
            x = np.clip(res.x, 0.0, 1.0)
            if float(np.sum(psi(x / t))) >= 1.0 - 1e-10:
                val = float(np.linalg.norm(x))
                if val < best:
                    best = val
    except Exception:
        pass
    return best


def ke_numeric(E: UnconditionalNorm, t: float) -> float:
    """K_E(t) = inf{|x| : ||x||_E >= t, ||x||_inf <= 1}; +inf when infeasible."""
    if t <= 0:
        raise ValueError(f"ke_numeric requires t > 0, got {t}")
    total = E.full_ones_value()
    if t > total * (1.0 + 1e-12):
        return math.inf
    t = min(t, total)
    if E.kind == "lq":
        return _ke_lq(E.q, E.dim, t)
    if E.kind == "lorentz":
        return _ke_lorentz(E.weights, E.p, t)
    return _ke_orlicz(E.psi, E.dim, t)


def ke_numeric_grid_oracle(E: UnconditionalNorm, t: float, steps: int = 32) -> float:
    """Brute-force K_E over the lattice {0, 1/steps, ..., 1}^N (N <= 4).

    Independent of the solver above; accuracy is of order sqrt(N)/steps.
    """
    n = E.dim
    if n > 4:
        raise ValueError("grid oracle supports dimension <= 4 only")
    axis = np.linspace(0.0, 1.0, steps + 1)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    if E.kind == "lq":
        vals = np.sum(pts ** E.q, axis=1) ** (1.0 / E.q) if not math.isinf(E.q) else pts.max(axis=1)
    elif E.kind == "lorentz":
        srt = np.sort(pts, axis=1)[:, ::-1]
        vals = np.dot(srt ** E.p, E.weights.asarray()) ** (1.0 / E.p)
    else:
        vals = np.array([orlicz_norm(row, E.psi) for row in pts])
    feas = vals >= t - 1e-12
    if not feas.any():
        return math.inf
    return float(np.sqrt((pts[feas] ** 2).sum(axis=1).min()))


# ---------------------------------------------------------------------------
# closed-form lower bounds for K_E
# ---------------------------------------------------------------------------


def ke_bound(E: UnconditionalNorm, t: float, r: Optional[float] = None) -> float:
    """Closed-form lower bound for K_E(t).

    lq (q >= 2): t^(q/2).  Lorentz with weights in l_r, max{1, 2/p} <= r' < inf:
    ||w||_r^(-r'/2) * t^(p r'/2).  Orlicz: inf_{0 < u <= 1} u / sqrt(psi(u/t)).
    """
    if t <= 0:
        raise ValueError(f"ke_bound requires t > 0, got {t}")
    if E.kind == "lq":
        if E.q < 2:
            raise ValueError("the lq lower bound t^(q/2) is only valid for q >= 2")
        return float(t ** (E.q / 2.0))
    if E.kind == "lorentz":
        if r is None:
            raise ValueError("Lorentz bound needs the summability exponent r")
        if r <= 1:
            raise ValueError("need r > 1 so that r' is finite")
        rp = 1.0 if math.isinf(r) else r / (r - 1.0)
        if rp < max(1.0, 2.0 / E.p) - 1e-12:
            raise ValueError(f"need r' >= max(1, 2/p); got r'={rp:g} for p={E.p:g}")
        w = E.weights.asarray()
        wr = float(w.max()) if math.isinf(r) else float((w ** r).sum() ** (1.0 / r))
        return float(wr ** (-rp / 2.0) * t ** (E.p * rp / 2.0))
    # Orlicz: 1-d minimization on a log grid with golden-section refinement
    psi = E.psi
    us = np.geomspace(1e-10, 1.0, 4000)
    vals = np.asarray(psi(us / t), dtype=float)
    ratio = np.where(vals > 0, us / np.sqrt(np.maximum(vals, 1e-300)), math.inf)
    i = int(np.argmin(ratio))
    if not np.isfinite(ratio[i]):
        return math.inf
    lo = us[max(i - 1, 0)]
    hi = us[min(i + 1, len(us) - 1)]

    def f(u):
        v = float(psi(u / t))
        return u / math.sqrt(v) if v > 0 else math.inf

    # golden-section refinement
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1, c2 = b - invphi * (b - a), a + invphi * (b - a)
    f1, f2 = f(c1), f(c2)
    for _ in range(120):
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = f(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = f(c2)
    return float(min(ratio[i], f1, f2))
