"""Random matrix ensembles with exact support-diameter bookkeeping.

Laws are sampled through fixed transformations of uniform / standard-normal
draws, so that multiplying an ensemble's ``scale`` produces pathwise-scaled
matrices under the same stream (the negation and scaling invariants of the
harness rely on this).  Streams are counter-based (Philox) and keyed by
(seed, stream-id): reproducible and order-independent across workers.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "UnboundedSupportError",
    "BoundedLaw",
    "EnsembleSpec",
    "RngStream",
    "derive_stream",
    "sample_matrix",
    "sample_selfadjoint",
    "sample_gaussian_hermitian",
    "sample",
    "effective_diameter",
]

_MASK64 = (1 << 64) - 1


class UnboundedSupportError(ValueError):
    """An operation required a bounded entry distribution (finite diameter D)."""


def derive_stream(label: str, index: int) -> int:
    """Stable 64-bit stream id for (experiment label, trial index)."""
    h = hashlib.blake2b(f"{label}:{index}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream: same (seed, stream) -> identical samples."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, label: str, index: int) -> "RngStream":
        return RngStream(self.seed, derive_stream(f"{self.stream}:{label}", index))


@dataclass(frozen=True)
class BoundedLaw:
    """Scalar entry distribution with known support diameter.

    Kinds: rademacher, uniform(a, b), two_point(v1, v2, prob of v1),
    discrete(values, probs), bernoulli01(prob of 1), complex_disc_uniform(radius),
    gaussian(mean, variance) -- the last has infinite diameter and is accepted
    only by the Gaussian comparison machinery.
    """

    kind: str
    params: Tuple = ()

    @classmethod
    def rademacher(cls) -> "BoundedLaw":
        return cls("rademacher")

    @classmethod
    def uniform(cls, a: float, b: float) -> "BoundedLaw":
        if not b > a:
            raise ValueError(f"uniform law needs b > a, got ({a}, {b})")
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def two_point(cls, v1, v2, prob: float = 0.5) -> "BoundedLaw":
        if not 0.0 < prob < 1.0:
            raise ValueError("two_point probability must be in (0, 1)")
        return cls("two_point", (complex(v1), complex(v2), float(prob)))

    @classmethod
    def discrete(cls, values, probs) -> "BoundedLaw":
        values = tuple(complex(v) for v in values)
        probs = tuple(float(p) for p in probs)
        if len(values) != len(probs) or not values:
            raise ValueError("discrete law needs matching nonempty values/probs")
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("discrete probabilities must be nonnegative and sum to 1")
        return cls("discrete", (values, probs))

    @classmethod
    def bernoulli01(cls, prob: float = 0.5) -> "BoundedLaw":
        if not 0.0 < prob < 1.0:
            raise ValueError("bernoulli01 probability must be in (0, 1)")
        return cls("bernoulli01", (float(prob),))

    @classmethod
    def complex_disc_uniform(cls, radius: float) -> "BoundedLaw":
        if radius <= 0:
            raise ValueError("disc radius must be positive")
        return cls("complex_disc_uniform", (float(radius),))

    @classmethod
    def gaussian(cls, mean: float = 0.0, variance: float = 1.0) -> "BoundedLaw":
        if variance < 0:
            raise ValueError("variance must be nonnegative")
        return cls("gaussian", (float(mean), float(variance)))

    # -- structure ---------------------------------------------------------

    @property
    def is_bounded(self) -> bool:
        return self.kind != "gaussian"

    @property
    def is_real(self) -> bool:
        if self.kind in ("rademacher", "uniform", "bernoulli01", "gaussian"):
            return True
        if self.kind == "complex_disc_uniform":
            return False
        if self.kind == "two_point":
            return self.params[0].imag == 0.0 and self.params[1].imag == 0.0
        return all(v.imag == 0.0 for v in self.params[0])

    @property
    def diameter(self) -> float:
        if self.kind == "rademacher":
            return 2.0
        if self.kind == "uniform":
            a, b = self.params
            return b - a
        if self.kind == "two_point":
            v1, v2, _ = self.params
            return abs(v1 - v2)
        if self.kind == "discrete":
            vals = np.asarray(self.params[0])
            return float(np.abs(vals[:, None] - vals[None, :]).max())
        if self.kind == "bernoulli01":
            return 1.0
        if self.kind == "complex_disc_uniform":
            return 2.0 * self.params[0]
        return math.inf

    def interval_support(self) -> Tuple[float, float]:
        """Smallest real interval containing the support (real bounded laws)."""
        if not (self.is_real and self.is_bounded):
            raise UnboundedSupportError(f"{self.kind} has no bounded real interval support")
        if self.kind == "rademacher":
            return (-1.0, 1.0)
        if self.kind == "uniform":
            return self.params
        if self.kind == "two_point":
            v = sorted((self.params[0].real, self.params[1].real))
            return (v[0], v[1])
        if self.kind == "bernoulli01":
            return (0.0, 1.0)
        vals = [v.real for v in self.params[0]]
        return (min(vals), max(vals))

    def abs_mean(self) -> float:
        """E|x|, used by median-growth floors."""
        if self.kind == "rademacher":
            return 1.0
        if self.kind == "uniform":
            a, b = self.params
            if a >= 0:
                return (a + b) / 2.0
            if b <= 0:
                return -(a + b) / 2.0
            return (a * a + b * b) / (2.0 * (b - a))
        if self.kind == "two_point":
            v1, v2, pr = self.params
            return pr * abs(v1) + (1.0 - pr) * abs(v2)
        if self.kind == "discrete":
            vals, probs = self.params
            return float(sum(p * abs(v) for v, p in zip(vals, probs)))
        if self.kind == "bernoulli01":
            return self.params[0]
        if self.kind == "complex_disc_uniform":
            return 2.0 * self.params[0] / 3.0
        mean, var = self.params
        sd = math.sqrt(var)
        if sd == 0.0:
            return abs(mean)
        from scipy.stats import norm
        return sd * math.sqrt(2.0 / math.pi) * math.exp(-mean * mean / (2 * var)) \
            + mean * (1.0 - 2.0 * norm.cdf(-mean / sd))

    # -- sampling ----------------------------------------------------------

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        if self.kind == "rademacher":
            return np.where(gen.random(size) < 0.5, -1.0, 1.0)
        if self.kind == "uniform":
            a, b = self.params
            return a + (b - a) * gen.random(size)
        if self.kind == "two_point":
            v1, v2, pr = self.params
            out = np.where(gen.random(size) < pr, v1, v2)
            return out.real if self.is_real else out
        if self.kind == "discrete":
            vals, probs = self.params
            cum = np.cumsum(probs)
            idx = np.searchsorted(cum, gen.random(size), side="right")
            idx = np.minimum(idx, len(vals) - 1)
            out = np.asarray(vals)[idx]
            return out.real if self.is_real else out
        if self.kind == "bernoulli01":
            return (gen.random(size) < self.params[0]).astype(float)
        if self.kind == "complex_disc_uniform":
            r = self.params[0] * np.sqrt(gen.random(size))
            ang = 2.0 * np.pi * gen.random(size)
            return r * np.exp(1j * ang)
        mean, var = self.params
        return mean + math.sqrt(var) * gen.standard_normal(size)

    def support_contains(self, x, tol: float = 1e-12) -> np.ndarray:
        x = np.asarray(x)
        if self.kind == "rademacher":
            return np.isin(x, [-1.0, 1.0])
        if self.kind == "uniform":
            a, b = self.params
            return (x.imag == 0) & (x.real >= a - tol) & (x.real <= b + tol) \
                if np.iscomplexobj(x) else (x >= a - tol) & (x <= b + tol)
        if self.kind == "two_point":
            v1, v2, _ = self.params
            return (np.abs(x - v1) <= tol) | (np.abs(x - v2) <= tol)
        if self.kind == "discrete":
            vals = np.asarray(self.params[0])
            return np.min(np.abs(x[..., None] - vals), axis=-1) <= tol
        if self.kind == "bernoulli01":
            return np.isin(x, [0.0, 1.0])
        if self.kind == "complex_disc_uniform":
            return np.abs(x) <= self.params[0] * (1.0 + 1e-12) + tol
        return np.isfinite(np.real(x))


@dataclass(frozen=True)
class EnsembleSpec:
    """Matrix dimensions, entry layout and laws.

    layouts: "rectangular" (iid entries, a single law or an m x n law grid),
    "selfadjoint" (real diagonal law + off-diagonal law, either used directly
    or in rotated-product form w*(alpha + i*beta)), "gaussian_hermitian"
    (symmetric Gaussian comparison ensemble).  ``scale`` multiplies every
    sampled matrix (and the effective diameter) pathwise.
    """

    layout: str
    m: int
    n: int
    law: Optional[BoundedLaw] = None
    law_grid: Optional[Tuple[Tuple[BoundedLaw, ...], ...]] = None
    diag_law: Optional[BoundedLaw] = None
    offdiag_law: Optional[BoundedLaw] = None
    offdiag_mode: str = "direct"  # "direct" | "rotated"
    alpha_law: Optional[BoundedLaw] = None
    beta_law: Optional[BoundedLaw] = None
    phases: complex = complex(1.0)
    diag_variance: float = math.sqrt(2.0)
    offdiag_variance: float = 1.0
    diag_mean: float = 0.0
    offdiag_mean: float = 0.0
    scale: float = 1.0

    @classmethod
    def rectangular(cls, m: int, n: int, law: Optional[BoundedLaw] = None,
                    law_grid=None, scale: float = 1.0) -> "EnsembleSpec":
        if (law is None) == (law_grid is None):
            raise ValueError("provide exactly one of law / law_grid")
        if law_grid is not None:
            law_grid = tuple(tuple(row) for row in law_grid)
            if len(law_grid) != m or any(len(row) != n for row in law_grid):
                raise ValueError("law grid shape must match (m, n)")
        return cls("rectangular", int(m), int(n), law=law, law_grid=law_grid, scale=scale)

    @classmethod
    def selfadjoint(cls, n: int, diag_law: BoundedLaw, offdiag_law: BoundedLaw,
                    scale: float = 1.0) -> "EnsembleSpec":
        spec = cls("selfadjoint", int(n), int(n), diag_law=diag_law,
                   offdiag_law=offdiag_law, offdiag_mode="direct", scale=scale)
        spec._validate_selfadjoint()
        return spec

    @classmethod
    def selfadjoint_rotated(cls, n: int, diag_law: BoundedLaw, alpha_law: BoundedLaw,
                            beta_law: BoundedLaw, phases: complex = 1.0,
                            scale: float = 1.0) -> "EnsembleSpec":
        spec = cls("selfadjoint", int(n), int(n), diag_law=diag_law,
                   offdiag_mode="rotated", alpha_law=alpha_law, beta_law=beta_law,
                   phases=complex(phases), scale=scale)
        spec._validate_selfadjoint()
        return spec

    @classmethod
    def gaussian_hermitian(cls, n: int, diag_variance: float = math.sqrt(2.0),
                           offdiag_variance: float = 1.0, diag_mean: float = 0.0,
                           offdiag_mean: float = 0.0, scale: float = 1.0) -> "EnsembleSpec":
        if diag_variance < 0 or offdiag_variance < 0:
            raise ValueError("variances must be nonnegative")
        return cls("gaussian_hermitian", int(n), int(n), diag_variance=float(diag_variance),
                   offdiag_variance=float(offdiag_variance), diag_mean=float(diag_mean),
                   offdiag_mean=float(offdiag_mean), scale=scale)

    def _validate_selfadjoint(self):
        if self.m != self.n:
            raise ValueError("selfadjoint layout requires m == n")
        if self.diag_law is None or not (self.diag_law.is_real and self.diag_law.is_bounded):
            raise ValueError("selfadjoint diagonal law must be real with bounded interval support")
        if self.offdiag_mode == "direct":
            if self.offdiag_law is None or not self.offdiag_law.is_bounded:
                raise ValueError("direct off-diagonal law must be bounded")
        elif self.offdiag_mode == "rotated":
            for name, law in (("alpha", self.alpha_law), ("beta", self.beta_law)):
                if law is None or not (law.is_real and law.is_bounded):
                    raise ValueError(f"rotated mode needs bounded real {name} law")
            if abs(self.phases) > 1.0 + 1e-12:
                raise ValueError("rotated-product phase must satisfy |w| <= 1")
        else:
            raise ValueError(f"unknown offdiag mode {self.offdiag_mode!r}")

    @property
    def is_hermitian(self) -> bool:
        return self.layout in ("selfadjoint", "gaussian_hermitian")

    def with_scale(self, scale: float) -> "EnsembleSpec":
        from dataclasses import replace
        return replace(self, scale=scale)

    def label(self) -> str:
        if self.layout == "rectangular":
            what = self.law.kind if self.law is not None else "grid"
            return f"rect-{what}-{self.m}x{self.n}"
        if self.layout == "selfadjoint":
            return f"selfadjoint-{self.offdiag_mode}-{self.n}"
        return f"gaussian-hermitian-{self.n}"


def effective_diameter(spec: EnsembleSpec) -> float:
    """Smallest D such that the ensemble satisfies its layout's hypotheses:
    rectangular entries have diameter <= D; selfadjoint diagonals live on an
    interval of length <= sqrt(2) D and off-diagonals have diameter <= D
    (rotated form: alpha/beta interval lengths <= D)."""
    if spec.layout == "gaussian_hermitian":
        raise UnboundedSupportError("gaussian ensembles have unbounded support (D = inf)")
    if spec.layout == "rectangular":
        if spec.law is not None:
            laws = [spec.law]
        else:
            laws = [l for row in spec.law_grid for l in row]
        if any(not l.is_bounded for l in laws):
            raise UnboundedSupportError("rectangular ensemble contains an unbounded entry law")
        return abs(spec.scale) * max(l.diameter for l in laws)
    lo, hi = spec.diag_law.interval_support()
    d_from_diag = (hi - lo) / math.sqrt(2.0)
    if spec.offdiag_mode == "direct":
        d_from_off = spec.offdiag_law.diameter
    else:
        la, lb = spec.alpha_law.interval_support(), spec.beta_law.interval_support()
        d_from_off = max(la[1] - la[0], lb[1] - lb[0])
    return abs(spec.scale) * max(d_from_diag, d_from_off)


def sample_matrix(spec: EnsembleSpec, rng: RngStream) -> np.ndarray:
    """Sample a rectangular iid matrix; deterministic under a fixed stream."""
    if spec.layout != "rectangular":
        raise ValueError(f"sample_matrix needs a rectangular layout, got {spec.layout}")
    gen = rng.generator()
    if spec.law is not None:
        A = spec.law.sample(gen, (spec.m, spec.n))
    else:
        first = spec.law_grid[0][0].sample(gen, ())
        A = np.empty((spec.m, spec.n), dtype=np.asarray(first).dtype)
        A[0, 0] = first
        for i in range(spec.m):
            for j in range(spec.n):
                if i == 0 and j == 0:
                    continue
                A[i, j] = spec.law_grid[i][j].sample(gen, ())
    return A * spec.scale


def sample_selfadjoint(spec: EnsembleSpec, rng: RngStream) -> np.ndarray:
    """Sample a Hermitian matrix: real diagonal, independent upper triangle,
    conjugate-mirrored lower triangle (A == A* exactly)."""
    if spec.layout != "selfadjoint":
        raise ValueError(f"sample_selfadjoint needs a selfadjoint layout, got {spec.layout}")
    gen = rng.generator()
    n = spec.n
    diag = np.real(spec.diag_law.sample(gen, n))
    iu = np.triu_indices(n, 1)
    if spec.offdiag_mode == "direct":
        upper = spec.offdiag_law.sample(gen, iu[0].size)
    else:
        alpha = np.real(spec.alpha_law.sample(gen, iu[0].size))
        beta = np.real(spec.beta_law.sample(gen, iu[0].size))
        upper = spec.phases * (alpha + 1j * beta)
    cplx = np.iscomplexobj(upper)
    A = np.zeros((n, n), dtype=complex if cplx else float)
    A[iu] = upper
    A = A + A.conj().T
    A[np.arange(n), np.arange(n)] = diag
    return A * spec.scale


def sample_gaussian_hermitian(n: int, rng: RngStream, diag_variance: float = math.sqrt(2.0),
                              offdiag_variance: float = 1.0, diag_mean: float = 0.0,
                              offdiag_mean: float = 0.0) -> np.ndarray:
    """Symmetric Gaussian matrix: independent upper triangle, variance caps
    diag_variance on the diagonal and offdiag_variance off it."""
    if diag_variance < 0 or offdiag_variance < 0:
        raise ValueError("variances must be nonnegative")
    gen = rng.generator()
    diag = diag_mean + math.sqrt(diag_variance) * gen.standard_normal(n)
    iu = np.triu_indices(n, 1)
    upper = offdiag_mean + math.sqrt(offdiag_variance) * gen.standard_normal(iu[0].size)
    A = np.zeros((n, n))
    A[iu] = upper
    A = A + A.T
    A[np.arange(n), np.arange(n)] = diag
    return A


def sample(spec: EnsembleSpec, rng: RngStream) -> np.ndarray:
    """Layout dispatcher used by the Monte Carlo harness."""
    if spec.layout == "rectangular":
        return sample_matrix(spec, rng)
    if spec.layout == "selfadjoint":
        return sample_selfadjoint(spec, rng)
    A = sample_gaussian_hermitian(spec.n, rng, spec.diag_variance, spec.offdiag_variance,
                                  spec.diag_mean, spec.offdiag_mean)
    return A * spec.scale
