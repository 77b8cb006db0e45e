"""Named tail-bound envelopes t -> bound(t).

Each envelope is the right-hand side of a two-sided deviation inequality for a
matrix statistic around its center, parametrized by the entry support diameter
D and the statistic's shape parameters.  All curves are positive and
nonincreasing; values above 1 are vacuous as probability bounds and are
flagged as such by the harness verdict rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .vecnorms import UnconditionalNorm, ke_bound, ke_numeric
from .vecnorms import _conjugate

__all__ = ["BoundEnvelope", "make_envelope", "ENVELOPE_IDS"]


def _interior_rate(k: int, D: float, form: str, sharp_coeff: float) -> float:
    # denominator of t^2 in the exponent; sharp uses (sqrt(k)+sqrt(k-1))^2
    if form == "sharp":
        return sharp_coeff * (math.sqrt(k) + math.sqrt(k - 1)) ** 2 * D * D
    if form == "weak":
        return 4.0 * sharp_coeff * k * D * D
    raise ValueError(f"unknown envelope form {form!r}")


@dataclass(frozen=True)
class BoundEnvelope:
    """A named envelope curve with its parameters; call it on t (scalar or array)."""

    id: str
    params: Dict[str, object] = field(default_factory=dict)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self._raw(t) * float(self.params.get("scale", 1.0))
        return out if out.ndim else float(out)

    def _raw(self, t):
        p = self.params
        eid = self.id
        if eid == "thm11":
            return 4.0 * np.exp(-0.25 * (t / p["D"]) ** p["r"])
        if eid == "thm12_extreme":
            return 4.0 * np.exp(-t * t / (8.0 * p["D"] ** 2))
        if eid == "thm12_interior":
            rate = _interior_rate(p["k"], p["D"], p.get("form", "weak"), 8.0)
            return 8.0 * np.exp(-t * t / rate)
        if eid == "cor22":
            ld = p.get("L", 1.0) * p["D"]
            return 4.0 * np.exp(-0.25 * (t / ld) ** p["q"])
        if eid == "prop24":
            ld = p.get("L", 1.0) * p["D"]
            ke = self._ke_curve(t / ld)
            return 4.0 * np.exp(-0.25 * ke * ke)
        if eid == "schatten_high":
            return 4.0 * np.exp(-t * t / (4.0 * p["D"] ** 2))
        if eid == "schatten_low":
            rate = 4.0 * p["n"] ** (2.0 / p["p"] - 1.0) * p["D"] ** 2
            return 4.0 * np.exp(-t * t / rate)
        if eid == "ui_norm":
            return 4.0 * np.exp(-t * t / (4.0 * p["n"] * p["D"] ** 2))
        if eid == "thm33_s1":
            return 4.0 * np.exp(-t * t / (4.0 * p["D"] ** 2))
        if eid == "thm33_sk":
            rate = _interior_rate(p["k"], p["D"], p.get("form", "weak"), 4.0)
            return 8.0 * np.exp(-t * t / rate)
        if eid == "mixed_range":
            rate = 4.0 * p["m"] ** (2.0 / p["q"] - 1.0) \
                * p["n"] ** (2.0 / _conjugate(p["p"]) - 1.0) * p["D"] ** 2
            return 4.0 * np.exp(-t * t / rate)
        if eid == "gaussian":
            L = p.get("L", 1.0)
            return np.exp(-t * t / (2.0 * L * L))
        raise ValueError(f"unknown envelope id {eid!r}")

    def _ke_curve(self, u):
        E: UnconditionalNorm = self.params["E"]
        use = self.params.get("bound", "closed_form")
        r = self.params.get("r")
        u = np.atleast_1d(u)
        out = np.empty_like(u)
        for i, ui in enumerate(u):
            if ui <= 0:
                out[i] = 0.0
            elif use == "closed_form":
                out[i] = ke_bound(E, float(ui), r)
            else:
                out[i] = ke_numeric(E, float(ui))
        out = np.where(np.isfinite(out), out, 1e6)
        return out if np.asarray(u).ndim else float(out[0])

    @property
    def coefficient(self) -> float:
        """Supremum of the raw curve (its value as t -> 0+)."""
        base = 8.0 if self.id in ("thm12_interior", "thm33_sk") else \
            (1.0 if self.id == "gaussian" else 4.0)
        return base * float(self.params.get("scale", 1.0))

    def label(self) -> str:
        keys = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items())
                         if k not in ("E",))
        return f"{self.id}({keys})"


_REQUIRED = {
    "thm11": {"D", "r"},
    "thm12_extreme": {"D"},
    "thm12_interior": {"D", "k"},
    "cor22": {"D", "q"},
    "prop24": {"D", "E"},
    "schatten_high": {"D", "p"},
    "schatten_low": {"D", "p", "n"},
    "ui_norm": {"D", "n"},
    "thm33_s1": {"D"},
    "thm33_sk": {"D", "k"},
    "mixed_range": {"D", "p", "q", "m", "n"},
    "gaussian": {"L"},
}

ENVELOPE_IDS = tuple(sorted(_REQUIRED))


def make_envelope(envelope_id: str, **params) -> BoundEnvelope:
    """Build a validated BoundEnvelope from its id and parameters."""
    if envelope_id not in _REQUIRED:
        raise ValueError(f"unknown envelope id {envelope_id!r}; known: {ENVELOPE_IDS}")
    missing = _REQUIRED[envelope_id] - set(params)
    if missing:
        raise ValueError(f"envelope {envelope_id!r} missing parameters {sorted(missing)}")
    p = dict(params)
    if "D" in p and not (np.isfinite(p["D"]) and p["D"] > 0):
        raise ValueError("envelope needs a finite positive diameter D")
    if envelope_id == "thm11" and p["r"] < 2:
        raise ValueError("thm11 envelope needs r = min{p', q} >= 2")
    if envelope_id == "cor22" and p["q"] < 2:
        raise ValueError("cor22 envelope needs q >= 2")
    if envelope_id == "schatten_high" and p["p"] < 2:
        raise ValueError("schatten_high needs p >= 2")
    if envelope_id == "schatten_low" and not 1 <= p["p"] < 2:
        raise ValueError("schatten_low needs 1 <= p < 2")
    if envelope_id == "mixed_range" and not (1 < p["q"] <= 2 <= p["p"] < math.inf):
        raise ValueError("mixed_range needs 1 < q <= 2 <= p < inf")
    if envelope_id in ("thm12_interior", "thm33_sk"):
        if int(p["k"]) < 2:
            raise ValueError("interior envelopes need k >= 2")
        p.setdefault("form", "weak")
    if "scale" in p and p["scale"] <= 0:
        raise ValueError("envelope scale must be positive")
    return BoundEnvelope(envelope_id, p)
