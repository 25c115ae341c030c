"""Edge-weight laws and the keyed oracle that realizes {X_e} without storage.

A weight is ``inverse_cdf(u)`` where ``u`` comes from a keyed 64-bit mixer
applied to (seed, edge kind, word hash, z).  The same edge therefore carries
the same weight in every topology built from one oracle, which is what the
coupled experiments rely on.

Inverse CDFs, with ``u`` uniform on (0, 1):

    constant(c)             c
    uniform(a, b)           a + (b - a) u
    exp(rate)               -log1p(-u) / rate
    shifted_exp(c, rate)    c - log1p(-u) / rate
    pareto(scale, shape)    scale (1 - u)^(-1/shape)
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from . import _kernel
from .topology import LETTERS, EdgeKey, EdgeKind

MASK64 = (1 << 64) - 1


class InfiniteMean(ValueError):
    pass


# family -> (kernel id, parameter names)
FAMILIES = {
    "constant": (_kernel.CONSTANT, ("c",)),
    "uniform": (_kernel.UNIFORM, ("a", "b")),
    "exp": (_kernel.EXPONENTIAL, ("rate",)),
    "shifted_exp": (_kernel.SHIFTED_EXP, ("c", "rate")),
    "pareto": (_kernel.PARETO, ("scale", "shape")),
}
ALIASES = {"exponential": "exp", "shiftedexp": "shifted_exp", "shifted_exponential": "shifted_exp"}


@dataclass(frozen=True)
class WeightSpec:
    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown weight family {self.family!r}")
        names = FAMILIES[self.family][1]
        if len(self.params) != len(names):
            raise ValueError(f"{self.family} takes parameters {names}")
        if any(not math.isfinite(p) or p < 0 for p in self.params):
            raise ValueError(f"weight parameters must be finite and >= 0: {self}")
        if self.family == "uniform" and self.params[0] > self.params[1]:
            raise ValueError("uniform needs a <= b")
        if self.family in ("exp", "shifted_exp") and self.params[-1] <= 0:
            raise ValueError("rate must be > 0")
        if self.family == "pareto" and (self.params[0] <= 0 or self.params[1] <= 0):
            raise ValueError("pareto needs scale > 0 and shape > 0")

    @classmethod
    def constant(cls, c: float) -> "WeightSpec":
        return cls("constant", (float(c),))

    @classmethod
    def uniform(cls, a: float, b: float) -> "WeightSpec":
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def exponential(cls, rate: float) -> "WeightSpec":
        return cls("exp", (float(rate),))

    @classmethod
    def shifted_exp(cls, c: float, rate: float) -> "WeightSpec":
        return cls("shifted_exp", (float(c), float(rate)))

    @classmethod
    def pareto(cls, scale: float, shape: float) -> "WeightSpec":
        return cls("pareto", (float(scale), float(shape)))

    @classmethod
    def parse(cls, text: str) -> "WeightSpec":
        """Parse ``family(name=value, ...)``; positional values are also accepted."""
        m = re.fullmatch(r"\s*([A-Za-z_]+)\s*\((.*)\)\s*", text)
        if not m:
            raise ValueError(f"cannot parse weight spec {text!r}")
        family = m.group(1).lower()
        family = ALIASES.get(family, family)
        if family not in FAMILIES:
            raise ValueError(f"unknown weight family {family!r} in {text!r}")
        names = FAMILIES[family][1]
        values: dict[str, float] = {}
        body = m.group(2).strip()
        for pos, item in enumerate(body.split(",") if body else []):
            key, eq, val = item.partition("=")
            if eq:
                key = key.strip()
                if key not in names:
                    raise ValueError(f"{family} has no parameter {key!r}")
            else:
                if pos >= len(names):
                    raise ValueError(f"too many parameters in {text!r}")
                key, val = names[pos], key
            try:
                values[key] = float(val)
            except ValueError:
                raise ValueError(f"bad number {val.strip()!r} in {text!r}") from None
        missing = [n for n in names if n not in values]
        if missing:
            raise ValueError(f"{family} is missing {', '.join(missing)}")
        return cls(family, tuple(values[n] for n in names))

    def __str__(self) -> str:
        names = FAMILIES[self.family][1]
        return f"{self.family}(" + ",".join(f"{n}={v:g}" for n, v in zip(names, self.params)) + ")"

    def slug(self) -> str:
        names = FAMILIES[self.family][1]
        return self.family + "".join(f"-{n}{v:g}" for n, v in zip(names, self.params))

    @property
    def kernel_id(self) -> int:
        return FAMILIES[self.family][0]

    @property
    def floor(self) -> float:
        """Largest c >= 0 with P(X >= c) = 1."""
        return 0.0 if self.family == "exp" else self.params[0]

    def mean(self) -> float:
        f, p = self.family, self.params
        if f == "constant":
            return p[0]
        if f == "uniform":
            return (p[0] + p[1]) / 2
        if f == "exp":
            return 1 / p[0]
        if f == "shifted_exp":
            return p[0] + 1 / p[1]
        if p[1] <= 1:
            raise InfiniteMean(f"{self} has infinite mean (shape <= 1)")
        return p[1] / (p[1] - 1) * p[0]

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        f, p = self.family, self.params
        if f == "constant":
            return (x >= p[0]).astype(float)
        if f == "uniform":
            if p[1] == p[0]:
                return (x >= p[0]).astype(float)
            return np.clip((x - p[0]) / (p[1] - p[0]), 0.0, 1.0)
        if f == "exp":
            return np.where(x > 0, -np.expm1(-p[0] * np.maximum(x, 0)), 0.0)
        if f == "shifted_exp":
            return np.where(x > p[0], -np.expm1(-p[1] * np.maximum(x - p[0], 0)), 0.0)
        return np.where(x > p[0], 1 - (p[0] / np.maximum(x, p[0])) ** p[1], 0.0)

    def from_uniform(self, u: float) -> float:
        p = self.params + (0.0,) * (2 - len(self.params))
        return float(_kernel.inverse_cdf(np.int64(self.kernel_id), p[0], p[1], float(u)))

    def kernel_params(self) -> tuple[int, float, float]:
        p = self.params + (0.0,) * (2 - len(self.params))
        return self.kernel_id, float(p[0]), float(p[1])


def analytic_mean(spec: WeightSpec) -> float:
    return spec.mean()


@dataclass(frozen=True)
class MomentReport:
    finite: bool
    value: float | None


def moment_report(spec: WeightSpec, p: float) -> MomentReport:
    """Finiteness (and closed form, where there is one) of E[X^p], p >= 1."""
    if p < 1:
        raise ValueError("moment order must be >= 1")
    f, q = spec.family, spec.params
    if f == "constant":
        return MomentReport(True, q[0] ** p)
    if f == "uniform":
        a, b = q
        if a == b:
            return MomentReport(True, a ** p)
        return MomentReport(True, (b ** (p + 1) - a ** (p + 1)) / ((p + 1) * (b - a)))
    if f == "exp":
        return MomentReport(True, math.gamma(p + 1) / q[0] ** p)
    if f == "shifted_exp":
        c, rate = q
        # E[(c+Y)^p] = e^{rate c} rate^{-p} Gamma(p+1, rate c)
        if c == 0:
            return MomentReport(True, math.gamma(p + 1) / rate ** p)
        val = (math.exp(rate * c) * rate ** (-p) * special.gamma(p + 1)
               * special.gammaincc(p + 1, rate * c))
        return MomentReport(True, float(val))
    scale, shape = q
    if shape <= p:
        return MomentReport(False, None)
    return MomentReport(True, shape * scale ** p / (shape - p))


def _mix64(x: int) -> int:
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


ROOT_HASH = _mix64(int(_kernel.ROOT_SALT))
_GOLDEN = int(_kernel.GOLDEN)


@lru_cache(maxsize=1 << 16)
def word_hash(word: str) -> int:
    """Base-independent 64-bit hash of a tree word (folded letter by letter)."""
    if not word:
        return ROOT_HASH
    parent = word_hash(word[:-1])
    return _mix64((parent + (LETTERS.index(word[-1]) + 1) * _GOLDEN) & MASK64)


def derive_seed(*parts) -> int:
    """64-bit seed from a master seed and labels (kind, n, trial index, ...)."""
    text = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class WeightOracle:
    master_seed: int
    spec: WeightSpec
    _key: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_key", int(_kernel.seed_key(np.uint64(self.master_seed & MASK64))))

    @property
    def key(self) -> int:
        return self._key

    def uniform(self, e: EdgeKey) -> float:
        return float(_kernel.edge_uniform(np.uint64(self._key), np.int64(int(e.kind)),
                                          np.uint64(word_hash(e.anchor.word)), np.int64(e.anchor.z)))

    def weight(self, e: EdgeKey) -> float:
        fam, p1, p2 = self.spec.kernel_params()
        return float(_kernel.edge_weight(np.uint64(self._key), np.int64(fam), p1, p2,
                                         np.int64(int(e.kind)), np.uint64(word_hash(e.anchor.word)),
                                         np.int64(e.anchor.z)))

    def weights_along(self, kind: EdgeKind, word: str, zs) -> np.ndarray:
        """Weights of the ``kind`` edges anchored at (word, z) for every z in ``zs``."""
        fam, p1, p2 = self.spec.kernel_params()
        return _kernel.edge_weights_along(np.uint64(self._key), np.int64(fam), p1, p2,
                                          np.int64(int(kind)), np.uint64(word_hash(word)),
                                          np.asarray(zs, dtype=np.int64))

    def __call__(self, e: EdgeKey) -> float:
        return self.weight(e)


def weight(oracle: WeightOracle, e: EdgeKey) -> float:
    return oracle.weight(e)
