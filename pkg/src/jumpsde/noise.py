"""Compound Poisson process sampling and path access.

A path of C(t) = sum_{k<=N(t)} R_k is sampled by the conditional-uniform
construction: draw the count N ~ Poisson(intensity*T), then N jump times
i.i.d. uniform on (0,T) sorted ascending, then N amplitudes from the
amplitude distribution. All randomness comes from numpy's Philox
counter-based generator keyed by a 64-bit seed, so a path is exactly
reconstructible from (intensity, T, distribution, seed).

Per-path substreams for ensembles are derived with

    path_seed(master, i) = splitmix64(master XOR (i * 0x9E3779B97F4A7C15))

(all arithmetic mod 2^64), documented so independent implementations can
reproduce the same ensembles.

Convention: C is cadlag; the value AT a jump time includes that jump, and
the pre-jump state is the left limit C(t-).
"""

from __future__ import annotations

import bisect
import io
import itertools
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

__all__ = [
    "Normal",
    "Constant",
    "Exponential",
    "Uniform",
    "CompoundPoissonPath",
    "sample_path",
    "c_value",
    "increment",
    "path_seed",
    "splitmix64",
    "parse_distribution",
    "write_path_csv",
    "read_path_csv",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 output mixer (public-domain constants)."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def path_seed(master: int, index: int) -> int:
    """Derive the substream seed for path `index` from the master seed."""
    return splitmix64((master ^ (index * _GOLDEN)) & _MASK64)


# --- amplitude distributions ------------------------------------------------


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if not self.std > 0.0:
            raise ValidationError("Normal std must be positive")

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return gen.normal(self.mean, self.std, n)

    def label(self) -> str:
        return f"normal({self.mean!r},{self.std!r})"


@dataclass(frozen=True)
class Constant:
    value: float

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value)

    def label(self) -> str:
        return f"constant({self.value!r})"


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValidationError("Exponential rate must be positive")

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return gen.exponential(1.0 / self.rate, n)

    def label(self) -> str:
        return f"exponential({self.rate!r})"


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError("Uniform requires lo < hi")

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return gen.uniform(self.lo, self.hi, n)

    def label(self) -> str:
        return f"uniform({self.lo!r},{self.hi!r})"


AmplitudeDistribution = Normal | Constant | Exponential | Uniform


def parse_distribution(text: str) -> AmplitudeDistribution:
    """Parse a distribution spec like `normal(0,1)` or `constant(2)`."""
    text = text.strip().lower()
    if "(" not in text or not text.endswith(")"):
        raise ParseError(f"malformed distribution spec {text!r}")
    name, _, argstr = text.partition("(")
    try:
        args = [float(a) for a in argstr[:-1].split(",") if a.strip()]
    except ValueError:
        raise ParseError(f"malformed distribution arguments in {text!r}") from None
    name = name.strip()
    try:
        if name == "normal":
            return Normal(*args) if args else Normal()
        if name == "constant":
            return Constant(*args)
        if name == "exponential":
            return Exponential(*args)
        if name == "uniform":
            return Uniform(*args)
    except TypeError:
        raise ParseError(f"wrong number of arguments in {text!r}") from None
    raise ParseError(f"unknown distribution {name!r}")


# --- paths -------------------------------------------------------------------


@dataclass(frozen=True)
class CompoundPoissonPath:
    """One realization of C(t) on [0, T]: sorted jump times and amplitudes."""

    T: float
    intensity: float
    jump_times: tuple[float, ...]
    amplitudes: tuple[float, ...]
    seed: int
    dist: AmplitudeDistribution = field(default_factory=lambda: Normal())

    def __post_init__(self):
        if not self.T > 0.0:
            raise ValidationError("horizon T must be positive")
        if self.intensity < 0.0:
            raise ValidationError("intensity must be non-negative")
        if len(self.jump_times) != len(self.amplitudes):
            raise ValidationError("jump_times and amplitudes length mismatch")
        if any(b <= a for a, b in zip(self.jump_times, self.jump_times[1:])):
            raise ValidationError("jump_times must be strictly increasing")
        if self.jump_times and not (0.0 < self.jump_times[0]
                                    and self.jump_times[-1] <= self.T):
            raise ValidationError("jump_times must lie in (0, T]")
        object.__setattr__(
            self, "_cum",
            tuple(itertools.accumulate(self.amplitudes)))

    def __len__(self) -> int:
        return len(self.jump_times)


def _nudge_ties(times: list[float]) -> list[float]:
    """Break ties (and a zero first time) by one-ulp upward nudges."""
    out = list(times)
    for i in range(len(out)):
        prev = out[i - 1] if i else 0.0
        if out[i] <= prev:
            warnings.warn("tied/zero jump times nudged by one ulp",
                          RuntimeWarning, stacklevel=2)
            out[i] = math.nextafter(prev, math.inf)
    return out


def sample_path(intensity: float, T: float, dist: AmplitudeDistribution,
                seed: int) -> CompoundPoissonPath:
    """Sample one compound Poisson path, fully determined by the seed.

    Draw order (fixed for reproducibility): jump count, jump times,
    amplitudes. Zero or tied jump times (measure zero, but floats) are
    nudged up by one ulp with a warning.
    """
    if intensity < 0.0:
        raise ValidationError("intensity must be non-negative")
    if not T > 0.0:
        raise ValidationError("horizon T must be positive")
    gen = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    n = int(gen.poisson(intensity * T)) if intensity > 0.0 else 0
    times = np.sort(gen.uniform(0.0, T, n))
    amps = dist.draw(gen, n)
    fixed = _nudge_ties([float(tk) for tk in times])
    return CompoundPoissonPath(
        T=T, intensity=intensity,
        jump_times=tuple(fixed), amplitudes=tuple(float(a) for a in amps),
        seed=seed & _MASK64, dist=dist)


def c_value(path: CompoundPoissonPath, t: float) -> float:
    """C(t) with the cadlag convention: a jump at t is included."""
    if not 0.0 <= t <= path.T:
        raise ValidationError(f"t={t!r} outside [0, {path.T!r}]")
    idx = bisect.bisect_right(path.jump_times, t)
    return path._cum[idx - 1] if idx else 0.0


def increment(path: CompoundPoissonPath, t: float) -> float:
    """dC(t) = C(t) - C(t-): the amplitude at an exact jump time, else 0."""
    idx = bisect.bisect_left(path.jump_times, t)
    if idx < len(path.jump_times) and path.jump_times[idx] == t:
        return path.amplitudes[idx]
    return 0.0


# --- CSV round trip ----------------------------------------------------------


def write_path_csv(path: CompoundPoissonPath, dest: Path | io.TextIOBase) -> None:
    """Write `k,t_k,R_k` rows plus a replay comment line."""
    buf = io.StringIO()
    buf.write(f"# intensity={path.intensity:.17g} T={path.T:.17g} "
              f"dist={path.dist.label()} seed={path.seed}\n")
    buf.write("k,t_k,R_k\n")
    for k, (tk, rk) in enumerate(zip(path.jump_times, path.amplitudes), 1):
        buf.write(f"{k},{tk:.17g},{rk:.17g}\n")
    data = buf.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(data)
    else:
        dest.write(data)


def read_path_csv(src: Path | io.TextIOBase) -> CompoundPoissonPath:
    """Inverse of write_path_csv."""
    if isinstance(src, (str, Path)):
        text = Path(src).read_text()
    else:
        text = src.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("#"):
        raise ParseError("path CSV must start with a replay comment line")
    meta = dict(item.split("=", 1) for item in lines[0][1:].split())
    try:
        intensity = float(meta["intensity"])
        T = float(meta["T"])
        dist = parse_distribution(meta["dist"])
        seed = int(meta["seed"])
    except KeyError as err:
        raise ParseError(f"path CSV comment missing {err}") from None
    if lines[1] != "k,t_k,R_k":
        raise ParseError("path CSV header must be `k,t_k,R_k`")
    times: list[float] = []
    amps: list[float] = []
    for ln in lines[2:]:
        _, tk, rk = ln.split(",")
        times.append(float(tk))
        amps.append(float(rk))
    return CompoundPoissonPath(T=T, intensity=intensity,
                               jump_times=tuple(times), amplitudes=tuple(amps),
                               seed=seed, dist=dist)
