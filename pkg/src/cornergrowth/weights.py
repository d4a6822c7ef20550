"""Counter-based exponential weights on the integer lattice.

Every weight is a pure function of ``(seed, stream, x1, x2)``: the four
64-bit words are absorbed by a splitmix64-style finalizer, the top 53 bits
become a uniform in (0, 1), and the inverse CDF turns it into an
exponential.  Nothing is cached and there is no generator state, so any
rectangle can be evaluated on demand, in any order, from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

_GOLDEN = np.uint64(GOLDEN)
_MIX1 = np.uint64(MIX1)
_MIX2 = np.uint64(MIX2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

# Stream ids reserved by the library.  Replica seeds are derived separately,
# so these only need to be distinct from each other.
STREAM_BULK = 0
STREAM_I = 1
STREAM_J = 2
STREAM_I_REV = 3
STREAM_J_REV = 4
STREAM_QUEUE = 16
STREAM_WALK = 32
STREAM_REPLICA = 0x5EED


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def hash_words(seed, stream, x1, x2):
    """64-bit hash of four words; signed inputs are taken mod 2**64."""
    h = _mix64(np.uint64(seed) + _GOLDEN)
    h = _mix64((h ^ np.uint64(stream)) + _GOLDEN)
    h = _mix64((h ^ np.uint64(x1)) + _GOLDEN)
    h = _mix64((h ^ np.uint64(x2)) + _GOLDEN)
    return h


@njit(cache=True, inline="always")
def uniform_at(seed, stream, x1, x2):
    h = hash_words(seed, stream, x1, x2)
    return (np.float64(h >> _S11) + 0.5) * _INV53


@njit(cache=True, inline="always")
def exp_at(seed, stream, x1, x2, rate):
    return -np.log(uniform_at(seed, stream, x1, x2)) / rate


@njit(cache=True)
def fill_block(seed, stream, sign, rate, lo1, lo2, n1, n2):
    out = np.empty((n1, n2))
    for i in range(n1):
        x1 = sign * (lo1 + i)
        for j in range(n2):
            out[i, j] = exp_at(seed, stream, x1, sign * (lo2 + j), rate)
    return out


@njit(cache=True)
def fill_sequence(seed, stream, rate, start, length):
    out = np.empty(length)
    for k in range(length):
        out[k] = exp_at(seed, stream, start + k, 0, rate)
    return out


def _u64(value: int, name: str) -> int:
    value = int(value)
    if not 0 <= value <= MASK64:
        raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return value


def _as_signed(value: int) -> int:
    # numba kernels take int64 arguments; the bit pattern is what matters
    return value - (1 << 64) if value >= 1 << 63 else value


def reference_hash(seed: int, stream: int, x1: int, x2: int) -> int:
    """Pure-Python version of :func:`hash_words`, used as a test oracle."""

    def mix(z):
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    h = mix((seed + GOLDEN) & MASK64)
    for word in (stream, x1, x2):
        h = mix(((h ^ (word & MASK64)) + GOLDEN) & MASK64)
    return h


def derive_seed(master: int, index: int, salt: int = STREAM_REPLICA) -> int:
    """Seed for replica ``index`` of a run with seed ``master``."""
    return reference_hash(_u64(master, "master seed"), salt, int(index), 0)


@dataclass(frozen=True)
class Seed:
    value: int
    stream: int = STREAM_BULK

    def __post_init__(self):
        object.__setattr__(self, "value", _u64(self.value, "seed"))
        object.__setattr__(self, "stream", _u64(self.stream, "stream"))

    def with_stream(self, stream: int) -> Seed:
        return Seed(self.value, stream)


def _point(x) -> tuple[int, int]:
    x1, x2 = x
    return int(x1), int(x2)


def _check_box(lo, hi):
    lo, hi = _point(lo), _point(hi)
    if lo[0] > hi[0] or lo[1] > hi[1]:
        raise ValueError(f"empty box: lo={lo} is not <= hi={hi}")
    return lo, hi


@dataclass(frozen=True)
class WeightField:
    """I.i.d. Exp(rate) weights indexed by lattice points.

    ``sign=-1`` is the reflected field, whose weight at x is the original
    weight at -x.
    """

    seed: Seed
    rate: float = 1.0
    sign: int = 1

    def __post_init__(self):
        if not isinstance(self.seed, Seed):
            object.__setattr__(self, "seed", Seed(self.seed))
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def weight_at(self, x) -> float:
        x1, x2 = _point(x)
        return float(
            exp_at(
                _as_signed(self.seed.value),
                _as_signed(self.seed.stream),
                self.sign * x1,
                self.sign * x2,
                float(self.rate),
            )
        )

    def block(self, lo, hi) -> np.ndarray:
        """Weights on the box [lo, hi] as an array indexed ``[x1 - lo1, x2 - lo2]``."""
        lo, hi = _check_box(lo, hi)
        return fill_block(
            _as_signed(self.seed.value),
            _as_signed(self.seed.stream),
            self.sign,
            float(self.rate),
            lo[0],
            lo[1],
            hi[0] - lo[0] + 1,
            hi[1] - lo[1] + 1,
        )

    def reflected(self) -> WeightField:
        return WeightField(self.seed, self.rate, -self.sign)


@dataclass(frozen=True, eq=False)
class ArrayField:
    """A field given by an explicit array, for synthetic and hand-built instances.

    ``values[i, j]`` is the weight at ``origin + (i, j)``.  Points outside
    the array get ``fill`` if it is set and raise otherwise.
    """

    values: np.ndarray
    origin: tuple[int, int] = (0, 0)
    fill: float | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("values must be a non-empty 2-d array")
        if not np.all(values > 0) or (self.fill is not None and not self.fill > 0):
            raise ValueError("weights must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", _point(self.origin))

    @property
    def upper(self) -> tuple[int, int]:
        return (
            self.origin[0] + self.values.shape[0] - 1,
            self.origin[1] + self.values.shape[1] - 1,
        )

    def weight_at(self, x) -> float:
        return float(self.block(x, x)[0, 0])

    def block(self, lo, hi) -> np.ndarray:
        lo, hi = _check_box(lo, hi)
        o1, o2 = self.origin
        u1, u2 = self.upper
        inside = lo[0] >= o1 and lo[1] >= o2 and hi[0] <= u1 and hi[1] <= u2
        if inside:
            return self.values[lo[0] - o1 : hi[0] - o1 + 1, lo[1] - o2 : hi[1] - o2 + 1].copy()
        if self.fill is None:
            raise ValueError(f"box [{lo}, {hi}] leaves the array field [{self.origin}, {self.upper}]")
        out = np.full((hi[0] - lo[0] + 1, hi[1] - lo[1] + 1), float(self.fill))
        a1, a2 = max(lo[0], o1), max(lo[1], o2)
        b1, b2 = min(hi[0], u1), min(hi[1], u2)
        if a1 <= b1 and a2 <= b2:
            out[a1 - lo[0] : b1 - lo[0] + 1, a2 - lo[1] : b2 - lo[1] + 1] = self.values[
                a1 - o1 : b1 - o1 + 1, a2 - o2 : b2 - o2 + 1
            ]
        return out

    def reflected(self) -> ArrayField:
        u1, u2 = self.upper
        return ArrayField(self.values[::-1, ::-1], (-u1, -u2), self.fill)

    def with_values(self, updates: dict) -> ArrayField:
        """Copy with some weights replaced, ``{point: new_weight}``."""
        values = self.values.copy()
        for x, w in updates.items():
            x1, x2 = _point(x)
            values[x1 - self.origin[0], x2 - self.origin[1]] = w
        return ArrayField(values, self.origin, self.fill)


def weight_at(field, x) -> float:
    return field.weight_at(x)


def reflect(field):
    """Field whose weight at x is ``field``'s weight at -x."""
    return field.reflected()


def freeze(field, lo, hi) -> ArrayField:
    """Materialize ``field`` on the box [lo, hi] as an :class:`ArrayField`."""
    return ArrayField(field.block(lo, hi), _point(lo))


def exp_sequence(seed: Seed, start: int, length: int, rate: float = 1.0) -> np.ndarray:
    """I.i.d. Exp(rate) values indexed ``start, ..., start + length - 1``."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    return fill_sequence(
        _as_signed(seed.value), _as_signed(seed.stream), float(rate), int(start), int(length)
    )
