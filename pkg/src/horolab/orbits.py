"""Sparse orbit generation on the frame bundle of the modular surface.

An orbit prefix is the sequence of reduced frames of u(t_n) k_theta g0 for
n = 1..N. The time sequence t_n can grow exponentially, which is the regime
the precision policy exists for: reducing z = t_n + i needs every integer
digit of t_n, so working precision must grow linearly in N. Each point is
computed independently from g0; nothing is carried from step to step, so a
single point's rounding never contaminates its successors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import ConfigError
from .groups import GroupElement, mul, rotation, unipotent
from .precision import DEFAULT_PREC, exponential_policy, prec_ctx, to_mpfr
from .surface import FramePoint, reduce_frame_matrix

_SEQUENCE_KINDS = ("exponential", "polynomial", "primes", "explicit")


def _sieve_primes(count: int) -> list:
    """First `count` primes by a plain sieve."""
    if count <= 0:
        return []
    bound = 15
    if count >= 6:
        n = float(count)
        bound = int(n * (math.log(n) + math.log(math.log(n)))) + 10
    while True:
        is_prime = np.ones(bound + 1, dtype=bool)
        is_prime[:2] = False
        for p in range(2, int(bound**0.5) + 1):
            if is_prime[p]:
                is_prime[p * p :: p] = False
        primes = np.flatnonzero(is_prime)
        if len(primes) >= count:
            return [int(p) for p in primes[:count]]
        bound *= 2


_PRIME_CACHE: list = []


def nth_prime(n: int) -> int:
    global _PRIME_CACHE
    if n < 1:
        raise ValueError("prime index starts at 1")
    if len(_PRIME_CACHE) < n:
        _PRIME_CACHE = _sieve_primes(max(n, 2 * len(_PRIME_CACHE), 64))
    return _PRIME_CACHE[n - 1]


@dataclass(frozen=True)
class TimeSequence:
    """Orbit time sequence t_n, n >= 1.

    kinds: "exponential" t_n = scale * e^(rate n); "polynomial"
    t_n = n^(1+degree); "primes" t_n = n-th prime; "explicit" a given list
    (nonnegative, nondecreasing).
    """

    kind: str
    rate: float = 0.0
    degree: float = 0.0
    scale: float = 1.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in _SEQUENCE_KINDS:
            raise ConfigError("unknown time sequence kind %r" % (self.kind,))
        if self.kind == "exponential":
            if not self.rate > 0:
                raise ConfigError("exponential sequence needs rate > 0")
            if not self.scale > 0:
                raise ConfigError("exponential sequence needs scale > 0")
        elif self.kind == "polynomial":
            if self.degree < 0:
                raise ConfigError("polynomial sequence needs degree >= 0")
        elif self.kind == "explicit":
            if not self.values:
                raise ConfigError("explicit sequence needs values")
            prev = 0.0
            for t in self.values:
                # zero is allowed here (u(0) is the identity, useful as an
                # untranslated reference); negatives are not
                if not float(t) >= 0:
                    raise ConfigError("times must be nonnegative")
                if float(t) < prev:
                    raise ConfigError("times must be nondecreasing")
                prev = float(t)

    def value(self, n: int, bits: int):
        """t_n as an mpfr at the given precision."""
        if n < 1:
            raise ValueError("orbit index starts at 1")
        with prec_ctx(bits):
            if self.kind == "exponential":
                return to_mpfr(self.scale, bits) * gmpy2.exp(to_mpfr(self.rate, bits) * n)
            if self.kind == "polynomial":
                return to_mpfr(n, bits) ** (1 + to_mpfr(self.degree, bits))
            if self.kind == "primes":
                return to_mpfr(nth_prime(n), bits)
            if n > len(self.values):
                raise ValueError("explicit sequence has only %d entries" % len(self.values))
            return to_mpfr(self.values[n - 1], bits)

    def default_policy_bits(self, n_max: int) -> int:
        """Working precision sufficient to reduce at t_{n_max}.

        Exponential growth needs bits linear in N; the slowly growing kinds
        use a fixed 128 except when an explicit list carries huge entries.
        """
        if self.kind == "exponential":
            extra = 0
            if self.scale > 1:
                extra = int(math.ceil(math.log2(self.scale)))
            return exponential_policy(self.rate, n_max) + extra
        if self.kind == "explicit":
            top = max(float(t) for t in self.values)
            return max(128, int(math.ceil(math.log2(max(top, 2)))) + 96)
        return 128

    def to_json_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "exponential":
            d["rate"] = self.rate
            d["scale"] = self.scale
        elif self.kind == "polynomial":
            d["degree"] = self.degree
        elif self.kind == "explicit":
            d["values"] = [float(t) for t in self.values]
        return d


@dataclass(frozen=True)
class OrbitSpec:
    """Everything needed to generate a reproducible orbit prefix."""

    times: TimeSequence
    theta: float = 0.0
    base_point: GroupElement | None = None
    n_max: int = 1000
    precision_policy: object = None  # callable N -> bits; None for default

    def policy_bits(self, n: int) -> int:
        default = self.times.default_policy_bits(n)
        if self.precision_policy is None:
            return default
        bits = int(self.precision_policy(n))
        if self.times.kind == "exponential" and bits < exponential_policy(self.times.rate, n):
            raise ConfigError(
                "precision policy gives %d bits at N=%d; exponential growth needs >= %d"
                % (bits, n, exponential_policy(self.times.rate, n))
            )
        return bits


def orbit_prefix(spec: OrbitSpec, n_points: int) -> list:
    """Reduced frames of u(t_n) k_theta g0 for n = 1..n_points.

    All points are computed at the same working precision policy_bits(N),
    so the result is a deterministic function of (spec, N).
    """
    n = int(n_points)
    if n < 1:
        raise ValueError("need at least one orbit point")
    if n > spec.n_max:
        raise ValueError("N = %d exceeds spec.n_max = %d" % (n, spec.n_max))
    bits = spec.policy_bits(n)
    base = spec.base_point
    if base is not None and base.n != 2:
        raise ValueError("orbit base point must be 2x2")
    k = rotation(spec.theta, bits)
    if base is not None:
        lifted = GroupElement.from_rows(base.entries, precision_bits=bits, normalize=False)
        tail = mul(k, lifted)
    else:
        tail = k
    out = []
    for idx in range(1, n + 1):
        t = spec.times.value(idx, bits)
        g = mul(unipotent(t, bits), tail)
        out.append(reduce_frame_matrix(g.entries, bits))
    return out


def orbit_coordinate_arrays(points) -> tuple:
    """(x, y, theta) float64 arrays of a list of FramePoint, in order."""
    x = np.array([float(p.x) for p in points])
    y = np.array([float(p.y) for p in points])
    theta = np.array([float(p.theta) for p in points])
    return x, y, theta


def mu_h_sampler(g0: GroupElement, rng: np.random.Generator) -> float:
    """A random frame angle, uniform on [0, 2pi).

    This is the sampling measure for the "almost every theta" statements:
    the orbit of the rotation subgroup through g0 carries its uniform
    measure. g0 only labels the orbit; the draw does not depend on it.
    """
    del g0
    return float(rng.uniform(0.0, 2.0 * math.pi))
