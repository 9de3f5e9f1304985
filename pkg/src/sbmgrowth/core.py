"""Shared domain types, parameter validation and RNG stream derivation."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# |rho - 1| at or below this is treated as rho == 1 everywhere in the package.
RHO_TOL = 1e-12

# Relative slack when deciding whether lambda * n is an integer.
_INTEGRAL_TOL = 1e-9


class ParameterError(ValueError):
    """Base class for invalid model or population parameters."""


class NonPositiveRate(ParameterError):
    pass


class LambdaOutOfRange(ParameterError):
    pass


class ProbabilityOverflow(ParameterError):
    pass


class EmptyPopulation(ParameterError):
    pass


class PreconditionViolated(ValueError):
    """An analytic check was called outside the regime where it applies."""


class TooLarge(ValueError):
    pass


class PopulationOverflow(RuntimeError):
    pass


class Color(enum.IntEnum):
    RED = 1
    BLUE = 2

    @property
    def index(self) -> int:
        """Matrix index (1 for red, 2 for blue)."""
        return int(self)

    @classmethod
    def from_index(cls, i: int) -> "Color":
        return cls(i)

    def swapped(self) -> "Color":
        return Color.BLUE if self is Color.RED else Color.RED


@dataclass(frozen=True)
class ModelParams:
    """Edge rates ``a`` (same color) and ``b`` (cross color), project values
    ``alpha`` and ``beta``, and the per-round arrival fraction ``lam``.

    ``rho = a*alpha / (b*beta)`` is computed once at construction; every other
    module reads it from here so phase decisions near 1 agree.
    """

    a: float
    b: float
    alpha: float
    beta: float
    lam: float
    rho: float = field(init=False, compare=False)

    def __post_init__(self):
        for name in ("a", "b", "alpha", "beta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v > 0):
                raise NonPositiveRate(f"{name} must be a finite positive number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise LambdaOutOfRange(f"lambda must be positive, got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))
        rho = (self.a * self.alpha) / (self.b * self.beta)
        if not (math.isfinite(rho) and rho > 0):
            raise NonPositiveRate(f"rho = a*alpha/(b*beta) is not finite and positive: {rho!r}")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_matrices(cls, p, zeta, lam: float) -> "ModelParams":
        """Build from the 2x2 probability and weight matrices.

        Both matrices must have the symmetric block form ``[[x, y], [y, x]]``.
        """
        (a, b) = _check_block_matrix("p", p)
        (alpha, beta) = _check_block_matrix("zeta", zeta)
        return cls(a=a, b=b, alpha=alpha, beta=beta, lam=lam)

    @property
    def p_matrix(self) -> list[list[float]]:
        return [[self.a, self.b], [self.b, self.a]]

    @property
    def zeta_matrix(self) -> list[list[float]]:
        return [[self.alpha, self.beta], [self.beta, self.alpha]]

    def edge_rate(self, ci: Color, cj: Color) -> float:
        return self.a if ci == cj else self.b

    def edge_weight(self, ci: Color, cj: Color) -> float:
        return self.alpha if ci == cj else self.beta

    @property
    def rho_is_one(self) -> bool:
        return abs(self.rho - 1.0) <= RHO_TOL


def _check_block_matrix(name, m) -> tuple[float, float]:
    arr = np.asarray(m, dtype=float)
    if arr.shape != (2, 2):
        raise ParameterError(f"{name} must be a 2x2 matrix, got shape {arr.shape}")
    if arr[0, 0] != arr[1, 1] or arr[0, 1] != arr[1, 0]:
        raise ParameterError(f"{name} must have the form [[x, y], [y, x]], got {arr.tolist()}")
    return float(arr[0, 0]), float(arr[0, 1])


def validate_params(raw: ModelParams, n0: int) -> ModelParams:
    """Check the stochastic-model preconditions for an initial population of
    ``n0`` nodes and return the parameter set.

    Growth never shrinks ``n``, so ``a/n0 <= 1`` and ``b/n0 <= 1`` keep every
    later edge probability valid.
    """
    if not isinstance(raw, ModelParams):
        raise TypeError("validate_params expects a ModelParams instance")
    # Re-run construction checks in case the instance was built unusually.
    params = ModelParams(raw.a, raw.b, raw.alpha, raw.beta, raw.lam)
    if not (0.0 < params.lam < 1.0):
        raise LambdaOutOfRange(f"lambda must lie in (0, 1) for the stochastic model, got {params.lam}")
    if int(n0) != n0 or n0 < 1:
        raise EmptyPopulation(f"initial population must have at least one node, got n0={n0!r}")
    if params.a / n0 > 1.0 or params.b / n0 > 1.0:
        raise ProbabilityOverflow(
            f"edge probability exceeds 1 at n0={n0}: a/n0={params.a / n0}, b/n0={params.b / n0}"
        )
    return params


@dataclass(frozen=True)
class Population:
    n_red: int
    n_blue: int

    def __post_init__(self):
        for name in ("n_red", "n_blue"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ParameterError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def n(self) -> int:
        return self.n_red + self.n_blue

    @property
    def phi(self) -> float:
        """Fraction of red nodes."""
        if self.n == 0:
            raise EmptyPopulation("phi is undefined for an empty population")
        return self.n_red / self.n

    @classmethod
    def from_fraction(cls, n: int, phi: float) -> "Population":
        n_red = int(round(n * phi))
        return cls(n_red, n - n_red)

    def swapped(self) -> "Population":
        return Population(self.n_blue, self.n_red)


@dataclass(frozen=True)
class SeedSpec:
    """A (master_seed, stream_id) pair naming one independent random stream.

    Streams are derived with numpy's ``SeedSequence`` spawn keys: the stream
    for ``(master_seed, stream_id, *sub)`` is
    ``SeedSequence(master_seed, spawn_key=(stream_id, *sub))`` feeding a
    PCG64 bit generator. Distinct keys give statistically independent streams.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= int(self.master_seed) < 2**64):
            raise ParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed!r}")
        if int(self.stream_id) < 0:
            raise ParameterError(f"stream_id must be non-negative, got {self.stream_id!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "stream_id", int(self.stream_id))

    def seed_sequence(self, *sub: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, *sub))

    def generator(self, *sub: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(*sub)))

    def with_stream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id)


def floor_ceil_product(lam: float, n: int) -> tuple[int, int]:
    """Return ``(floor(lam*n), ceil(lam*n))``, snapping products within
    floating-point noise of an integer so that e.g. 0.1 * 30 yields (3, 3)."""
    x = lam * n
    r = round(x)
    if abs(x - r) <= _INTEGRAL_TOL * max(1.0, abs(x)):
        return int(r), int(r)
    return math.floor(x), math.ceil(x)
