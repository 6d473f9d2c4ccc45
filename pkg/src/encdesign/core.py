"""Design configuration, exact probability tables, and the observation map.

Everything on this path is exact: probabilities are `fractions.Fraction`
and floats are rejected outright, so no value ever passes through binary
floating point. Decimal strings are converted from their decimal
representation ("0.3" becomes 3/10, not the nearest double).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Accepts Fraction, int, and strings ("2/3", "0.3", "1"). Floats are
    rejected: their binary representation silently changes the number.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("probabilities must be Fraction, int, or string")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(
        f"probabilities must be Fraction, int, or string, not {type(value).__name__}"
    )


@dataclass(frozen=True)
class DesignConfig:
    """The pair (J, J0) and the implied instrument support.

    J is the number of choices, J0 the number of choices the instrument
    never targets. With J0 = 0 every choice has its own instrument value
    and the support is {0, ..., J-1}; with J0 > 0 the support is
    {0, J0, ..., J-1} and value 0 is the base state that boosts nothing.
    """

    J: int
    J0: int = 0

    def __post_init__(self):
        if self.J < 2:
            raise ValueError(f"J must be at least 2, got {self.J}")
        if not 0 <= self.J0 <= self.J - 1:
            raise ValueError(f"J0 must satisfy 0 <= J0 <= J-1, got J0={self.J0}")

    @property
    def z_support(self) -> tuple[int, ...]:
        if self.J0 == 0:
            return tuple(range(self.J))
        return (0,) + tuple(range(self.J0, self.J))

    @property
    def choices(self) -> tuple[int, ...]:
        return tuple(range(self.J))

    def z_index(self, z: int) -> int:
        """Position of instrument value z within the support."""
        if self.J0 == 0:
            if 0 <= z < self.J:
                return z
        elif z == 0:
            return 0
        elif self.J0 <= z < self.J:
            return z - self.J0 + 1
        raise ValueError(f"instrument value {z} not in support {self.z_support}")

    def targeted_set(self, j: int) -> tuple[int, ...]:
        """Instrument values allowed as z(j): the full support for an
        untargeted choice, the support minus j for a targeted one."""
        if not 0 <= j < self.J:
            raise ValueError(f"choice {j} out of range")
        if j < self.J0:
            return self.z_support
        return tuple(z for z in self.z_support if z != j)


@dataclass(frozen=True)
class ResponseType:
    """A vector of potential treatments, one entry per instrument value.

    Entries are positional: ``d[i]`` is the choice taken under the i-th
    value of the design's instrument support. Inadmissible vectors are
    representable on purpose; admissibility is a predicate, not a type
    invariant.
    """

    d: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(int(v) for v in self.d))

    def d_at(self, config: DesignConfig, z: int) -> int:
        return self.d[config.z_index(z)]

    def validate(self, config: DesignConfig) -> None:
        if len(self.d) != len(config.z_support):
            raise ValueError(
                f"response type has {len(self.d)} entries, "
                f"support has {len(config.z_support)}"
            )
        for v in self.d:
            if not 0 <= v < config.J:
                raise ValueError(f"treatment value {v} out of range for J={config.J}")


def observation_map(config: DesignConfig, rt: ResponseType, z: int) -> int:
    """The map T: observed treatment when the instrument lands on z."""
    rt.validate(config)
    return rt.d_at(config, z)


def _validate_pz(config: DesignConfig, pz) -> dict[int, Fraction] | None:
    if pz is None:
        return None
    out = {}
    for z in config.z_support:
        if z not in pz:
            raise ValueError(f"pz missing instrument value {z}")
        v = as_fraction(pz[z])
        if v <= 0:
            raise ValueError(f"pz[{z}] must be strictly positive, got {v}")
        out[z] = v
    if len(pz) != len(out):
        raise ValueError("pz has entries outside the instrument support")
    if sum(out.values()) != ONE:
        raise ValueError("pz must sum to exactly 1")
    return out


@dataclass(frozen=True)
class ObservedDistribution:
    """Conditional choice probabilities P{D=j | Z=z} as an exact table.

    ``rows`` maps each supported instrument value to a J-tuple of
    Fractions summing to exactly 1. ``pz`` (instrument marginals) is
    optional because the testable implications constrain conditionals
    only; operations that need it must ask for it explicitly.
    """

    config: DesignConfig
    rows: Mapping[int, tuple[Fraction, ...]]
    pz: Mapping[int, Fraction] | None = None

    def __post_init__(self):
        config = self.config
        clean: dict[int, tuple[Fraction, ...]] = {}
        for z in config.z_support:
            if z not in self.rows:
                raise ValueError(f"missing row for instrument value {z}")
            row = tuple(as_fraction(v) for v in self.rows[z])
            if len(row) != config.J:
                raise ValueError(f"row for z={z} must have {config.J} entries")
            for v in row:
                if not 0 <= v <= 1:
                    raise ValueError(f"probability {v} outside [0, 1] at z={z}")
            if sum(row) != ONE:
                raise ValueError(f"row for z={z} sums to {sum(row)}, not 1")
            clean[z] = row
        if len(self.rows) != len(clean):
            raise ValueError("rows contain instrument values outside the support")
        object.__setattr__(self, "rows", clean)
        object.__setattr__(self, "pz", _validate_pz(config, self.pz))

    def p(self, z: int, j: int) -> Fraction:
        self.config.z_index(z)
        return self.rows[z][j]


@dataclass(frozen=True)
class ResponseMeasure:
    """An exact probability measure over admissible response types."""

    config: DesignConfig
    mass: Mapping[ResponseType, Fraction]

    def __post_init__(self):
        from .admissible import is_admissible

        clean: dict[ResponseType, Fraction] = {}
        for rt, m in self.mass.items():
            if not isinstance(rt, ResponseType):
                rt = ResponseType(tuple(rt))
            rt.validate(self.config)
            m = as_fraction(m)
            if m < 0:
                raise ValueError(f"negative mass {m} on {rt.d}")
            if not is_admissible(self.config, rt):
                raise ValueError(f"response type {rt.d} is not admissible")
            clean[rt] = clean.get(rt, ZERO) + m
        if sum(clean.values()) != ONE:
            raise ValueError(f"masses sum to {sum(clean.values())}, not 1")
        object.__setattr__(
            self, "mass", {rt: m for rt, m in sorted(clean.items(), key=lambda kv: kv[0].d)}
        )

    def support(self) -> tuple[ResponseType, ...]:
        return tuple(rt for rt, m in self.mass.items() if m > 0)


def pushforward(
    q: ResponseMeasure, pz: Mapping[int, Fraction] | None = None
) -> ObservedDistribution:
    """The observed table induced by q through the observation map:
    p[z][j] = sum of q over response types with d_z = j, exactly."""
    config = q.config
    rows = {z: [ZERO] * config.J for z in config.z_support}
    for rt, m in q.mass.items():
        for i, z in enumerate(config.z_support):
            rows[z][rt.d[i]] += m
    return ObservedDistribution(
        config, {z: tuple(row) for z, row in rows.items()}, pz=pz
    )


def mix(
    lam: Fraction, q1: ResponseMeasure, q2: ResponseMeasure
) -> ResponseMeasure:
    """Convex combination lam*q1 + (1-lam)*q2 of two measures."""
    lam = as_fraction(lam)
    if not 0 <= lam <= 1:
        raise ValueError("mixing weight must lie in [0, 1]")
    if q1.config != q2.config:
        raise ValueError("measures built on different designs")
    mass: dict[ResponseType, Fraction] = {}
    for rt, m in q1.mass.items():
        mass[rt] = mass.get(rt, ZERO) + lam * m
    for rt, m in q2.mass.items():
        mass[rt] = mass.get(rt, ZERO) + (ONE - lam) * m
    return ResponseMeasure(q1.config, mass)
