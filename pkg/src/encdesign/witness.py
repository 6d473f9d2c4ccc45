"""Constructive sharpness: build an explicit witness measure from any
table that passes the inequality check.

The construction orders, for each target choice, the instrument values by
ascending choice probability and assigns the successive increments to
response types that comply with ever-larger prefixes of that ordering.
The remaining mass lands on full compliance. Run on an infeasible table
the same arithmetic produces a negative mass, which is reported rather
than clamped: the negative mass is itself the diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .core import (
    ONE,
    ZERO,
    DesignConfig,
    ObservedDistribution,
    ResponseMeasure,
    ResponseType,
)
from .errors import CapacityError, ConstructionError
from .inequalities import OutcomeDistribution

DEFAULT_TABLE_CAP = 1_000_000


def instrument_ordering(config: DesignConfig, values: Mapping[int, Fraction], target: int | None) -> tuple[int, ...]:
    """Instrument values sorted by ascending coordinate value with the
    forced placements: the targeting value (if any) last, and with a base
    state the base value last among the non-targeting slots. Remaining
    ties break by ascending instrument value."""
    if config.J0 == 0:
        others = sorted(
            (z for z in config.z_support if z != target),
            key=lambda z: (values[z], z),
        )
        return tuple(others) + (target,)
    others = sorted(
        (z for z in config.z_support if z != 0 and z != target),
        key=lambda z: (values[z], z),
    )
    if target is not None and target >= config.J0:
        return tuple(others) + (0, target)
    return tuple(others) + (0,)


def _type_with_prefix(config: DesignConfig, target: int, prefix) -> ResponseType:
    """The type complying with every instrument value in the prefix and
    taking the target choice elsewhere."""
    d = [target] * len(config.z_support)
    for z in prefix:
        d[config.z_index(z)] = z
    return ResponseType(tuple(d))


def _compliance_type(config: DesignConfig, default: int) -> ResponseType:
    """Full compliance with default ``default``: at the base state (if
    any) the default, elsewhere the targeted choice."""
    if config.J0 == 0:
        return ResponseType(tuple(config.z_support))
    return ResponseType((default,) + tuple(range(config.J0, config.J)))


@dataclass(frozen=True)
class TraceEntry:
    kind: str  # "base", "step", "compliance"
    target: int | None
    step: int | None
    rtype: ResponseType
    mass: Fraction


@dataclass(frozen=True)
class ConstructionTrace:
    config: DesignConfig
    orderings: Mapping[int, tuple[int, ...]]
    entries: tuple[TraceEntry, ...]
    feasible: bool


def diagnose(P: ObservedDistribution) -> ConstructionTrace:
    """Run the construction arithmetic without failing: per-target
    orderings, every step mass (negative ones included), and the
    remainder."""
    config = P.config
    orderings: dict[int, tuple[int, ...]] = {}
    entries: list[TraceEntry] = []
    top_values: dict[int, Fraction] = {}
    for j in range(config.J):
        order = instrument_ordering(config, {z: P.p(z, j) for z in config.z_support}, j)
        orderings[j] = order
        entries.append(
            TraceEntry("base", j, 1, _type_with_prefix(config, j, ()), P.p(order[0], j))
        )
        for ell in range(2, len(order)):
            rtype = _type_with_prefix(config, j, order[: ell - 1])
            mass = P.p(order[ell - 1], j) - P.p(order[ell - 2], j)
            entries.append(TraceEntry("step", j, ell, rtype, mass))
        top_values[j] = P.p(order[-2], j)
    if config.J0 == 0:
        remainder = ONE - sum(top_values.values())
        entries.append(
            TraceEntry("compliance", None, None, _compliance_type(config, 0), remainder)
        )
    else:
        for j in range(config.J0):
            gap = P.p(0, j) - top_values[j]
            entries.append(
                TraceEntry("compliance", j, None, _compliance_type(config, j), gap)
            )
    feasible = all(e.mass >= 0 for e in entries)
    return ConstructionTrace(config, orderings, tuple(entries), feasible)


def construct(P: ObservedDistribution) -> ResponseMeasure:
    """The explicit witness: a measure over admissible types whose
    pushforward reproduces P exactly. Raises ConstructionError naming the
    first negative assignment when P fails the inequality check."""
    trace = diagnose(P)
    mass: dict[ResponseType, Fraction] = {}
    for entry in trace.entries:
        if entry.mass < 0:
            where = (
                f"target {entry.target}, step {entry.step}"
                if entry.kind != "compliance"
                else f"compliance remainder (default {entry.target})"
                if entry.target is not None
                else "compliance remainder"
            )
            raise ConstructionError(
                f"construction assigns negative mass {entry.mass} to {entry.rtype.d} "
                f"at {where}; the table violates the inequality check",
                target=entry.target,
                step=entry.step,
                mass=entry.mass,
            )
        if entry.rtype in mass:
            raise RuntimeError(f"two assignments hit {entry.rtype.d}; construction bug")
        mass[entry.rtype] = entry.mass
    return ResponseMeasure(P.config, {rt: m for rt, m in mass.items() if m > 0})


@dataclass(frozen=True)
class OutcomeResponseMeasure:
    """Exact measure over (response type, potential-outcome vector) pairs.

    The outcome vector has one entry per choice; only admissible response
    types may carry mass.
    """

    config: DesignConfig
    y_support: tuple[int, ...]
    mass: Mapping[tuple[ResponseType, tuple[int, ...]], Fraction]

    def __post_init__(self):
        from .core import as_fraction
        from .admissible import is_admissible

        ys = set(self.y_support)
        clean = {}
        total = ZERO
        for (rt, yvec), m in self.mass.items():
            if not isinstance(rt, ResponseType):
                rt = ResponseType(tuple(rt))
            rt.validate(self.config)
            if not is_admissible(self.config, rt):
                raise ValueError(f"response type {rt.d} is not admissible")
            yvec = tuple(int(y) for y in yvec)
            if len(yvec) != self.config.J or any(y not in ys for y in yvec):
                raise ValueError(f"outcome vector {yvec} invalid for support {self.y_support}")
            m = as_fraction(m)
            if m < 0:
                raise ValueError(f"negative mass on {(rt.d, yvec)}")
            if m > 0:
                key = (rt, yvec)
                clean[key] = clean.get(key, ZERO) + m
            total += m
        if total != ONE:
            raise ValueError(f"masses sum to {total}, not 1")
        ordered = dict(sorted(clean.items(), key=lambda kv: (kv[0][0].d, kv[0][1])))
        object.__setattr__(self, "mass", ordered)

    def type_marginal(self) -> ResponseMeasure:
        mass: dict[ResponseType, Fraction] = {}
        for (rt, _), m in self.mass.items():
            mass[rt] = mass.get(rt, ZERO) + m
        return ResponseMeasure(self.config, mass)


def pushforward_outcome(
    q: OutcomeResponseMeasure, pz: Mapping[int, Fraction] | None = None
) -> OutcomeDistribution:
    """Observed outcome table induced by the measure:
    p[z][j][y] accumulates mass with d_z = j and j-th outcome y."""
    config = q.config
    cells = {
        z: {j: {y: ZERO for y in q.y_support} for j in range(config.J)}
        for z in config.z_support
    }
    for (rt, yvec), m in q.mass.items():
        for i, z in enumerate(config.z_support):
            j = rt.d[i]
            cells[z][j][yvec[j]] += m
    return OutcomeDistribution(config, q.y_support, cells, pz=pz)


def lambda_weights(PY: OutcomeDistribution) -> dict[int, dict[int, Fraction]]:
    """Mixing weights for the unpinned outcome coordinates.

    For a targeted choice the weight at y is proportional to the gap
    between the targeted cell and the runner-up cell; when the gaps
    vanish everywhere (or the choice is untargeted) the weight is uniform.
    Each weight sums to exactly 1 over the support.
    """
    config = PY.config
    ys = PY.y_support
    uniform = {y: Fraction(1, len(ys)) for y in ys}
    out: dict[int, dict[int, Fraction]] = {}
    for j in range(config.J):
        if j < config.J0:
            out[j] = dict(uniform)
            continue
        gaps = {}
        for y in ys:
            order = instrument_ordering(config, {z: PY.p(z, j, y) for z in config.z_support}, j)
            gaps[y] = PY.p(j, j, y) - PY.p(order[-2], j, y)
            if gaps[y] < 0:
                raise ConstructionError(
                    f"mixing weight for choice {j} is negative ({gaps[y]}) at outcome "
                    f"{y}: instrument {order[-2]} beats the targeting value; the table "
                    f"violates the outcome check",
                    target=j,
                    mass=gaps[y],
                )
        denom = sum(gaps.values(), ZERO)
        if denom == 0:
            out[j] = dict(uniform)
        else:
            out[j] = {y: g / denom for y, g in gaps.items()}
    return out


def construct_outcome(
    PY: OutcomeDistribution, cap: int = DEFAULT_TABLE_CAP
) -> OutcomeResponseMeasure:
    """Materialize the outcome witness as a dense table over
    (response type, outcome vector).

    Per target choice and outcome cell, instrument values are ordered by
    ascending cell probability (same forced placements as the no-outcome
    construction, but cell by cell, so the same step can feed different
    response types at different outcome values). Step increments pin the
    target's outcome coordinate; the other coordinates are filled with
    the product of the mixing weights.
    """
    from .admissible import enumerate_admissible
    from itertools import product as iproduct

    config = PY.config
    ys = PY.y_support
    n_types = len(enumerate_admissible(config).types)
    if n_types * len(ys) ** config.J > cap:
        raise CapacityError(
            f"witness table would hold up to {n_types * len(ys) ** config.J} entries, cap is {cap}"
        )
    lam = lambda_weights(PY)
    mass: dict[tuple[ResponseType, tuple[int, ...]], Fraction] = {}
    completions = list(iproduct(ys, repeat=config.J - 1))

    def spread(rtype: ResponseType, pinned_j: int, y: int, density: Fraction, where: str):
        if density < 0:
            raise ConstructionError(
                f"construction assigns negative density {density} to {rtype.d} "
                f"at {where}; the table violates the outcome check",
                mass=density,
            )
        if density == 0:
            return
        for combo in completions:
            yvec = list(combo[:pinned_j]) + [y] + list(combo[pinned_j:])
            weight = density
            for k in range(config.J):
                if k != pinned_j:
                    weight *= lam[k][yvec[k]]
            if weight == 0:
                continue
            key = (rtype, tuple(yvec))
            mass[key] = mass.get(key, ZERO) + weight

    top_sum = ZERO
    for j in range(config.J):
        for y in ys:
            order = instrument_ordering(config, {z: PY.p(z, j, y) for z in config.z_support}, j)
            spread(
                _type_with_prefix(config, j, ()),
                j,
                y,
                PY.p(order[0], j, y),
                f"target {j}, step 1, outcome {y}",
            )
            for ell in range(2, len(order)):
                rtype = _type_with_prefix(config, j, order[: ell - 1])
                inc = PY.p(order[ell - 1], j, y) - PY.p(order[ell - 2], j, y)
                spread(rtype, j, y, inc, f"target {j}, step {ell}, outcome {y}")
            top = PY.p(order[-2], j, y)
            if config.J0 > 0:
                if j < config.J0:
                    gap = PY.p(0, j, y) - top
                    spread(
                        _compliance_type(config, j),
                        j,
                        y,
                        gap,
                        f"compliance remainder (default {j}), outcome {y}",
                    )
            else:
                top_sum += top
    if config.J0 == 0:
        remainder = ONE - top_sum
        if remainder < 0:
            raise ConstructionError(
                f"construction assigns negative mass {remainder} to full compliance; "
                f"the table violates the outcome check",
                mass=remainder,
            )
        diag = _compliance_type(config, 0)
        if remainder > 0:
            for yvec in iproduct(ys, repeat=config.J):
                weight = remainder
                for k in range(config.J):
                    weight *= lam[k][yvec[k]]
                if weight == 0:
                    continue
                key = (diag, tuple(yvec))
                mass[key] = mass.get(key, ZERO) + weight
    return OutcomeResponseMeasure(config, ys, mass)
