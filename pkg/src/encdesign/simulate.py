"""Monte Carlo side: draw data from explicit additive random utility
models, and realize a given response-type measure as a mixture of
uniform distributions on shock-space regions.

All draws are chunked with per-chunk seeding derived from (seed, chunk
index), so results do not depend on scheduling. Floating point lives
here and in stats only; empirical tables are returned as exact counts
over n.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import kernels
from .admissible import default_choice, is_admissible
from .core import (
    DesignConfig,
    ObservedDistribution,
    ResponseMeasure,
    ResponseType,
    _validate_pz,
)

CHUNK_SIZE = 65536
EPS_FAMILIES = ("gumbel", "normal", "uniform")


class TieError(RuntimeError):
    """Two utilities tied exactly; the draw must be resampled."""


@dataclass(frozen=True)
class RumSpec:
    """A simulated random utility model: encouragement sizes, shock
    family, instrument marginal, draw count, and seed."""

    config: DesignConfig
    betas: tuple[float, ...]
    pz: Mapping[int, Fraction]
    n: int
    seed: int
    eps_family: str = "gumbel"
    normal_cov: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        config = self.config
        betas = tuple(float(b) for b in self.betas)
        if len(betas) != config.J:
            raise ValueError(f"need {config.J} encouragement sizes, got {len(betas)}")
        for j, b in enumerate(betas):
            if b < 0:
                raise ValueError(f"encouragement size for choice {j} is negative")
            if j < config.J0 and b != 0:
                raise ValueError(f"choice {j} is unaffected by the instrument; its size must be 0")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "pz", _validate_pz(config, self.pz))
        if self.n < 1:
            raise ValueError("draw count must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.eps_family not in EPS_FAMILIES:
            raise ValueError(f"unknown shock family {self.eps_family!r}")
        if self.normal_cov is not None:
            if self.eps_family != "normal":
                raise ValueError("a covariance only makes sense for normal shocks")
            cov = tuple(tuple(float(v) for v in row) for row in self.normal_cov)
            if len(cov) != config.J or any(len(r) != config.J for r in cov):
                raise ValueError("covariance must be J x J")
            try:
                np.linalg.cholesky(np.asarray(cov))
            except np.linalg.LinAlgError:
                raise ValueError("covariance must be symmetric positive definite") from None
            object.__setattr__(self, "normal_cov", cov)


@dataclass(frozen=True)
class MicroData:
    """Row-level observed records; outcomes are optional."""

    d: np.ndarray
    z: np.ndarray
    y: np.ndarray | None = None
    provenance: str = "external"

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.int64)
        z = np.asarray(self.z, dtype=np.int64)
        if d.shape != z.shape or d.ndim != 1:
            raise ValueError("d and z must be one-dimensional and equally long")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "z", z)
        if self.y is not None:
            y = np.asarray(self.y, dtype=np.int64)
            if y.shape != d.shape:
                raise ValueError("y must have the same length as d and z")
            object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.d)


@dataclass(frozen=True)
class SimulationResult:
    data: MicroData
    table: ObservedDistribution
    type_counts: Mapping[ResponseType, int]
    n: int


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, chunk_index)))


def _draw_eps(rng: np.random.Generator, k: int, spec: RumSpec) -> np.ndarray:
    J = spec.config.J
    if spec.eps_family == "gumbel":
        return rng.gumbel(size=(k, J))
    if spec.eps_family == "uniform":
        return rng.uniform(-1.0, 1.0, size=(k, J))
    if spec.normal_cov is None:
        return rng.normal(size=(k, J))
    return rng.multivariate_normal(
        np.zeros(J), np.asarray(spec.normal_cov), size=k, method="cholesky"
    )


def potential_vector(config: DesignConfig, betas, eps) -> ResponseType:
    """The response type realized by one shock vector: at each instrument
    value, the boosted argmax. Raises TieError on an exact tie (a
    probability-zero event under continuous shocks)."""
    eps = np.asarray(eps, dtype=np.float64).reshape(1, -1)
    if eps.shape[1] != config.J:
        raise ValueError(f"need {config.J} shocks")
    codes, ties = kernels.potential_type_codes(
        eps, np.asarray(betas, dtype=np.float64), np.asarray(config.z_support)
    )
    if ties[0]:
        raise TieError("exact utility tie; resample the shock vector")
    return ResponseType(tuple(int(v) for v in codes[0]))


def _codes_for(eps: np.ndarray, betas: np.ndarray, z_support: np.ndarray, rng, redraw) -> np.ndarray:
    """Kernel call with tie resampling: tied rows get fresh shocks from
    the same stream until none remain."""
    codes, ties = kernels.potential_type_codes(eps, betas, z_support)
    while ties.any():
        idx = np.flatnonzero(ties)
        eps[idx] = redraw(rng, len(idx))
        sub_codes, sub_ties = kernels.potential_type_codes(eps[idx], betas, z_support)
        codes[idx] = sub_codes
        ties[idx] = sub_ties
    return codes


def simulate(spec: RumSpec) -> SimulationResult:
    """Draw n i.i.d. records: shocks independent of the instrument, the
    instrument from its marginal, the choice through the observation map.
    Returns the rows, the exact empirical table (counts over arm sizes),
    and the realized response-type counts."""
    config = spec.config
    z_support = np.asarray(config.z_support, dtype=np.int64)
    betas = np.asarray(spec.betas, dtype=np.float64)
    cum = np.cumsum([float(spec.pz[z]) for z in config.z_support])
    cum[-1] = 1.0

    d_out = np.empty(spec.n, dtype=np.int64)
    z_out = np.empty(spec.n, dtype=np.int64)
    type_counts: dict[ResponseType, int] = {}
    m = len(z_support)
    code_weights = np.array([config.J ** (m - 1 - i) for i in range(m)], dtype=np.int64)
    filled = 0
    chunk_index = 0
    while filled < spec.n:
        k = min(CHUNK_SIZE, spec.n - filled)
        rng = _chunk_rng(spec.seed, chunk_index)
        eps = _draw_eps(rng, k, spec)
        zidx = np.searchsorted(cum, rng.random(k), side="right")
        codes = _codes_for(
            eps, betas, z_support, rng, lambda r, c: _draw_eps(r, c, spec)
        )
        packed = codes @ code_weights
        for code, count in zip(*np.unique(packed, return_counts=True)):
            digits = []
            v = int(code)
            for _ in range(m):
                digits.append(v % config.J)
                v //= config.J
            rt = ResponseType(tuple(reversed(digits)))
            if not is_admissible(config, rt):
                raise RuntimeError(f"realized type {rt.d} not admissible; model bug")
            type_counts[rt] = type_counts.get(rt, 0) + int(count)
        d_out[filled : filled + k] = codes[np.arange(k), zidx]
        z_out[filled : filled + k] = z_support[zidx]
        filled += k
        chunk_index += 1

    rows = {}
    for zi, z in enumerate(config.z_support):
        arm = d_out[z_out == z]
        if len(arm) == 0:
            raise ValueError(f"no draws landed on instrument value {z}; increase n")
        counts = np.bincount(arm, minlength=config.J)
        rows[z] = tuple(Fraction(int(c), len(arm)) for c in counts)
    table = ObservedDistribution(config, rows)
    data = MicroData(d_out, z_out, provenance=f"rum(seed={spec.seed})")
    ordered = dict(sorted(type_counts.items(), key=lambda kv: kv[0].d))
    return SimulationResult(data, table, ordered, spec.n)


@dataclass(frozen=True)
class Region:
    """One shock-space region: uniform sampling inside reproduces one
    response type. Constraints are strict inequalities
    eps[lhs] + offset > eps[rhs]; the box |eps| <= M is separate."""

    rtype: ResponseType
    weight: Fraction
    lhs: tuple[int, ...]
    rhs: tuple[int, ...]
    offsets: tuple[float, ...]
    interior: tuple[float, ...]


@dataclass(frozen=True)
class RegionMixture:
    config: DesignConfig
    betas: tuple[float, ...]
    M: float
    components: tuple[Region, ...]


def _region_constraints(config: DesignConfig, betas, rt: ResponseType):
    """The inequality system whose solutions realize ``rt``: the default
    is the plain argmax, complying coordinates win when boosted, the
    rest lose to the default even when boosted."""
    J = config.J
    defaults = default_choice(config, rt)
    if len(defaults) > 1:  # full-compliance diagonal, J0 = 0
        cons = [
            (z, k, betas[z]) for z in config.z_support for k in range(J) if k != z
        ]
        return cons
    j_star = next(iter(defaults))
    lam = {
        z for z in config.z_support if rt.d_at(config, z) == z and z != j_star
    }
    cons = [(j_star, k, 0.0) for k in range(J) if k != j_star]
    for z in sorted(lam):
        cons.extend((z, k, betas[z]) for k in range(J) if k != z)
    for z in config.z_support:
        if z != j_star and z not in lam:
            cons.append((j_star, z, -betas[z]))
    return cons


def _interior_point(config: DesignConfig, betas, rt: ResponseType, M: float):
    J = config.J
    bmax = max(betas) if betas else 0.0
    defaults = default_choice(config, rt)
    vals = [0.0] * J
    if len(defaults) > 1:
        step = min(b for b in betas if b > 0) / (2 * J) if any(betas) else 0.0
        return tuple(-j * step for j in range(J))
    j_star = next(iter(defaults))
    lam = sorted(
        z for z in config.z_support if rt.d_at(config, z) == z and z != j_star
    )
    vals[j_star] = 0.0
    for i, z in enumerate(lam):
        vals[z] = -betas[z] / 2 - (i + 1) * betas[z] / (8 * (len(lam) + 1))
    low = -(1.0 + bmax)
    rest = [j for j in range(J) if j != j_star and j not in lam]
    for i, j in enumerate(rest):
        vals[j] = low - (i + 1) * 0.25
    return tuple(vals)


def _point_in_region(point, cons, M: float) -> bool:
    return all(abs(v) <= M for v in point) and all(
        point[a] + c > point[b] for a, b, c in cons
    )


def build_epsilon_mixture(q: ResponseMeasure) -> RegionMixture:
    """Realize a response-type measure as a shock distribution: unit
    encouragement for every choice some supported type switches into,
    one bounded region per supported type, uniform density inside each.
    Every positively weighted region is certified nonempty by an explicit
    interior point."""
    config = q.config
    J = config.J
    betas = [0.0] * J
    support = q.support()
    for j in config.z_support:
        if j < config.J0:
            continue
        for rt in support:
            if rt.d_at(config, j) == j and any(v != j for v in rt.d):
                betas[j] = 1.0
                break
    M = 3.0 * (1.0 + max(betas)) + J
    components = []
    for rt in support:
        cons = _region_constraints(config, betas, rt)
        point = _interior_point(config, betas, rt, M)
        if not _point_in_region(point, cons, M):
            M *= 10
            if not _point_in_region(point, cons, M):
                raise RuntimeError(
                    f"no interior point found for region of {rt.d}; construction bug"
                )
        lhs, rhs, offs = zip(*cons) if cons else ((), (), ())
        components.append(
            Region(rt, q.mass[rt], tuple(lhs), tuple(rhs), tuple(offs), point)
        )
    return RegionMixture(config, tuple(betas), M, tuple(components))


def verify_mixture(
    mix: RegionMixture,
    q: ResponseMeasure,
    n: int,
    seed: int,
    min_acceptance: float = 1e-6,
) -> float:
    """Sample n shocks from the mixture (components by weight, points by
    uniform-in-box rejection), push them through the utility argmax, and
    return the largest absolute gap between realized type frequencies
    and the target masses."""
    config = mix.config
    z_support = np.asarray(config.z_support, dtype=np.int64)
    betas = np.asarray(mix.betas, dtype=np.float64)
    rng = _chunk_rng(seed, 0)
    weights = np.array([float(c.weight) for c in mix.components])
    weights = weights / weights.sum()
    counts = rng.multinomial(n, weights)
    freq: dict[ResponseType, int] = {}
    for region, want in zip(mix.components, counts):
        if want == 0:
            continue
        lhs = np.asarray(region.lhs, dtype=np.int64)
        rhs = np.asarray(region.rhs, dtype=np.int64)
        offs = np.asarray(region.offsets, dtype=np.float64)
        got = 0
        proposed = 0
        batch = max(4096, 2 * want)
        while got < want:
            eps = rng.uniform(-mix.M, mix.M, size=(batch, config.J))
            proposed += batch
            mask = kernels.region_accept(eps, lhs, rhs, offs)
            accepted = eps[mask][: want - got]
            if len(accepted):
                codes, ties = kernels.potential_type_codes(
                    np.ascontiguousarray(accepted), betas, z_support
                )
                if ties.any():
                    keep = ~ties
                    codes = codes[keep]
                    accepted = accepted[keep]
                for row in codes:
                    rt = ResponseType(tuple(int(v) for v in row))
                    if rt != region.rtype:
                        raise RuntimeError(
                            f"region for {region.rtype.d} produced {rt.d}; region bug"
                        )
                got += len(codes)
            if proposed > 1e6 and got / proposed < min_acceptance:
                raise RuntimeError(
                    f"rejection acceptance rate below {min_acceptance} for region "
                    f"{region.rtype.d}; adjust the bounding box"
                )
        freq[region.rtype] = freq.get(region.rtype, 0) + want
    types = set(freq) | set(q.mass)
    return max(
        abs(freq.get(rt, 0) / n - float(q.mass.get(rt, Fraction(0)))) for rt in types
    )
