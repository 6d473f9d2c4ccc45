"""Finite-sample moment-inequality test from micro-data.

The procedure is a deliberately simple, self-contained default: the
statistic is the largest studentized violation across the model's
inequality family evaluated on arm-level frequencies, and the critical
value comes from a Gaussian multiplier bootstrap of the recentred
moments. Floating point is confined to this module; nothing here feeds
back into the exact-arithmetic paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import DesignConfig, ObservedDistribution
from .inequalities import (
    OutcomeDistribution,
    check,
    check_outcome,
    generate,
    generate_outcome,
    partition_family_specs,
)
from .simulate import MicroData

SE_FLOOR = 1e-6


@dataclass(frozen=True)
class EstimatedTables:
    """Arm-level cell frequencies. ``cells`` maps each instrument value
    to a (J,) vector, or a (J, |Y|) matrix when outcomes are present."""

    config: DesignConfig
    arm_counts: Mapping[int, int]
    cells: Mapping[int, np.ndarray]
    y_support: tuple[int, ...] | None
    degenerate_arms: tuple[int, ...]

    def p_hat(self, z, j, y=None) -> float:
        cell = self.cells[z][j] if y is None else self.cells[z][j, self.y_support.index(y)]
        return float(cell) / self.arm_counts[z]


def estimate(
    data: MicroData, config: DesignConfig, y_support=None
) -> EstimatedTables:
    """Cell counts within each instrument arm. Every supported instrument
    value must appear; out-of-range rows are reported by index. The
    outcome alphabet is inferred from the data unless supplied."""
    d = np.asarray(data.d)
    z = np.asarray(data.z)
    bad_d = np.flatnonzero((d < 0) | (d >= config.J))
    if len(bad_d):
        i = int(bad_d[0])
        raise ValueError(f"row {i}: treatment {d[i]} out of range for J={config.J}")
    z_ok = np.zeros(len(z), dtype=bool)
    for zv in config.z_support:
        z_ok |= z == zv
    bad_z = np.flatnonzero(~z_ok)
    if len(bad_z):
        i = int(bad_z[0])
        raise ValueError(f"row {i}: instrument {z[i]} not in support {config.z_support}")
    ys = None
    if data.y is not None:
        if y_support is not None:
            ys = tuple(int(v) for v in y_support)
            allowed = set(ys)
            for i, v in enumerate(data.y):
                if int(v) not in allowed:
                    raise ValueError(f"row {i}: outcome {v} not in support {ys}")
        else:
            ys = tuple(int(v) for v in np.unique(data.y))
    arm_counts = {}
    cells = {}
    for zv in config.z_support:
        arm = z == zv
        n_z = int(arm.sum())
        if n_z == 0:
            raise ValueError(f"no rows with instrument value {zv}")
        arm_counts[zv] = n_z
        if ys is None:
            cells[zv] = np.bincount(d[arm], minlength=config.J).astype(float)
        else:
            mat = np.zeros((config.J, len(ys)), dtype=float)
            y_index = {v: i for i, v in enumerate(ys)}
            for dv, yv in zip(d[arm], data.y[arm]):
                mat[dv, y_index[int(yv)]] += 1
            cells[zv] = mat
    degenerate = tuple(zv for zv, c in arm_counts.items() if c == 1)
    return EstimatedTables(config, arm_counts, cells, ys, degenerate)


@dataclass(frozen=True)
class TestReport:
    arm_counts: Mapping[int, int]
    p_hat: Mapping
    slacks: tuple[float, ...]
    standard_errors: tuple[float, ...]
    floored: tuple[bool, ...]
    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    alpha: float
    B: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "arm_counts": {str(z): n for z, n in sorted(self.arm_counts.items())},
            "p_hat": self.p_hat,
            "slacks": list(self.slacks),
            "standard_errors": list(self.standard_errors),
            "floored": list(self.floored),
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "alpha": self.alpha,
            "B": self.B,
            "seed": self.seed,
        }


def _moment_family(config, y_support):
    if y_support is None:
        return generate(config)
    specs = list(generate_outcome(config, y_support))
    if config.J0 == 0:
        specs.extend(partition_family_specs(config, y_support))
    return tuple(specs)


def test_model(
    data: MicroData,
    config: DesignConfig,
    alpha: float = 0.05,
    B: int = 999,
    seed: int = 0,
    y_support=None,
) -> TestReport:
    """Max studentized violation with a multiplier-bootstrap critical
    value. Rejects when the statistic exceeds the (1 - alpha) bootstrap
    quantile of the recentred statistic."""
    if B < 99:
        raise ValueError("need at least 99 bootstrap replications")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    use_y = data.y is not None
    est = estimate(data, config, y_support=y_support if use_y else None)
    specs = _moment_family(config, est.y_support)

    # Flatten cells to a vector; each spec becomes a weight vector so the
    # moment is w . p_hat - bound.
    coords = []
    for z in config.z_support:
        if est.y_support is None:
            coords.extend((z, j) for j in range(config.J))
        else:
            coords.extend((z, j, y) for j in range(config.J) for y in est.y_support)
    index = {c: i for i, c in enumerate(coords)}
    n_cells = len(coords)
    p_vec = np.array([est.p_hat(*c) for c in coords])
    arm_of = np.array([config.z_index(c[0]) for c in coords])
    n_arms = len(config.z_support)
    arm_n = np.array([est.arm_counts[z] for z in config.z_support], dtype=float)
    raw_counts = p_vec * arm_n[arm_of]

    W = np.zeros((len(specs), n_cells))
    bounds = np.zeros(len(specs))
    for i, spec in enumerate(specs):
        for c in spec.lhs:
            W[i, index[c]] += 1.0
        for c in spec.rhs:
            W[i, index[c]] -= 1.0
        bounds[i] = float(spec.bound)

    violations = W @ p_vec - bounds
    variances = np.zeros(len(specs))
    for a in range(n_arms):
        sel = arm_of == a
        wp = W[:, sel] * p_vec[sel]
        variances += ((W[:, sel] ** 2 * p_vec[sel]).sum(axis=1) - wp.sum(axis=1) ** 2) / arm_n[a]
    se = np.sqrt(np.maximum(variances, 0.0))
    floored = se < SE_FLOOR
    se = np.maximum(se, SE_FLOOR)
    statistic = float(np.max(violations / se))

    # Multiplier bootstrap. The moments depend on the data only through
    # per-cell multiplier sums, which are independent N(0, count) across
    # cells, so those sums are drawn directly.
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0)))
    S = rng.normal(size=(B, n_cells)) * np.sqrt(raw_counts)
    G = np.empty_like(S)
    for a in range(n_arms):
        sel = arm_of == a
        arm_total = S[:, sel].sum(axis=1, keepdims=True)
        G[:, sel] = (S[:, sel] - p_vec[sel] * arm_total) / arm_n[a]
    t_star = (G @ W.T) / se
    t_star = t_star.max(axis=1)
    k = min(B - 1, max(0, math.ceil((1 - alpha) * (B + 1)) - 1))
    critical = float(np.sort(t_star)[k])
    p_value = float((1 + (t_star >= statistic).sum()) / (B + 1))

    p_hat_out: dict = {}
    for z in config.z_support:
        if est.y_support is None:
            p_hat_out[str(z)] = [est.p_hat(z, j) for j in range(config.J)]
        else:
            p_hat_out[str(z)] = {
                str(j): {str(y): est.p_hat(z, j, y) for y in est.y_support}
                for j in range(config.J)
            }
    return TestReport(
        arm_counts=dict(est.arm_counts),
        p_hat=p_hat_out,
        slacks=tuple(float(-v) for v in violations),
        standard_errors=tuple(float(v) for v in se),
        floored=tuple(bool(f) for f in floored),
        statistic=statistic,
        critical_value=critical,
        p_value=p_value,
        reject=statistic > critical,
        alpha=alpha,
        B=B,
        seed=seed,
    )


def population_decision(table) -> bool:
    """The infinite-sample limit of the test: feeding an exact table
    reduces the decision to the exact check's verdict. True = reject."""
    if isinstance(table, OutcomeDistribution):
        return not check_outcome(table).passed
    if isinstance(table, ObservedDistribution):
        return not check(table).passed
    raise TypeError("expected an exact treatment or outcome table")
