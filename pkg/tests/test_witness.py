"""Constructive sharpness: orderings, witness measures, traces, and the
outcome construction."""

from fractions import Fraction as F
from random import Random

import pytest

from encdesign.admissible import is_admissible
from encdesign.core import (
    DesignConfig,
    ObservedDistribution,
    ResponseType,
    pushforward,
)
from encdesign.errors import ConstructionError
from encdesign.inequalities import OutcomeDistribution, check, check_outcome
from encdesign.witness import (
    OutcomeResponseMeasure,
    construct,
    construct_outcome,
    diagnose,
    instrument_ordering,
    lambda_weights,
    pushforward_outcome,
)
from helpers import (
    feasible_outcome_table,
    feasible_table,
    random_table,
)

CONFIGS = [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2), (4, 0), (4, 2)]


def uniform_table(J: int) -> ObservedDistribution:
    config = DesignConfig(J, 0)
    u = F(1, J)
    return ObservedDistribution(config, {z: (u,) * J for z in range(J)})


def compliance_table(J: int) -> ObservedDistribution:
    config = DesignConfig(J, 0)
    rows = {z: tuple(F(int(j == z)) for j in range(J)) for z in range(J)}
    return ObservedDistribution(config, rows)


def test_ordering_places_target_last():
    config = DesignConfig(3, 0)
    values = {0: F(1, 2), 1: F(1, 4), 2: F(1, 4)}
    assert instrument_ordering(config, values, 0) == (1, 2, 0)
    # tie between 1 and 2 breaks by ascending instrument value
    assert instrument_ordering(config, {0: F(0), 1: F(0), 2: F(0)}, 2) == (0, 1, 2)


def test_ordering_base_state_placement():
    config = DesignConfig(4, 2)  # support {0, 2, 3}
    values = {0: F(1, 8), 2: F(1, 2), 3: F(3, 8)}
    # target 2: other non-base values first, then 0, then the target
    assert instrument_ordering(config, values, 2) == (3, 0, 2)
    # untargeted choice: non-base values ascending, base last
    assert instrument_ordering(config, values, 0) == (3, 2, 0)


def test_construct_uniform_table():
    q = construct(uniform_table(3))
    assert {rt.d: m for rt, m in q.mass.items()} == {
        (0, 0, 0): F(1, 3),
        (1, 1, 1): F(1, 3),
        (2, 2, 2): F(1, 3),
    }


def test_construct_perfect_compliance():
    q = construct(compliance_table(3))
    assert {rt.d: m for rt, m in q.mass.items()} == {(0, 1, 2): F(1)}


def test_construct_base_state_example():
    config = DesignConfig(2, 1)
    P = ObservedDistribution(config, {0: (F(3, 4), F(1, 4)), 1: (F(1, 2), F(1, 2))})
    q = construct(P)
    assert {rt.d: m for rt, m in q.mass.items()} == {
        (0, 0): F(1, 2),
        (0, 1): F(1, 4),
        (1, 1): F(1, 4),
    }


def test_roundtrip_exact_on_random_feasible_tables():
    rng = Random(61)
    for J, J0 in CONFIGS:
        config = DesignConfig(J, J0)
        for _ in range(40):
            P = feasible_table(config, rng)
            q = construct(P)
            assert pushforward(q).rows == P.rows
            for rt in q.mass:
                assert is_admissible(config, rt)


def test_construct_succeeds_iff_check_passes():
    rng = Random(67)
    for J, J0 in CONFIGS:
        config = DesignConfig(J, J0)
        for i in range(60):
            P = random_table(config, rng) if i % 2 else feasible_table(config, rng)
            passed = check(P).passed
            try:
                construct(P)
                built = True
            except ConstructionError:
                built = False
            assert built == passed


def test_construct_error_names_negative_mass():
    config = DesignConfig(2, 0)
    P = ObservedDistribution(config, {0: (F(2, 5), F(3, 5)), 1: (F(3, 5), F(2, 5))})
    with pytest.raises(ConstructionError) as err:
        construct(P)
    assert err.value.mass == F(-1, 5)


def test_step_masses_sum_to_top_value():
    # Per target, base plus increments telescope to the largest allowed
    # non-targeting probability.
    rng = Random(71)
    for J, J0 in CONFIGS:
        config = DesignConfig(J, J0)
        P = feasible_table(config, rng)
        trace = diagnose(P)
        for j in range(config.J):
            total = sum(
                e.mass for e in trace.entries if e.target == j and e.kind in ("base", "step")
            )
            order = trace.orderings[j]
            assert total == P.p(order[-2], j)


def test_complement_identity():
    # Constructed mass of {D_k = k} equals 1 - sum_{j != k} P{D=j | Z=k}.
    rng = Random(73)
    for J, J0 in [(3, 0), (4, 0), (3, 1)]:
        config = DesignConfig(J, J0)
        P = feasible_table(config, rng)
        q = construct(P)
        for k in config.z_support:
            if k < config.J0:
                continue
            mass_k = sum(
                m for rt, m in q.mass.items() if rt.d_at(config, k) == k
            )
            assert mass_k == 1 - sum(
                P.p(k, j) for j in range(config.J) if j != k
            )


def test_diagnose_uniform_trace():
    trace = diagnose(uniform_table(3))
    assert trace.feasible
    bases = [e for e in trace.entries if e.kind == "base"]
    assert [e.mass for e in bases] == [F(1, 3)] * 3
    steps = [e for e in trace.entries if e.kind == "step"]
    assert all(e.mass == 0 for e in steps)
    (diag,) = [e for e in trace.entries if e.kind == "compliance"]
    assert diag.mass == 0


def test_diagnose_violation_trace():
    config = DesignConfig(2, 0)
    P = ObservedDistribution(config, {0: (F(2, 5), F(3, 5)), 1: (F(3, 5), F(2, 5))})
    trace = diagnose(P)
    assert not trace.feasible
    (diag,) = [e for e in trace.entries if e.kind == "compliance"]
    assert diag.mass == F(-1, 5)


def test_diagnose_compliance_trace():
    trace = diagnose(compliance_table(3))
    assert trace.feasible
    assert all(e.mass == 0 for e in trace.entries if e.kind in ("base", "step"))
    (diag,) = [e for e in trace.entries if e.kind == "compliance"]
    assert diag.mass == 1


# ---------------------------------------------------------- outcome side


def test_outcome_roundtrip_exact():
    rng = Random(79)
    for J, J0, ny in [(2, 0, 2), (2, 1, 3), (3, 0, 2), (3, 1, 2), (3, 2, 3)]:
        config = DesignConfig(J, J0)
        ys = tuple(range(ny))
        for _ in range(25):
            PY = feasible_outcome_table(config, ys, rng)
            qstar = construct_outcome(PY)
            assert pushforward_outcome(qstar).cells == PY.cells


def test_degenerate_outcome_reduces_to_treatment_construction():
    rng = Random(83)
    for J, J0 in [(2, 0), (3, 0), (3, 1)]:
        config = DesignConfig(J, J0)
        P = feasible_table(config, rng)
        cells = {
            z: {j: {0: P.p(z, j)} for j in range(config.J)}
            for z in config.z_support
        }
        PY = OutcomeDistribution(config, (0,), cells)
        qstar = construct_outcome(PY)
        assert qstar.type_marginal().mass == construct(P).mass


def test_product_outcome_table_marginalizes_to_treatment_witness():
    rng = Random(89)
    config = DesignConfig(3, 0)
    u = F(1, 3)
    P = ObservedDistribution(config, {z: (u, u, u) for z in range(3)})
    y_dist = {0: F(1, 4), 1: F(3, 4)}
    cells = {
        z: {j: {y: P.p(z, j) * y_dist[y] for y in (0, 1)} for j in range(3)}
        for z in config.z_support
    }
    PY = OutcomeDistribution(config, (0, 1), cells)
    qstar = construct_outcome(PY)
    assert qstar.type_marginal().mass == construct(P).mass
    assert pushforward_outcome(qstar).cells == PY.cells


def test_lambda_weights_normalized():
    rng = Random(97)
    for J, J0, ny in [(3, 0, 2), (3, 1, 3), (2, 0, 4)]:
        config = DesignConfig(J, J0)
        PY = feasible_outcome_table(config, tuple(range(ny)), rng)
        lam = lambda_weights(PY)
        for j in range(config.J):
            assert sum(lam[j].values()) == 1
            assert all(v >= 0 for v in lam[j].values())


def test_construct_outcome_fails_iff_outcome_check_fails():
    rng = Random(101)
    from helpers import random_outcome_table

    for J0 in (0, 1):
        config = DesignConfig(3, J0)
        for i in range(40):
            PY = (
                random_outcome_table(config, (0, 1), rng)
                if i % 2
                else feasible_outcome_table(config, (0, 1), rng)
            )
            passed = check_outcome(PY).passed
            try:
                construct_outcome(PY)
                built = True
            except ConstructionError:
                built = False
            assert built == passed


def test_negative_mixing_weight_reported_as_construction_error():
    # targeted dominance broken at (j=1, y=0) while every partition sum
    # stays below 1, so only the mixing-weight path can flag the table
    config = DesignConfig(2, 0)
    cells = {
        0: {0: {0: F(3, 10), 1: F(2, 10)}, 1: {0: F(3, 10), 1: F(2, 10)}},
        1: {0: {0: F(2, 10), 1: F(2, 10)}, 1: {0: F(2, 10), 1: F(4, 10)}},
    }
    PY = OutcomeDistribution(config, (0, 1), cells)
    from encdesign.inequalities import partition_check

    assert partition_check(PY).passed
    assert not check_outcome(PY).passed
    with pytest.raises(ConstructionError) as err:
        construct_outcome(PY)
    assert err.value.target == 1
    assert err.value.mass == F(-1, 10)


def test_outcome_measure_validates():
    config = DesignConfig(2, 0)
    with pytest.raises(ValueError):
        OutcomeResponseMeasure(
            config, (0, 1), {(ResponseType((1, 0)), (0, 0)): F(1)}
        )
    with pytest.raises(ValueError):
        OutcomeResponseMeasure(
            config, (0, 1), {(ResponseType((0, 0)), (0, 2)): F(1)}
        )
