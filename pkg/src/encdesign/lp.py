"""Independent feasibility oracle via exact phase-one simplex.

Decides whether a table is the pushforward of some measure on the
admissible set by solving the linear system (one nonnegative mass per
admissible response type, one equality per table coordinate) over exact
rationals with Bland's pivoting rule. No tolerances, no external solver:
the matrices are tiny at desk scale and exactness keeps the oracle's
verdict unambiguous. Cross-validates the inequality check and the
constructive witness; it shares no code path with either.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .admissible import enumerate_admissible
from .core import ONE, ZERO, ObservedDistribution, ResponseMeasure
from .errors import CapacityError
from .inequalities import OutcomeDistribution

DEFAULT_LP_CAP = 200_000


def _phase_one(columns: list[list[int]], b: list[Fraction], m: int) -> list[Fraction] | None:
    """Feasibility of Ax = b, x >= 0 for a 0/1 matrix A given column-wise
    (columns[v] lists the rows where variable v has a 1) with b >= 0.

    Phase-one simplex over Fractions with Bland's rule: minimize the sum
    of one artificial variable per row. Returns the structural solution
    when the optimum is zero, None otherwise.
    """
    n = len(columns)
    width = n + m + 1
    tableau = []
    for i in range(m):
        row = [ZERO] * width
        row[n + i] = ONE
        row[-1] = b[i]
        tableau.append(row)
    for v, rows in enumerate(columns):
        for i in rows:
            tableau[i][v] = ONE
    # reduced costs for the artificial basis: -(column sums), value -(sum b)
    obj = [ZERO] * width
    for v, rows in enumerate(columns):
        obj[v] = -Fraction(len(rows))
    obj[-1] = -sum(b, ZERO)
    basis = list(range(n, n + m))

    while True:
        enter = next((c for c in range(n + m) if obj[c] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            coeff = tableau[i][enter]
            if coeff > 0:
                ratio = tableau[i][-1] / coeff
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            raise RuntimeError("phase-one objective unbounded; constraint bug")
        pivot = tableau[leave][enter]
        tableau[leave] = [v / pivot for v in tableau[leave]]
        prow = tableau[leave]
        for i in range(m):
            if i != leave and tableau[i][enter] != 0:
                f = tableau[i][enter]
                tableau[i] = [a - f * p for a, p in zip(tableau[i], prow)]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [a - f * p for a, p in zip(obj, prow)]
        basis[leave] = enter

    if obj[-1] != 0:
        return None
    x = [ZERO] * n
    for i, v in enumerate(basis):
        if v < n:
            x[v] = tableau[i][-1]
    return x


def _solve_table(variables, coord_of_var, coords, rhs_of_coord, cap):
    """Shared feasibility driver: one equality per coordinate except the
    last one of each instrument slice (implied by the slice total), plus
    the normalization row."""
    kept = [c for c in coords if not c[-1]]
    m = len(kept) + 1
    if len(variables) * m > cap:
        raise CapacityError(
            f"LP would have {len(variables)} variables and {m} rows, cap is {cap}"
        )
    row_index = {c[0]: i for i, c in enumerate(kept)}
    columns = []
    for var in variables:
        rows = sorted(
            {row_index[c] for c in coord_of_var(var) if c in row_index}
        )
        rows.append(m - 1)  # normalization
        columns.append(rows)
    b = [rhs_of_coord(c[0]) for c in kept] + [ONE]
    return _phase_one(columns, b, m)


def feasible(
    P: ObservedDistribution, cap: int = DEFAULT_LP_CAP
) -> tuple[bool, ResponseMeasure | None]:
    """Exact LP verdict plus, when feasible, a certificate measure whose
    pushforward equals P."""
    config = P.config
    types = enumerate_admissible(config).types
    coords = []
    for z in config.z_support:
        for j in range(config.J):
            coords.append(((z, j), j == config.J - 1))

    def coord_of_var(rt):
        return [(z, rt.d[i]) for i, z in enumerate(config.z_support)]

    x = _solve_table(types, coord_of_var, coords, lambda c: P.p(*c), cap)
    if x is None:
        return False, None
    measure = ResponseMeasure(
        config, {rt: v for rt, v in zip(types, x) if v > 0}
    )
    return True, measure


def feasible_outcome(PY: OutcomeDistribution, cap: int = DEFAULT_LP_CAP) -> bool:
    """Exact LP verdict on the outcome table, over one variable per
    (response type, outcome vector) pair."""
    config = PY.config
    ys = PY.y_support
    types = enumerate_admissible(config).types
    variables = [
        (rt, yvec) for rt in types for yvec in product(ys, repeat=config.J)
    ]
    coords = []
    for z in config.z_support:
        cells = [(j, y) for j in range(config.J) for y in ys]
        for idx, (j, y) in enumerate(cells):
            coords.append(((z, j, y), idx == len(cells) - 1))

    def coord_of_var(var):
        rt, yvec = var
        out = []
        for i, z in enumerate(config.z_support):
            j = rt.d[i]
            out.append((z, j, yvec[j]))
        return out

    x = _solve_table(variables, coord_of_var, coords, lambda c: PY.p(*c), cap)
    return x is not None
