"""Exact rational two-phase simplex with Bland's rule.

Solves  minimize c.x  subject to  A x (<=|==) b  and box bounds on x, all
coefficients rational.  Bland's pivoting rule guarantees termination; every
returned point is re-substituted into every constraint exactly before it
leaves this module.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .rational import RAT, ZERO, ONE, dot


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    x: tuple = None
    objective: object = None


LE = "<="
EQ = "=="


def _pivot(tableau, basis, row, col):
    prow = tableau[row]
    pv = prow[col]
    if pv != ONE:
        inv = ONE / pv
        tableau[row] = prow = [a * inv for a in prow]
    for i, other in enumerate(tableau):
        if i == row:
            continue
        f = other[col]
        if f:
            tableau[i] = [a - f * b for a, b in zip(other, prow)]
    basis[row] = col


def _bland_minimize(tableau, basis, ncols):
    """Run simplex to optimality on a tableau whose last row is the cost row
    (expressed in the current basis) and last column is the rhs.  Returns
    True on optimality, False when unbounded."""
    cost = tableau[-1]
    while True:
        enter = -1
        for j in range(ncols):
            if cost[j] < ZERO:
                enter = j
                break
        if enter < 0:
            return True
        leave = -1
        best = None
        for i in range(len(tableau) - 1):
            a = tableau[i][enter]
            if a > ZERO:
                ratio = tableau[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return False
        _pivot(tableau, basis, leave, enter)
        cost = tableau[-1]


def solve_lp(objective, rows, rels, rhs, bounds, feasibility_only=False) -> LpResult:
    """Solve the LP in original variables.

    objective: length-n sequence (minimized); rows/rels/rhs: constraints;
    bounds: per-variable (lower, upper), either side may be None.
    """
    n = len(bounds)
    objective = [RAT(c) for c in objective]
    # Map original variables to nonnegative standard-form columns.
    # col_map[i] = (kind, data): shift (col, lo), flip (col, hi), free (col+, col-)
    col_map = []
    ncols = 0
    extra_rows = []  # (col, ub) for two-sided bounds
    for lo, hi in bounds:
        if lo is not None and hi is not None and lo > hi:
            return LpResult(LpStatus.INFEASIBLE)
        if lo is not None:
            col_map.append(("shift", ncols, RAT(lo)))
            if hi is not None:
                extra_rows.append((ncols, RAT(hi) - RAT(lo)))
            ncols += 1
        elif hi is not None:
            col_map.append(("flip", ncols, RAT(hi)))
            ncols += 1
        else:
            col_map.append(("free", ncols, None))
            ncols += 2

    def expand(coeffs, base_rhs):
        """Rewrite a row over x into standard-form columns, returning (row, rhs)."""
        row = [ZERO] * ncols
        b = RAT(base_rhs)
        for i, c in enumerate(coeffs):
            if not c:
                continue
            kind, col, val = col_map[i]
            if kind == "shift":
                row[col] += c
                b -= c * val
            elif kind == "flip":
                row[col] -= c
                b -= c * val
            else:
                row[col] += c
                row[col + 1] -= c
        return row, b

    std_rows = []
    std_rhs = []
    std_rel = []
    for coeffs, rel, b in zip(rows, rels, rhs):
        row, bb = expand(coeffs, b)
        std_rows.append(row)
        std_rhs.append(bb)
        std_rel.append(rel)
    for col, ub in extra_rows:
        row = [ZERO] * ncols
        row[col] = ONE
        std_rows.append(row)
        std_rhs.append(ub)
        std_rel.append(LE)

    # Slacks for inequalities, then sign-normalize rhs.
    nslack = sum(1 for rel in std_rel if rel == LE)
    total = ncols + nslack
    sl = ncols
    for i, rel in enumerate(std_rel):
        std_rows[i] = std_rows[i] + [ZERO] * nslack
        if rel == LE:
            std_rows[i][sl] = ONE
            sl += 1
    slack_cols = list(range(ncols, ncols + nslack))
    for i in range(len(std_rows)):
        if std_rhs[i] < ZERO:
            std_rows[i] = [-a for a in std_rows[i]]
            std_rhs[i] = -std_rhs[i]

    # Phase 1: artificials where a slack cannot start basic.
    basis = [-1] * len(std_rows)
    art_cols = []
    sl = 0
    for i, rel in enumerate(std_rel):
        col = None
        if rel == LE:
            c = slack_cols[sl]
            sl += 1
            if std_rows[i][c] == ONE:  # not sign-flipped
                col = c
        basis[i] = col if col is not None else -1
    tableau = []
    width = total
    for i, row in enumerate(std_rows):
        tableau.append(list(row))
    for i in range(len(tableau)):
        if basis[i] == -1:
            for t in tableau:
                t.append(ZERO)
            art = width
            width += 1
            tableau[i][art] = ONE
            basis[i] = art
            art_cols.append(art)
    for i, row in enumerate(tableau):
        row.append(std_rhs[i])

    if art_cols:
        cost = [ZERO] * (width + 1)
        for a in art_cols:
            cost[a] = ONE
        art_set = set(art_cols)
        for i, b in enumerate(basis):
            if b in art_set:
                cost = [c - a for c, a in zip(cost, tableau[i])]
        tableau.append(cost)
        _bland_minimize(tableau, basis, width)
        if tableau[-1][-1] < ZERO:  # minimized sum of artificials is -cost rhs
            return LpResult(LpStatus.INFEASIBLE)
        tableau.pop()
        # Drive leftover artificials out of the basis or drop redundant rows.
        keep = []
        for i in range(len(tableau)):
            if basis[i] in art_cols:
                piv = next((j for j in range(total) if tableau[i][j] != ZERO), None)
                if piv is None:
                    continue  # redundant zero row
                _pivot(tableau, basis, i, piv)
            keep.append(i)
        tableau = [tableau[i] for i in keep]
        basis = [basis[i] for i in keep]
        tableau = [row[:total] + [row[-1]] for row in tableau]
        width = total

    def extract():
        values = [ZERO] * total
        for i, b in enumerate(basis):
            values[b] = tableau[i][-1]
        x = []
        for kind, col, val in col_map:
            if kind == "shift":
                x.append(val + values[col])
            elif kind == "flip":
                x.append(val - values[col])
            else:
                x.append(values[col] - values[col + 1])
        return tuple(x)

    if feasibility_only:
        x = extract()
        _check(objective, rows, rels, rhs, bounds, x)
        return LpResult(LpStatus.OPTIMAL, x, dot(objective, x))

    # Phase 2.  The cost row's rhs entry holds -z throughout; expand() returns
    # b = -(constant part of the objective), which is exactly -z at y = 0.
    std_obj, obj_shift = expand(objective, ZERO)
    cost = std_obj + [ZERO] * (width - ncols) + [obj_shift]
    tableau.append(cost)
    for i, b in enumerate(basis):
        f = tableau[-1][b]
        if f:
            tableau[-1] = [a - f * c for a, c in zip(tableau[-1], tableau[i])]
    if not _bland_minimize(tableau, basis, width):
        return LpResult(LpStatus.UNBOUNDED)
    objective_value = -tableau[-1][-1]
    tableau.pop()
    x = extract()
    _check(objective, rows, rels, rhs, bounds, x)
    assert dot(objective, x) == objective_value
    return LpResult(LpStatus.OPTIMAL, x, objective_value)


def _check(objective, rows, rels, rhs, bounds, x):
    """Exact re-substitution of the solution into every constraint."""
    for (lo, hi), v in zip(bounds, x):
        assert lo is None or v >= lo, "lower bound violated"
        assert hi is None or v <= hi, "upper bound violated"
    for row, rel, b in zip(rows, rels, rhs):
        lhs = dot(row, x)
        if rel == LE:
            assert lhs <= b, "inequality violated"
        else:
            assert lhs == b, "equality violated"
