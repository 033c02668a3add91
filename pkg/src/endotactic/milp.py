"""MILP representation, the endotacticity model builders, and LP-file export.

The models follow a big-M scheme with M = 1/epsilon: a binary label per
reaction activates or releases the linear conditions on the direction
vector w, and strict inequalities are realized with an epsilon margin.
Optimizing  minimize -sum(Rm)  returns 0 exactly when no labelled witness
exists; any feasible point with a label set is a certificate candidate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .network import NetworkMatrices
from .rational import RAT, ZERO, ONE, rat, rat_str
from .simplex import EQ, LE, LpResult, LpStatus, solve_lp


class Mode(enum.Enum):
    ENDOTACTIC = "endotactic"
    LOWER_ENDOTACTIC = "lower_endotactic"
    STRONGLY_ENDOTACTIC = "strongly_endotactic"


@dataclass(frozen=True)
class Variable:
    name: str
    lower: object
    upper: object
    is_binary: bool = False


@dataclass(frozen=True)
class Constraint:
    """Sparse row: sum(coeff * var) relation rhs, relation in {"<=", "=="}."""

    terms: tuple  # ((var_index, coeff), ...)
    relation: str
    rhs: object
    name: str = ""

    def lhs(self, assignment):
        s = ZERO
        for idx, c in self.terms:
            v = assignment[idx]
            if v:
                s += c * v
        return s

    def satisfied_by(self, assignment) -> bool:
        lhs = self.lhs(assignment)
        return lhs == self.rhs if self.relation == EQ else lhs <= self.rhs


@dataclass(frozen=True)
class MilpModel:
    variables: tuple
    constraints: tuple
    objective: tuple  # sparse terms, minimized
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def binary_indices(self) -> tuple:
        return tuple(i for i, v in enumerate(self.variables) if v.is_binary)

    def objective_value(self, assignment):
        s = ZERO
        for idx, c in self.objective:
            if assignment[idx]:
                s += c * assignment[idx]
        return s

    def check_assignment(self, assignment) -> bool:
        """Exact feasibility of a full assignment, bounds and binariness included."""
        for i, var in enumerate(self.variables):
            v = assignment[i]
            if var.lower is not None and v < var.lower:
                return False
            if var.upper is not None and v > var.upper:
                return False
            if var.is_binary and v != 0 and v != 1:
                return False
        return all(c.satisfied_by(assignment) for c in self.constraints)


class MilpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    INCUMBENT_FOUND = "incumbent_found"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class MilpSolution:
    status: MilpStatus
    objective_value: object = None
    assignment: tuple = None
    nodes: int = 0


@dataclass(frozen=True)
class EndoMilpConfig:
    """Epsilon and mode for the witness-search model.

    se3_encoding selects how the strong-mode source-dominance conditions are
    linearized: "lemma" (default) encodes them exactly as the witness
    characterization states; "printed" reproduces a published variant kept
    only for comparison (it certifies too much and is not used by the
    classifier).
    """

    epsilon: object = rat(1, 10)
    mode: Mode = Mode.ENDOTACTIC
    se3_encoding: str = "lemma"

    def __post_init__(self):
        eps = rat(self.epsilon)
        if not (ZERO < eps <= ONE):
            raise ValueError("epsilon must satisfy 0 < epsilon <= 1")
        object.__setattr__(self, "epsilon", eps)
        if self.se3_encoding not in ("lemma", "printed"):
            raise ValueError("se3_encoding must be 'lemma' or 'printed'")


def build_endo_model(mats: NetworkMatrices, cfg: EndoMilpConfig) -> MilpModel:
    """Assemble the witness-search MILP for one mode.

    Variables: w[m] continuous in [-1/eps, 1/eps]; R0[r], Rm[r] binary;
    Theta binary in strongly-endotactic mode only.  A feasible point with
    some Rm[i] = 1 decodes to a direction w and reaction partition
    (R0 = {R0[i]=1}, R- = {Rm[i]=1}, R+ = rest) violating the mode.
    """
    m, r = mats.m, mats.r
    eps = rat(cfg.epsilon)
    inv = ONE / eps
    mode = cfg.mode

    variables = [Variable(f"w_{k + 1}", -inv, inv) for k in range(m)]
    r0 = list(range(m, m + r))
    variables += [Variable(f"R0_{i + 1}", ZERO, ONE, is_binary=True) for i in range(r)]
    rm = list(range(m + r, m + 2 * r))
    variables += [Variable(f"Rm_{i + 1}", ZERO, ONE, is_binary=True) for i in range(r)]
    theta = None
    if mode is Mode.STRONGLY_ENDOTACTIC:
        theta = m + 2 * r
        variables.append(Variable("Theta", ZERO, ONE, is_binary=True))

    def wterms(vec):
        return tuple((k, c) for k, c in enumerate(vec) if c)

    cons = []
    for i in range(r):
        g = wterms(mats.gamma_col(i))
        cons.append(Constraint(g + ((r0[i], inv),), LE, inv, f"E1p_{i + 1}"))
        cons.append(
            Constraint(tuple((k, -c) for k, c in g) + ((r0[i], inv),), LE, inv, f"E1n_{i + 1}")
        )
        cons.append(Constraint(((r0[i], ONE), (rm[i], ONE)), LE, ONE, f"E2x_{i + 1}"))
        cons.append(Constraint(g + ((rm[i], inv),), LE, inv - eps, f"E2m_{i + 1}"))

    def ydiff(i, j):
        yi, yj = mats.y_col(i), mats.y_col(j)
        return tuple((k, yi[k] - yj[k]) for k in range(m) if yi[k] != yj[k])

    if mode in (Mode.ENDOTACTIC, Mode.LOWER_ENDOTACTIC):
        for i in range(r):
            for j in range(r):
                if i == j:
                    continue
                terms = ydiff(i, j) + ((rm[i], inv), (rm[j], -inv), (r0[j], -inv))
                cons.append(Constraint(terms, LE, inv, f"E3_{i + 1}_{j + 1}"))
    if mode is Mode.LOWER_ENDOTACTIC:
        for k in range(m):
            cons.append(Constraint(((k, -ONE),), LE, ZERO, f"LE_{k + 1}"))
    if mode is Mode.STRONGLY_ENDOTACTIC:
        for i in range(r):
            for j in range(r):
                if i == j:
                    continue
                if cfg.se3_encoding == "lemma":
                    terms = ydiff(i, j) + ((r0[i], inv), (r0[j], -inv), (theta, -inv))
                else:
                    terms = ydiff(i, j) + ((rm[i], inv), (rm[j], -inv))
                cons.append(Constraint(terms, LE, inv - eps, f"SE3a_{i + 1}_{j + 1}"))
        sum_r0 = tuple((r0[i], -inv) for i in range(r))
        cons.append(Constraint(sum_r0 + ((theta, -ONE),), LE, -ONE, "SE3b1"))
        cons.append(Constraint(sum_r0 + ((theta, ONE),), LE, ONE, "SE3b2"))
        if cfg.se3_encoding == "lemma":
            # Theta must also switch off when R0 is nonempty, matching the
            # dichotomy the witness characterization requires.
            for i in range(r):
                cons.append(Constraint(((theta, ONE), (r0[i], ONE)), LE, ONE, f"SE3bT_{i + 1}"))
        for i in range(r):
            for j in range(r):
                if i == j:
                    continue
                terms = ydiff(i, j) + ((rm[i], inv), (rm[j], -inv), (theta, inv))
                cons.append(Constraint(terms, LE, 2 * inv, f"SE3b3_{i + 1}_{j + 1}"))

    objective = tuple((rm[i], -ONE) for i in range(r))
    meta = {
        "endo": True,
        "mode": mode,
        "epsilon": eps,
        "encoding": cfg.se3_encoding,
        "m": m,
        "r": r,
        "gamma": mats.gamma,
        "y": mats.y_source,
        "w_vars": tuple(range(m)),
        "r0_vars": tuple(r0),
        "rm_vars": tuple(rm),
        "theta_var": theta,
        "branch_order": tuple(rm) + tuple(r0) + ((theta,) if theta is not None else ()),
    }
    return MilpModel(tuple(variables), tuple(cons), objective, meta)


def lp_solve(model: MilpModel, fixed_binaries=None, feasibility_only=False) -> LpResult:
    """LP relaxation of the model: binaries in ``fixed_binaries`` are pinned,
    remaining binaries relax to [0, 1].  The returned point has been
    re-substituted into every constraint exactly."""
    fixed_binaries = fixed_binaries or {}
    n = model.num_vars
    bounds = []
    for i, var in enumerate(model.variables):
        if var.is_binary and i in fixed_binaries:
            v = rat(fixed_binaries[i])
            bounds.append((v, v))
        else:
            bounds.append((var.lower, var.upper))
    rows = []
    rels = []
    rhs = []
    for con in model.constraints:
        row = [ZERO] * n
        for idx, c in con.terms:
            row[idx] += c
        rows.append(row)
        rels.append(con.relation)
        rhs.append(con.rhs)
    objective = [ZERO] * n
    for idx, c in model.objective:
        objective[idx] += c
    return solve_lp(objective, rows, rels, rhs, bounds, feasibility_only=feasibility_only)


def _decimal(q):
    """(text, exact) decimal rendering; exact when the denominator is 2^a 5^b."""
    q = rat(q)
    num, den = int(q.numerator), int(q.denominator)
    if den == 1:
        return str(num), True
    d = den
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1:
        digits = 0
        scaled = q
        while scaled.denominator != 1:
            scaled *= 10
            digits += 1
        sign = "-" if num < 0 else ""
        s = str(abs(int(scaled)))
        s = s.rjust(digits + 1, "0")
        return f"{sign}{s[:-digits]}.{s[-digits:]}", True
    return repr(float(num) / float(den)), False


def export_lp(model: MilpModel) -> str:
    """CPLEX-style LP file text.

    Rationals whose decimal expansion terminates are written exactly;
    any constraint or bound with a non-terminating coefficient gets a
    comment line carrying the exact p/q values.
    """
    lines = ["\\ endotactic witness model"]
    if model.meta.get("endo"):
        lines.append(f"\\ mode={model.meta['mode'].value} epsilon={rat_str(model.meta['epsilon'])}")

    def render_terms(terms):
        out = []
        inexact = []
        for pos, (idx, c) in enumerate(terms):
            name = model.variables[idx].name
            text, exact = _decimal(abs(c))
            if not exact:
                inexact.append(f"{rat_str(c)} {name}")
            sign = "-" if c < 0 else "+"
            if pos == 0 and sign == "+":
                sign = ""
            mag = "" if abs(c) == 1 else text + " "
            out.append(f"{sign} {mag}{name}".strip())
        return " ".join(out) if out else "0 " + model.variables[0].name, inexact

    obj_text, _ = render_terms(model.objective)
    lines.append("Minimize")
    lines.append(f" obj: {obj_text}")
    lines.append("Subject To")
    for con in model.constraints:
        body, inexact = render_terms(con.terms)
        rel = "=" if con.relation == EQ else "<="
        rhs_text, rhs_exact = _decimal(con.rhs)
        if not rhs_exact:
            inexact.append(f"rhs {rat_str(con.rhs)}")
        if inexact:
            lines.append(f"\\ {con.name} exact: " + "; ".join(inexact))
        lines.append(f" {con.name}: {body} {rel} {rhs_text}")
    lines.append("Bounds")
    for var in model.variables:
        if var.is_binary:
            continue
        lo, lo_ok = _decimal(var.lower) if var.lower is not None else ("-inf", True)
        hi, hi_ok = _decimal(var.upper) if var.upper is not None else ("+inf", True)
        if not (lo_ok and hi_ok):
            lines.append(
                f"\\ {var.name} exact bounds: {rat_str(var.lower)} .. {rat_str(var.upper)}"
            )
        lines.append(f" {lo} <= {var.name} <= {hi}")
    binaries = [model.variables[i].name for i in model.binary_indices()]
    if binaries:
        lines.append("Binary")
        for name in binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"
