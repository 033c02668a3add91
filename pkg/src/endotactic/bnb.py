"""Branch and bound for the witness-search MILPs.

Two search strategies share the public entry point:

* a classic depth-first B&B over binary variables with LP-relaxation bound
  pruning, used to prove optimality (and for any non-endotacticity model);

* a specialized depth-first search for endo-models under stop_at_negative,
  which only has to answer "is there a feasible point with some Rm = 1".
  Reactions carry a three-valued label (R-, R0, R+, tried in that order,
  so Rm=1 branches are explored before R0=1 as the model's branch order
  prescribes).  Nodes are pruned by exact LP feasibility of the
  w-polyhedron induced by the fixed labels; per-label LP probes force
  labels without branching; a cache of feasible w points (with their
  precomputed reaction dot products) answers most probes without an LP;
  and at every node the cached point is tested for a combinatorial
  completion to a full witness.  The big-M LP relaxation bound is useless
  on these models (it always sits near -r), so this propagation does the
  pruning instead.

Every incumbent is exact-checked against the untouched model before it is
returned.
"""

from __future__ import annotations

from .milp import MilpModel, MilpSolution, MilpStatus, Mode, lp_solve
from .rational import RAT, ZERO, ONE, dot
from .simplex import EQ, LE, LpStatus, solve_lp

M_LABEL = 0
Z_LABEL = 1
P_LABEL = 2
_ALL_LABELS = (M_LABEL, Z_LABEL, P_LABEL)
_POINT_CAP = 16


class _NodeLimit(Exception):
    pass


def branch_and_bound(model: MilpModel, stop_at_negative: bool = False, node_limit: int = 200000) -> MilpSolution:
    """Solve the MILP.  With stop_at_negative, the first incumbent whose
    objective is <= -1 is returned as INCUMBENT_FOUND; otherwise optimality
    is proved.  Node limit exhaustion reports UNKNOWN."""
    if stop_at_negative and model.meta.get("endo"):
        return _EndoSearch(model, node_limit).run()
    return _generic_bnb(model, stop_at_negative, node_limit)


def _generic_bnb(model: MilpModel, stop_at_negative: bool, node_limit: int) -> MilpSolution:
    order = model.meta.get("branch_order") or model.binary_indices()
    partner = {}
    if model.meta.get("endo"):
        # E2x makes R0 and Rm of the same reaction mutually exclusive.
        for a, b in zip(model.meta["r0_vars"], model.meta["rm_vars"]):
            partner[a] = b
            partner[b] = a
    best_val = None
    best_x = None
    nodes = 0
    stack = [{}]
    while stack:
        fixed = stack.pop()
        nodes += 1
        if nodes > node_limit:
            return MilpSolution(MilpStatus.UNKNOWN, best_val, best_x, nodes)
        res = lp_solve(model, fixed)
        if res.status is LpStatus.INFEASIBLE:
            continue
        if res.status is LpStatus.UNBOUNDED:
            raise ValueError("LP relaxation unbounded; model variables must be bounded")
        if best_val is not None and res.objective >= best_val:
            continue
        branch_var = None
        for b in order:
            if b not in fixed and res.x[b] != 0 and res.x[b] != 1:
                branch_var = b
                break
        if branch_var is None:
            assert model.check_assignment(res.x)
            best_val = res.objective
            best_x = res.x
            if stop_at_negative and best_val <= -1:
                return MilpSolution(MilpStatus.INCUMBENT_FOUND, best_val, best_x, nodes)
            continue
        zero_branch = {**fixed, branch_var: 0}
        one_branch = {**fixed, branch_var: 1}
        if branch_var in partner:
            one_branch[partner[branch_var]] = 0
        stack.append(zero_branch)
        stack.append(one_branch)
    if best_val is None:
        return MilpSolution(MilpStatus.INFEASIBLE, nodes=nodes)
    return MilpSolution(MilpStatus.OPTIMAL, best_val, best_x, nodes)


class _Point:
    """A w vector feasible for some node, with cached reaction dot products."""

    __slots__ = ("w", "gdot", "sdot")

    def __init__(self, w, gamma, y):
        self.w = w
        self.gdot = [dot(w, g) for g in gamma]
        self.sdot = [dot(w, yy) for yy in y]


class _EndoSearch:
    """Depth-first label search answering "does the endo-model admit a
    feasible point with at least one reaction labelled R-"."""

    def __init__(self, model: MilpModel, node_limit: int):
        meta = model.meta
        self.model = model
        self.node_limit = node_limit
        self.mode: Mode = meta["mode"]
        self.encoding = meta["encoding"]
        self.eps = meta["epsilon"]
        self.inv = ONE / self.eps
        self.m = meta["m"]
        self.r = meta["r"]
        self.gamma = meta["gamma"]
        self.y = meta["y"]
        self.nodes = 0
        self.lp_calls = 0
        self.strong = self.mode is Mode.STRONGLY_ENDOTACTIC
        self.lower = self.mode is Mode.LOWER_ENDOTACTIC
        self.parallel = self._parallel_pairs()
        self.nonneg_gamma = tuple(all(c >= 0 for c in g) for g in self.gamma)
        self.zero_gamma = tuple(all(c == 0 for c in g) for g in self.gamma)

    def _parallel_pairs(self):
        """parallel[i] = ((j, sign), ...) with gamma_j = c*gamma_i, sign = sign(c)."""
        out = [[] for _ in range(self.r)]
        for i in range(self.r):
            gi = self.gamma[i]
            fi = next((k for k, c in enumerate(gi) if c), None)
            if fi is None:  # self-loop column; never eligible for R-
                continue
            for j in range(self.r):
                if j == i:
                    continue
                gj = self.gamma[j]
                c = gj[fi] / gi[fi]
                if c != 0 and all(b == c * a for a, b in zip(gi, gj)):
                    out[i].append((j, 1 if c > 0 else -1))
        return tuple(tuple(p) for p in out)

    def run(self) -> MilpSolution:
        allowed = [set(_ALL_LABELS) for _ in range(self.r)]
        for j in range(self.r):
            if self.zero_gamma[j] or (self.lower and self.nonneg_gamma[j]):
                allowed[j].discard(M_LABEL)
        theta = None if self.strong else 0
        try:
            found = self._search(allowed, theta, [])
        except _NodeLimit:
            return MilpSolution(MilpStatus.UNKNOWN, nodes=self.nodes)
        if found is not None:
            assert self.model.check_assignment(found)
            return MilpSolution(
                MilpStatus.INCUMBENT_FOUND, self.model.objective_value(found), found, self.nodes
            )
        trivial = self._trivial_assignment()
        assert self.model.check_assignment(trivial)
        return MilpSolution(MilpStatus.OPTIMAL, ZERO, trivial, self.nodes)

    def _trivial_assignment(self):
        x = [ZERO] * self.model.num_vars
        tv = self.model.meta["theta_var"]
        if tv is not None:
            x[tv] = ONE
        return tuple(x)

    # ----- logical propagation -------------------------------------------

    def _propagate(self, allowed, theta):
        """Prune allowed label sets to a fixpoint; None on refutation.

        All derived facts are consequences of the model rows at integer
        points, so pruning here never loses a feasible completion."""
        while True:
            changed = False
            if self.strong and self.encoding == "lemma":
                if theta == 1:
                    for a in allowed:
                        if Z_LABEL in a:
                            a.discard(Z_LABEL)
                            changed = True
                if theta is None and any(a == {Z_LABEL} for a in allowed):
                    theta = 0
                    changed = True
                if all(Z_LABEL not in a for a in allowed):
                    if theta == 0:
                        return None
                    if theta is None:
                        theta = 1
                        changed = True
            for i in range(self.r):
                if allowed[i] == {M_LABEL}:
                    for j, sign in self.parallel[i]:
                        drop = {Z_LABEL} if sign > 0 else {Z_LABEL, M_LABEL}
                        if allowed[j] & drop:
                            allowed[j] -= drop
                            changed = True
                elif allowed[i] == {Z_LABEL}:
                    for j, _ in self.parallel[i]:
                        if M_LABEL in allowed[j]:
                            allowed[j].discard(M_LABEL)
                            changed = True
            if any(not a for a in allowed):
                return None
            if all(M_LABEL not in a for a in allowed):
                return None  # no reaction can be labelled R-: no negative leaf below
            if not changed:
                return allowed, theta

    # ----- node geometry ----------------------------------------------------

    def _bounds(self, extra_vars=0):
        lo = ZERO if self.lower else -self.inv
        return [(lo, self.inv)] * self.m + [(None, None)] * extra_vars

    def _dominance_sides(self, theta):
        """(labels on the dominated side, labels on the dominating side,
        strictness margin); None while theta is still open in strong mode."""
        if not self.strong:
            return (M_LABEL,), (P_LABEL,), ZERO
        if theta == 0:
            if self.encoding == "lemma":
                return (Z_LABEL,), (M_LABEL, P_LABEL), self.eps
            return (M_LABEL,), (Z_LABEL, P_LABEL), self.eps
        if theta == 1:
            return (M_LABEL,), (Z_LABEL, P_LABEL), ZERO
        return None

    def _sets(self, allowed, theta):
        """Fixed label sets and the dominance side membership for the node."""
        fixed = [(j, next(iter(a))) for j, a in enumerate(allowed) if len(a) == 1]
        sides = self._dominance_sides(theta)
        lo_labels, hi_labels, margin = sides if sides else ((), (), ZERO)
        minus = [j for j, l in fixed if l == M_LABEL]
        zero = [j for j, l in fixed if l == Z_LABEL]
        lo = [j for j, l in fixed if l in lo_labels]
        hi = [j for j, l in fixed if l in hi_labels]
        return minus, zero, lo, hi, margin, sides is not None

    def _point_fits(self, pt: _Point, minus, zero, lo, hi, margin) -> bool:
        for j in minus:
            if pt.gdot[j] > -self.eps:
                return False
        for j in zero:
            if pt.gdot[j] != 0:
                return False
        if lo and hi:
            if max(pt.sdot[j] for j in lo) + margin > min(pt.sdot[j] for j in hi):
                return False
        return True

    def _probe_fits(self, pt, j, label, minus, zero, lo, hi, margin, sided) -> bool:
        """Would pt stay feasible if reaction j took this label."""
        if label == M_LABEL and pt.gdot[j] > -self.eps:
            return False
        if label == Z_LABEL and pt.gdot[j] != 0:
            return False
        if not sided:
            return True
        lo_labels, hi_labels, _ = self._dominance_sides_cached
        if label in lo_labels and hi:
            if pt.sdot[j] + margin > min(pt.sdot[k] for k in hi):
                return False
        if label in hi_labels and lo:
            if max(pt.sdot[k] for k in lo) + margin > pt.sdot[j]:
                return False
        return True

    def _w_feasible(self, allowed, theta, extra=None):
        """Exact LP feasibility of the fixed-label polyhedron, optionally
        with one hypothetical extra labelling.  Pairwise dominance is
        aggregated through two scalars (equivalent for feasibility)."""
        self.lp_calls += 1
        fixed = [(j, next(iter(a))) for j, a in enumerate(allowed) if len(a) == 1]
        if extra is not None:
            fixed.append(extra)
        rows, rels, rhs = [], [], []
        n = self.m + 2
        a_var, b_var = self.m, self.m + 1
        sides = self._dominance_sides(theta)
        lo_labels, hi_labels, margin = sides if sides else ((), (), ZERO)
        lo_used = hi_used = False
        for j, label in fixed:
            if label == M_LABEL:
                rows.append(list(self.gamma[j]) + [ZERO, ZERO])
                rels.append(LE)
                rhs.append(-self.eps)
            elif label == Z_LABEL:
                rows.append(list(self.gamma[j]) + [ZERO, ZERO])
                rels.append(EQ)
                rhs.append(ZERO)
            if label in lo_labels:
                rows.append(list(self.y[j]) + [-ONE, ZERO])
                rels.append(LE)
                rhs.append(ZERO)
                lo_used = True
            if label in hi_labels:
                rows.append([-c for c in self.y[j]] + [ZERO, ONE])
                rels.append(LE)
                rhs.append(ZERO)
                hi_used = True
        if lo_used and hi_used:
            row = [ZERO] * n
            row[a_var] = ONE
            row[b_var] = -ONE
            rows.append(row)
            rels.append(LE)
            rhs.append(-margin)
        res = solve_lp([ZERO] * n, rows, rels, rhs, self._bounds(2), feasibility_only=True)
        if res.status is LpStatus.INFEASIBLE:
            return None
        return res.x[: self.m]

    # ----- completion at a candidate w -------------------------------------

    def _complete(self, pt: _Point, allowed, theta):
        gdot, sdot = pt.gdot, pt.sdot
        labels = [next(iter(a)) if len(a) == 1 else None for a in allowed]
        if self.strong:
            routes = []
            if self.encoding == "lemma":
                if theta in (None, 1) and not any(l == Z_LABEL for l in labels):
                    routes.append(1)
                if theta in (None, 0):
                    routes.append(0)
            else:
                routes = [t for t in (0, 1) if theta in (None, t)]
            for t in routes:
                got = self._complete_strong(gdot, sdot, labels, t)
                if got is not None:
                    return got
            return None
        return self._complete_plain(gdot, sdot, labels)

    def _complete_plain(self, gdot, sdot, labels):
        fixed_m = [j for j in range(self.r) if labels[j] == M_LABEL]
        cand = [j for j in range(self.r) if labels[j] is None and gdot[j] <= -self.eps]
        free_zero = [j for j in range(self.r) if labels[j] is None and gdot[j] == 0]
        base_plus = [
            j
            for j in range(self.r)
            if labels[j] == P_LABEL
            or (labels[j] is None and gdot[j] != 0 and gdot[j] > -self.eps)
        ]
        options = []
        if fixed_m:
            options.append([])
        if cand:
            smin = min(sdot[j] for j in cand)
            options.append([j for j in cand if sdot[j] == smin])
        for extra in options:
            chosen = fixed_m + extra
            if not chosen:
                continue
            plus = base_plus + [j for j in cand if j not in extra]
            if plus and max(sdot[j] for j in chosen) > min(sdot[j] for j in plus):
                continue
            out = list(labels)
            for j in chosen:
                out[j] = M_LABEL
            for j in free_zero:
                out[j] = Z_LABEL
            for j in plus:
                out[j] = P_LABEL
            return out, 0
        return None

    def _complete_strong(self, gdot, sdot, labels, route):
        fixed_m = [j for j in range(self.r) if labels[j] == M_LABEL]
        cand = [j for j in range(self.r) if labels[j] is None and gdot[j] <= -self.eps]
        if not fixed_m and not cand:
            return None
        if route == 1 or self.encoding == "printed":
            margin = self.eps if (self.encoding == "printed" and route == 0) else ZERO
            if self.encoding == "lemma" and any(l == Z_LABEL for l in labels):
                return None
            options = []
            if fixed_m:
                options.append([])
            if cand:
                smin = min(sdot[j] for j in cand)
                options.append([j for j in cand if sdot[j] == smin])
            for extra in options:
                chosen = fixed_m + extra
                if not chosen:
                    continue
                rest = [j for j in range(self.r) if j not in chosen]
                if rest and max(sdot[j] for j in chosen) > min(sdot[j] for j in rest) - margin:
                    continue
                out = list(labels)
                for j in chosen:
                    out[j] = M_LABEL
                for j in rest:
                    if out[j] is None:
                        out[j] = (
                            Z_LABEL
                            if (self.encoding == "printed" and gdot[j] == 0)
                            else P_LABEL
                        )
                return out, 1 if route == 1 else 0
            return None
        # lemma route a: R0 nonempty, its sources strictly below all others.
        eligible = [
            j
            for j in range(self.r)
            if labels[j] == Z_LABEL or (labels[j] is None and gdot[j] == 0)
        ]
        if not eligible:
            return None
        fixed_z = {j for j in range(self.r) if labels[j] == Z_LABEL}
        eligible.sort(key=lambda j: (sdot[j], j))
        eligible_set = set(eligible)
        others = [j for j in range(self.r) if j not in eligible_set]
        suffix_min = [None] * (len(eligible) + 1)
        suffix_min[len(eligible)] = min((sdot[j] for j in others), default=None)
        for k in range(len(eligible) - 1, -1, -1):
            s = sdot[eligible[k]]
            suffix_min[k] = s if suffix_min[k + 1] is None else min(s, suffix_min[k + 1])
        for k in range(1, len(eligible) + 1):
            chosen = eligible[:k]
            if not fixed_z <= set(chosen):
                continue
            rest_min = suffix_min[k]
            if rest_min is not None and max(sdot[j] for j in chosen) > rest_min - self.eps:
                continue
            chosen_set = set(chosen)
            rest = [j for j in range(self.r) if j not in chosen_set]
            m_members = [
                j
                for j in rest
                if labels[j] == M_LABEL or (labels[j] is None and gdot[j] <= -self.eps)
            ]
            if not m_members:
                continue
            m_set = set(m_members)
            out = list(labels)
            for j in chosen:
                out[j] = Z_LABEL
            for j in rest:
                if out[j] is None:
                    out[j] = M_LABEL if j in m_set else P_LABEL
            return out, 0
        return None

    # ----- exact solve of a full labelling over the model rows -------------

    def _assignment_from(self, labels, theta, w):
        meta = self.model.meta
        x = [ZERO] * self.model.num_vars
        for k in range(self.m):
            x[k] = w[k]
        for j in range(self.r):
            if labels[j] == Z_LABEL:
                x[meta["r0_vars"][j]] = ONE
            elif labels[j] == M_LABEL:
                x[meta["rm_vars"][j]] = ONE
        if meta["theta_var"] is not None:
            x[meta["theta_var"]] = ONE if theta == 1 else ZERO
        return tuple(x)

    def _leaf_solve(self, labels, theta):
        """Exact w for a full labelling against every model row, or None.
        Rows are substituted at the binaries and activated lazily."""
        probe = self._assignment_from(labels, theta, [ZERO] * self.m)
        pending = []
        for con in self.model.constraints:
            row = [ZERO] * self.m
            b = con.rhs
            has_w = False
            for idx, c in con.terms:
                if idx < self.m:
                    row[idx] += c
                    has_w = True
                else:
                    b -= c * probe[idx]
            if not has_w:
                if (con.relation == EQ and b != 0) or (con.relation == LE and b < 0):
                    return None
                continue
            pending.append((row, con.relation, b))
        active = []
        bounds = self._bounds()
        while True:
            self.lp_calls += 1
            res = solve_lp(
                [ZERO] * self.m,
                [p[0] for p in active],
                [p[1] for p in active],
                [p[2] for p in active],
                bounds,
                feasibility_only=True,
            )
            if res.status is LpStatus.INFEASIBLE:
                return None
            w = res.x
            newly, still = [], []
            for item in pending:
                row, rel, b = item
                lhs = dot(row, w)
                bad = lhs != b if rel == EQ else lhs > b
                (newly if bad else still).append(item)
            if not newly:
                return w
            pending = still
            active += newly

    def _try_leaf(self, labels, theta):
        if not any(l == M_LABEL for l in labels):
            return None
        if theta is None:
            theta = 1 if all(l != Z_LABEL for l in labels) else 0
        w = self._leaf_solve(labels, theta)
        if w is None:
            return None
        return self._assignment_from(labels, theta, w)

    # ----- search ----------------------------------------------------------

    def _search(self, allowed, theta, points):
        self.nodes += 1
        if self.nodes > self.node_limit:
            raise _NodeLimit
        got = self._propagate(allowed, theta)
        if got is None:
            return None
        allowed, theta = got
        self._dominance_sides_cached = self._dominance_sides(theta) or ((), (), ZERO)
        while True:
            minus, zero, lo, hi, margin, sided = self._sets(allowed, theta)
            points = [pt for pt in points if self._point_fits(pt, minus, zero, lo, hi, margin)]
            if not points:
                w = self._w_feasible(allowed, theta)
                if w is None:
                    return None
                points = [_Point(w, self.gamma, self.y)]
            changed = False
            for j in range(self.r):
                if len(allowed[j]) <= 1:
                    continue
                for label in tuple(allowed[j]):
                    if any(
                        self._probe_fits(pt, j, label, minus, zero, lo, hi, margin, sided)
                        for pt in points
                    ):
                        continue
                    w = self._w_feasible(allowed, theta, extra=(j, label))
                    if w is None:
                        allowed[j].discard(label)
                        changed = True
                        if not allowed[j]:
                            return None
                    elif len(points) < _POINT_CAP:
                        points.append(_Point(w, self.gamma, self.y))
            if not changed:
                break
            got = self._propagate(allowed, theta)
            if got is None:
                return None
            allowed, theta = got
            self._dominance_sides_cached = self._dominance_sides(theta) or ((), (), ZERO)
        completed = self._complete(points[0], allowed, theta)
        if completed is not None:
            full_labels, full_theta = completed
            found = self._try_leaf(full_labels, full_theta)
            if found is not None:
                return found
        if self.strong and theta is None:
            for t in (1, 0):
                found = self._search([set(a) for a in allowed], t, list(points))
                if found is not None:
                    return found
            return None
        open_js = [j for j in range(self.r) if len(allowed[j]) > 1]
        if not open_js:
            labels = [next(iter(a)) for a in allowed]
            return self._try_leaf(labels, theta)
        sdot = points[0].sdot
        branch = min(open_js, key=lambda j: (sdot[j], j))
        for label in _ALL_LABELS:
            if label not in allowed[branch]:
                continue
            child = [set(a) for a in allowed]
            child[branch] = {label}
            found = self._search(child, theta, list(points))
            if found is not None:
                return found
        return None
