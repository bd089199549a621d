"""Reference computations that share no code path with what they check."""
from itertools import combinations, product

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from mctsynth.model import EQ, GE, LE, Model


def raw_run(gates, state, n):
    """Simulate (target, controls) pairs with plain bit twiddling; None is a no-op."""
    for g in gates:
        if g is None:
            continue
        target, controls = g
        if all(state >> (n - c) & 1 for c in controls):
            state ^= 1 << (n - target)
    return state


def raw_gates(n):
    out = [None]
    for t in range(1, n + 1):
        others = [q for q in range(1, n + 1) if q != t]
        for k in range(n):
            out += [(t, c) for c in combinations(others, k)]
    return out


RAW_COST = {0: 1, 1: 1, 2: 5}  # listed costs for up to 2 controls; slack leaves them unchanged


def raw_min_cost(spec, m):
    """Minimum cost by plain enumeration, or None when nothing fits (n <= 3)."""
    n = spec.n
    best = None
    for gs in product(raw_gates(n), repeat=m):
        if all(spec.rows[s].matches(raw_run(gs, s, n)) for s in range(1 << n)):
            c = sum(RAW_COST[len(g[1])] for g in gs if g is not None)
            best = c if best is None else min(best, c)
    return best


def lp_flow_feasible(model: Model, design: dict) -> bool:
    """Fix t, w, y to ``design`` and ask an LP solver whether any x in [0,1] fits."""
    xs = [v.name for v in model.variables if v.kind == "x"]
    col = {name: i for i, name in enumerate(xs)}
    eq_rows, eq_cols, eq_vals, eq_rhs = [], [], [], []
    ub_rows, ub_cols, ub_vals, ub_rhs = [], [], [], []
    for con in model.constraints:
        const = 0.0
        entries = []
        for c, v in con.terms:
            if v in col:
                entries.append((col[v], c))
            else:
                const += c * design[v]
        rhs = con.rhs - const
        if not entries:
            ok = {LE: const <= con.rhs + 1e-9, GE: const >= con.rhs - 1e-9, EQ: abs(const - con.rhs) < 1e-9}
            if not ok[con.sense]:
                return False
            continue
        sign = -1 if con.sense == GE else 1
        if con.sense == EQ:
            r = len(eq_rhs)
            for j, c in entries:
                eq_rows.append(r), eq_cols.append(j), eq_vals.append(c)
            eq_rhs.append(rhs)
        else:
            r = len(ub_rhs)
            for j, c in entries:
                ub_rows.append(r), ub_cols.append(j), ub_vals.append(sign * c)
            ub_rhs.append(sign * rhs)
    nx = len(xs)
    a_eq = coo_matrix((eq_vals, (eq_rows, eq_cols)), shape=(len(eq_rhs), nx)).tocsr()
    a_ub = coo_matrix((ub_vals, (ub_rows, ub_cols)), shape=(len(ub_rhs), nx)).tocsr()
    res = linprog(
        np.zeros(nx), A_ub=a_ub, b_ub=ub_rhs, A_eq=a_eq, b_eq=eq_rhs,
        bounds=(0, 1), method="highs",
    )
    return res.status == 0
