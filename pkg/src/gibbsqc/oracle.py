"""Brute-force reference computations used to cross-check the fast paths.

Nothing here shares code with the routines it checks: the joint table is
built by plain enumeration, blankets are checked against the defining
conditional-independence identity, and op counts come from literally
unrolling loops.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from collections.abc import Iterable, Sequence

from gibbsqc.bayesnet import BayesNet, Instantiation
from gibbsqc.circuit import Circuit, CircuitError, Gate

MAX_JOINT_SIZE = 10**6
CI_TOL = 1e-9

JointTable = list[tuple[Instantiation, float]]


def joint_size(net: BayesNet) -> int:
    size = 1
    for n in net.nodes:
        size *= n.n_states
    return size


def enumerate_joint(net: BayesNet) -> JointTable:
    if net.cpts is None:
        raise ValueError("network has no probabilities loaded")
    if joint_size(net) > MAX_JOINT_SIZE:
        raise ValueError(f"joint state space {joint_size(net)} exceeds {MAX_JOINT_SIZE}")
    names = net.names
    pos = {n: i for i, n in enumerate(names)}
    lookups = []
    for node, cpt in zip(net.nodes, net.cpts):
        lookups.append((pos[node.name], [pos[p] for p in node.parents], cpt.rows))
    table = []
    for combo in itertools.product(*(range(n.n_states) for n in net.nodes)):
        p = 1.0
        for i, par, rows in lookups:
            p *= rows.get((combo[i], tuple(combo[j] for j in par)), 0.0)
        table.append((dict(zip(names, combo)), p))
    return table


def verify_blanket(net: BayesNet, node: str, candidate: Iterable[str]) -> bool:
    """Check P(x_node | everything else) == P(x_node | x_candidate) everywhere.

    Conditioning events of probability zero are skipped.
    """
    candidate = sorted(set(candidate))
    rest = [n for n in net.names if n != node]
    table = enumerate_joint(net)
    p_rest = defaultdict(float)
    p_cand = defaultdict(float)
    p_node_cand = defaultdict(float)
    for x, p in table:
        r = tuple(x[n] for n in rest)
        c = tuple(x[n] for n in candidate)
        p_rest[r] += p
        p_cand[c] += p
        p_node_cand[x[node], c] += p
    for x, p in table:
        r = tuple(x[n] for n in rest)
        c = tuple(x[n] for n in candidate)
        if p_rest[r] <= 0.0 or p_cand[c] <= 0.0:
            continue
        full = p / p_rest[r]
        local = p_node_cand[x[node], c] / p_cand[c]
        if abs(full - local) > CI_TOL:
            return False
    return True


def _expand(ops: Sequence[Gate], start: int) -> tuple[list[Gate], int]:
    body: list[Gate] = []
    i = start
    while i < len(ops):
        g = ops[i]
        if g.kind == "LOOP":
            inner, end = _expand(ops, i + 1)
            if end >= len(ops) or ops[end].label != g.label:
                raise CircuitError(f"LOOP {g.label} is not closed by a matching NEXT")
            body.extend(inner * g.reps)
            i = end + 1
        elif g.kind == "NEXT":
            return body, i
        else:
            body.append(g)
            i += 1
    return body, i


def unroll(circuit: Circuit | Sequence[Gate]) -> list[Gate]:
    ops = circuit.ops if isinstance(circuit, Circuit) else list(circuit)
    body, end = _expand(ops, 0)
    if end != len(ops):
        raise CircuitError(f"line {end}: NEXT without an open LOOP")
    return body


def count_ops_by_expansion(circuit: Circuit | Sequence[Gate]) -> int:
    return len(unroll(circuit))
