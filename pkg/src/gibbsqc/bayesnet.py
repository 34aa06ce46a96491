"""Bayesian network data model and parsers for the three input files.

An I/O folder holds ``parents.txt``, ``states.txt`` and ``probs.txt``.  All
three share one token grammar: whitespace-separated tokens grouped into
sections, each section opened by a lone ``#`` followed by the name of its
focus node.  Focus nodes must appear in the same order in every file.
"""

from __future__ import annotations

import itertools
import math
import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

PARENTS_FILE = "parents.txt"
STATES_FILE = "states.txt"
PROBS_FILE = "probs.txt"

NORM_TOL = 1e-9

# node name -> state index (the state's "decimal name")
Instantiation = dict[str, int]


class NetParseError(ValueError):
    """An input file is missing or does not follow the file grammar."""


class NetSemanticError(ValueError):
    """The files parse, but describe an unusable network (cycle, bad CPT)."""


@dataclass(frozen=True)
class NodeSpec:
    name: str
    parents: tuple[str, ...]
    states: tuple[str, ...]

    def __post_init__(self):
        _check_name(self.name, "node")
        if not self.states:
            raise NetParseError(f"node {self.name!r} has no states")
        for s in self.states:
            _check_name(s, f"state of {self.name!r}")
        if len(set(self.states)) != len(self.states):
            raise NetParseError(f"node {self.name!r} has duplicate state names")
        if len(set(self.parents)) != len(self.parents):
            raise NetParseError(f"node {self.name!r} lists a parent twice")
        if self.name in self.parents:
            raise NetParseError(f"node {self.name!r} lists itself as a parent")

    @property
    def n_states(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table of one node.

    ``rows`` maps ``(focus_state, parent_states)`` index tuples to a
    probability, with parent states ordered as in the Parents File.  Rows
    that were never listed are zero.
    """

    owner: str
    rows: Mapping[tuple[int, tuple[int, ...]], float] = field(default_factory=dict)

    def prob(self, state: int, parent_states: Sequence[int] = ()) -> float:
        return self.rows.get((state, tuple(parent_states)), 0.0)


@dataclass(frozen=True)
class BayesNet:
    """Parsed network.  ``cpts`` is None for a skeleton read without probs.txt."""

    nodes: tuple[NodeSpec, ...]
    cpts: tuple[Cpt, ...] | None = None

    def __post_init__(self):
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise NetParseError("duplicate focus node")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def names(self) -> list[str]:
        return [n.name for n in self.nodes]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown node {name!r}") from None

    def node(self, name: str) -> NodeSpec:
        return self.nodes[self.index(name)]

    def cpt(self, name: str) -> Cpt:
        if self.cpts is None:
            raise ValueError("network has no probabilities loaded")
        return self.cpts[self.index(name)]

    def children(self, name: str) -> list[str]:
        self.index(name)
        return [n.name for n in self.nodes if name in n.parents]

    def with_cpts(self, cpts: Sequence[Cpt]) -> BayesNet:
        return BayesNet(self.nodes, tuple(cpts))


def _check_name(tok: str, what: str) -> None:
    if not tok or "#" in tok or any(c.isspace() for c in tok):
        raise NetParseError(f"invalid {what} name {tok!r}")


def _sections(text: str, what: str) -> list[tuple[str, list[str]]]:
    if not text.isascii():
        raise NetParseError(f"{what}: non-ASCII content")
    tokens = text.split()
    if not tokens:
        raise NetParseError(f"{what}: empty file")
    if tokens[0] != "#":
        raise NetParseError(f"{what}: expected '#' as first token, got {tokens[0]!r}")
    sections: list[tuple[str, list[str]]] = []
    seen = set()
    it = iter(tokens)
    for tok in it:
        if tok == "#":
            name = next(it, None)
            if name is None or name == "#":
                raise NetParseError(f"{what}: '#' not followed by a focus node name")
            _check_name(name, "node")
            if name in seen:
                raise NetParseError(f"{what}: duplicate focus node {name!r}")
            seen.add(name)
            sections.append((name, []))
        elif "#" in tok:
            raise NetParseError(f"{what}: '#' must be a separate token, got {tok!r}")
        else:
            sections[-1][1].append(tok)
    return sections


def parse_parents(text: str) -> list[tuple[str, list[str]]]:
    """Parse Parents File content into ``(focus node, parent list)`` pairs."""
    return _sections(text, PARENTS_FILE)


def parse_states(text: str) -> list[tuple[str, list[str]]]:
    sections = _sections(text, STATES_FILE)
    for name, states in sections:
        if not states:
            raise NetParseError(f"{STATES_FILE}: node {name!r} has no states")
        if len(set(states)) != len(states):
            raise NetParseError(f"{STATES_FILE}: node {name!r} has duplicate state names")
    return sections


def build_skeleton(
    parents: Sequence[tuple[str, Sequence[str]]],
    states: Sequence[tuple[str, Sequence[str]]],
) -> BayesNet:
    """Join parsed Parents and States content into a network without CPTs."""
    p_names = [n for n, _ in parents]
    s_names = [n for n, _ in states]
    if p_names != s_names:
        missing = [n for n in p_names if n not in s_names]
        extra = [n for n in s_names if n not in p_names]
        if missing:
            raise NetParseError(f"{STATES_FILE}: missing focus node(s) {missing}")
        if extra:
            raise NetParseError(f"{STATES_FILE}: focus node(s) {extra} not in {PARENTS_FILE}")
        raise NetParseError(
            f"focus node order differs between {PARENTS_FILE} and {STATES_FILE}"
        )
    known = set(p_names)
    for name, pars in parents:
        for p in pars:
            if p not in known:
                raise NetParseError(f"{PARENTS_FILE}: parent {p!r} of {name!r} is not a node")
    nodes = tuple(
        NodeSpec(name, tuple(pars), tuple(sts))
        for (name, pars), (_, sts) in zip(parents, states)
    )
    return BayesNet(nodes)


def parse_probs(text: str, skeleton: BayesNet) -> list[Cpt]:
    """Parse Probabilities File content against an already-built skeleton."""
    sections = _sections(text, PROBS_FILE)
    if [n for n, _ in sections] != skeleton.names:
        raise NetParseError(
            f"{PROBS_FILE}: focus nodes {[n for n, _ in sections]} do not match "
            f"order {skeleton.names}"
        )
    cpts = []
    for node, (name, body) in zip(skeleton.nodes, sections):
        ncols = 2 + len(node.parents)
        if len(body) % ncols:
            raise NetParseError(
                f"{PROBS_FILE}: focus node {name!r} expects rows of {ncols} columns; "
                f"{len(body)} tokens is not a multiple"
            )
        col_nodes = [node] + [skeleton.node(p) for p in node.parents]
        rows: dict[tuple[int, tuple[int, ...]], float] = {}
        for r in range(0, len(body), ncols):
            row = body[r:r + ncols]
            idx = []
            for tok, cn in zip(row[:-1], col_nodes):
                try:
                    idx.append(cn.states.index(tok))
                except ValueError:
                    raise NetParseError(
                        f"{PROBS_FILE}: under {name!r}, {tok!r} is not a state of {cn.name!r}"
                    ) from None
            try:
                p = float(row[-1])
            except ValueError:
                raise NetParseError(
                    f"{PROBS_FILE}: under {name!r}, {row[-1]!r} is not a probability"
                ) from None
            if not 0.0 <= p <= 1.0:
                raise NetParseError(f"{PROBS_FILE}: under {name!r}, probability {p} not in [0,1]")
            key = (idx[0], tuple(idx[1:]))
            if key in rows:
                raise NetParseError(f"{PROBS_FILE}: under {name!r}, duplicate row {' '.join(row[:-1])}")
            rows[key] = p
        cpts.append(Cpt(name, rows))
    return cpts


def read_ascii(path: str | Path) -> str:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise NetParseError(f"missing input file {path}") from None
    try:
        return data.decode("ascii")
    except UnicodeDecodeError:
        raise NetParseError(f"{path}: non-ASCII byte in file") from None


def load_skeleton(folder: str | Path) -> BayesNet:
    folder = Path(folder)
    if not folder.is_dir():
        raise NetParseError(f"I/O folder {folder} does not exist")
    parents = parse_parents(read_ascii(folder / PARENTS_FILE))
    states = parse_states(read_ascii(folder / STATES_FILE))
    return build_skeleton(parents, states)


def load_net(folder: str | Path, with_probs: bool = True) -> BayesNet:
    """Read and validate a network from an I/O folder.

    Raises NetParseError for unreadable files and NetSemanticError when
    :func:`validate_net` reports a violation.
    """
    net = load_skeleton(folder)
    if with_probs:
        net = net.with_cpts(parse_probs(read_ascii(Path(folder) / PROBS_FILE), net))
    problems = validate_net(net)
    if problems:
        raise NetSemanticError("; ".join(problems))
    return net


def _find_cycle(net: BayesNet) -> list[str] | None:
    # Kahn's algorithm; whatever remains unsorted lies on or behind a cycle
    indeg = {n.name: sum(p in net._index for p in n.parents) for n in net.nodes}
    kids = {n.name: [] for n in net.nodes}
    for n in net.nodes:
        for p in n.parents:
            if p in kids:
                kids[p].append(n.name)
    ready = [n for n, d in indeg.items() if d == 0]
    while ready:
        n = ready.pop()
        for k in kids[n]:
            indeg[k] -= 1
            if indeg[k] == 0:
                ready.append(k)
    left = [n for n in net.names if indeg[n] > 0]
    return left or None


def parent_configs(net: BayesNet, name: str) -> Iterable[tuple[int, ...]]:
    """All parent-state tuples of a node, last parent varying fastest."""
    return itertools.product(*(range(net.node(p).n_states) for p in net.node(name).parents))


def validate_net(net: BayesNet) -> list[str]:
    """Return every violation found in ``net``; an empty list means valid."""
    problems = []
    for n in net.nodes:
        for p in n.parents:
            if p not in net._index:
                problems.append(f"node {n.name!r}: unknown parent {p!r}")
    cyc = _find_cycle(net)
    if cyc:
        problems.append(f"graph has a directed cycle through {cyc}")
    if net.cpts is None or any("unknown parent" in p for p in problems):
        return problems
    if [c.owner for c in net.cpts] != net.names:
        problems.append(f"CPT order {[c.owner for c in net.cpts]} differs from node order {net.names}")
        return problems
    for node, cpt in zip(net.nodes, net.cpts):
        sizes = [net.node(p).n_states for p in node.parents]
        for (s, pa), v in cpt.rows.items():
            if not 0 <= s < node.n_states or len(pa) != len(sizes) or any(
                not 0 <= i < k for i, k in zip(pa, sizes)
            ):
                problems.append(f"CPT of {node.name!r}: row index {(s, pa)} out of range")
            elif not 0.0 <= v <= 1.0:
                problems.append(f"CPT of {node.name!r}: probability {v} not in [0,1]")
        for pa in parent_configs(net, node.name):
            total = math.fsum(cpt.prob(s, pa) for s in range(node.n_states))
            if abs(total - 1.0) > NORM_TOL:
                cond = ",".join(net.node(p).states[i] for p, i in zip(node.parents, pa))
                problems.append(
                    f"CPT of {node.name!r} not normalized given ({cond}): sums to {total!r}"
                )
    return problems


def node_blanket(net: BayesNet, name: str) -> set[str]:
    """Parents, children and the children's other parents of ``name``."""
    node = net.node(name)
    blanket = set(node.parents)
    for child in net.children(name):
        blanket.add(child)
        blanket.update(net.node(child).parents)
    blanket.discard(name)
    return blanket


def check_instantiation(net: BayesNet, x: Mapping[str, int]) -> None:
    if set(x) != set(net.names):
        raise ValueError(f"instantiation must assign exactly the nodes {net.names}")
    for n in net.nodes:
        if not 0 <= x[n.name] < n.n_states:
            raise ValueError(f"state index {x[n.name]} out of range for node {n.name!r}")


def joint_prob(net: BayesNet, x: Mapping[str, int]) -> float:
    check_instantiation(net, x)
    if net.cpts is None:
        raise ValueError("network has no probabilities loaded")
    p = 1.0
    for node, cpt in zip(net.nodes, net.cpts):
        p *= cpt.prob(x[node.name], [x[q] for q in node.parents])
    return p


def random_instantiation(net: BayesNet, seed: int) -> Instantiation:
    rng = random.Random(seed)
    return {n.name: rng.randrange(n.n_states) for n in net.nodes}


def parse_instantiation(net: BayesNet, spec: str) -> Instantiation:
    """Parse ``"A=a1,B=b1,C=c1"`` into state indices."""
    x: Instantiation = {}
    for item in filter(None, (s.strip() for s in spec.split(","))):
        name, sep, state = item.partition("=")
        name, state = name.strip(), state.strip()
        if not sep:
            raise ValueError(f"bad start-state item {item!r}, expected Node=state")
        try:
            node = net.node(name)
        except KeyError:
            raise ValueError(f"unknown node {name!r}") from None
        if state not in node.states:
            raise ValueError(f"{state!r} is not a state of node {name!r}")
        if name in x:
            raise ValueError(f"node {name!r} given twice")
        x[name] = node.states.index(state)
    missing = [n for n in net.names if n not in x]
    if missing:
        raise ValueError(f"start state does not assign node(s) {missing}")
    return {n: x[n] for n in net.names}


def format_instantiation(net: BayesNet, x: Mapping[str, int]) -> str:
    return ",".join(f"{n.name}={n.states[x[n.name]]}" for n in net.nodes)


def format_parents(net: BayesNet) -> str:
    return "".join(" ".join(["#", n.name, *n.parents]) + "\n" for n in net.nodes)


def format_states(net: BayesNet) -> str:
    return "".join(" ".join(["#", n.name, *n.states]) + "\n" for n in net.nodes)


def format_probs(net: BayesNet) -> str:
    """Serialize the CPT rows of ``net`` in their stored order."""
    lines = []
    for node, cpt in zip(net.nodes, net.cpts):
        lines.append(f"# {node.name}")
        for (s, pa), v in cpt.rows.items():
            cols = [node.states[s]] + [net.node(p).states[i] for p, i in zip(node.parents, pa)]
            lines.append(" ".join(cols) + " " + repr(v))
    return "\n".join(lines) + "\n"
