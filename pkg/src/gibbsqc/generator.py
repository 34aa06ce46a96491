"""Pre-run analysis files and synthesis of the Gibbs-sampling circuit.

Qubit layout of a generated circuit with ``nb`` nits, ``a`` probe bits and
``c`` phase-estimation steps::

    0 .. nb-1          register 1 (holds the starting state)
    nb .. 2nb-1        register 2
    2nb .. 2nb+ac-1    probes, c consecutive blocks of a

The walk operator V, the AFGA angle recursion and the phase-estimation
internals are structural stand-ins: every gate of V is a y-multiplexor per
nit whose controls are exactly that nit's blanket, the angle schedule
decays geometrically at a rate set by delta lambda, and each PE step is
the textbook Hadamard / controlled-power / inverse-QFT pattern.  No claim
of unitary equivalence with any other construction is made.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from gibbsqc.bayesnet import (
    BayesNet,
    Instantiation,
    NetSemanticError,
    check_instantiation,
    joint_prob,
    load_skeleton,
    node_blanket,
    parent_configs,
    parse_instantiation,
    random_instantiation,
    validate_net,
)
from gibbsqc.circuit import Circuit, Control, Gate, count_elementary, relabel_loops
from gibbsqc.nitcodes import NitLayout, build_layout, nit_blanket
from gibbsqc.text_formats import (
    ENGLISH_FILE,
    LOG_FILE,
    PICTURE_FILE,
    emit_english,
    emit_log,
    emit_picture,
)

PRERUN_FILES = ("probsF.txt", "probsT.txt", "blankets.txt", "nits.txt")
OUTPUT_FILES = (LOG_FILE, ENGLISH_FILE, PICTURE_FILE)

V_TAG = "V"
MAX_ENUMERATION = 10**6


class GenerationError(ValueError):
    pass


class ZeroProbabilityStart(GenerationError, NetSemanticError):
    pass


@dataclass(frozen=True)
class GenParams:
    probe_bits_a: int
    pe_steps_c: int
    max_grover_steps: int
    gamma_tol_degs: float
    delta_lambda_degs: float
    start: Mapping[str, int]
    omit_v: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.probe_bits_a < 1:
            raise GenerationError("number of probe bits must be >= 1")
        if self.pe_steps_c < 1:
            raise GenerationError("number of PE steps must be >= 1")
        if self.max_grover_steps < 1:
            raise GenerationError("maximum number of Grover steps must be >= 1")
        if not self.gamma_tol_degs > 0:
            raise GenerationError("gamma tolerance must be > 0 degrees")
        if not 0 < self.delta_lambda_degs <= 180:
            raise GenerationError("delta lambda must lie in (0, 180] degrees")


@dataclass(frozen=True)
class DerivedOutputs:
    gamma0_degs: float
    p_start: float
    qubit_count: int
    elementary_op_count: int
    grover_steps_used: int


# ---------------------------------------------------------------- pre-run


def uniform_probs(net: BayesNet, variant: str) -> str:
    """Probabilities File text giving every conditional probability 1/N.

    Variant ``"F"`` cycles the focus state fastest; ``"T"`` cycles the
    parent states fastest.
    """
    if variant not in ("F", "T"):
        raise ValueError("variant must be 'F' or 'T'")
    lines = []
    for node in net.nodes:
        lines.append(f"# {node.name}")
        p = repr(1.0 / node.n_states)
        configs = list(parent_configs(net, node.name))
        if variant == "F":
            rows = [(s, pa) for pa in configs for s in range(node.n_states)]
        else:
            rows = [(s, pa) for s in range(node.n_states) for pa in configs]
        for s, pa in rows:
            cols = [node.states[s]] + [net.node(q).states[i] for q, i in zip(node.parents, pa)]
            lines.append(" ".join(cols) + " " + p)
    return "\n".join(lines) + "\n"


def format_blankets(net: BayesNet) -> str:
    out = []
    for node in net.nodes:
        mb = node_blanket(net, node.name)
        out.append(" ".join(["#", node.name, *(n for n in net.names if n in mb)]))
    return "\n".join(out) + "\n"


def format_nits(net: BayesNet, layout: NitLayout) -> str:
    out = []
    for nit in range(layout.nb):
        blanket = sorted(nit_blanket(net, layout, nit))
        out += [
            f"# {nit}",
            f"owner node {layout.owner[nit]}",
            " ".join(["blanket nit", *map(str, blanket)]),
        ]
    return "\n".join(out) + ("\n" if out else "")


def parse_nits(text: str) -> dict[int, tuple[str, list[int]]]:
    """Read a Nits File back as ``{nit: (owner node, blanket nits)}``."""
    out: dict[int, tuple[str, list[int]]] = {}
    for chunk in text.split("#")[1:]:
        lines = chunk.strip().splitlines()
        nit = int(lines[0])
        owner = lines[1].split()[2]
        out[nit] = (owner, [int(t) for t in lines[2].split()[2:]])
    return out


def _write_all(folder: Path, names: Sequence[str], texts: Sequence[str], no_clobber: bool) -> list[Path]:
    paths = [folder / name for name in names]
    if no_clobber:
        for path in paths:
            if path.exists():
                raise FileExistsError(f"{path} exists and --no-clobber was given")
    for path, text in zip(paths, texts):
        path.write_text(text, encoding="ascii", newline="\n")
    return paths


def write_prerun(folder: str | Path, no_clobber: bool = False) -> list[Path]:
    """Write probsF/probsT/blankets/nits; probs.txt is not read."""
    folder = Path(folder)
    net = load_skeleton(folder)
    problems = validate_net(net)
    if problems:
        raise NetSemanticError("; ".join(problems))
    layout = build_layout(net)
    texts = (
        uniform_probs(net, "F"),
        uniform_probs(net, "T"),
        format_blankets(net),
        format_nits(net, layout),
    )
    return _write_all(folder, PRERUN_FILES, texts, no_clobber)


# ---------------------------------------------------------------- angles


def gamma0(p_start: float) -> float:
    """Starting AFGA angle in degrees, 2 acos(sqrt(p))."""
    if not 0.0 < p_start <= 1.0:
        if p_start == 0.0:
            raise ZeroProbabilityStart("starting state has zero probability")
        raise ValueError(f"probability {p_start} outside (0, 1]")
    return math.degrees(2.0 * math.acos(min(1.0, math.sqrt(p_start))))


def geometric_decay(gamma: float, delta_lambda_degs: float) -> float:
    return gamma * math.cos(math.radians(delta_lambda_degs) / 2.0) ** 2


def afga_schedule(
    gamma0_degs: float,
    delta_lambda_degs: float,
    gamma_tol_degs: float,
    max_steps: int,
    policy: Callable[[float, float], float] = geometric_decay,
) -> list[float]:
    """Angles of successive AFGA iterations, cut at the tolerance or step cap."""
    out = []
    g = gamma0_degs
    while len(out) < max_steps and abs(g) >= gamma_tol_degs:
        out.append(g)
        nxt = policy(g, delta_lambda_degs)
        if not nxt < g:
            raise GenerationError("schedule policy must strictly decrease gamma")
        g = nxt
    return out


# ---------------------------------------------------------------- V stand-in


def _nit_joint(net: BayesNet, layout: NitLayout) -> list[tuple[dict[int, int], float]]:
    size = math.prod(n.n_states for n in net.nodes)
    if size > MAX_ENUMERATION:
        raise GenerationError(f"joint state space {size} too large to enumerate")
    out = []
    for combo in itertools.product(*(range(n.n_states) for n in net.nodes)):
        x = dict(zip(net.names, combo))
        p = joint_prob(net, x)
        if p > 0.0:
            out.append((layout.encode(x), p))
    return out


def ry_angle(q: float) -> float:
    """Y-rotation angle (degrees) taking |0> to amplitude sqrt(q) on |0>."""
    return math.degrees(2.0 * math.acos(math.sqrt(min(1.0, max(0.0, q)))))


def v_standin(
    net: BayesNet,
    layout: NitLayout,
    register: int,
    joint: Sequence[tuple[dict[int, int], float]] | None = None,
) -> list[Gate]:
    """One y-multiplexor per nit, controlled by exactly that nit's blanket.

    The angle for blanket configuration ``b`` encodes P(nit = 0 | b);
    configurations of probability zero get angle 0.  A nit with an empty
    blanket gets a plain ROTY.  ``register`` 0 or 1 selects the qubit block.
    """
    if joint is None:
        joint = _nit_joint(net, layout)
    off = register * layout.nb
    gates = []
    for nit in range(layout.nb):
        blanket = sorted(nit_blanket(net, layout, nit))
        n_cfg = 2 ** len(blanket)
        p_cfg = [0.0] * n_cfg
        p_zero = [0.0] * n_cfg
        for bits, p in joint:
            b = sum(bits[m] << k for k, m in enumerate(blanket))
            p_cfg[b] += p
            if bits[nit] == 0:
                p_zero[b] += p
        angles = tuple(
            ry_angle(p_zero[b] / p_cfg[b]) if p_cfg[b] > 0.0 else 0.0 for b in range(n_cfg)
        )
        if blanket:
            mux = tuple((off + m, k) for k, m in reversed(list(enumerate(blanket))))
            gates.append(Gate("MP_Y", (off + nit,), angles, mux_controls=mux, tag=V_TAG))
        else:
            gates.append(Gate("ROTY", (off + nit,), angles, tag=V_TAG))
    return gates


# ---------------------------------------------------------------- circuit


def _controlled(gates: Sequence[Gate], ctrl: Control) -> list[Gate]:
    return [
        Gate(g.kind, g.targets, g.angles, (*g.controls, ctrl), g.mux_controls, tag=g.tag)
        for g in gates
    ]


def _inverse_qft(probes: Sequence[int]) -> list[Gate]:
    out = []
    for m, q in enumerate(probes):
        for l in range(m):
            out.append(Gate("P1PH", (q,), (-180.0 / 2 ** (m - l),), (Control(probes[l], True),)))
        out.append(Gate("HAD2", (q,)))
    return out


def generate_circuit(
    net: BayesNet,
    layout: NitLayout,
    params: GenParams,
    policy: Callable[[float, float], float] = geometric_decay,
) -> tuple[Circuit, DerivedOutputs]:
    check_instantiation(net, params.start)
    if layout.nb == 0:
        raise GenerationError("network has no nits (every node has a single state)")
    p = joint_prob(net, params.start)
    g0 = gamma0(p)
    schedule = afga_schedule(
        g0, params.delta_lambda_degs, params.gamma_tol_degs, params.max_grover_steps, policy
    )
    nb, a, c = layout.nb, params.probe_bits_a, params.pe_steps_c
    nq = 2 * nb + a * c
    start_bits = layout.encode(params.start)

    ops: list[Gate] = [Gate("SIGX", (nit,)) for nit in range(nb) if start_bits[nit]]
    joint = _nit_joint(net, layout)
    v_block = v_standin(net, layout, 0, joint) + v_standin(net, layout, 1, joint)
    target_ctrls = tuple(Control(nit, bool(start_bits[nit])) for nit in range(nb))
    probe_zero = tuple(Control(q, False) for q in range(2 * nb, nq))
    for gamma in schedule:
        ops.append(Gate("PHAS", (), (gamma,), target_ctrls))
        for s in range(c):
            probes = [2 * nb + s * a + m for m in range(a)]
            ops += [Gate("HAD2", (q,)) for q in probes]
            for m, q in enumerate(probes):
                body = _controlled(v_block, Control(q, True))
                if m == 0:
                    ops += body
                else:
                    ops += [Gate.loop(0, 2**m, tag=V_TAG), *body, Gate.next(0, tag=V_TAG)]
            ops += _inverse_qft(probes)
        ops.append(Gate("PHAS", (), (params.delta_lambda_degs,), probe_zero))

    if params.omit_v:
        ops = [g for g in ops if g.tag != V_TAG]
    circuit = Circuit(nq, relabel_loops(ops))
    derived = DerivedOutputs(
        gamma0_degs=g0,
        p_start=p,
        qubit_count=nq,
        elementary_op_count=count_elementary(circuit),
        grover_steps_used=len(schedule),
    )
    return circuit, derived


def write_outputs(
    folder: str | Path,
    net: BayesNet,
    params: GenParams,
    no_clobber: bool = False,
    policy: Callable[[float, float], float] = geometric_decay,
) -> tuple[Circuit, DerivedOutputs, list[Path]]:
    """Generate the circuit and write the log, English and Picture files."""
    folder = Path(folder)
    layout = build_layout(net)
    circuit, derived = generate_circuit(net, layout, params, policy)
    texts = (
        emit_log(params, derived, net, layout, folder.name),
        emit_english(circuit),
        emit_picture(circuit),
    )
    paths = _write_all(folder, OUTPUT_FILES, texts, no_clobber)
    return circuit, derived, paths


def start_state(net: BayesNet, spec: str | None, seed: int | None) -> Instantiation:
    """Resolve ``--start`` / ``--random-start --seed`` into an instantiation."""
    if spec is not None:
        return parse_instantiation(net, spec)
    return random_instantiation(net, 0 if seed is None else seed)
