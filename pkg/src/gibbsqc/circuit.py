"""In-memory circuit: elementary operations over an indexed qubit array."""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field, replace

ONE_BIT = ("P0PH", "P1PH", "SIGX", "SIGY", "SIGZ", "HAD2", "ROTX", "ROTY", "ROTZ", "ROTN", "MP_Y")
KINDS = ("SWAP", "PHAS", *ONE_BIT, "LOOP", "NEXT")

N_TARGETS = {"SWAP": 2, "PHAS": 0, "LOOP": 0, "NEXT": 0, **{k: 1 for k in ONE_BIT}}
N_ANGLES = {
    "PHAS": 1, "P0PH": 1, "P1PH": 1,
    "ROTX": 1, "ROTY": 1, "ROTZ": 1, "ROTN": 3,
}

# keeps picture tokens "(k" at most 3 characters wide
MAX_MUX_CONTROLS = 20


class CircuitError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Control:
    bit: int
    polarity: bool  # True: T, control on |1>; False: F, control on |0>

    @classmethod
    def parse(cls, tok: str) -> Control:
        if len(tok) < 2 or tok[-1] not in "TF" or not tok[:-1].isdigit():
            raise ValueError(f"bad control {tok!r}")
        return cls(int(tok[:-1]), tok[-1] == "T")

    def __str__(self):
        return f"{self.bit}{'T' if self.polarity else 'F'}"


@dataclass(frozen=True)
class GateShape:
    """Angle-free projection of a gate, i.e. what a Picture File line holds."""

    kind: str
    targets: tuple[int, ...] = ()
    controls: frozenset[Control] = frozenset()
    mux_controls: frozenset[tuple[int, int]] = frozenset()
    label: int | None = None
    reps: int | None = None


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...] = ()
    angles: tuple[float, ...] = ()
    controls: tuple[Control, ...] = ()
    mux_controls: tuple[tuple[int, int], ...] = ()  # (bit, control name), names descending
    label: int | None = None
    reps: int | None = None
    # generator bookkeeping ("V" marks gates that build the walk operator)
    tag: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "mux_controls", tuple(tuple(m) for m in self.mux_controls))

    @classmethod
    def loop(cls, label: int, reps: int, tag: str | None = None) -> Gate:
        return cls("LOOP", label=label, reps=reps, tag=tag)

    @classmethod
    def next(cls, label: int, tag: str | None = None) -> Gate:
        return cls("NEXT", label=label, tag=tag)

    @property
    def is_loop_marker(self) -> bool:
        return self.kind in ("LOOP", "NEXT")

    def bits(self) -> list[int]:
        return [*self.targets, *(c.bit for c in self.controls), *(b for b, _ in self.mux_controls)]

    def expected_angles(self) -> int:
        if self.kind == "MP_Y":
            return 2 ** len(self.mux_controls)
        return N_ANGLES.get(self.kind, 0)

    def shape(self) -> GateShape:
        return GateShape(
            self.kind,
            self.targets,
            frozenset(self.controls),
            frozenset(self.mux_controls),
            self.label,
            self.reps,
        )

    def problems(self, qubit_count: int) -> list[str]:
        """Invariant violations of this gate alone, relative to ``qubit_count``."""
        k = self.kind
        if k not in KINDS:
            return [f"unknown gate kind {k!r}"]
        out = []
        if self.is_loop_marker:
            if self.targets or self.angles or self.controls or self.mux_controls:
                out.append(f"{k} carries qubits or angles")
            if self.label is None or self.label < 0:
                out.append(f"{k} needs a non-negative label")
            if k == "LOOP" and (self.reps is None or self.reps < 1):
                out.append("LOOP needs reps >= 1")
            if k == "NEXT" and self.reps is not None:
                out.append("NEXT carries reps")
            return out
        if self.label is not None or self.reps is not None:
            out.append(f"{k} carries loop fields")
        if len(self.targets) != N_TARGETS[k]:
            out.append(f"{k} needs {N_TARGETS[k]} target(s), got {len(self.targets)}")
        if k != "MP_Y" and self.mux_controls:
            out.append(f"{k} cannot have multiplexor controls")
        if k == "MP_Y":
            m = len(self.mux_controls)
            if m == 0:
                out.append("MP_Y needs at least one multiplexor control")
            if m > MAX_MUX_CONTROLS:
                out.append(f"MP_Y has more than {MAX_MUX_CONTROLS} multiplexor controls")
            names = [n for _, n in self.mux_controls]
            if names != list(range(m - 1, -1, -1)):
                out.append(f"MP_Y control names {names} are not {m - 1}..0 left to right")
        if k != "MP_Y" or len(self.mux_controls) <= MAX_MUX_CONTROLS:
            if len(self.angles) != self.expected_angles():
                out.append(f"{k} needs {self.expected_angles()} angle(s), got {len(self.angles)}")
        bits = self.bits()
        for b in bits:
            if not 0 <= b < qubit_count:
                out.append(f"{k}: bit {b} outside 0..{qubit_count - 1}")
        if len(set(bits)) != len(bits):
            out.append(f"{k}: a qubit appears twice")
        if k == "PHAS" and len(set(bits)) >= qubit_count:
            out.append("PHAS controls every qubit, leaving no place for Ph")
        return out


class Circuit:
    """Ordered gate list; time increases with the list index."""

    def __init__(self, qubit_count: int, ops: Iterable[Gate] = ()):
        if qubit_count < 1:
            raise CircuitError("a circuit needs at least one qubit")
        self.qubit_count = qubit_count
        self.ops: list[Gate] = []
        for g in ops:
            self.append(g)

    def append(self, gate: Gate) -> Circuit:
        bad = gate.problems(self.qubit_count)
        if bad:
            raise CircuitError(f"line {len(self.ops)}: " + "; ".join(bad))
        self.ops.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> Circuit:
        for g in gates:
            self.append(g)
        return self

    def __len__(self):
        return len(self.ops)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.ops)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.qubit_count == other.qubit_count and self.ops == other.ops

    def __repr__(self):
        return f"Circuit(qubit_count={self.qubit_count}, ops=<{len(self.ops)} gates>)"

    def without(self, tag: str) -> Circuit:
        """Copy with every gate carrying ``tag`` removed, loops relabelled."""
        return Circuit(self.qubit_count, relabel_loops([g for g in self.ops if g.tag != tag]))


def append_gate(circuit: Circuit, gate: Gate) -> Circuit:
    return circuit.append(gate)


def loop_problems(ops: Iterable[Gate]) -> list[str]:
    out = []
    stack: list[int] = []
    for i, g in enumerate(ops):
        if g.kind == "LOOP":
            stack.append(g.label)
        elif g.kind == "NEXT":
            if not stack:
                out.append(f"line {i}: NEXT {g.label} without an open LOOP")
            elif stack[-1] != g.label:
                out.append(f"line {i}: NEXT {g.label} closes LOOP {stack[-1]}")
                stack.pop()
            else:
                stack.pop()
    for label in stack:
        out.append(f"LOOP {label} is never closed")
    return out


def validate_circuit(circuit: Circuit) -> list[str]:
    out = []
    for i, g in enumerate(circuit.ops):
        out.extend(f"line {i}: {p}" for p in g.problems(circuit.qubit_count))
    out.extend(loop_problems(circuit.ops))
    return out


def count_elementary(circuit: Circuit | Iterable[Gate]) -> int:
    """Elementary operation count, loop bodies weighted by their repetitions.

    LOOP/NEXT lines count zero, every other line counts the product of the
    reps of the loops enclosing it.  A multiplexor line counts as one.
    """
    ops = circuit.ops if isinstance(circuit, Circuit) else list(circuit)
    bad = loop_problems(ops)
    if bad:
        raise CircuitError("; ".join(bad))
    total = 0
    weight = 1
    reps: list[int] = []
    for g in ops:
        if g.kind == "LOOP":
            reps.append(g.reps)
            weight *= g.reps
        elif g.kind == "NEXT":
            weight //= reps.pop()
        else:
            total += weight
    return total


def relabel_loops(ops: Iterable[Gate]) -> list[Gate]:
    """Give every LOOP its line index as label and matching NEXTs the same."""
    out = []
    stack: list[int] = []
    for i, g in enumerate(ops):
        if g.kind == "LOOP":
            stack.append(i)
            g = replace(g, label=i)
        elif g.kind == "NEXT":
            if not stack:
                raise CircuitError(f"line {i}: NEXT without an open LOOP")
            g = replace(g, label=stack.pop())
        out.append(g)
    if stack:
        raise CircuitError(f"LOOP at line {stack[-1]} is never closed")
    return out
