"""English File and Picture File languages, plus the Log File writer.

Both circuit languages hold one line per operation, time growing down the
file, and their lines correspond one to one.  English lines carry every
detail of a gate; Picture lines draw qubit ``a`` of an ``n``-qubit
circuit at 0-based column ``4*(n-1-a)`` (qubit 0 is rightmost) and leave
out angles.

Picture lines always span every qubit, so all gate lines of one file have
width ``4*(n-1)+1``.  A multi-character symbol starts at its qubit's
column, except on qubit 0 where it ends there instead.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from decimal import Decimal
from typing import TYPE_CHECKING

from gibbsqc.circuit import (
    N_ANGLES,
    N_TARGETS,
    Circuit,
    CircuitError,
    Control,
    Gate,
    GateShape,
    loop_problems,
    relabel_loops,
)

from gibbsqc.nitcodes import state_names

if TYPE_CHECKING:
    from gibbsqc.bayesnet import BayesNet
    from gibbsqc.generator import DerivedOutputs, GenParams
    from gibbsqc.nitcodes import NitLayout

ENGLISH_FILE = "quibbs_eng.txt"
PICTURE_FILE = "quibbs_pic.txt"
LOG_FILE = "quibbs_log.txt"

PIC_SYMBOL = {
    "PHAS": "Ph", "P0PH": "0P", "P1PH": "@P",
    "SIGX": "X", "SIGY": "Y", "SIGZ": "Z", "HAD2": "H",
    "ROTX": "Rx", "ROTY": "Ry", "ROTZ": "Rz", "ROTN": "R",
    "MP_Y": "Ry",
}
# "OP" is accepted as a spelling of "0P" when reading pictures
_PIC_KIND = {v: k for k, v in PIC_SYMBOL.items() if k != "MP_Y"} | {"OP": "P0PH"}


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def format_angle(x: float) -> str:
    """Shortest decimal that reads back to ``x``, always with a fraction part."""
    s = repr(float(x))
    if "e" in s:
        s = format(Decimal(s), "f")
    if "." not in s:
        s += ".0"
    return s


def _parse_angle(tok: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise FormatError(f"bad angle {tok!r}") from None
    if v != v or v in (float("inf"), float("-inf")):
        raise FormatError(f"non-finite angle {tok!r}")
    return v


def _parse_int(tok: str, what: str) -> int:
    if not tok.isdigit():
        raise FormatError(f"bad {what} {tok!r}")
    return int(tok)


def _loop_line(g: Gate) -> str:
    if g.kind == "LOOP":
        return f"LOOP {g.label} REPS:{g.reps}"
    return f"NEXT {g.label}"


def _parse_loop_line(toks: list[str]) -> Gate:
    if toks[0] == "NEXT":
        if len(toks) != 2:
            raise FormatError("NEXT takes exactly one label")
        return Gate.next(_parse_int(toks[1], "loop label"))
    rest = "".join(toks[2:])
    if len(toks) < 3 or not rest.startswith("REPS:"):
        raise FormatError("expected LOOP k REPS:N")
    return Gate.loop(_parse_int(toks[1], "loop label"), _parse_int(rest[5:], "repetition count"))


# ---------------------------------------------------------------- English


def emit_english_line(g: Gate) -> str:
    if g.is_loop_marker:
        return _loop_line(g)
    words = [g.kind]
    if g.kind == "SWAP":
        words += [str(t) for t in g.targets]
    elif g.kind == "MP_Y":
        words += ["AT", str(g.targets[0])]
    else:
        words += [format_angle(a) for a in g.angles]
        if g.targets:
            words += ["AT", str(g.targets[0])]
    ctrls = [f"{b}({k}" for b, k in g.mux_controls] + [str(c) for c in g.controls]
    if ctrls:
        words += ["IF", *ctrls]
    if g.kind == "MP_Y":
        words += ["BY", *(format_angle(a) for a in g.angles)]
    return " ".join(words)


def emit_english(circuit: Circuit) -> str:
    return "".join(emit_english_line(g) + "\n" for g in relabel_loops(circuit.ops))


def _parse_controls(toks: list[str]) -> tuple[list[tuple[int, int]], list[Control]]:
    mux, plain = [], []
    for tok in toks:
        bit, paren, name = tok.partition("(")
        if paren:
            mux.append((_parse_int(bit, "control bit"), _parse_int(name, "control name")))
        else:
            try:
                plain.append(Control.parse(tok))
            except ValueError as e:
                raise FormatError(str(e)) from None
    return mux, plain


def parse_english_line(line: str, lineno: int | None = None) -> Gate:
    """Parse one English line.  With ``lineno`` given, LOOP labels must equal it."""
    toks = line.split()
    if not toks:
        raise FormatError("empty line", lineno)
    kind = toks[0]
    try:
        if kind in ("LOOP", "NEXT"):
            g = _parse_loop_line(toks)
            if kind == "LOOP" and lineno is not None and g.label != lineno:
                raise FormatError(f"LOOP label {g.label} differs from its line number")
            return g
        if kind not in N_TARGETS:
            raise FormatError(f"unknown operation {kind!r}")
        i = 1
        angles: list[float] = []
        targets: list[int] = []
        if kind == "SWAP":
            if len(toks) < 3:
                raise FormatError("SWAP needs two bits")
            targets = [_parse_int(toks[1], "bit"), _parse_int(toks[2], "bit")]
            i = 3
        else:
            n_ang = N_ANGLES.get(kind, 0)
            if len(toks) < 1 + n_ang:
                raise FormatError(f"{kind} needs {n_ang} angle(s)")
            angles = [_parse_angle(t) for t in toks[1:1 + n_ang]]
            i = 1 + n_ang
            if N_TARGETS[kind]:
                if toks[i:i + 1] != ["AT"] or len(toks) < i + 2:
                    raise FormatError(f"{kind} needs 'AT <bit>'")
                targets = [_parse_int(toks[i + 1], "bit")]
                i += 2
        ctrl_toks: list[str] = []
        if i < len(toks):
            if toks[i] != "IF" and not (kind == "MP_Y" and toks[i] == "BY"):
                raise FormatError(f"unexpected token {toks[i]!r}")
            if toks[i] == "IF":
                i += 1
                while i < len(toks) and toks[i] != "BY":
                    ctrl_toks.append(toks[i])
                    i += 1
                if not ctrl_toks:
                    raise FormatError("IF without controls")
        if kind == "MP_Y":
            if toks[i:i + 1] != ["BY"]:
                raise FormatError("MP_Y needs 'BY <angles>'")
            angles = [_parse_angle(t) for t in toks[i + 1:]]
        elif i < len(toks):
            raise FormatError(f"unexpected token {toks[i]!r}")
        mux, plain = _parse_controls(ctrl_toks)
        if mux and kind != "MP_Y":
            raise FormatError(f"{kind} cannot have multiplexor controls")
        g = Gate(kind, tuple(targets), tuple(angles), tuple(plain), tuple(mux))
        if kind == "MP_Y" and len(angles) != g.expected_angles():
            raise FormatError(f"MP_Y with {len(mux)} controls needs {g.expected_angles()} angles")
        return g
    except FormatError as e:
        if e.line is None and lineno is not None:
            raise FormatError(str(e), lineno) from None
        raise


def parse_english(text: str, qubit_count: int | None = None) -> Circuit:
    """Parse a whole English File.

    Without ``qubit_count`` the circuit is sized by the highest bit used.
    """
    gates = [parse_english_line(line, i) for i, line in enumerate(text.splitlines())]
    if qubit_count is None:
        qubit_count = max((b for g in gates for b in g.bits()), default=0) + 1
    try:
        c = Circuit(qubit_count, gates)
    except CircuitError as e:
        raise FormatError(str(e)) from None
    bad = loop_problems(c.ops)
    if bad:
        raise FormatError(bad[0])
    return c


# ---------------------------------------------------------------- Picture


def _col(q: int, nq: int) -> int:
    return 4 * (nq - 1 - q)


def emit_picture_line(g: Gate, qubit_count: int) -> str:
    if g.is_loop_marker:
        return _loop_line(g)
    nq = qubit_count
    cells: dict[int, str] = {}
    if g.kind == "SWAP":
        cells[g.targets[0]] = "<"
        cells[g.targets[1]] = ">"
    elif g.targets:
        cells[g.targets[0]] = PIC_SYMBOL[g.kind]
    for c in g.controls:
        cells[c.bit] = "@" if c.polarity else "0"
    for b, k in g.mux_controls:
        cells[b] = f"({k}"
    if g.kind == "PHAS":
        free = min(q for q in range(nq) if q not in cells)
        cells[free] = "Ph"
    lo, hi = min(cells), max(cells)
    width = _col(0, nq) + 1
    row = [" "] * width
    for q in range(nq):
        row[_col(q, nq)] = "+" if lo < q < hi else "|"
    for i in range(_col(hi, nq), _col(lo, nq)):
        if row[i] == " ":
            row[i] = "-"
    for q, sym in cells.items():
        start = _col(q, nq)
        if q == 0 and nq > 1:
            start -= len(sym) - 1
        end = start + len(sym)
        if end > len(row):
            row.extend(" " * (end - len(row)))
        row[start:end] = sym
    return "".join(row)


def emit_picture(circuit: Circuit) -> str:
    nq = circuit.qubit_count
    return "".join(emit_picture_line(g, nq) + "\n" for g in relabel_loops(circuit.ops))


def _runs(line: str) -> Iterable[tuple[int, str]]:
    i = 0
    while i < len(line):
        if line[i] in " -":
            i += 1
            continue
        j = i
        while j < len(line) and line[j] not in " -":
            j += 1
        yield i, line[i:j]
        i = j


def picture_width_qubits(line: str) -> int:
    return max(1, (len(line.rstrip()) + 3) // 4)


def parse_picture_line(
    line: str, qubit_count: int | None = None, lineno: int | None = None
) -> GateShape:
    """Recover everything but the angles from one Picture line."""
    toks = line.split()
    if toks and toks[0] in ("LOOP", "NEXT"):
        try:
            return _parse_loop_line(toks).shape()
        except FormatError as e:
            raise FormatError(str(e), lineno) from None
    line = line.rstrip()
    nq = qubit_count or picture_width_qubits(line)
    last = _col(0, nq)
    cells: dict[int, str] = {}
    for start, sym in _runs(line):
        if start % 4 == 0 and start // 4 < nq:
            q = nq - 1 - start // 4
        elif nq > 1 and start + len(sym) - 1 == last:
            q = 0
        else:
            raise FormatError(f"symbol {sym!r} at non-qubit column {start + 1}", lineno)
        if q in cells:
            raise FormatError(f"two symbols on qubit {q}", lineno)
        cells[q] = sym
    ops: list[tuple[int, str]] = []
    swap: dict[str, int] = {}
    controls: list[Control] = []
    mux: list[tuple[int, int]] = []
    for q, sym in cells.items():
        if sym in ("|", "+"):
            continue
        if sym in ("@", "0"):
            controls.append(Control(q, sym == "@"))
        elif sym in ("<", ">"):
            swap[sym] = q
        elif sym.startswith("(") and sym[1:].isdigit():
            mux.append((q, int(sym[1:])))
        elif sym in _PIC_KIND:
            ops.append((q, sym))
        else:
            raise FormatError(f"unknown symbol {sym!r}", lineno)
    if swap:
        if ops or set(swap) != {"<", ">"}:
            raise FormatError("malformed swap", lineno)
        kind, targets = "SWAP", (swap["<"], swap[">"])
    elif len(ops) == 1:
        q, sym = ops[0]
        kind = _PIC_KIND[sym]
        if mux:
            if sym != "Ry":
                raise FormatError(f"multiplexor controls on {sym!r}", lineno)
            kind = "MP_Y"
        targets = () if kind == "PHAS" else (q,)
    elif not ops:
        raise FormatError("line holds no operation", lineno)
    else:
        raise FormatError("line holds more than one operation", lineno)
    if mux and kind != "MP_Y":
        raise FormatError("multiplexor controls without Ry", lineno)
    return GateShape(kind, targets, frozenset(controls), frozenset(mux))


def parse_picture(text: str, qubit_count: int | None = None) -> list[GateShape]:
    lines = text.splitlines()
    if qubit_count is None:
        widths = [
            picture_width_qubits(ln)
            for ln in lines
            if ln.split() and ln.split()[0] not in ("LOOP", "NEXT")
        ]
        qubit_count = max(widths, default=1)
    return [parse_picture_line(ln, qubit_count, i) for i, ln in enumerate(lines)]


def check_correspondence(eng: str, pic: str) -> list[str]:
    """Line-by-line agreement report between an English and a Picture File."""
    report = []
    e_lines, p_lines = eng.splitlines(), pic.splitlines()
    if len(e_lines) != len(p_lines):
        report.append(f"line count mismatch: English has {len(e_lines)}, Picture has {len(p_lines)}")
    try:
        e_shapes = [parse_english_line(ln, i).shape() for i, ln in enumerate(e_lines)]
    except FormatError as e:
        return report + [f"English {e}"]
    try:
        p_shapes = parse_picture(pic)
    except FormatError as e:
        return report + [f"Picture {e}"]
    report.extend(f"English {p}" for p in loop_problems(
        Gate(s.kind, label=s.label, reps=s.reps) for s in e_shapes
    ))
    for i, (a, b) in enumerate(zip(e_shapes, p_shapes)):
        if a == b:
            continue
        for fld in ("kind", "targets", "controls", "mux_controls", "label", "reps"):
            va, vb = getattr(a, fld), getattr(b, fld)
            if va != vb:
                if isinstance(va, frozenset):
                    va, vb = sorted(map(str, va)), sorted(map(str, vb))
                report.append(f"line {i}: {fld} mismatch: English {va} vs Picture {vb}")
                break
    return report


# ---------------------------------------------------------------- Log


def _num(x: float) -> str:
    return format_angle(round(x, 10))


def emit_log(
    params: GenParams,
    derived: DerivedOutputs,
    net: BayesNet,
    layout: NitLayout,
    folder: str = "",
) -> str:
    lines = [f"I/O folder: {folder}", "Starting state:"]
    for node in net.nodes:
        sn = state_names(net, layout, node.name)[params.start[node.name]]
        lines.append(f"    {node.name} = {sn.english} ({sn.binary}) {sn.decimal}")
    lines += [
        f"Number of probe bits (a): {params.probe_bits_a}",
        f"Number of PE steps (c): {params.pe_steps_c}",
        f"Maximum number of Grover steps: {params.max_grover_steps}",
        f"Gamma tolerance (degs): {_num(params.gamma_tol_degs)}",
        f"Delta lambda (degs): {_num(params.delta_lambda_degs)}",
        f"Omit V gates: {'ON' if params.omit_v else 'OFF'}",
        f"Starting gamma (degs): {_num(derived.gamma0_degs)}",
        f"Prob. of starting state: {derived.p_start!r}",
        f"Number of qubits: {derived.qubit_count}",
        f"Number of elementary operations: {derived.elementary_op_count}",
        f"Number of Grover steps used: {derived.grover_steps_used}",
    ]
    return "\n".join(lines) + "\n"


def parse_log(text: str) -> Mapping[str, str]:
    """Top-level ``key: value`` pairs of a log (indented lines skipped)."""
    out = {}
    for line in text.splitlines():
        if line[:1].isspace() or ":" not in line:
            continue
        key, _, value = line.partition(":")
        out[key.strip()] = value.strip()
    return out
