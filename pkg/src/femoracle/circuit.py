"""Reversible gate IR, basis-state simulation and resource accounting.

Gates are drawn from the classical-reversible family (NOT, multi-controlled
NOT, controlled SWAP), so a circuit acts as a permutation of computational
basis states and can be simulated with plain integers.  Qubit 0 is the least
significant bit of a packed state, and every register stores its least
significant bit at its lowest index.
"""

from __future__ import annotations

import contextlib
import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .fixedpoint import FixedPointFormat


class GateKind(enum.Enum):
    X = "x"
    CX = "cx"
    CCX = "ccx"
    MCX = "mcx"
    SWAP = "swap"
    CSWAP = "cswap"


_NOT_FAMILY = (GateKind.X, GateKind.CX, GateKind.CCX, GateKind.MCX)


@dataclass(frozen=True, slots=True)
class Gate:
    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()

    def __post_init__(self):
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit in {self}")
        if any(q < 0 for q in qubits):
            raise ValueError(f"negative qubit index in {self}")
        n_ctrl = len(self.controls)
        if self.kind in _NOT_FAMILY:
            if len(self.targets) != 1:
                raise ValueError(f"{self.kind.name} takes one target")
            expected = {GateKind.X: 0, GateKind.CX: 1, GateKind.CCX: 2}.get(self.kind)
            if expected is not None and n_ctrl != expected:
                raise ValueError(f"{self.kind.name} needs {expected} controls")
            if self.kind is GateKind.MCX and n_ctrl < 1:
                raise ValueError("MCX needs at least one control")
        else:
            if len(self.targets) != 2:
                raise ValueError(f"{self.kind.name} takes two targets")
            if self.kind is GateKind.SWAP and n_ctrl:
                raise ValueError("SWAP takes no controls")
            if self.kind is GateKind.CSWAP and n_ctrl < 1:
                raise ValueError("CSWAP needs at least one control")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def with_controls(self, extra: Sequence[int]) -> "Gate":
        """Same gate with additional controls, promoting the kind as needed."""
        if not extra:
            return self
        controls = tuple(extra) + self.controls
        if self.kind in _NOT_FAMILY:
            return not_gate(controls, self.targets[0])
        return Gate(GateKind.CSWAP, self.targets, controls)


def not_gate(controls: Sequence[int], target: int) -> Gate:
    """NOT-family gate whose kind is chosen from the number of controls."""
    controls = tuple(controls)
    kind = {0: GateKind.X, 1: GateKind.CX, 2: GateKind.CCX}.get(len(controls), GateKind.MCX)
    return Gate(kind, (target,), controls)


@dataclass(frozen=True)
class RegisterHandle:
    name: str
    qubits: tuple[int, ...]
    fmt: FixedPointFormat | None = None
    ancilla: bool = False

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.qubits, self.qubits[1:])):
            raise ValueError(f"register {self.name}: indices must increase")
        if self.fmt is not None and self.fmt.width != len(self.qubits):
            raise ValueError(
                f"register {self.name}: width {len(self.qubits)} does not match format width {self.fmt.width}"
            )

    def __len__(self):
        return len(self.qubits)

    def __getitem__(self, item):
        return self.qubits[item]

    def __iter__(self):
        return iter(self.qubits)

    @property
    def width(self) -> int:
        return len(self.qubits)


@dataclass
class ResourceReport:
    qubits: int
    ancillas: int
    gate_counts: dict[str, int]
    depth: int

    @property
    def total_gates(self) -> int:
        return sum(self.gate_counts.values())


class Circuit:
    """Ordered gate list over a fixed qubit count with named registers.

    Builders append gates through the helper methods.  Two context managers
    support composition: ``controlled`` adds controls to everything appended
    inside it, and ``capture`` collects appended gates into a side list so a
    block can be replayed or inverted later.
    """

    def __init__(self, num_qubits: int = 0):
        self.num_qubits = num_qubits
        self.gates: list[Gate] = []
        self.registers: dict[str, RegisterHandle] = {}
        self._ctrl_stack: list[tuple[int, ...]] = []
        self._sinks: list[list[Gate]] = []
        self._compiled = None

    # -- registers -------------------------------------------------------
    def allocate(self, name: str, width: int, fmt: FixedPointFormat | None = None,
                 ancilla: bool = False) -> RegisterHandle:
        if name in self.registers:
            raise ValueError(f"duplicate register name {name!r}")
        if width <= 0:
            raise ValueError("register width must be positive")
        lo = self.num_qubits
        reg = RegisterHandle(name, tuple(range(lo, lo + width)), fmt, ancilla)
        self.num_qubits += width
        self.registers[name] = reg
        return reg

    def add_register(self, reg: RegisterHandle) -> RegisterHandle:
        """Attach an existing qubit slice under a name (used by the parser)."""
        if reg.name in self.registers:
            raise ValueError(f"duplicate register name {reg.name!r}")
        taken = {q for r in self.registers.values() for q in r.qubits}
        if taken.intersection(reg.qubits):
            raise ValueError(f"register {reg.name} overlaps an existing register")
        if reg.qubits and reg.qubits[-1] >= self.num_qubits:
            raise ValueError(f"register {reg.name} exceeds qubit count")
        self.registers[reg.name] = reg
        return reg

    def reg(self, name: str) -> RegisterHandle:
        return self.registers[name]

    # -- appending -------------------------------------------------------
    def append(self, gate: Gate) -> None:
        extra = self._active_controls()
        if extra:
            gate = gate.with_controls(extra)
        if self._sinks:
            self._sinks[-1].append(gate)
            return
        if max(gate.qubits) >= self.num_qubits:
            raise ValueError(f"gate {gate} exceeds qubit count {self.num_qubits}")
        self.gates.append(gate)
        self._compiled = None

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.append(g)

    def x(self, t: int):
        self.append(Gate(GateKind.X, (t,)))

    def cx(self, c: int, t: int):
        self.append(Gate(GateKind.CX, (t,), (c,)))

    def ccx(self, c1: int, c2: int, t: int):
        self.append(Gate(GateKind.CCX, (t,), (c1, c2)))

    def mcx(self, controls: Sequence[int], t: int):
        self.append(not_gate(controls, t))

    def swap(self, a: int, b: int):
        self.append(Gate(GateKind.SWAP, (a, b)))

    def cswap(self, c: int, a: int, b: int):
        self.append(Gate(GateKind.CSWAP, (a, b), (c,)))

    def _active_controls(self) -> tuple[int, ...]:
        out: tuple[int, ...] = ()
        for c in self._ctrl_stack:
            out += c
        return out

    @contextlib.contextmanager
    def controlled(self, controls: Sequence[int] | int):
        if isinstance(controls, int):
            controls = (controls,)
        self._ctrl_stack.append(tuple(controls))
        try:
            yield self
        finally:
            self._ctrl_stack.pop()

    @contextlib.contextmanager
    def capture(self) -> Iterator[list[Gate]]:
        """Collect appended gates (without outer controls) instead of emitting them."""
        saved = self._ctrl_stack
        self._ctrl_stack = []
        block: list[Gate] = []
        self._sinks.append(block)
        try:
            yield block
        finally:
            self._sinks.pop()
            self._ctrl_stack = saved

    def emit_inverse(self, block: Sequence[Gate]) -> None:
        self.extend(reversed(block))

    # -- misc ------------------------------------------------------------
    def copy(self) -> "Circuit":
        c = Circuit(self.num_qubits)
        c.gates = list(self.gates)
        c.registers = dict(self.registers)
        return c

    def __len__(self):
        return len(self.gates)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.num_qubits == other.num_qubits and self.gates == other.gates
                and self.registers == other.registers)

    def ancilla_registers(self) -> list[RegisterHandle]:
        return [r for r in self.registers.values() if r.ancilla]

    # -- state packing ---------------------------------------------------
    def pack(self, values: dict[str, int]) -> int:
        """Build a basis state from per-register codes (unnamed qubits are 0)."""
        state = 0
        for name, code in values.items():
            reg = self.registers[name]
            code &= (1 << reg.width) - 1
            for k, q in enumerate(reg.qubits):
                if code >> k & 1:
                    state |= 1 << q
        return state

    def read(self, state: int, name: str) -> int:
        reg = self.registers[name]
        code = 0
        for k, q in enumerate(reg.qubits):
            code |= (state >> q & 1) << k
        return code

    def unpack(self, state: int) -> dict[str, int]:
        return {name: self.read(state, name) for name in self.registers}

    def compiled(self):
        if self._compiled is None:
            self._compiled = _compile(self.gates)
        return self._compiled


def _compile(gates: Sequence[Gate]):
    prog = []
    for g in gates:
        cmask = 0
        for c in g.controls:
            cmask |= 1 << c
        if g.kind in _NOT_FAMILY:
            prog.append((cmask, 1 << g.targets[0], 0))
        else:
            prog.append((cmask, 1 << g.targets[0], 1 << g.targets[1]))
    return prog


# -- simulation -----------------------------------------------------------

def run(circuit: Circuit, state: int) -> int:
    """Apply the circuit to a packed basis state."""
    if state < 0 or state >> circuit.num_qubits:
        raise ValueError("state has bits beyond the circuit width")
    for cmask, t1, t2 in circuit.compiled():
        if state & cmask != cmask:
            continue
        if not t2:
            state ^= t1
        elif bool(state & t1) != bool(state & t2):
            state ^= t1 | t2
    return state


def simulate(circuit: Circuit, bits: Sequence[int]) -> list[int]:
    """Bit-list interface: ``bits[q]`` is the value of qubit q."""
    if len(bits) != circuit.num_qubits:
        raise ValueError(f"expected {circuit.num_qubits} bits, got {len(bits)}")
    state = 0
    for q, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        state |= b << q
    out = run(circuit, state)
    return [out >> q & 1 for q in range(circuit.num_qubits)]


def run_batch(circuit: Circuit, states: Sequence[int]) -> list[int]:
    """Simulate many basis states at once by bit-slicing.

    Each qubit becomes an integer whose bit s belongs to sample s, so one gate
    costs a handful of big-integer operations regardless of the batch size.
    """
    n = circuit.num_qubits
    count = len(states)
    if count == 0:
        return []
    lanes = [0] * n
    for s, st in enumerate(states):
        if st < 0 or st >> n:
            raise ValueError("state has bits beyond the circuit width")
        q = 0
        while st:
            if st & 1:
                lanes[q] |= 1 << s
            st >>= 1
            q += 1
    full = (1 << count) - 1
    for g in circuit.gates:
        m = full
        for c in g.controls:
            m &= lanes[c]
            if not m:
                break
        if not m:
            continue
        if g.kind in _NOT_FAMILY:
            lanes[g.targets[0]] ^= m
        else:
            a, b = g.targets
            diff = (lanes[a] ^ lanes[b]) & m
            lanes[a] ^= diff
            lanes[b] ^= diff
    out = [0] * count
    for q, lane in enumerate(lanes):
        s = 0
        while lane:
            if lane & 1:
                out[s] |= 1 << q
            lane >>= 1
            s += 1
    return out


# -- transformers ---------------------------------------------------------

def adjoint(circuit: Circuit) -> Circuit:
    """Inverse circuit; every gate in the family is its own inverse."""
    c = Circuit(circuit.num_qubits)
    c.registers = dict(circuit.registers)
    c.gates = list(reversed(circuit.gates))
    return c


def control_wrap(circuit: Circuit, controls: Sequence[int]) -> Circuit:
    controls = tuple(controls)
    used = {q for g in circuit.gates for q in g.qubits}
    used.update(q for r in circuit.registers.values() for q in r.qubits)
    clash = used.intersection(controls)
    if clash:
        raise ValueError(f"control qubits {sorted(clash)} overlap the circuit")
    width = max([circuit.num_qubits] + [c + 1 for c in controls])
    c = Circuit(width)
    c.registers = dict(circuit.registers)
    c.gates = [g.with_controls(controls) for g in circuit.gates]
    return c


def _vchain(controls: Sequence[int], target: int, pool: Sequence[int]) -> list[Gate]:
    """Toffoli ladder computing the AND of ``controls`` into ``target``."""
    k = len(controls)
    if k <= 2:
        return [not_gate(controls, target)]
    anc = pool[:k - 2]
    up = [Gate(GateKind.CCX, (anc[0],), (controls[0], controls[1]))]
    for i in range(2, k - 1):
        up.append(Gate(GateKind.CCX, (anc[i - 1],), (controls[i], anc[i - 2])))
    top = Gate(GateKind.CCX, (target,), (controls[k - 1], anc[k - 3]))
    return up + [top] + list(reversed(up))


def mcx_ancillas_needed(circuit: Circuit) -> int:
    need = 0
    for g in circuit.gates:
        k = len(g.controls)
        if g.kind in _NOT_FAMILY:
            need = max(need, k - 2)
        elif k >= 2:
            need = max(need, k - 1)
    return need


def lower_mcx(circuit: Circuit, pool: Sequence[int] | None = None) -> Circuit:
    """Rewrite MCX (and multi-controlled CSWAP) into Toffoli ladders.

    ``pool`` lists clean ancilla qubits; if omitted a fresh ancilla register
    named ``mcx_pool`` is appended with exactly as many qubits as needed.
    """
    need = mcx_ancillas_needed(circuit)
    out = Circuit(circuit.num_qubits)
    out.registers = dict(circuit.registers)
    if pool is None:
        pool = out.allocate("mcx_pool", need, ancilla=True).qubits if need else ()
    pool = tuple(pool)
    if len(pool) < need:
        raise ValueError(f"lowering needs {need} ancillas, pool has {len(pool)}")
    for g in circuit.gates:
        busy = set(g.qubits)
        if busy.intersection(pool):
            raise ValueError("ancilla pool overlaps a gate operand")
        k = len(g.controls)
        if g.kind is GateKind.MCX and k > 2:
            out.gates.extend(_vchain(g.controls, g.targets[0], pool))
        elif g.kind is GateKind.CSWAP and k > 1:
            flag = pool[0]
            ladder = _vchain(g.controls, flag, pool[1:])
            out.gates.extend(ladder)
            out.gates.append(Gate(GateKind.CSWAP, g.targets, (flag,)))
            out.gates.extend(reversed(ladder))
        elif g.kind is GateKind.MCX:
            out.gates.append(not_gate(g.controls, g.targets[0]))
        else:
            out.gates.append(g)
    return out


# -- resources ------------------------------------------------------------

def resources(circuit: Circuit) -> ResourceReport:
    counts = {k.value: 0 for k in GateKind}
    layer = [0] * circuit.num_qubits
    depth = 0
    for g in circuit.gates:
        counts[g.kind.value] += 1
        level = 1 + max(layer[q] for q in g.qubits)
        for q in g.qubits:
            layer[q] = level
        depth = max(depth, level)
    anc = sum(r.width for r in circuit.registers.values() if r.ancilla)
    return ResourceReport(circuit.num_qubits, anc, counts, depth)


# -- text format ----------------------------------------------------------

def dumps(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.num_qubits}"]
    for reg in circuit.registers.values():
        lo, hi = reg.qubits[0], reg.qubits[-1]
        if reg.qubits != tuple(range(lo, hi + 1)):
            raise ValueError(f"register {reg.name} is not contiguous")
        line = f"reg {reg.name} {lo}..{hi}"
        if reg.fmt is not None:
            kind = "signed" if reg.fmt.signed else "unsigned"
            line += f" fmt {reg.fmt.r} {reg.fmt.p} {kind}"
        if reg.ancilla:
            line += " ancilla"
        lines.append(line)
    for g in circuit.gates:
        name = g.kind.value
        if g.kind is GateKind.MCX or (g.kind is GateKind.CSWAP and len(g.controls) > 1):
            ctrl = ",".join(f"q{c}" for c in g.controls)
            tgt = " ".join(f"q{t}" for t in g.targets)
            lines.append(f"{name} {ctrl} {tgt}")
        else:
            lines.append(" ".join([name] + [f"q{q}" for q in g.controls + g.targets]))
    return "\n".join(lines) + "\n"


def _qubit(tok: str, lineno: int) -> int:
    if not tok.startswith("q") or not tok[1:].isdigit():
        raise ValueError(f"line {lineno}: bad qubit token {tok!r}")
    return int(tok[1:])


def loads(text: str) -> Circuit:
    circuit: Circuit | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].lower()
        try:
            if head == "qubits":
                if circuit is not None:
                    raise ValueError("duplicate qubits header")
                circuit = Circuit(int(parts[1]))
                continue
            if circuit is None:
                raise ValueError("missing qubits header")
            if head == "reg":
                lo, hi = (int(v) for v in parts[2].split(".."))
                fmt = None
                ancilla = False
                rest = parts[3:]
                while rest:
                    if rest[0] == "fmt":
                        fmt = FixedPointFormat(int(rest[1]), int(rest[2]), rest[3] == "signed")
                        if rest[3] not in ("signed", "unsigned"):
                            raise ValueError(f"bad signedness {rest[3]!r}")
                        rest = rest[4:]
                    elif rest[0] == "ancilla":
                        ancilla = True
                        rest = rest[1:]
                    else:
                        raise ValueError(f"unexpected token {rest[0]!r}")
                circuit.add_register(RegisterHandle(parts[1], tuple(range(lo, hi + 1)), fmt, ancilla))
                continue
            kind = GateKind(head)
            if kind in (GateKind.MCX, GateKind.CSWAP) and "," in parts[1] or (
                    kind is GateKind.MCX and len(parts) == 3):
                controls = tuple(_qubit(t, lineno) for t in parts[1].split(","))
                targets = tuple(_qubit(t, lineno) for t in parts[2:])
            else:
                qs = [_qubit(t, lineno) for t in parts[1:]]
                n_t = 2 if kind in (GateKind.SWAP, GateKind.CSWAP) else 1
                controls, targets = tuple(qs[:-n_t]), tuple(qs[-n_t:])
            circuit.append(Gate(kind, targets, controls))
        except (IndexError, ValueError) as exc:
            msg = str(exc)
            if not msg.startswith("line "):
                msg = f"line {lineno}: {msg}"
            raise ValueError(msg) from None
    if circuit is None:
        raise ValueError("empty circuit file")
    return circuit
