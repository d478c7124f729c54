"""Reversible-circuit intermediate representation with exact cost accounting.

Circuits are ordered gate lists over named registers.  Each register carries a
role (system / output / persistent-ancilla / temporary-ancilla / control) and
the gate stream may contain ALLOC/FREE events that delimit the lifetime of
temporary registers; the cost ledger derives ancilla peaks from those events
rather than from data-flow analysis.

Toffoli accounting follows the measurement-based uncomputation convention:
gates flagged ``measurement_uncompute`` are realized with Clifford gates plus
X-basis measurements and contribute nothing to the Toffoli count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence


class RegisterRole(str, Enum):
    SYSTEM = "system"
    OUTPUT = "output"
    PERSISTENT = "persistent-ancilla"
    TEMPORARY = "temporary-ancilla"
    CONTROL = "control"


# Gate kinds.  X/CNOT/TOFFOLI/MCX/CSWAP are classical reversible gates;
# T_ROT is a placeholder carrying a (possibly fractional) T-gate weight;
# CC_ADD marks a block of classically controlled addition (audit only);
# ALLOC/FREE are ancilla lifetime events, not gates.
KIND_X = "X"
KIND_CNOT = "CNOT"
KIND_TOFFOLI = "TOFFOLI"
KIND_MCX = "MCX"
KIND_CSWAP = "CSWAP"
KIND_T_ROT = "T_ROT"
KIND_CC_ADD = "CC_ADD"
KIND_ALLOC = "ALLOC"
KIND_FREE = "FREE"

CLASSICAL_KINDS = (KIND_X, KIND_CNOT, KIND_TOFFOLI, KIND_MCX, KIND_CSWAP)
_EVENT_KINDS = (KIND_ALLOC, KIND_FREE)


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """One gate: targets, controls (with per-control polarity) and flags.

    ``polarity[i]`` is True when control ``i`` triggers on |1> and False when
    it triggers on |0>.  ``measurement_uncompute`` marks the gate as realized
    by measurement + Clifford fixup (zero Toffoli cost).  ``t_weight`` is only
    meaningful for T_ROT placeholders.  ALLOC/FREE events carry the register
    name in ``tag``.
    """

    kind: str
    targets: tuple[int, ...] = ()
    controls: tuple[int, ...] = ()
    polarity: tuple[bool, ...] = ()
    measurement_uncompute: bool = False
    t_weight: float = 0.0
    tag: str = ""

    def __post_init__(self):
        if self.polarity and len(self.polarity) != len(self.controls):
            raise CircuitError("polarity length must match controls")
        if not self.polarity and self.controls:
            object.__setattr__(self, "polarity", (True,) * len(self.controls))
        if self.kind in CLASSICAL_KINDS:
            seen = set()
            for q in self.targets + self.controls:
                if q in seen:
                    raise CircuitError(f"qubit {q} repeated within one gate")
                seen.add(q)
        if self.kind == KIND_CNOT and (len(self.controls) != 1 or len(self.targets) != 1):
            raise CircuitError("CNOT takes one control and one target")
        if self.kind == KIND_TOFFOLI and (len(self.controls) != 2 or len(self.targets) != 1):
            raise CircuitError("TOFFOLI takes two controls and one target")
        if self.kind == KIND_CSWAP and (len(self.controls) != 1 or len(self.targets) != 2):
            raise CircuitError("CSWAP takes one control and two targets")
        if self.kind == KIND_X and (self.controls or len(self.targets) != 1):
            raise CircuitError("X takes one target and no controls")

    def toffoli_cost(self) -> int:
        """Toffoli count of the gate under ladder lowering of multi-controls."""
        if self.measurement_uncompute:
            return 0
        if self.kind == KIND_TOFFOLI:
            return 1
        if self.kind == KIND_CSWAP:
            return 1
        if self.kind == KIND_MCX:
            c = len(self.controls)
            return max(c - 1, 0)
        return 0

    def ladder_ancillas(self) -> int:
        """Transient ancillas used when lowering this gate to Toffolis."""
        if self.kind == KIND_MCX and len(self.controls) >= 3:
            return len(self.controls) - 1
        return 0


@dataclass(frozen=True)
class CostLedger:
    """Exact gate/ancilla costs measured from a circuit."""

    toffoli_count: int
    t_count: int
    persistent_ancilla: int
    temporary_ancilla_peak: int
    logical_qubit_peak: int

    def as_dict(self) -> dict:
        return {
            "toffoli_count": self.toffoli_count,
            "t_count": self.t_count,
            "persistent_ancilla": self.persistent_ancilla,
            "temporary_ancilla_peak": self.temporary_ancilla_peak,
            "logical_qubit_peak": self.logical_qubit_peak,
        }


@dataclass
class Register:
    name: str
    width: int
    role: RegisterRole
    offset: int


class Circuit:
    """Ordered reversible-gate list over named registers.

    Appending gates invalidates any previously computed ledger; ``ledger()``
    recomputes from the gate stream and is deterministic for equal circuits.
    """

    def __init__(self):
        self.registers: dict[str, Register] = {}
        self.gates: list[Gate] = []
        self.classical_params: dict[str, int] = {}
        self._n_qubits = 0

    # -- registers ---------------------------------------------------------
    def add_register(self, name: str, width: int, role: RegisterRole) -> Register:
        if width < 1:
            raise CircuitError(f"register {name!r} must have width >= 1")
        if name in self.registers:
            raise CircuitError(f"register {name!r} already declared")
        reg = Register(name, width, RegisterRole(role), self._n_qubits)
        self.registers[name] = reg
        self._n_qubits += width
        return reg

    @property
    def n_qubits(self) -> int:
        return self._n_qubits

    def qubit(self, reg: str, i: int) -> int:
        r = self.registers[reg]
        if not 0 <= i < r.width:
            raise CircuitError(f"bit {i} out of range for register {reg!r}")
        return r.offset + i

    def qubits(self, reg: str) -> list[int]:
        r = self.registers[reg]
        return list(range(r.offset, r.offset + r.width))

    def set_param(self, name: str, value: int) -> None:
        self.classical_params[name] = value

    # -- gate construction --------------------------------------------------
    def append(self, gate: Gate) -> "Circuit":
        if gate.kind in _EVENT_KINDS:
            if gate.tag not in self.registers:
                raise CircuitError(f"{gate.kind} names unknown register {gate.tag!r}")
        else:
            for q in gate.targets + gate.controls:
                if not 0 <= q < self._n_qubits:
                    raise CircuitError(f"qubit index {q} out of range")
        self.gates.append(gate)
        return self

    def x(self, t, mu=False):
        return self.append(Gate(KIND_X, (t,), measurement_uncompute=mu))

    def cnot(self, c, t, mu=False, neg=False):
        return self.append(
            Gate(KIND_CNOT, (t,), (c,), (not neg,), measurement_uncompute=mu)
        )

    def toffoli(self, c1, c2, t, mu=False, polarity=(True, True)):
        return self.append(
            Gate(KIND_TOFFOLI, (t,), (c1, c2), tuple(polarity), measurement_uncompute=mu)
        )

    def mcx(self, controls: Sequence[int], t, polarity=None, mu=False):
        controls = tuple(controls)
        pol = tuple(polarity) if polarity is not None else (True,) * len(controls)
        return self.append(Gate(KIND_MCX, (t,), controls, pol, measurement_uncompute=mu))

    def cswap(self, c, a, b, mu=False):
        return self.append(Gate(KIND_CSWAP, (a, b), (c,), measurement_uncompute=mu))

    def t_rotation(self, weight: float, tag: str = ""):
        return self.append(Gate(KIND_T_ROT, t_weight=float(weight), tag=tag))

    def cc_add_marker(self, tag: str):
        return self.append(Gate(KIND_CC_ADD, tag=tag))

    def alloc(self, reg: str):
        return self.append(Gate(KIND_ALLOC, tag=reg))

    def free(self, reg: str):
        return self.append(Gate(KIND_FREE, tag=reg))

    # -- analysis ------------------------------------------------------------
    def ledger(self) -> CostLedger:
        return ledger_of(self)

    def inverse(self) -> "Circuit":
        """Reversed gate order (all classical kinds are self-inverse)."""
        inv = Circuit()
        inv.registers = dict(self.registers)
        inv._n_qubits = self._n_qubits
        inv.classical_params = dict(self.classical_params)
        for g in reversed(self.gates):
            if g.kind == KIND_ALLOC:
                inv.gates.append(replace(g, kind=KIND_FREE))
            elif g.kind == KIND_FREE:
                inv.gates.append(replace(g, kind=KIND_ALLOC))
            else:
                inv.gates.append(g)
        return inv

    def copy(self) -> "Circuit":
        c = Circuit()
        c.registers = dict(self.registers)
        c._n_qubits = self._n_qubits
        c.classical_params = dict(self.classical_params)
        c.gates = list(self.gates)
        return c


def ledger_of(circuit: Circuit) -> CostLedger:
    """Recompute the exact cost ledger from the gate stream.

    Temporary registers are live between their ALLOC and FREE events; a
    temporary register without events is treated as live for the whole
    circuit.  Multi-controlled X ladder ancillas count transiently.
    """
    toffoli = 0
    t_weight = 0.0
    fixed = 0
    persistent = 0
    always_temp = 0
    for reg in circuit.registers.values():
        if reg.role == RegisterRole.PERSISTENT:
            persistent += reg.width
        elif reg.role == RegisterRole.TEMPORARY:
            pass
        else:
            fixed += reg.width

    has_event: set[str] = set()
    for g in circuit.gates:
        if g.kind in _EVENT_KINDS:
            has_event.add(g.tag)
    for reg in circuit.registers.values():
        if reg.role == RegisterRole.TEMPORARY and reg.name not in has_event:
            always_temp += reg.width

    live = 0
    peak = always_temp
    for g in circuit.gates:
        if g.kind == KIND_ALLOC:
            live += circuit.registers[g.tag].width
            peak = max(peak, always_temp + live)
            continue
        if g.kind == KIND_FREE:
            live -= circuit.registers[g.tag].width
            continue
        toffoli += g.toffoli_cost()
        t_weight += g.t_weight if g.kind == KIND_T_ROT else 0.0
        lad = g.ladder_ancillas()
        if lad:
            peak = max(peak, always_temp + live + lad)
    t_count = int(math.ceil(t_weight - 1e-12)) if t_weight > 0 else 0
    return CostLedger(
        toffoli_count=toffoli,
        t_count=t_count,
        persistent_ancilla=persistent,
        temporary_ancilla_peak=peak,
        logical_qubit_peak=fixed + persistent + peak,
    )


def compose(a: Circuit, b: Circuit, wiring: Mapping[str, str] | None = None) -> Circuit:
    """Sequential composition; ``wiring`` maps b-register names to a-registers.

    Wired registers must have equal widths.  Roles must match, except that
    temporary ancillas may be wired onto each other freely (sequential reuse);
    the resulting peak follows from the ALLOC/FREE event stream.
    """
    wiring = dict(wiring or {})
    out = a.copy()
    remap: dict[str, str] = {}
    for name, reg in b.registers.items():
        if name in wiring:
            target = wiring[name]
            if target not in out.registers:
                raise CircuitError(f"wiring target {target!r} not in left circuit")
            treg = out.registers[target]
            if treg.width != reg.width:
                raise CircuitError(
                    f"width mismatch wiring {name!r} ({reg.width}) onto "
                    f"{target!r} ({treg.width})"
                )
            roles = {treg.role, reg.role}
            if treg.role != reg.role and roles != {RegisterRole.TEMPORARY}:
                if RegisterRole.TEMPORARY not in roles:
                    raise CircuitError(
                        f"role conflict wiring {name!r}: {reg.role} vs {treg.role}"
                    )
            remap[name] = target
        else:
            new_name = name
            while new_name in out.registers:
                new_name = new_name + "_r"
            out.add_register(new_name, reg.width, reg.role)
            remap[name] = new_name

    def map_qubit(q: int) -> int:
        for name, reg in b.registers.items():
            if reg.offset <= q < reg.offset + reg.width:
                return out.registers[remap[name]].offset + (q - reg.offset)
        raise CircuitError(f"qubit {q} not in any register")

    for g in b.gates:
        if g.kind in _EVENT_KINDS:
            out.gates.append(replace(g, tag=remap[g.tag]))
        else:
            out.gates.append(
                replace(
                    g,
                    targets=tuple(map_qubit(q) for q in g.targets),
                    controls=tuple(map_qubit(q) for q in g.controls),
                )
            )
    for k, v in b.classical_params.items():
        if k in out.classical_params and out.classical_params[k] != v:
            raise CircuitError(f"classical parameter {k!r} conflicts in composition")
        out.classical_params[k] = v
    return out


# -- text gate-list format ----------------------------------------------------

def export_text(circuit: Circuit) -> str:
    """Line-oriented gate-list export: deterministic, diff friendly."""
    lines = []
    for reg in circuit.registers.values():
        lines.append(f"REGISTER {reg.name} {reg.width} {reg.role.value}")
    for name in sorted(circuit.classical_params):
        lines.append(f"PARAM {name} {circuit.classical_params[name]}")
    for g in circuit.gates:
        if g.kind in _EVENT_KINDS:
            lines.append(f"{g.kind} {g.tag}")
            continue
        targets = ",".join(str(t) for t in g.targets)
        controls = ",".join(
            ("" if p else "~") + str(c) for c, p in zip(g.controls, g.polarity)
        )
        flags = []
        if g.measurement_uncompute:
            flags.append("M")
        if g.kind == KIND_T_ROT:
            flags.append(f"w={g.t_weight!r}")
        if g.tag:
            flags.append(f"tag={g.tag}")
        lines.append(f"{g.kind} {targets};{controls};{'+'.join(flags)}")
    return "\n".join(lines) + "\n"


def import_text(text: str) -> Circuit:
    c = Circuit()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head == "REGISTER":
            name, width, role = rest.split()
            c.add_register(name, int(width), RegisterRole(role))
            continue
        if head == "PARAM":
            name, value = rest.split()
            c.set_param(name, int(value))
            continue
        if head in _EVENT_KINDS:
            c.append(Gate(head, tag=rest.strip()))
            continue
        tpart, cpart, fpart = (rest.split(";") + ["", ""])[:3]
        targets = tuple(int(t) for t in tpart.split(",") if t != "")
        controls = []
        polarity = []
        for tok in cpart.split(","):
            if tok == "":
                continue
            if tok.startswith("~"):
                controls.append(int(tok[1:]))
                polarity.append(False)
            else:
                controls.append(int(tok))
                polarity.append(True)
        mu = False
        weight = 0.0
        tag = ""
        for tok in fpart.split("+"):
            if tok == "M":
                mu = True
            elif tok.startswith("w="):
                weight = float(tok[2:])
            elif tok.startswith("tag="):
                tag = tok[4:]
        c.append(
            Gate(
                head,
                targets,
                tuple(controls),
                tuple(polarity),
                measurement_uncompute=mu,
                t_weight=weight,
                tag=tag,
            )
        )
    return c
