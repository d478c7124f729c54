"""Exact basis-state simulation of classical reversible circuits.

Circuits containing only X/CNOT/Toffoli/multi-controlled-X/controlled-swap
gates are pure permutations of computational basis states, so batches of
inputs are simulated bit-parallel over packed 64-state words.  A compiled
kernel is used when available; the numpy fallback has identical semantics.
"""
from __future__ import annotations

import os

import numpy as np

from ..circuits import (
    CLASSICAL_KINDS,
    KIND_ALLOC,
    KIND_CC_ADD,
    KIND_CNOT,
    KIND_CSWAP,
    KIND_FREE,
    KIND_MCX,
    KIND_T_ROT,
    KIND_TOFFOLI,
    KIND_X,
    Circuit,
    RegisterRole,
)

if os.environ.get("FTQOPT_PURE_PYTHON"):
    from . import _kernel_py as _kernel

    BACKEND = _kernel.BACKEND_NAME
else:
    try:
        from . import _kernel  # type: ignore

        BACKEND = _kernel.BACKEND_NAME
    except ImportError:
        from . import _kernel_py as _kernel

        BACKEND = _kernel.BACKEND_NAME


class SimulationError(RuntimeError):
    pass


class DirtyAncillaError(SimulationError):
    """A temporary-ancilla register was not restored to zero at circuit end."""


class CompiledOps:
    """Flat op-stream form of a classical circuit, shared by both kernels."""

    def __init__(self, circuit: Circuit):
        codes: list[int] = []
        ctrl_off = [0]
        ctrls: list[int] = []
        targ_off = [0]
        targs: list[int] = []
        for g in circuit.gates:
            if g.kind in (KIND_ALLOC, KIND_FREE, KIND_CC_ADD):
                continue
            if g.kind == KIND_T_ROT:
                raise SimulationError("non-classical gate kind T_ROT in run_basis")
            if g.kind not in CLASSICAL_KINDS:
                raise SimulationError(f"non-classical gate kind {g.kind}")
            if g.kind == KIND_CSWAP:
                codes.append(1)
            else:
                codes.append(0)
            for c, p in zip(g.controls, g.polarity):
                ctrls.append(c + 1 if p else -(c + 1))
            ctrl_off.append(len(ctrls))
            targs.extend(g.targets)
            targ_off.append(len(targs))
        self.codes = np.asarray(codes, dtype=np.int32)
        self.ctrl_off = np.asarray(ctrl_off, dtype=np.int64)
        self.ctrls = np.asarray(ctrls, dtype=np.int64)
        self.targ_off = np.asarray(targ_off, dtype=np.int64)
        self.targs = np.asarray(targs, dtype=np.int64)
        self.n_qubits = circuit.n_qubits


def _pack_column(bools: np.ndarray, n_words: int) -> np.ndarray:
    packed = np.packbits(bools.astype(np.uint8), bitorder="little")
    out = np.zeros(n_words * 8, dtype=np.uint8)
    out[: len(packed)] = packed
    return out.view(np.uint64)


def _unpack_column(words: np.ndarray, n_states: int) -> np.ndarray:
    as_bytes = words.view(np.uint8)
    bools = np.unpackbits(as_bytes, bitorder="little")[:n_states]
    return bools.astype(bool)


def run_batch(
    circuit: Circuit,
    inputs: dict[str, np.ndarray],
    check_temporaries: bool = True,
) -> dict[str, np.ndarray]:
    """Simulate all given basis states through the circuit.

    ``inputs`` maps register names to integer arrays (equal lengths);
    unmentioned registers start at zero.  Returns final register values as
    unsigned integers (little-endian bit order within a register).  Raises
    DirtyAncillaError if any temporary-ancilla register ends nonzero.
    """
    lengths = {len(np.atleast_1d(v)) for v in inputs.values()}
    if len(lengths) > 1:
        raise SimulationError("input arrays must have equal lengths")
    n_states = lengths.pop() if lengths else 1
    n_words = (n_states + 63) // 64

    bits = np.zeros((circuit.n_qubits, n_words), dtype=np.uint64)
    for name, values in inputs.items():
        reg = circuit.registers[name]
        vals = np.atleast_1d(np.asarray(values, dtype=np.uint64))
        if np.any(vals >> np.uint64(reg.width)):
            raise SimulationError(f"value out of range for register {name!r}")
        for i in range(reg.width):
            col = ((vals >> np.uint64(i)) & np.uint64(1)).astype(bool)
            bits[reg.offset + i] = _pack_column(col, n_words)

    mask = np.full(n_words, ~np.uint64(0), dtype=np.uint64)
    rem = n_states % 64
    if rem:
        mask[-1] = np.uint64((1 << rem) - 1)

    ops = CompiledOps(circuit)
    _kernel.apply_ops(
        ops.codes, ops.ctrl_off, ops.ctrls, ops.targ_off, ops.targs, bits, mask
    )

    out: dict[str, np.ndarray] = {}
    for name, reg in circuit.registers.items():
        vals = np.zeros(n_states, dtype=np.uint64)
        for i in range(reg.width):
            col = _unpack_column(bits[reg.offset + i], n_states)
            vals |= col.astype(np.uint64) << np.uint64(i)
        out[name] = vals

    if check_temporaries:
        for name, reg in circuit.registers.items():
            if reg.role == RegisterRole.TEMPORARY and np.any(out[name]):
                bad = int(np.flatnonzero(out[name])[0])
                raise DirtyAncillaError(
                    f"temporary register {name!r} nonzero at exit "
                    f"(first offending input index {bad})"
                )
    return out


def run_basis(
    circuit: Circuit, inputs: dict[str, int], check_temporaries: bool = True
) -> dict[str, int]:
    """Simulate a single basis state; see run_batch."""
    arrays = {k: np.array([v], dtype=np.uint64) for k, v in inputs.items()}
    out = run_batch(circuit, arrays, check_temporaries=check_temporaries)
    return {k: int(v[0]) for k, v in out.items()}


def to_signed(value: int, width: int) -> int:
    """Two's-complement interpretation of an unsigned register value."""
    value = int(value)
    if value >= 1 << (width - 1):
        return value - (1 << width)
    return value


def from_signed(value: int, width: int) -> int:
    """Encode a signed integer into two's complement on ``width`` bits."""
    value = int(value)
    lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    if not lo <= value <= hi:
        raise ValueError(f"{value} not representable in {width} signed bits")
    return value & ((1 << width) - 1)


def signed_array(values: np.ndarray, width: int) -> np.ndarray:
    """Vectorized two's-complement decode."""
    values = np.asarray(values, dtype=np.int64)
    half = np.int64(1 << (width - 1))
    full = np.int64(1 << width)
    return np.where(values >= half, values - full, values)
