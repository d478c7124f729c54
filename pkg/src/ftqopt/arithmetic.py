"""Reversible-arithmetic circuit builders with formula-matched gate counts.

All builders emit real gate bodies (verified by exact basis simulation) whose
measured Toffoli counts equal the closed forms they advertise:

* constant adder on n bits: n - 2 Toffolis, n - 1 temporary carries
* register adder on n bits: n - 1 (modular), n (with carry out)
* comparator against an n-bit constant: n - 2 (even constants; odd ones cost
  one more because the result then depends on the low bit)
* comparator against a register: n
* sum of tree sums of L bits: group-sum term exactly L - ceil(L/group)
* binary-to-unary over N items: N - ceil(log2 N) - 1 controlled swaps
* schoolbook multipliers per the four modes (int*int, int*real, real*real,
  square of a real)

Carry chains follow the measurement-based-uncomputation adder: carry ANDs
are computed onto fresh ancillas and erased by X-basis measurement plus a
Clifford fixup, so only the forward ANDs contribute Toffolis.  Chains always
span the full target window (the uniform-chain convention the closed-form
counts assume), even across positions where the addend bit happens to be
structurally zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .circuits import Circuit, CircuitError, Gate, RegisterRole

# ---------------------------------------------------------------------------
# scratch management


def _scratch(circ: Circuit, width: int, label: str = "tmp") -> tuple[list[int], str]:
    """Allocate a fresh temporary register and emit its ALLOC event."""
    idx = sum(1 for r in circ.registers if r.startswith("_t_"))
    name = f"_t_{label}{idx}"
    circ.add_register(name, width, RegisterRole.TEMPORARY)
    circ.alloc(name)
    return circ.qubits(name), name


def _free(circ: Circuit, name: str) -> None:
    circ.free(name)


def _mu_reverse(circ: Circuit, gates) -> None:
    """Append the reverse of ``gates`` flagged as measurement uncomputation."""
    for g in reversed(gates):
        if g.kind == "ALLOC":
            circ.append(Gate("FREE", tag=g.tag))
        elif g.kind == "FREE":
            circ.append(Gate("ALLOC", tag=g.tag))
        else:
            circ.append(
                Gate(g.kind, g.targets, g.controls, g.polarity,
                     measurement_uncompute=True, t_weight=g.t_weight, tag=g.tag)
            )


# ---------------------------------------------------------------------------
# carry primitives


def _maj_quantum(circ: Circuit, x: int, y: int, z: int, out: int,
                 x_neg: bool = False) -> None:
    """out ^= MAJ(x, y, z) with one Toffoli; x can enter complemented."""
    circ.cnot(z, x)
    circ.cnot(z, y)
    circ.toffoli(x, y, out, polarity=(not x_neg, True))
    circ.cnot(z, out)
    circ.cnot(z, y)
    circ.cnot(z, x)


def _maj_classical(circ: Circuit, a: int, k: int, c: int, out: int) -> None:
    """out ^= MAJ(a, k, c) for a classical bit k; one Toffoli either way."""
    if k == 0:
        circ.toffoli(a, c, out)
    else:  # MAJ(a, 1, c) = OR(a, c)
        circ.toffoli(a, c, out, polarity=(False, False))
        circ.x(out)


# ---------------------------------------------------------------------------
# adders


def emit_add_constant(circ: Circuit, targets: list[int], c: int,
                      sign_control: int | None = None) -> int:
    """In-place |v> -> |v + c mod 2^n>; returns the Toffoli count (n - 2).

    With ``sign_control``, CNOT conjugation turns the addition into
    subtraction when the control is |1>, at no extra Toffoli cost.
    """
    n = len(targets)
    if n < 2:
        raise CircuitError("constant adder needs n >= 2")
    c = c % (1 << n)
    if c == 0:
        return 0
    if sign_control is not None:
        for t in targets:
            circ.cnot(sign_control, t)
    kbits = [(c >> i) & 1 for i in range(n)]
    carries, cname = _scratch(circ, n - 1, "carry")
    segments: list[list[Gate]] = []
    mark = len(circ.gates)
    if kbits[0]:
        circ.cnot(targets[0], carries[0])
    segments.append(circ.gates[mark:])
    for i in range(1, n - 1):
        mark = len(circ.gates)
        _maj_classical(circ, targets[i], kbits[i], carries[i - 1], carries[i])
        segments.append(circ.gates[mark:])
    # sum from the top down, erasing each carry once its sum bit is set
    # (the erasure reads the still-unmodified lower target bit)
    for i in range(n - 1, 0, -1):
        if kbits[i]:
            circ.x(targets[i])
        circ.cnot(carries[i - 1], targets[i])
        _mu_reverse(circ, segments[i - 1])
    if kbits[0]:
        circ.x(targets[0])
    _free(circ, cname)
    if sign_control is not None:
        for t in targets:
            circ.cnot(sign_control, t)
    return n - 2


def emit_add_register(
    circ: Circuit,
    addend: list[int | None],
    targets: list[int],
    carry_out: int | None = None,
) -> int:
    """In-place |a>|t> -> |a>|t + a|; None addend bits read as zero.

    Returns the emitted Toffoli count: window - 1 (modular) or window (with
    carry out).  The carry chain spans the whole window.  The carry into
    ``carry_out`` is XORed onto that qubit (valid whenever no further
    propagation can occur, which the callers' range analyses guarantee).
    """
    n = len(targets)
    if n < 1:
        raise CircuitError("empty target window")
    if len(addend) > n:
        raise CircuitError("addend wider than target window")
    addend = list(addend) + [None] * (n - len(addend))
    chain_len = n - 1 + (1 if carry_out is not None else 0)
    if chain_len == 0:
        if addend[0] is not None:
            circ.cnot(addend[0], targets[0])
        return 0
    carries, cname = _scratch(circ, max(n - 1, 1), "carry")
    chain = carries[: n - 1] + ([carry_out] if carry_out is not None else [])
    count = 0
    segments: list[list[Gate]] = []
    mark = len(circ.gates)
    if addend[0] is not None:
        circ.toffoli(addend[0], targets[0], chain[0])
        count += 1
    segments.append(circ.gates[mark:])
    for i in range(1, len(chain)):
        mark = len(circ.gates)
        if addend[i] is None:
            circ.toffoli(targets[i], chain[i - 1], chain[i])
        else:
            _maj_quantum(circ, addend[i], targets[i], chain[i - 1], chain[i])
        count += 1
        segments.append(circ.gates[mark:])
    # sum from the top down, erasing internal carries as they fall out of use
    for i in range(n - 1, 0, -1):
        if addend[i] is not None:
            circ.cnot(addend[i], targets[i])
        circ.cnot(carries[i - 1], targets[i])
        _mu_reverse(circ, segments[i - 1])
    if addend[0] is not None:
        circ.cnot(addend[0], targets[0])
    _free(circ, cname)
    return count


def build_add_constant(n: int, c: int, sign_control: bool = False) -> Circuit:
    """Standalone constant adder over register 'a'."""
    circ = Circuit()
    if sign_control:
        circ.add_register("ctl", 1, RegisterRole.CONTROL)
    circ.add_register("a", n, RegisterRole.SYSTEM)
    circ.set_param("addend", c % (1 << n))
    circ.cc_add_marker(f"add-constant:{c % (1 << n)}")
    emit_add_constant(
        circ, circ.qubits("a"), c,
        sign_control=circ.qubit("ctl", 0) if sign_control else None,
    )
    return circ


def build_add_register(n: int, carry_out: bool = False,
                       gradient_target: bool = False) -> Circuit:
    """Register adder |a>|b> -> |a>|a+b mod 2^n>.

    ``gradient_target`` models addition into a phase-gradient resource state
    whose top qubit only acquires a phase: the top carry is dropped, saving
    one Toffoli (cost n - 2).  The classical action on the low n - 1 bits is
    what the returned circuit performs.
    """
    if n < 2:
        raise CircuitError("register adder needs n >= 2")
    if carry_out and gradient_target:
        raise CircuitError("carry_out and gradient_target are exclusive")
    circ = Circuit()
    circ.add_register("a", n, RegisterRole.SYSTEM)
    circ.add_register("b", n, RegisterRole.SYSTEM)
    if gradient_target:
        emit_add_register(circ, circ.qubits("a")[: n - 1], circ.qubits("b")[: n - 1])
        return circ
    cout = None
    if carry_out:
        circ.add_register("cout", 1, RegisterRole.OUTPUT)
        cout = circ.qubit("cout", 0)
    emit_add_register(circ, circ.qubits("a"), circ.qubits("b"), carry_out=cout)
    return circ


# ---------------------------------------------------------------------------
# comparators


def comparator_const_toffolis(n: int, rhs: int) -> int:
    """Exact Toffoli count of the constant comparator construction below."""
    rhs = int(rhs)
    if rhs <= 0 or rhs >= 1 << n:
        return 0
    if rhs % 2 == 0:
        return max(n - 2, 0)
    return max(n - 1, 0)


def emit_comparator_const(circ: Circuit, bits: list[int], rhs: int, out: int) -> int:
    """XOR [a < rhs] onto ``out``.

    [a < C] is the complement of the carry out of a + (2^n - C).  For even C
    the low two chain positions are classical, giving n - 2 Toffolis; odd C
    costs n - 1 because the outcome depends on every input bit.
    """
    n = len(bits)
    rhs = int(rhs)
    if rhs <= 0:
        return 0
    if rhs >= 1 << n:
        circ.x(out)
        return 0
    k = ((1 << n) - rhs) % (1 << n)
    kbits = [(k >> i) & 1 for i in range(n)]
    scratch, sname = _scratch(circ, max(n - 1, 1), "cmp")
    mark = len(circ.gates)
    if kbits[0] == 0:
        # c1 = 0; c2 = a1 & k1 is classical
        if n == 2:
            if kbits[1]:
                circ.cnot(bits[1], out)
            circ.x(out)
            _mu_reverse(circ, [])
            _free(circ, sname)
            return 0
        wire = bits[1] if kbits[1] else scratch[0]  # c2 wire (scratch is zero)
        start = 2
    else:
        # c1 = a0
        wire = bits[0]
        start = 1
    for i in range(start, n):
        target = out if i == n - 1 else scratch[i - start + (0 if kbits[0] else 1)]
        _maj_classical(circ, bits[i], kbits[i], wire, target)
        wire = target
    fwd = [g for g in circ.gates[mark:] if out not in g.targets]
    circ.x(out)
    _mu_reverse(circ, fwd)
    _free(circ, sname)
    return comparator_const_toffolis(n, rhs)


def emit_comparator_register(circ: Circuit, a_bits: list[int], b_bits: list[int],
                             out: int) -> int:
    """XOR [a < b] onto ``out``; n Toffolis via the borrow chain."""
    n = len(a_bits)
    if len(b_bits) != n:
        raise CircuitError("comparator operands must have equal widths")
    borrows, bname = _scratch(circ, max(n - 1, 1), "cmp")
    chain = borrows[: n - 1] + [out]
    mark = len(circ.gates)
    circ.toffoli(a_bits[0], b_bits[0], chain[0], polarity=(False, True))
    for i in range(1, n):
        _maj_quantum(circ, a_bits[i], b_bits[i], chain[i - 1], chain[i], x_neg=True)
    fwd = [g for g in circ.gates[mark:] if out not in g.targets]
    _mu_reverse(circ, fwd)
    _free(circ, bname)
    return n


def build_comparator(n: int, rhs: int | None = None) -> Circuit:
    """[a < rhs] into fresh output 'lt'; rhs None compares register 'b'."""
    if n < 2:
        raise CircuitError("comparator needs n >= 2")
    circ = Circuit()
    circ.add_register("a", n, RegisterRole.SYSTEM)
    if rhs is None:
        circ.add_register("b", n, RegisterRole.SYSTEM)
    circ.add_register("lt", 1, RegisterRole.OUTPUT)
    out = circ.qubit("lt", 0)
    if rhs is None:
        emit_comparator_register(circ, circ.qubits("a"), circ.qubits("b"), out)
    else:
        circ.set_param("rhs", int(rhs))
        emit_comparator_const(circ, circ.qubits("a"), rhs, out)
    return circ


# ---------------------------------------------------------------------------
# tree sums


def _wallace_tree(circ: Circuit, bits: list[int], pad_to_uniform: bool) -> list[int]:
    """Sum ``bits`` into a binary counter with half/full adder stages.

    The natural tree costs h - popcount(h) Toffolis; with ``pad_to_uniform``
    each leftover single bit below the top passes through a half-adder stage
    against a zeroed partner, so every group costs exactly h - 1 (the
    standard tree-sum costing assumed by the closed forms).
    """
    h = len(bits)
    if h == 0:
        raise CircuitError("empty group")
    levels: dict[int, list[int]] = {0: list(bits)}
    pads_left = (bin(h).count("1") - 1) if pad_to_uniform else 0
    w = 0
    while w <= max(levels):
        cur = levels.get(w, [])
        while len(cur) >= 3:
            x, y, z = cur.pop(), cur.pop(), cur.pop()
            anc, _ = _scratch(circ, 1, "fa")
            _maj_quantum(circ, x, y, z, anc[0])
            circ.cnot(x, z)
            circ.cnot(y, z)
            cur.append(z)
            levels.setdefault(w + 1, []).append(anc[0])
        if len(cur) == 2:
            x, y = cur.pop(), cur.pop()
            anc, _ = _scratch(circ, 1, "ha")
            circ.toffoli(x, y, anc[0])
            circ.cnot(x, y)
            cur.append(y)
            levels.setdefault(w + 1, []).append(anc[0])
        if (len(cur) == 1 and pads_left > 0
                and any(levels.get(u) for u in range(w + 1, max(levels) + 1))):
            # uniform half-adder stage; the produced carry is provably zero
            zanc, _ = _scratch(circ, 2, "pad")
            circ.toffoli(cur[0], zanc[0], zanc[1])
            pads_left -= 1
        levels[w] = cur
        w += 1
    counter = []
    for u in range(0, max(levels) + 1):
        lv = levels.get(u, [])
        if lv:
            counter.append(lv[0])
        else:
            zero, _ = _scratch(circ, 1, "z")
            counter.append(zero[0])
    return counter


@dataclass
class TreeSumLayout:
    total_register: str
    group_sum_toffolis: int
    addition_toffolis: int
    group_size: int
    n_groups: int


def tree_sum_formula(L: int, group_size: int | None = None,
                     pad_to_uniform: bool = True) -> dict:
    """Closed-form Toffoli counts for emit_sum_of_tree_sums."""
    g = group_size or max(math.ceil(math.log2(L)), 1)
    n_groups = math.ceil(L / g)
    J = L - (n_groups - 1) * g
    if pad_to_uniform:
        group = L - n_groups
    else:
        sizes = [J] + [g] * (n_groups - 1)
        group = sum(h - bin(h).count("1") for h in sizes)
    adds = 0
    running = J
    for _ in range(n_groups - 1):
        running += g
        adds += math.ceil(math.log2(running + 1)) - 1
    return {"group_sum": group, "additions": adds, "total": group + adds,
            "n_groups": n_groups, "group_size": g}


def emit_sum_of_tree_sums(
    circ: Circuit,
    bits: list[int],
    total_bits: list[int] | None = None,
    group_size: int | None = None,
    pad_to_uniform: bool = True,
) -> tuple[list[int], TreeSumLayout]:
    """Sum L input bits into a ceil(log2(L+1))-bit running total.

    The ragged group is summed first; each subsequent group of size
    ceil(log2 L) is tree-summed, added into the total over a window of
    ceil(log2(running_max + 1)) bits, and erased at no Toffoli cost.
    """
    L = len(bits)
    if L < 2:
        raise CircuitError("need at least 2 bits to sum")
    g = group_size or max(math.ceil(math.log2(L)), 1)
    n_groups = math.ceil(L / g)
    J = L - (n_groups - 1) * g
    width = math.ceil(math.log2(L + 1))
    if total_bits is None:
        tname = f"total{sum(1 for r in circ.registers if r.startswith('total'))}"
        circ.add_register(tname, width, RegisterRole.PERSISTENT)
        total_bits = circ.qubits(tname)
    else:
        tname = "<caller>"
        if len(total_bits) < width:
            raise CircuitError("total register too narrow")

    groups = [bits[:J]] + [bits[J + i * g: J + (i + 1) * g]
                           for i in range(n_groups - 1)]
    group_cost = 0
    add_cost = 0
    running_max = 0
    for gi, group in enumerate(groups):
        mark = len(circ.gates)
        counter = _wallace_tree(circ, group, pad_to_uniform)
        tree_gates = circ.gates[mark:]
        group_cost += sum(gate.toffoli_cost() for gate in tree_gates
                          if gate.kind not in ("ALLOC", "FREE"))
        running_max += len(group)
        win = math.ceil(math.log2(running_max + 1))
        if gi == 0:
            for i in range(min(win, len(counter))):
                circ.cnot(counter[i], total_bits[i])
        else:
            add_cost += emit_add_register(circ, list(counter[:win]),
                                          total_bits[:win])
        _mu_reverse(circ, tree_gates)
    layout = TreeSumLayout(tname, group_cost, add_cost, g, n_groups)
    return total_bits, layout


def build_sum_of_tree_sums(L: int, group_size: int | None = None) -> Circuit:
    """Standalone popcount of register 'bits' into a fresh total register."""
    circ = Circuit()
    circ.add_register("bits", L, RegisterRole.SYSTEM)
    total, layout = emit_sum_of_tree_sums(circ, circ.qubits("bits"),
                                          group_size=group_size)
    circ.meta = {"layout": layout, "total_bits": total}
    return circ


# ---------------------------------------------------------------------------
# binary to unary


def build_binary_to_unary(N: int) -> Circuit:
    """In-place one-hot conversion |k>|0..0> for 0 <= k < N.

    The input bits are absorbed into the unary rails; the controlled-swap
    count is exactly N - ceil(log2 N) - 1.  Inputs k >= N are undefined.
    """
    if N < 1:
        raise CircuitError("N >= 1 required")
    circ = Circuit()
    n = math.ceil(math.log2(N)) if N > 1 else 0
    if n:
        circ.add_register("k", n, RegisterRole.SYSTEM)
    circ.add_register("u", max(N - n, 1), RegisterRole.OUTPUT)
    kbits = circ.qubits("k") if n else []
    ancillas = circ.qubits("u")
    cursor = [0]

    def fresh() -> int:
        q = ancillas[cursor[0]]
        cursor[0] += 1
        return q

    def b2u(m: int, in_bits: list[int]) -> list[int]:
        if m == 1:
            q = fresh()
            circ.x(q)
            return [q]
        nm = math.ceil(math.log2(m))
        half = 1 << (nm - 1)
        low = b2u(half, in_bits[: nm - 1])
        top = in_bits[nm - 1]
        high = [fresh() for _ in range(m - half - 1)]
        for r, hq in enumerate(high, start=1):
            circ.cswap(top, low[r], hq)
        for hq in high:
            circ.cnot(hq, top)
        circ.cnot(top, low[0])
        return low + [top] + high

    rails = b2u(N, kbits)
    circ.meta = {"rails": rails}
    return circ


# ---------------------------------------------------------------------------
# multipliers


def build_product_int_int(da: int, db: int) -> Circuit:
    """|k>|l>|0> -> |k>|l>|k*l> exactly; 2*da*db - da Toffolis."""
    circ = Circuit()
    circ.add_register("a", da, RegisterRole.SYSTEM)
    circ.add_register("b", db, RegisterRole.SYSTEM)
    circ.add_register("out", da + db, RegisterRole.OUTPUT)
    a, b, out = circ.qubits("a"), circ.qubits("b"), circ.qubits("out")
    for i in range(da):
        circ.toffoli(b[0], a[i], out[i])
    for ell in range(1, db):
        buf, bname = _scratch(circ, da, "mulbuf")
        mark = len(circ.gates)
        for i in range(da):
            circ.toffoli(b[ell], a[i], buf[i])
        copy_gates = circ.gates[mark:]
        emit_add_register(circ, list(buf), out[ell: ell + da],
                          carry_out=out[ell + da])
        _mu_reverse(circ, copy_gates)
        _free(circ, bname)
    return circ


def int_real_bits(db: int, eps: float) -> int:
    return db + math.ceil(math.log2(db / eps))


def build_product_int_real(db: int, eps: float) -> Circuit:
    """db-bit integer times a real in [0, 1) carried on da - 1 fraction bits.

    da = db + ceil(log2(db/eps)); Toffoli cost da*(2db - 1) - db^2 exactly;
    |out * 2^(db-da) - kappa * lambda| < eps.
    """
    if not 0 < eps < 1:
        raise CircuitError("eps must be in (0, 1)")
    da = int_real_bits(db, eps)
    circ = Circuit()
    # qubit i of 'a' holds fraction bit kappa_{da-1-i} (kappa_1 most significant)
    circ.add_register("a", da - 1, RegisterRole.SYSTEM)
    circ.add_register("b", db, RegisterRole.SYSTEM)
    circ.add_register("out", da, RegisterRole.OUTPUT)
    a, b, out = circ.qubits("a"), circ.qubits("b"), circ.qubits("out")

    def kq(m: int) -> int:
        return a[da - 1 - m]

    w0 = da - db
    for m in range(1, w0 + 1):
        circ.toffoli(b[0], kq(m), out[w0 - m])
    for j in range(1, db):
        width = w0 + j
        buf, bname = _scratch(circ, width, "mulbuf")
        mark = len(circ.gates)
        for m in range(1, width + 1):
            circ.toffoli(b[j], kq(m), buf[width - m])
        copy_gates = circ.gates[mark:]
        emit_add_register(circ, list(buf), out[:width], carry_out=out[width])
        _mu_reverse(circ, copy_gates)
        _free(circ, bname)
    circ.meta = {"da": da, "fraction_bits": da - db}
    return circ


def real_real_bits(eps: float) -> int:
    x = math.log2(1.0 / eps)
    return math.ceil(1 + x + math.log2(1 + x))


def build_product_real_real(eps: float | None = None, d: int | None = None) -> Circuit:
    """Truncated product of two d-bit reals in [0, 1); d^2 - d - 1 Toffolis.

    Keeps the partial products with n + m <= d, giving truncation error below
    (d+1) 2^-d; d from real_real_bits(eps) meets an eps target.
    """
    if d is None:
        if eps is None or not 0 < eps < 1:
            raise CircuitError("eps must be in (0, 1)")
        d = real_real_bits(eps)
    if d < 3:
        raise CircuitError("d >= 3 required")
    circ = Circuit()
    # qubit i of 'a' holds kappa_{d-i}; out bit i has weight 2^-(d-i)
    circ.add_register("a", d, RegisterRole.SYSTEM)
    circ.add_register("b", d, RegisterRole.SYSTEM)
    circ.add_register("out", d, RegisterRole.OUTPUT)
    a, b, out = circ.qubits("a"), circ.qubits("b"), circ.qubits("out")

    def ka(m):
        return a[d - m]

    def lb(m):
        return b[d - m]

    def ob(w):
        return out[d - w]

    circ.toffoli(lb(d - 1), ka(1), ob(d))
    for ell in range(d - 2, 0, -1):
        width = d - ell
        buf, bname = _scratch(circ, width, "mulbuf")
        mark = len(circ.gates)
        for m in range(1, width + 1):
            circ.toffoli(lb(ell), ka(m), buf[width - m])
        copy_gates = circ.gates[mark:]
        window = [ob(w) for w in range(d, ell, -1)]
        emit_add_register(circ, list(buf), window, carry_out=ob(ell))
        _mu_reverse(circ, copy_gates)
        _free(circ, bname)
    circ.meta = {"d": d}
    return circ


def square_worst_error(d: int) -> float:
    """Exact worst-case truncation error of build_square over d-bit inputs
    (attained at the all-ones input)."""
    diag_cut = (d - 1) // 2
    err = 0.0
    for n in range(1, d + 1):
        for m in range(1, n):
            if n + m > d:
                err += 2.0 ** -(n + m - 1)
        if n > diag_cut:
            err += 4.0**-n
    return err


def square_bits(eps: float) -> int:
    """Smallest d with square_worst_error(d) < eps.

    (The asymptotic closed form log(1/eps) + log(11/3 + log(1/eps)) drops a
    factor of two in the off-diagonal tail and can come out one bit short, so
    the width is chosen from the exact bound instead.)
    """
    d = 4
    while square_worst_error(d) >= eps:
        d += 1
    return d


def square_toffoli_formula(d: int) -> int:
    return (d * d - 5) // 2 if d % 2 else d * d // 2 - 4


def build_square(eps: float | None = None, d: int | None = None) -> Circuit:
    """|k>|0> -> |k>|approx k^2>; cost (d^2-5)/2 odd, d^2/2 - 4 even.

    Row n keeps the doubled off-diagonal products kappa_n kappa_m with
    n + m <= d at weights 2^-(n+m-1), plus the diagonal kappa_n at 2^-2n for
    n <= floor((d-1)/2); output has d - 1 fraction bits.
    """
    if d is None:
        if eps is None or not 0 < eps < 1:
            raise CircuitError("eps must be in (0, 1)")
        d = square_bits(eps)
    if d < 4:
        raise CircuitError("d >= 4 required")
    circ = Circuit()
    circ.add_register("a", d, RegisterRole.SYSTEM)
    out_w = d - 1
    circ.add_register("out", out_w, RegisterRole.OUTPUT)
    a, out = circ.qubits("a"), circ.qubits("out")

    def ka(m):
        return a[d - m]

    def ob(w):
        return out[out_w - w]

    diag_cut = (d - 1) // 2
    for n in range(d - 1, 0, -1):
        p = min(d - n, n - 1)
        has_diag = n <= diag_cut
        if n == d - 1:
            circ.toffoli(ka(n), ka(1), ob(d - 1))
            continue
        if p <= 0 and not has_diag:
            continue
        if p <= 0 and has_diag:  # n == 1
            emit_add_register(circ, [ka(1)], [ob(2)], carry_out=ob(1))
            continue
        buf, bname = _scratch(circ, p, "sqbuf")
        mark = len(circ.gates)
        for m in range(1, p + 1):
            circ.toffoli(ka(n), ka(m), buf[m - 1])
        copy_gates = circ.gates[mark:]
        lo = 2 * n if has_diag else n + p - 1
        # weights of products: n + m - 1 for m = 1..p -> w in [n, n+p-1]
        addend: list[int | None] = []
        for w in range(lo, n - 1, -1):
            if has_diag and w == 2 * n:
                addend.append(ka(n))
            elif n <= w <= n + p - 1:
                addend.append(buf[w - n])
            else:
                addend.append(None)
        window = [ob(w) for w in range(lo, n - 1, -1)]
        carry = ob(n - 1) if n - 1 >= 1 else None
        emit_add_register(circ, addend, window, carry_out=carry)
        _mu_reverse(circ, copy_gates)
        _free(circ, bname)
    circ.meta = {"d": d, "fraction_bits": out_w}
    return circ


def build_product(mode: str, **kw) -> Circuit:
    if mode == "int-int":
        return build_product_int_int(kw["da"], kw["db"])
    if mode == "int-real":
        return build_product_int_real(kw["db"], kw["eps"])
    if mode == "real-real":
        return build_product_real_real(kw.get("eps"), kw.get("d"))
    if mode == "square":
        return build_square(kw.get("eps"), kw.get("d"))
    raise CircuitError(f"unknown product mode {mode!r}")


# ---------------------------------------------------------------------------
# signed-power decomposition and phase-gradient rotations


def signed_power_decomposition(value: int, n_bits: int) -> list[tuple[int, int]]:
    """Non-adjacent form of ``value``: at most ceil((n+1)/2) signed powers.

    Subtraction is chosen whenever the residual's run of ones has length 2 or
    more (the standard NAF rule).
    """
    m = int(value)
    terms: list[tuple[int, int]] = []
    e = 0
    while m:
        if m & 1:
            if m & 3 == 3:
                terms.append((-1, e))
                m += 1
            else:
                terms.append((+1, e))
                m -= 1
        m >>= 1
        e += 1
    return terms


def gradient_bits_for(b_pha: int, n_digits: int) -> int:
    """Padding rule (n+2)*pi / 2^b_grad <= 2^-b_pha."""
    return b_pha + math.ceil(math.log2((n_digits + 2) * math.pi))


def gradient_phase_multiply_cost(b_pha: int, gamma: float) -> dict:
    """Toffoli cost of phasing by gamma*k through signed-power additions
    into the phase-gradient state; returns the decomposition for audit."""
    if not 0 < gamma <= 1.0:
        raise CircuitError("gamma must be in (0, 1]")
    n_digits = b_pha
    m = max(round(gamma * (1 << n_digits)), 1)
    terms = signed_power_decomposition(m, n_digits)
    b_grad = gradient_bits_for(b_pha, n_digits)
    return {
        "toffoli_count": len(terms) * (b_grad - 2),
        "n_additions": len(terms),
        "b_grad": b_grad,
        "decomposition": [(s, e - n_digits) for s, e in terms],
        "represented_value": m / (1 << n_digits),
    }


# ---------------------------------------------------------------------------
# equal superposition preparation


def equal_superposition_success(N: int, s: int = 7) -> tuple[float, float]:
    """(success probability, rotation angle) of the flagged preparation."""
    k = math.ceil(math.log2(N))
    if N == 1 << k:
        return 1.0, 0.0
    ideal = math.asin(min(1.0, 0.5 * math.sqrt((1 << k) / N)))
    theta = 2 * math.pi * round(ideal * (1 << s) / (2 * math.pi)) / (1 << s)
    st2 = math.sin(theta) ** 2
    braced = (1 - 4 * N * st2 / (1 << k) + 2 * st2) ** 2 + 4 * st2 * (1 - st2)
    return (N / (1 << k)) * braced, theta


def equal_superposition_toffolis(N: int, s: int = 7) -> int:
    """3 inequality tests + 2 classical-angle rotations + a zero reflection:
    4k + 2s - 13 generically (4k + 1 at s = 7), zero for powers of two."""
    k = math.ceil(math.log2(N))
    if N < 2 or N == 1 << k:
        return 0
    return 3 * comparator_const_toffolis(k, N) + 2 * (s - 3) + (k - 1)


def build_equal_superposition(N: int, s: int = 7) -> tuple[Circuit, dict]:
    """Non-Clifford skeleton of the flagged equal-superposition preparation.

    Hadamards are Clifford and not represented; the circuit carries the three
    inequality tests, the two classical-angle gradient rotations and the zero
    reflection, so its ledger equals equal_superposition_toffolis(N, s).  The
    report holds the flagged success probability, computed in closed form and
    cross-checked by dense simulation in the test suite.
    """
    if N < 2:
        raise CircuitError("N >= 2 required")
    k = math.ceil(math.log2(N))
    prob, theta = equal_superposition_success(N, s)
    circ = Circuit()
    report = {
        "success_probability": prob,
        "success_amplitude": math.sqrt(prob),
        "rotation_angle": theta,
        "toffoli_count": equal_superposition_toffolis(N, s),
        "power_of_two": N == 1 << k,
    }
    circ.add_register("j", k, RegisterRole.SYSTEM)
    if N == 1 << k:
        return circ, report
    circ.add_register("rot", s - 1, RegisterRole.PERSISTENT)
    circ.add_register("flag", 1, RegisterRole.OUTPUT)
    flag = circ.qubit("flag", 0)
    jbits = circ.qubits("j")
    angle_word = max(1, round(theta * (1 << s) / (2 * math.pi))) % (1 << (s - 1))
    emit_comparator_const(circ, jbits, N, flag)
    emit_add_constant(circ, circ.qubits("rot"), angle_word)
    emit_add_constant(circ, circ.qubits("rot"), -angle_word % (1 << (s - 1)))
    emit_comparator_const(circ, jbits, N, flag)
    anc, aname = _scratch(circ, 1, "refl")
    circ.mcx(jbits, anc[0], polarity=(False,) * k)
    circ.mcx(jbits, anc[0], polarity=(False,) * k, mu=True)
    _free(circ, aname)
    emit_comparator_const(circ, jbits, N, flag)
    return circ, report
