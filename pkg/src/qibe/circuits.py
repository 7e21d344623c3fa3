"""Reversible-circuit IR and the arithmetic circuit builders.

Gates are limited to the X family (X, CX, CCX, MCX) with positive-polarity
controls; builders that need a negative control conjugate with explicit X
gates. Circuits carry a register table (named, contiguous, non-overlapping
index ranges) which is the single source of truth for layout; qubit 0 of a
register is its least significant bit.

Every ancilla register enters and leaves in |0>. Builders whose value
register can overflow document the extra top bit as part of the register.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .errors import InvalidInputError

__all__ = [
    "Gate",
    "Register",
    "Circuit",
    "X_FAMILY",
    "LOWERED_KINDS",
    "build_adder",
    "build_comparator",
    "build_mod_adder",
    "build_ctrl_copy_const",
    "build_const_xor",
    "build_fanout",
    "build_mcx",
    "build_abs",
    "build_encrypt_bit",
    "build_decrypt_bit",
    "build_encrypt_circuit",
    "build_decrypt_circuit",
    "invert",
]

X_FAMILY = frozenset({"X", "CX", "CCX", "MCX"})
LOWERED_KINDS = frozenset({"H", "S", "T", "TDG", "CNOT", "X"})


class Gate(NamedTuple):
    """One gate: ``kind``, target qubit, and control qubits (may be empty)."""

    kind: str
    target: int
    controls: tuple[int, ...] = ()


_CONTROL_ARITY = {"X": 0, "CX": 1, "CCX": 2, "H": 0, "S": 0, "T": 0, "TDG": 0, "CNOT": 1}


def _check_gate(g: Gate, width: int) -> None:
    arity = _CONTROL_ARITY.get(g.kind)
    if arity is None:
        if g.kind != "MCX":
            raise InvalidInputError(f"unknown gate kind {g.kind!r}")
        if len(g.controls) < 3:
            raise InvalidInputError("MCX needs at least 3 controls (use CX/CCX below that)")
    elif len(g.controls) != arity:
        raise InvalidInputError(f"{g.kind} takes {arity} controls, got {len(g.controls)}")
    operands = (g.target, *g.controls)
    if len(set(operands)) != len(operands):
        raise InvalidInputError(f"gate operands must be distinct: {g}")
    if any(i < 0 or i >= width for i in operands):
        raise InvalidInputError(f"gate {g} out of range for width {width}")


@dataclass(frozen=True)
class Register:
    name: str
    start: int
    size: int
    role: str = "work"  # input | output | ancilla | constant | work

    @property
    def stop(self) -> int:
        return self.start + self.size

    def bits(self) -> range:
        return range(self.start, self.stop)


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...]
    registers: tuple[Register, ...] = ()

    def __post_init__(self) -> None:
        for g in self.gates:
            _check_gate(g, self.width)
        claimed: set[int] = set()
        for r in self.registers:
            span = set(r.bits())
            if not span or r.start < 0 or r.stop > self.width:
                raise InvalidInputError(f"register {r.name} out of range")
            if span & claimed:
                raise InvalidInputError(f"register {r.name} overlaps another register")
            claimed |= span

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise InvalidInputError(f"no register named {name!r}")

    def registers_with_role(self, role: str) -> tuple[Register, ...]:
        return tuple(r for r in self.registers if r.role == role)

    @cached_property
    def _control_masks(self) -> tuple[tuple[int, int], ...]:
        """(controls-mask, target-flip) per gate; valid for X-family only."""
        pairs = []
        for g in self.gates:
            if g.kind not in X_FAMILY:
                raise InvalidInputError(
                    f"gate kind {g.kind!r} has no basis-permutation semantics"
                )
            mask = 0
            for c in g.controls:
                mask |= 1 << c
            pairs.append((mask, 1 << g.target))
        return tuple(pairs)


def invert(circuit: Circuit) -> Circuit:
    """Reverse the gate order; valid because X-family gates are self-inverse."""
    for g in circuit.gates:
        if g.kind not in X_FAMILY:
            raise InvalidInputError(f"cannot invert lowered gate {g.kind!r}")
    return Circuit(circuit.width, tuple(reversed(circuit.gates)), circuit.registers)


def _bit_positions(value: int, width: int) -> list[int]:
    return [i for i in range(width) if (value >> i) & 1]


# ---------------------------------------------------------------------------
# gate-list fragments, parameterized by explicit qubit indices


def _maj(c: int, b: int, a: int) -> list[Gate]:
    return [Gate("CX", b, (a,)), Gate("CX", c, (a,)), Gate("CCX", a, (c, b))]


def _uma(c: int, b: int, a: int) -> list[Gate]:
    return [Gate("CCX", a, (c, b)), Gate("CX", c, (a,)), Gate("CX", b, (c,))]


def _adder_gates(a: Sequence[int], b: Sequence[int], cin: int) -> list[Gate]:
    """Ripple-carry |a, b> -> |a, (a + b) mod 2^(l+1)> with b one bit wider.

    MAJ/UMA construction: 2l Toffoli, 4l+1 CNOT, one ancilla (cin), which
    enters and leaves |0>. Works for any b value, so the reversed list is a
    subtractor mod 2^(l+1).
    """
    l = len(a)
    if len(b) != l + 1:
        raise InvalidInputError("sum register must be one bit wider than the operand")
    g = _maj(cin, b[0], a[0])
    for i in range(1, l):
        g += _maj(a[i - 1], b[i], a[i])
    g.append(Gate("CX", b[l], (a[l - 1],)))
    for i in range(l - 1, 0, -1):
        g += _uma(a[i - 1], b[i], a[i])
    g += _uma(cin, b[0], a[0])
    return g


def _mcx_gates(controls: Sequence[int], target: int, anc: Sequence[int]) -> list[Gate]:
    """AND-chain expansion of an l-controlled NOT into max(1, 2l-3) Toffolis."""
    l = len(controls)
    if l == 1:
        return [Gate("CX", target, (controls[0],))]
    if l == 2:
        return [Gate("CCX", target, tuple(controls))]
    if len(anc) < l - 2:
        raise InvalidInputError(f"{l}-controlled NOT needs {l - 2} ancillas")
    up = [Gate("CCX", anc[0], (controls[0], controls[1]))]
    for i in range(2, l - 1):
        up.append(Gate("CCX", anc[i - 1], (anc[i - 2], controls[i])))
    mid = Gate("CCX", target, (anc[l - 3], controls[l - 1]))
    return up + [mid] + up[::-1]


def _const_xor_gates(value: int, target: Sequence[int]) -> list[Gate]:
    return [Gate("X", target[i]) for i in _bit_positions(value, len(target))]


def _ctrl_copy_gates(value: int, control: int, target: Sequence[int]) -> list[Gate]:
    return [Gate("CX", target[i], (control,)) for i in _bit_positions(value, len(target))]


def _mod_adder_gates(
    q: int,
    a: Sequence[int],
    b: Sequence[int],
    top: int,
    flag: int,
    qconst: Sequence[int],
    cin: int,
) -> list[Gate]:
    """|a, b> -> |a, (a + b) mod q> for 0 <= a, b < q; inputs >= q unspecified.

    Add / subtract-q / conditional re-add / uncompute-flag structure. The
    comparison that clears the flag exploits (a+b) mod q < a iff a reduction
    happened (b < q strictly).
    """
    L = len(a)
    if len(b) != L or len(qconst) != L:
        raise InvalidInputError("mod-adder registers must all be L bits wide")
    ext = list(b) + [top]
    add_a = _adder_gates(a, ext, cin)
    add_q = _adder_gates(qconst, ext, cin)
    load_q = _const_xor_gates(q, qconst)
    # qconst := q * flag, computed as "clear q unless flag" under X-conjugation
    gate_q_by_flag = (
        [Gate("X", flag)] + _ctrl_copy_gates(q, flag, qconst) + [Gate("X", flag)]
    )
    g: list[Gate] = []
    g += add_a
    g += load_q
    g += add_q[::-1]
    g.append(Gate("CX", flag, (top,)))
    g += gate_q_by_flag
    g += add_q
    g += gate_q_by_flag
    g += load_q
    g += add_a[::-1]
    g.append(Gate("CX", flag, (top,)))
    g += add_a
    g.append(Gate("X", flag))
    return g


def _abs_gates(low: Sequence[int], sign: int, anc: Sequence[int]) -> list[Gate]:
    """Two's-complement absolute value: conditioned on the sign bit, negate
    the low bits and increment mod 2^L; the sign bit itself is preserved."""
    L = len(low)
    g = [Gate("CX", low[i], (sign,)) for i in range(L)]
    for j in range(L - 1, 0, -1):
        g += _mcx_gates([sign] + list(low[:j]), low[j], anc)
    g.append(Gate("CX", low[0], (sign,)))
    return g


def _encrypt_bit_gates(
    x_i: int,
    q: int,
    msg: int,
    work: Sequence[int],
    op: Sequence[int],
    top: int,
    flag: int,
    qconst: Sequence[int],
    cin: int,
    mcx_anc: Sequence[int],
) -> list[Gate]:
    load_x = _const_xor_gates(x_i, op)
    marker = (x_i + q // 2) % q
    g: list[Gate] = []
    # step 1: work := floor(q/2) * msg
    g += _ctrl_copy_gates(q // 2, msg, work)
    # step 2: work := (work + x_i) mod q, with x_i loaded as a constant
    g += load_x
    g += _mod_adder_gates(q, op, work, top, flag, qconst, cin)
    g += load_x
    # step 3: disentangle msg. 3.1 XOR the msg=1 pattern; 3.2 flip msg iff the
    # work register is all-zero (X-conjugated multi-control); 3.3 undo 3.1.
    mark = _const_xor_gates(marker, work)
    conj = [Gate("X", w) for w in work]
    g += mark
    g += conj
    g += _mcx_gates(list(work), msg, mcx_anc)
    g += conj
    g += mark
    return g


def _decrypt_bit_gates(
    y_i: int,
    q: int,
    work: Sequence[int],
    out: int,
    op: Sequence[int],
    top: int,
    cmp_top: int,
    flag: int,
    qconst: Sequence[int],
    cin: int,
    copy: Sequence[int],
    mcx_anc: Sequence[int],
) -> list[Gate]:
    q2, q4 = q // 2, q // 4
    ext = list(work) + [top]
    load_y = _const_xor_gates(y_i, op)
    load_q2 = _const_xor_gates(q2, op)
    load_q4 = _const_xor_gates(q4, op)
    mod_add_y = _mod_adder_gates(q, op, work, top, flag, qconst, cin)
    add_q2 = _adder_gates(op, ext, cin)
    abs_fwd = _abs_gates(work, top, mcx_anc)
    g: list[Gate] = []
    # 1. work := (work - y_i) mod q
    g += load_y
    g += mod_add_y[::-1]
    g += load_y
    # 2. (work, top) := work - floor(q/2), two's complement over L+1 bits
    g += load_q2
    g += add_q2[::-1]
    g += load_q2
    # 3. absolute value (sign bit = top)
    g += abs_fwd
    # 4. out ^= [ |.| < floor(q/4) ], comparing the low L magnitude bits
    cmp_ext = list(work) + [cmp_top]
    sub_q4 = _adder_gates(op, cmp_ext, cin)[::-1]
    g += load_q4
    g += sub_q4
    g.append(Gate("CX", out, (cmp_top,)))
    g += sub_q4[::-1]
    g += load_q4
    # 5..7: exact inverses of 3..1, restoring work := c0_i
    g += abs_fwd[::-1]
    g += load_q2
    g += add_q2
    g += load_q2
    g += load_y
    g += mod_add_y
    g += load_y
    # 8. copy := floor(q/2) * out
    g += _ctrl_copy_gates(q2, out, copy)
    # 9. work := (work - copy) mod q, leaving the constant x_i behind
    g += _mod_adder_gates(q, copy, work, top, flag, qconst, cin)[::-1]
    # 10. clear copy (inverse of 8)
    g += _ctrl_copy_gates(q2, out, copy)
    return g


# ---------------------------------------------------------------------------
# public builders


class _Alloc:
    """Sequential qubit allocator used while assembling a circuit."""

    def __init__(self) -> None:
        self.width = 0
        self.registers: list[Register] = []

    def reg(self, name: str, size: int, role: str) -> list[int]:
        if size == 0:
            return []
        r = Register(name, self.width, size, role)
        self.registers.append(r)
        self.width += size
        return list(r.bits())

    def circuit(self, gates: Iterable[Gate]) -> Circuit:
        return Circuit(self.width, tuple(gates), tuple(self.registers))


def _check_bit_width(l: int) -> None:
    if l < 1:
        raise InvalidInputError(f"bit width must be >= 1, got {l}")


def _check_modulus(q: int, L: int) -> None:
    if q < 3:
        raise InvalidInputError(f"modulus must be >= 3, got {q}")
    if not (1 << (L - 1)) <= q < (1 << L):
        raise InvalidInputError(f"L={L} is not the bit length of q={q}")


def _check_constant(d: int, l: int) -> None:
    if not 0 <= d < (1 << l):
        raise InvalidInputError(f"constant {d} does not fit in {l} bits")


def build_adder(l: int) -> Circuit:
    """|a, b> -> |a, a+b> with the carry in the top bit of the l+1 bit b.

    The reversed circuit subtracts: b becomes (b - a) mod 2^(l+1), so the
    top bit reads 1 exactly when a > b.
    """
    _check_bit_width(l)
    al = _Alloc()
    a = al.reg("a", l, "input")
    b = al.reg("b", l + 1, "output")
    cin = al.reg("cin", 1, "ancilla")[0]
    return al.circuit(_adder_gates(a, b, cin))


def build_comparator(l: int) -> Circuit:
    """flag ^= [a < b]; both operand registers are restored."""
    _check_bit_width(l)
    al = _Alloc()
    a = al.reg("a", l, "input")
    b = al.reg("b", l, "input")
    flag = al.reg("flag", 1, "output")[0]
    top = al.reg("top", 1, "ancilla")[0]
    cin = al.reg("cin", 1, "ancilla")[0]
    sub_b = _adder_gates(b, a + [top], cin)[::-1]
    gates = sub_b + [Gate("CX", flag, (top,))] + sub_b[::-1]
    return al.circuit(gates)


def build_mod_adder(q: int, L: int) -> Circuit:
    """|a, b> -> |a, (a+b) mod q> for 0 <= a, b < q; ancillas restored."""
    _check_modulus(q, L)
    al = _Alloc()
    a = al.reg("a", L, "input")
    b = al.reg("b", L, "output")
    top = al.reg("top", 1, "ancilla")[0]
    flag = al.reg("flag", 1, "ancilla")[0]
    qconst = al.reg("qconst", L, "ancilla")
    cin = al.reg("cin", 1, "ancilla")[0]
    return al.circuit(_mod_adder_gates(q, a, b, top, flag, qconst, cin))


def build_ctrl_copy_const(d: int, l: int) -> Circuit:
    """(k, 0) -> (k, d*k) for a control bit k: one CX per set bit of d."""
    _check_bit_width(l)
    _check_constant(d, l)
    al = _Alloc()
    control = al.reg("control", 1, "input")[0]
    target = al.reg("target", l, "output")
    return al.circuit(_ctrl_copy_gates(d, control, target))


def build_const_xor(d: int, l: int) -> Circuit:
    """target ^= d (an X on each set bit of d); self-inverse."""
    _check_bit_width(l)
    _check_constant(d, l)
    al = _Alloc()
    target = al.reg("target", l, "output")
    return al.circuit(_const_xor_gates(d, target))


def build_fanout(l: int) -> Circuit:
    """(k, 0) -> (k, k) bitwise, via exactly l CX gates."""
    _check_bit_width(l)
    al = _Alloc()
    src = al.reg("src", l, "input")
    dst = al.reg("dst", l, "output")
    return al.circuit([Gate("CX", dst[i], (src[i],)) for i in range(l)])


def build_mcx(l: int) -> Circuit:
    """l-controlled NOT decomposed into max(1, 2l-3) Toffoli gates."""
    if l < 2:
        raise InvalidInputError(f"need at least 2 controls, got {l}")
    al = _Alloc()
    controls = al.reg("controls", l, "input")
    target = al.reg("target", 1, "output")[0]
    anc = al.reg("anc", max(0, l - 2), "ancilla")
    return al.circuit(_mcx_gates(controls, target, anc))


def build_abs(L: int) -> Circuit:
    """Absolute value of an (L+1)-bit two's-complement register.

    The top bit is the sign and is preserved; for negative inputs the low L
    bits end up holding the magnitude, so the register value is 2^L + |v|.
    """
    _check_bit_width(L)
    al = _Alloc()
    value = al.reg("value", L + 1, "output")
    anc = al.reg("anc", max(0, L - 2), "ancilla")
    return al.circuit(_abs_gates(value[:L], value[L], anc))


def build_encrypt_bit(x_i: int, q: int) -> Circuit:
    """|m_i>|0> -> |0>|(x_i + floor(q/2) m_i) mod q> on the work register."""
    L = q.bit_length()
    _check_modulus(q, L)
    if not 0 <= x_i < q:
        raise InvalidInputError(f"constant x_i={x_i} must be in [0, {q})")
    al = _Alloc()
    msg = al.reg("msg", 1, "input")[0]
    work = al.reg("work", L, "output")
    op = al.reg("op", L, "constant")
    top = al.reg("top", 1, "ancilla")[0]
    flag = al.reg("flag", 1, "ancilla")[0]
    qconst = al.reg("qconst", L, "ancilla")
    cin = al.reg("cin", 1, "ancilla")[0]
    mcx_anc = al.reg("mcx_anc", max(0, L - 2), "ancilla")
    gates = _encrypt_bit_gates(x_i, q, msg, work, op, top, flag, qconst, cin, mcx_anc)
    return al.circuit(gates)


def build_decrypt_bit(y_i: int, q: int) -> Circuit:
    """Decode one ciphertext register: out ^= plaintext bit, work -> x_i.

    Runs the ten-step decode pipeline: subtract y_i mod q, recentre by
    floor(q/2), absolute value, threshold against floor(q/4) into ``out``,
    then the exact inverses plus a controlled-copy/mod-subtract pair that
    strips the message contribution from the work register. Afterwards all
    ancillas are |0> and work holds the branch-independent value x_i.
    """
    L = q.bit_length()
    _check_modulus(q, L)
    if not 0 <= y_i < q:
        raise InvalidInputError(f"constant y_i={y_i} must be in [0, {q})")
    al = _Alloc()
    work = al.reg("work", L, "input")
    out = al.reg("out", 1, "output")[0]
    op = al.reg("op", L, "constant")
    top = al.reg("top", 1, "ancilla")[0]
    cmp_top = al.reg("cmp_top", 1, "ancilla")[0]
    flag = al.reg("flag", 1, "ancilla")[0]
    qconst = al.reg("qconst", L, "ancilla")
    cin = al.reg("cin", 1, "ancilla")[0]
    copy = al.reg("copy", L, "ancilla")
    mcx_anc = al.reg("mcx_anc", max(0, L - 2), "ancilla")
    gates = _decrypt_bit_gates(
        y_i, q, work, out, op, top, cmp_top, flag, qconst, cin, copy, mcx_anc
    )
    return al.circuit(gates)


def _anc_block(al: _Alloc, i: int, sizes: dict[str, int]) -> dict[str, list[int]]:
    block = al.reg(f"anc{i}", sum(sizes.values()), "ancilla")
    out: dict[str, list[int]] = {}
    pos = 0
    for name, size in sizes.items():
        out[name] = block[pos : pos + size]
        pos += size
    return out


def build_encrypt_circuit(x: Sequence[int], q: int) -> Circuit:
    """n-qubit encryption circuit: n disjoint copies of the one-bit circuit.

    Layout: msg block [0, n), work block [n, n + n L), then one ancilla
    block per message bit. Keeping the copies disjoint makes every counted
    resource exactly linear in n.
    """
    n = len(x)
    if n < 1:
        raise InvalidInputError("need at least one message bit")
    L = q.bit_length()
    al = _Alloc()
    msg = al.reg("msg", n, "input")
    work = al.reg("work", n * L, "output")
    gates: list[Gate] = []
    for i, x_i in enumerate(x):
        if not 0 <= x_i < q:
            raise InvalidInputError(f"constant x[{i}]={x_i} must be in [0, {q})")
        a = _anc_block(al, i, {"op": L, "top": 1, "flag": 1, "qconst": L, "cin": 1,
                               "mcx": max(0, L - 2)})
        gates += _encrypt_bit_gates(
            int(x_i), q, msg[i], work[i * L : (i + 1) * L],
            a["op"], a["top"][0], a["flag"][0], a["qconst"], a["cin"][0], a["mcx"],
        )
    return al.circuit(gates)


def build_decrypt_circuit(y: Sequence[int], q: int) -> Circuit:
    """n-register decryption circuit, one disjoint copy per ciphertext word.

    Layout: work block [0, n L), out block [n L, n L + n), then one ancilla
    block per word. After application each work word holds the constant
    x_i of its sub-circuit (not |0>), which is branch-independent exactly
    when every branch decoded consistently.
    """
    n = len(y)
    if n < 1:
        raise InvalidInputError("need at least one ciphertext register")
    L = q.bit_length()
    al = _Alloc()
    work = al.reg("work", n * L, "input")
    out = al.reg("out", n, "output")
    gates: list[Gate] = []
    for i, y_i in enumerate(y):
        if not 0 <= y_i < q:
            raise InvalidInputError(f"constant y[{i}]={y_i} must be in [0, {q})")
        a = _anc_block(al, i, {"op": L, "top": 1, "cmp_top": 1, "flag": 1,
                               "qconst": L, "cin": 1, "copy": L, "mcx": max(0, L - 2)})
        gates += _decrypt_bit_gates(
            int(y_i), q, work[i * L : (i + 1) * L], out[i],
            a["op"], a["top"][0], a["cmp_top"][0], a["flag"][0], a["qconst"],
            a["cin"][0], a["copy"], a["mcx"],
        )
    return al.circuit(gates)
