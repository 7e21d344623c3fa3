"""Exact sparse simulation of X-family reversible circuits.

A state is a finite map from basis keys to complex amplitudes. X-family
gates permute basis states and never touch amplitudes, so branch count and
norm are invariant under ``apply`` and there is no numerical drift: the
only tolerances are on user-supplied inputs.

Basis keys are integers; bit k of the key is qubit k (little-endian within
registers, per the circuit register table). The serialized "bits" string
writes qubit k at character position k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .circuits import Circuit, Register
from .errors import EntangledRegisterError, InvalidInputError

__all__ = [
    "SparseState",
    "from_basis",
    "from_superposition",
    "apply",
    "is_register_zero",
    "project_register",
    "fidelity",
    "extend_state",
    "evaluate_basis",
    "state_to_dict",
    "state_from_dict",
]

_NORM_TOL = 1e-9
_INPUT_NORM_TOL = 1e-6


def bits_to_int(bits: str) -> int:
    """Parse a bits string (character k = qubit k)."""
    value = 0
    for k, ch in enumerate(bits):
        if ch == "1":
            value |= 1 << k
        elif ch != "0":
            raise InvalidInputError(f"bits string may only contain 0/1, got {bits!r}")
    return value


def int_to_bits(key: int, width: int) -> str:
    return "".join("1" if (key >> k) & 1 else "0" for k in range(width))


@dataclass(frozen=True)
class SparseState:
    width: int
    branches: dict[int, complex]

    def __post_init__(self) -> None:
        if self.width < 1:
            raise InvalidInputError("state width must be >= 1")
        limit = 1 << self.width
        norm = 0.0
        for key, amp in self.branches.items():
            if not 0 <= key < limit:
                raise InvalidInputError(f"basis key {key} does not fit in {self.width} qubits")
            norm += abs(amp) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise InvalidInputError(f"state norm is {norm}, not 1")
        if any(amp == 0 for amp in self.branches.values()):
            raise InvalidInputError("zero-amplitude branches are not stored")

    def branch_count(self) -> int:
        return len(self.branches)


def from_basis(width: int, value: int) -> SparseState:
    """Single-branch state |value>."""
    if value < 0 or value >= 1 << width:
        raise InvalidInputError(f"value {value} does not fit in {width} qubits")
    return SparseState(width, {value: 1.0 + 0.0j})


def from_superposition(width: int, entries: Iterable[tuple[int | str, complex]]) -> SparseState:
    """State from (basis, amplitude) pairs; norm must be 1 within 1e-6.

    Basis labels may be ints or bits strings. Input is renormalized so the
    stored state satisfies the exact-norm invariant.
    """
    branches: dict[int, complex] = {}
    for basis, amp in entries:
        key = bits_to_int(basis) if isinstance(basis, str) else int(basis)
        if key in branches:
            raise InvalidInputError(f"duplicate basis state {basis!r}")
        amp = complex(amp)
        if amp != 0:
            branches[key] = amp
    norm = sum(abs(a) ** 2 for a in branches.values())
    if abs(norm - 1.0) > _INPUT_NORM_TOL:
        raise InvalidInputError(f"superposition norm is {norm}, not 1")
    scale = norm**-0.5
    return SparseState(width, {k: a * scale for k, a in branches.items()})


def apply(circuit: Circuit, state: SparseState) -> SparseState:
    """Run an X-family circuit: each branch key is permuted independently."""
    if circuit.width != state.width:
        raise InvalidInputError(
            f"circuit width {circuit.width} does not match state width {state.width}"
        )
    branches = state.branches
    for mask, flip in circuit._control_masks:
        branches = {
            (k ^ flip) if (k & mask) == mask else k: v for k, v in branches.items()
        }
    return SparseState(state.width, branches)


def _span(register: Register | tuple[int, int]) -> tuple[int, int]:
    if isinstance(register, Register):
        return register.start, register.size
    start, size = register
    return int(start), int(size)


def is_register_zero(state: SparseState, register: Register | tuple[int, int]) -> bool:
    """True iff the register is |0> on every branch (a disentangled factor)."""
    start, size = _span(register)
    if start < 0 or start + size > state.width:
        raise InvalidInputError("register out of range")
    mask = ((1 << size) - 1) << start
    return all(key & mask == 0 for key in state.branches)


def project_register(state: SparseState, register: Register | tuple[int, int]) -> SparseState:
    """Marginal state of one register; every other qubit must be constant
    across branches, otherwise the register is entangled and this raises."""
    start, size = _span(register)
    if start < 0 or start + size > state.width:
        raise InvalidInputError("register out of range")
    keep = ((1 << size) - 1) << start
    other = ((1 << state.width) - 1) ^ keep
    rest = {key & other for key in state.branches}
    if len(rest) > 1:
        raise EntangledRegisterError(
            "register is entangled with the rest of the state; cannot project"
        )
    return SparseState(size, {(k & keep) >> start: a for k, a in state.branches.items()})


def fidelity(s1: SparseState, s2: SparseState) -> float:
    """|<s1|s2>|^2."""
    if s1.width != s2.width:
        raise InvalidInputError("states must have equal width")
    inner = sum(a.conjugate() * s2.branches.get(k, 0.0) for k, a in s1.branches.items())
    return abs(inner) ** 2


def extend_state(state: SparseState, width: int) -> SparseState:
    """Tensor |0> qubits on top so the state fills ``width`` qubits."""
    if width < state.width:
        raise InvalidInputError("cannot shrink a state")
    if width == state.width:
        return state
    return SparseState(width, dict(state.branches))


def evaluate_basis(circuit: Circuit, values: Mapping[str, int]) -> dict[str, int]:
    """Classical convenience: run one basis input, read back all registers.

    ``values`` assigns integers to registers by name; unassigned registers
    start at 0. Returns the final integer in every register.
    """
    key = 0
    for name, value in values.items():
        r = circuit.register(name)
        if not 0 <= value < (1 << r.size):
            raise InvalidInputError(f"value {value} does not fit register {name}")
        key |= value << r.start
    out = apply(circuit, from_basis(circuit.width, key))
    (final,) = out.branches
    return {r.name: (final >> r.start) & ((1 << r.size) - 1) for r in circuit.registers}


def state_to_dict(state: SparseState) -> dict:
    return {
        "width": state.width,
        "branches": [
            {"bits": int_to_bits(k, state.width), "amp": [a.real, a.imag]}
            for k, a in sorted(state.branches.items())
        ],
    }


def state_from_dict(data: dict) -> SparseState:
    try:
        width = int(data["width"])
        entries = [
            (str(b["bits"]), complex(float(b["amp"][0]), float(b["amp"][1])))
            for b in data["branches"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed state object: {exc}") from exc
    for bits, _ in entries:
        if len(bits) != width:
            raise InvalidInputError(f"branch {bits!r} does not match width {width}")
    return from_superposition(width, entries)
