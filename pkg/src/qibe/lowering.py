"""Clifford+T lowering and resource accounting.

Lowering rewrites X-family circuits into {H, S, T, CNOT, X} for
fault-tolerant cost accounting only: lowered circuits are never simulated.
Each Toffoli expands to the standard cost multiset of two Hadamard, one
phase, seven T (counting adjoints), and six CNOT gates; multi-controlled
NOTs first expand to max(1, 2l-3) Toffolis.

Two reporting modes exist and are never mixed: ``count_resources`` tallies
whatever circuit you actually built, while ``formula_resources`` evaluates
the published closed forms for the n-bit encryption/decryption circuits.
Standalone X gates are tallied in counted mode but have no slot in the
closed forms, so formula mode simply omits them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuits import Circuit, Gate, Register, _mcx_gates
from .errors import InvalidInputError

__all__ = ["ResourceReport", "lower_clifford_t", "count_resources", "formula_resources"]


@dataclass(frozen=True)
class ResourceReport:
    h: int = 0
    s: int = 0
    t: int = 0
    cnot: int = 0
    x: int = 0
    qubits: int = 0
    # raw pre-lowering tallies
    cx: int = 0
    ccx: int = 0
    mcx: int = 0

    def scaled(self, factor: int) -> "ResourceReport":
        return ResourceReport(
            h=self.h * factor,
            s=self.s * factor,
            t=self.t * factor,
            cnot=self.cnot * factor,
            x=self.x * factor,
            qubits=self.qubits * factor,
            cx=self.cx * factor,
            ccx=self.ccx * factor,
            mcx=self.mcx * factor,
        )

    def to_dict(self) -> dict:
        out = {
            "h": self.h,
            "s": self.s,
            "t": self.t,
            "cnot": self.cnot,
            "x": self.x,
            "qubits": self.qubits,
        }
        for key in ("cx", "ccx", "mcx"):
            value = getattr(self, key)
            if value:
                out[key] = value
        return out


def _toffoli_template(a: int, b: int, t: int) -> list[Gate]:
    # Accounting template with the standard fault-tolerant cost multiset
    # {H:2, S:1, T/Tdg:7, CNOT:6}; lowered output is never simulated.
    return [
        Gate("H", t),
        Gate("CNOT", t, (b,)),
        Gate("TDG", t),
        Gate("CNOT", t, (a,)),
        Gate("T", t),
        Gate("CNOT", t, (b,)),
        Gate("TDG", t),
        Gate("CNOT", t, (a,)),
        Gate("T", b),
        Gate("T", t),
        Gate("H", t),
        Gate("CNOT", b, (a,)),
        Gate("T", a),
        Gate("TDG", b),
        Gate("S", b),
        Gate("CNOT", b, (a,)),
    ]


def lower_clifford_t(circuit: Circuit) -> Circuit:
    """Rewrite an X-family circuit into {H, S, T, Tdg, CNOT, X}.

    Raw MCX gates (if any) are first expanded into Toffolis; the ancillas
    that expansion needs are appended past the original width as a
    ``lowering_anc`` register.
    """
    extra = 0
    for g in circuit.gates:
        if g.kind == "MCX":
            extra = max(extra, len(g.controls) - 2)
        elif g.kind not in ("X", "CX", "CCX"):
            raise InvalidInputError(f"cannot lower gate kind {g.kind!r}")
    anc = list(range(circuit.width, circuit.width + extra))
    out: list[Gate] = []
    for g in circuit.gates:
        if g.kind == "X":
            out.append(g)
        elif g.kind == "CX":
            out.append(Gate("CNOT", g.target, g.controls))
        elif g.kind == "CCX":
            out += _toffoli_template(g.controls[0], g.controls[1], g.target)
        else:  # MCX
            for ccx in _mcx_gates(list(g.controls), g.target, anc):
                out += _toffoli_template(ccx.controls[0], ccx.controls[1], ccx.target)
    registers = circuit.registers
    if extra:
        registers = registers + (Register("lowering_anc", circuit.width, extra, "ancilla"),)
    return Circuit(circuit.width + extra, tuple(out), registers)


def count_resources(circuit: Circuit, lowered: bool = False) -> ResourceReport:
    """Exact per-kind gate tallies plus the qubit count (circuit width)."""
    tally: dict[str, int] = {}
    for g in circuit.gates:
        tally[g.kind] = tally.get(g.kind, 0) + 1
    known = {"X", "CX", "CCX", "MCX", "H", "S", "T", "TDG", "CNOT"}
    if set(tally) - known:
        raise InvalidInputError(f"unknown gate kinds: {set(tally) - known}")
    if lowered and (tally.get("CX") or tally.get("CCX") or tally.get("MCX")):
        raise InvalidInputError("circuit still contains unlowered gates")
    return ResourceReport(
        h=tally.get("H", 0),
        s=tally.get("S", 0),
        t=tally.get("T", 0) + tally.get("TDG", 0),
        cnot=tally.get("CNOT", 0),
        x=tally.get("X", 0),
        qubits=circuit.width,
        cx=tally.get("CX", 0),
        ccx=tally.get("CCX", 0),
        mcx=tally.get("MCX", 0),
    )


def formula_resources(n: int, q: int, alg: str) -> ResourceReport:
    """Published closed-form Clifford+T costs of the n-bit circuits.

    With L the bit length of q: encryption costs scale with (10L - 3) and
    use n(4L + 4) qubits; decryption costs scale with (34L + 4) and use
    n(6L + 4) qubits. The encryption CNOT coefficient 75.5 is fractional;
    the final product is rounded down.
    """
    if n < 1:
        raise InvalidInputError(f"need n >= 1, got {n}")
    if q < 3:
        raise InvalidInputError(f"need q >= 3, got {q}")
    L = q.bit_length()
    if alg == "encrypt":
        base = 10 * L - 3
        return ResourceReport(
            h=2 * n * base,
            s=n * base,
            t=7 * n * base,
            cnot=math.floor(n * (75.5 * L - 12)),
            qubits=n * (4 * L + 4),
        )
    if alg == "decrypt":
        base = 34 * L + 4
        return ResourceReport(
            h=2 * n * base,
            s=n * base,
            t=7 * n * base,
            cnot=n * (269 * L + 63),
            qubits=n * (6 * L + 4),
        )
    raise InvalidInputError(f"alg must be 'encrypt' or 'decrypt', got {alg!r}")
