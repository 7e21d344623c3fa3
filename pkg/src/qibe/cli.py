"""Command-line surface: key lifecycle, file-based encrypt/decrypt, resource
reports, and the loopback handshake demo.

All commands run the core library in-process and are deterministic under
--seed. Exit codes are normative: 0 ok, 2 bad input, 3 contract failure,
4 decryption failure, 5 framing error, 6 handshake failure.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys

from .errors import (
    ContractError,
    DecryptionError,
    FrameError,
    HandshakeError,
    InvalidInputError,
    QibeError,
)
from .keys import (
    BACKENDS,
    idkey_from_dict,
    idkey_to_dict,
    mpk_fingerprint,
    mpk_from_dict,
    mpk_to_dict,
    msk_from_dict,
    msk_to_dict,
)
from .params import SchemeParams
from .rng import make_rng
from . import handshake as hs
from . import scheme
from .circuits import build_decrypt_circuit, build_encrypt_circuit
from .lowering import count_resources, formula_resources, lower_clifford_t
from .simulator import from_basis, int_to_bits

EXIT_CODES = {
    InvalidInputError: 2,
    ContractError: 3,
    DecryptionError: 4,
    FrameError: 5,
    HandshakeError: 6,
}


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path} must hold a JSON object")
    return data


def _load_mpk(path: str):
    return mpk_from_dict(_read_json(path))


def cmd_keygen(args: argparse.Namespace) -> int:
    rng = make_rng(args.seed)
    preset = args.preset or os.environ.get("QIBE_PRESET")
    if preset:
        mpk, msk = scheme.keygen_preset(preset, rng)
    else:
        if None in (args.n, args.m, args.q, args.sigma):
            raise InvalidInputError(
                "invalid parameter: give --preset or all of --n --m --q --sigma"
            )
        params = SchemeParams(n=args.n, m=args.m, q=args.q, sigma=args.sigma)
        mpk, msk = scheme.qkeygen(params, args.backend, rng)
    _write_json(args.mpk_out, mpk_to_dict(mpk))
    _write_json(args.msk_out, msk_to_dict(msk))
    p = mpk.params
    print(
        f"master keys written: n={p.n} m={p.m} q={p.q} sigma={p.sigma} L={p.L} "
        f"backend={msk.backend} fingerprint={mpk_fingerprint(mpk)}"
    )
    print(f"  mpk -> {args.mpk_out}\n  msk -> {args.msk_out}")
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    mpk = _load_mpk(args.mpk)
    msk = msk_from_dict(_read_json(args.msk))
    id_bits = scheme.encode_identity(args.id, mpk.params.n)
    sk = scheme.qextract(mpk, msk, id_bits, make_rng(args.seed))
    scheme.verify_identity_key(mpk, msk, sk)
    _write_json(args.out, idkey_to_dict(sk))
    print(f"identity key for {args.id!r} (bits {id_bits}) -> {args.out}")
    return 0


def _load_plaintext(args: argparse.Namespace, n: int):
    if args.bits is not None:
        if len(args.bits) != n or any(c not in "01" for c in args.bits):
            raise InvalidInputError(f"--bits must be {n} characters of 0/1")
        value = sum(1 << i for i, c in enumerate(args.bits) if c == "1")
        return from_basis(n, value)
    state = scheme.plaintext_from_dict(_read_json(args.plaintext))
    if state.width != n:
        raise InvalidInputError(f"plaintext has {state.width} qubits, key expects {n}")
    return state


def cmd_encrypt(args: argparse.Namespace) -> int:
    mpk = _load_mpk(args.mpk)
    msk = msk_from_dict(_read_json(args.msk)) if args.msk else None
    plaintext = _load_plaintext(args, mpk.params.n)
    id_bits = scheme.encode_identity(args.id, mpk.params.n)
    ct = scheme.qencrypt(mpk, id_bits, plaintext, make_rng(args.seed), msk=msk)
    _write_json(args.out, scheme.ciphertext_to_dict(ct))
    print(
        f"ciphertext for {args.id!r}: {ct.psi.branch_count()} branch(es) over "
        f"{ct.psi.width} qubits -> {args.out}"
    )
    return 0


def cmd_decrypt(args: argparse.Namespace) -> int:
    mpk = _load_mpk(args.mpk)
    sk = idkey_from_dict(_read_json(args.sk))
    ct = scheme.ciphertext_from_dict(_read_json(args.ciphertext), mpk)
    state = scheme.qdecrypt(mpk, sk, ct)
    _write_json(args.out, scheme.plaintext_to_dict(state))
    print(f"decrypted state: {state.branch_count()} branch(es) over {state.width} qubits -> {args.out}")
    if state.branch_count() == 1:
        (value,) = state.branches
        print(f"basis plaintext bits: {int_to_bits(value, state.width)}")
    return 0


def _parse_constants(text: str | None, n: int, q: int, what: str) -> list[int]:
    if text is None:
        return [0] * n
    try:
        values = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise InvalidInputError(f"--{what} must be comma-separated integers") from exc
    if len(values) == 1:
        values = values * n
    if len(values) != n:
        raise InvalidInputError(f"--{what} needs 1 or {n} values")
    if any(not 0 <= v < q for v in values):
        raise InvalidInputError(f"--{what} values must be in [0, {q})")
    return values


def cmd_resources(args: argparse.Namespace) -> int:
    if args.mode == "formula":
        report = formula_resources(args.n, args.q, args.alg)
    else:
        if args.alg == "encrypt":
            constants = _parse_constants(args.x, args.n, args.q, "x")
            circuit = build_encrypt_circuit(constants, args.q)
        else:
            constants = _parse_constants(args.y, args.n, args.q, "y")
            circuit = build_decrypt_circuit(constants, args.q)
        report = count_resources(lower_clifford_t(circuit), lowered=True)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def _handshake_listen(args: argparse.Namespace) -> int:
    mpk = _load_mpk(args.mpk)
    sk = idkey_from_dict(_read_json(args.sk))
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    server.bind(("127.0.0.1", args.listen))
    server.listen(1)
    port = server.getsockname()[1]
    print(f"listening on 127.0.0.1:{port}", file=sys.stderr, flush=True)
    conn, _ = server.accept()
    try:
        fingerprint = hs.run_receiver(conn, mpk, sk)
    finally:
        conn.close()
        server.close()
    print(f"session key fingerprint: {fingerprint}")
    return 0


def _handshake_connect(args: argparse.Namespace) -> int:
    host, _, port_text = args.connect.rpartition(":")
    try:
        port = int(port_text)
    except ValueError as exc:
        raise InvalidInputError("--connect expects host:port") from exc
    expected = None
    if args.mpk:
        expected = mpk_fingerprint(_load_mpk(args.mpk))
    conn = socket.create_connection((host or "127.0.0.1", port), timeout=30)
    try:
        fingerprint = hs.run_sender(conn, make_rng(args.seed), expected)
    finally:
        conn.close()
    print(f"session key fingerprint: {fingerprint}")
    return 0


def cmd_handshake(args: argparse.Namespace) -> int:
    if (args.listen is None) == (args.connect is None):
        raise InvalidInputError("choose exactly one of --listen or --connect")
    if args.listen is not None:
        if not args.mpk or not args.sk:
            raise InvalidInputError("--listen needs --mpk and --sk")
        return _handshake_listen(args)
    return _handshake_connect(args)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qibe",
        description="Quantum identity-based encryption toolkit (desk scale).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=None, help="deterministic RNG seed")

    p = sub.add_parser("keygen", help="generate master keys")
    p.add_argument("--preset", choices=["toy", "tiny-basis"], default=None,
                   help="named parameter preset (or set QIBE_PRESET)")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--backend", choices=list(BACKENDS), default="oracle_key")
    p.add_argument("--mpk-out", default="mpk.json")
    p.add_argument("--msk-out", default="msk.json")
    add_seed(p)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("extract", help="issue an identity key")
    p.add_argument("--mpk", required=True)
    p.add_argument("--msk", required=True)
    p.add_argument("--id", required=True, help="identity string (hashed to n bits)")
    p.add_argument("--out", default="sk.json")
    add_seed(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("encrypt", help="encrypt a plaintext state file or bitstring")
    p.add_argument("--mpk", required=True)
    p.add_argument("--msk", default=None,
                   help="master secret (needed to evaluate H under oracle_key)")
    p.add_argument("--id", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--plaintext", help="plaintext state JSON file")
    group.add_argument("--bits", help="basis-state shorthand, e.g. 1010")
    p.add_argument("--out", default="ciphertext.json")
    add_seed(p)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a ciphertext file")
    p.add_argument("--mpk", required=True)
    p.add_argument("--sk", required=True)
    p.add_argument("--ciphertext", required=True)
    p.add_argument("--out", default="plaintext.json")
    add_seed(p)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("resources", help="Clifford+T resource report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--alg", choices=["encrypt", "decrypt"], required=True)
    p.add_argument("--mode", choices=["formula", "counted"], default="formula")
    p.add_argument("--x", default=None, help="encrypt constants (counted mode)")
    p.add_argument("--y", default=None, help="decrypt constants (counted mode)")
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("handshake", help="loopback session-key agreement demo")
    p.add_argument("--listen", type=int, default=None, metavar="PORT",
                   help="listen on 127.0.0.1:PORT (0 picks a free port)")
    p.add_argument("--connect", default=None, metavar="HOST:PORT")
    p.add_argument("--mpk", default=None,
                   help="receiver: required; sender: pin the expected key")
    p.add_argument("--sk", default=None, help="receiver identity key file")
    add_seed(p)
    p.set_defaults(func=cmd_handshake)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QibeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for klass, code in EXIT_CODES.items():
            if isinstance(exc, klass):
                return code
        return 1


if __name__ == "__main__":
    sys.exit(main())
