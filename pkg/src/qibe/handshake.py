"""Loopback key-agreement demo over length-prefixed JSON frames.

Flow: the connecting side says hello; the listening side answers with its
identity, the master public key, and its identity hash value; the sender
samples a fresh session key, encrypts it as a basis state, and ships the
ciphertext; the receiver decrypts and acknowledges with a hash of the key.
Both sides end up printing the same key fingerprint.

Session keys are classical bitstrings (basis states). The wire format is
deliberately debuggable: 4-byte big-endian length, 1 type byte, UTF-8 JSON
payload of exactly that length.
"""

from __future__ import annotations

import hashlib
import json
import socket
import struct

import numpy as np

from .errors import FrameError, HandshakeError, InvalidInputError
from .keys import IdentityKey, MasterPublicKey, mpk_fingerprint, mpk_from_dict, mpk_to_dict
from .scheme import (
    Ciphertext,
    ciphertext_from_dict,
    ciphertext_to_dict,
    identity_hash_from_key,
    qdecrypt,
    qencrypt,
)
from .simulator import from_basis, int_to_bits

__all__ = [
    "FRAME_HELLO",
    "FRAME_KEYINFO",
    "FRAME_CIPHERTEXT",
    "FRAME_ACK",
    "write_frame",
    "read_frame",
    "run_receiver",
    "run_sender",
    "key_fingerprint",
]

FRAME_HELLO = 0x01
FRAME_KEYINFO = 0x02
FRAME_CIPHERTEXT = 0x03
FRAME_ACK = 0x04
_KNOWN_TYPES = {FRAME_HELLO, FRAME_KEYINFO, FRAME_CIPHERTEXT, FRAME_ACK}
_MAX_PAYLOAD = 1 << 24


def _recv_exact(sock: socket.socket, count: int) -> bytes:
    chunks = []
    got = 0
    while got < count:
        chunk = sock.recv(count - got)
        if not chunk:
            raise FrameError(f"connection closed mid-frame ({got}/{count} bytes)")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def write_frame(sock: socket.socket, frame_type: int, payload: dict) -> None:
    body = json.dumps(payload, sort_keys=True).encode()
    sock.sendall(struct.pack(">IB", len(body), frame_type) + body)


def read_frame(sock: socket.socket) -> tuple[int, dict]:
    header = _recv_exact(sock, 5)
    length, frame_type = struct.unpack(">IB", header)
    if frame_type not in _KNOWN_TYPES:
        raise FrameError(f"unknown frame type 0x{frame_type:02x}")
    if length > _MAX_PAYLOAD:
        raise FrameError(f"frame length {length} exceeds the {_MAX_PAYLOAD} cap")
    body = _recv_exact(sock, length)
    try:
        payload = json.loads(body.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"frame payload is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FrameError("frame payload must be a JSON object")
    return frame_type, payload


def _expect(sock: socket.socket, frame_type: int) -> dict:
    got, payload = read_frame(sock)
    if got != frame_type:
        raise FrameError(f"expected frame 0x{frame_type:02x}, got 0x{got:02x}")
    return payload


def key_fingerprint(key_bits: str) -> str:
    return hashlib.sha256(("session:" + key_bits).encode()).hexdigest()[:16]


def _key_hash(key_bits: str) -> str:
    return hashlib.sha256(("session:" + key_bits).encode()).hexdigest()


def run_receiver(conn: socket.socket, mpk: MasterPublicKey, sk: IdentityKey) -> str:
    """Serve one handshake on an accepted connection; returns the session
    key fingerprint."""
    _expect(conn, FRAME_HELLO)
    write_frame(
        conn,
        FRAME_KEYINFO,
        {
            "id": sk.id_bits,
            "mpk": mpk_to_dict(mpk),
            "hash": [[int(v) for v in row] for row in identity_hash_from_key(mpk, sk)],
        },
    )
    payload = _expect(conn, FRAME_CIPHERTEXT)
    try:
        ct: Ciphertext = ciphertext_from_dict(payload["ciphertext"], mpk)
    except (KeyError, InvalidInputError) as exc:
        raise FrameError(f"bad ciphertext frame: {exc}") from exc
    state = qdecrypt(mpk, sk, ct)
    if state.branch_count() != 1:
        raise HandshakeError("session key did not decrypt to a basis state")
    (key_value,) = state.branches
    key_bits = int_to_bits(key_value, state.width)
    write_frame(conn, FRAME_ACK, {"key_hash": _key_hash(key_bits)})
    return key_fingerprint(key_bits)


def run_sender(
    conn: socket.socket,
    rng: np.random.Generator,
    expected_fingerprint: str | None = None,
) -> str:
    """Drive one handshake as the connecting side; returns the session key
    fingerprint after the receiver's acknowledgement checks out."""
    write_frame(conn, FRAME_HELLO, {"role": "sender"})
    info = _expect(conn, FRAME_KEYINFO)
    try:
        mpk = mpk_from_dict(info["mpk"])
        id_bits = str(info["id"])
        hash_value = np.array(info["hash"], dtype=np.int64)
    except (KeyError, InvalidInputError, ValueError) as exc:
        raise FrameError(f"bad key-info frame: {exc}") from exc
    if expected_fingerprint is not None and mpk_fingerprint(mpk) != expected_fingerprint:
        raise HandshakeError("peer presented a different master public key")
    n = mpk.params.n
    key_value = int(rng.integers(0, 1 << n))
    key_bits = int_to_bits(key_value, n)
    ct = qencrypt(mpk, id_bits, from_basis(n, key_value), rng, hash_value=hash_value)
    write_frame(conn, FRAME_CIPHERTEXT, {"ciphertext": ciphertext_to_dict(ct)})
    ack = _expect(conn, FRAME_ACK)
    if ack.get("key_hash") != _key_hash(key_bits):
        raise HandshakeError("handshake failed: session key hashes do not match")
    return key_fingerprint(key_bits)
