"""Framed-protocol handshake: wire format, loopback runs, failure paths."""

import json
import socket
import struct
import subprocess
import sys
import threading

import pytest

from qibe.errors import FrameError, HandshakeError
from qibe.handshake import (
    FRAME_ACK,
    FRAME_HELLO,
    read_frame,
    run_receiver,
    run_sender,
    write_frame,
)
from qibe.keys import mpk_fingerprint
from qibe.rng import make_rng

CLI = [sys.executable, "-m", "qibe.cli"]


def socket_pair():
    server = socket.socket()
    server.bind(("127.0.0.1", 0))
    server.listen(1)
    client = socket.create_connection(server.getsockname())
    conn, _ = server.accept()
    server.close()
    return client, conn


class TestFraming:
    def test_roundtrip(self):
        a, b = socket_pair()
        try:
            write_frame(a, FRAME_HELLO, {"role": "sender"})
            frame_type, payload = read_frame(b)
            assert frame_type == FRAME_HELLO and payload == {"role": "sender"}
        finally:
            a.close()
            b.close()

    def test_length_prefix_is_payload_bytes(self):
        a, b = socket_pair()
        try:
            write_frame(a, FRAME_ACK, {"key_hash": "ab"})
            raw = b.recv(5, socket.MSG_WAITALL)
            length, frame_type = struct.unpack(">IB", raw)
            body = b.recv(length, socket.MSG_WAITALL)
            assert len(body) == length and frame_type == FRAME_ACK
        finally:
            a.close()
            b.close()

    def test_truncated_frame_rejected(self):
        a, b = socket_pair()
        try:
            a.sendall(struct.pack(">IB", 100, FRAME_HELLO) + b'{"partial":')
            a.close()
            with pytest.raises(FrameError):
                read_frame(b)
        finally:
            b.close()

    def test_unknown_type_rejected(self):
        a, b = socket_pair()
        try:
            a.sendall(struct.pack(">IB", 2, 0x7F) + b"{}")
            with pytest.raises(FrameError):
                read_frame(b)
        finally:
            a.close()
            b.close()

    def test_non_json_payload_rejected(self):
        a, b = socket_pair()
        try:
            a.sendall(struct.pack(">IB", 3, FRAME_HELLO) + b"\xff\xfe\xfd")
            with pytest.raises(FrameError):
                read_frame(b)
        finally:
            a.close()
            b.close()


def run_pair(mpk, sk, seed, expected=None):
    client, conn = socket_pair()
    out = {}

    def receiver():
        try:
            out["receiver"] = run_receiver(conn, mpk, sk)
        except Exception as exc:  # surfaced by the sender side's assertion
            out["receiver_error"] = exc

    thread = threading.Thread(target=receiver)
    thread.start()
    try:
        out["sender"] = run_sender(client, make_rng(seed), expected)
    finally:
        client.close()
        thread.join()
        conn.close()
    return out


class TestLoopbackHandshake:
    def test_fingerprints_match(self, toy_keys, toy_identity):
        mpk, _ = toy_keys
        _, sk = toy_identity
        out = run_pair(mpk, sk, seed=7)
        assert out["sender"] == out["receiver"]

    def test_distinct_seeds_distinct_keys(self, toy_keys, toy_identity):
        mpk, _ = toy_keys
        _, sk = toy_identity
        prints = {run_pair(mpk, sk, seed=s)["sender"] for s in range(8)}
        assert len(prints) > 1

    def test_pinned_fingerprint_accepted(self, toy_keys, toy_identity):
        mpk, _ = toy_keys
        _, sk = toy_identity
        out = run_pair(mpk, sk, seed=3, expected=mpk_fingerprint(mpk))
        assert out["sender"] == out["receiver"]

    def test_wrong_pin_rejected(self, toy_keys, toy_identity):
        mpk, _ = toy_keys
        _, sk = toy_identity
        with pytest.raises(HandshakeError):
            run_pair(mpk, sk, seed=3, expected="0" * 16)


@pytest.fixture(scope="module")
def handshake_files(tmp_path_factory):
    cwd = tmp_path_factory.mktemp("hs")
    subprocess.run(CLI + ["keygen", "--preset", "toy", "--seed", "1"], cwd=cwd, check=True,
                   capture_output=True)
    subprocess.run(
        CLI + ["extract", "--mpk", "mpk.json", "--msk", "msk.json", "--id", "recv",
               "--out", "sk.json"],
        cwd=cwd, check=True, capture_output=True,
    )
    return cwd


def spawn_listener(cwd):
    proc = subprocess.Popen(
        CLI + ["handshake", "--listen", "0", "--mpk", "mpk.json", "--sk", "sk.json"],
        cwd=cwd, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    line = proc.stderr.readline()
    assert "listening on" in line, line
    port = int(line.rsplit(":", 1)[1])
    return proc, port


class TestCliHandshake:
    def test_loopback_exit_codes_and_fingerprints(self, handshake_files):
        listener, port = spawn_listener(handshake_files)
        sender = subprocess.run(
            CLI + ["handshake", "--connect", f"127.0.0.1:{port}", "--seed", "5",
                   "--mpk", "mpk.json"],
            cwd=handshake_files, capture_output=True, text=True, timeout=60,
        )
        out, _ = listener.communicate(timeout=60)
        assert sender.returncode == 0 and listener.returncode == 0
        fp_sender = sender.stdout.strip().rsplit(" ", 1)[1]
        fp_receiver = out.strip().rsplit(" ", 1)[1]
        assert fp_sender == fp_receiver

    def test_truncated_frame_exits_5(self, handshake_files):
        listener, port = spawn_listener(handshake_files)
        sock = socket.create_connection(("127.0.0.1", port))
        sock.sendall(struct.pack(">IB", 50, FRAME_HELLO) + b"{")
        sock.close()
        listener.communicate(timeout=60)
        assert listener.returncode == 5

    def test_unknown_frame_type_exits_5(self, handshake_files):
        listener, port = spawn_listener(handshake_files)
        sock = socket.create_connection(("127.0.0.1", port))
        sock.sendall(struct.pack(">IB", 2, 0x42) + b"{}")
        sock.close()
        listener.communicate(timeout=60)
        assert listener.returncode == 5

    def test_mismatched_pin_exits_6(self, handshake_files, tmp_path):
        # a second key pair whose fingerprint will not match the listener's
        subprocess.run(CLI + ["keygen", "--preset", "toy", "--seed", "99"], cwd=tmp_path,
                       check=True, capture_output=True)
        listener, port = spawn_listener(handshake_files)
        sender = subprocess.run(
            CLI + ["handshake", "--connect", f"127.0.0.1:{port}",
                   "--mpk", str(tmp_path / "mpk.json"), "--seed", "5"],
            cwd=handshake_files, capture_output=True, text=True, timeout=60,
        )
        assert sender.returncode == 6
        listener.communicate(timeout=60)

    def test_listen_and_connect_exclusive(self, handshake_files):
        r = subprocess.run(
            CLI + ["handshake", "--listen", "0", "--connect", "h:1",
                   "--mpk", "mpk.json", "--sk", "sk.json"],
            cwd=handshake_files, capture_output=True, text=True,
        )
        assert r.returncode == 2
