"""Command-line behavior via real subprocesses: files, exit codes, output."""

import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "qibe.cli"]


def run_cli(*args, cwd):
    return subprocess.run(CLI + list(args), capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """toy keys, an extracted identity key, and one ciphertext on disk."""
    cwd = tmp_path_factory.mktemp("cli")
    assert run_cli("keygen", "--preset", "toy", "--seed", "1", cwd=cwd).returncode == 0
    assert (
        run_cli(
            "extract", "--mpk", "mpk.json", "--msk", "msk.json",
            "--id", "alice", "--out", "sk.json", "--seed", "2", cwd=cwd,
        ).returncode
        == 0
    )
    assert (
        run_cli(
            "encrypt", "--mpk", "mpk.json", "--msk", "msk.json", "--id", "alice",
            "--bits", "1010", "--out", "ct.json", "--seed", "3", cwd=cwd,
        ).returncode
        == 0
    )
    return cwd


class TestKeygen:
    def test_toy_preset_files(self, workspace):
        mpk = json.loads((workspace / "mpk.json").read_text())
        assert mpk["n"] == 4 and mpk["m"] == 64 and len(mpk["A"]) == 4 * 64

    def test_seed_reproduces_byte_identical_files(self, tmp_path):
        for sub in ("a", "b"):
            d = tmp_path / sub
            d.mkdir()
            assert run_cli("keygen", "--preset", "toy", "--seed", "9", cwd=d).returncode == 0
        assert (tmp_path / "a/mpk.json").read_bytes() == (tmp_path / "b/mpk.json").read_bytes()
        assert (tmp_path / "a/msk.json").read_bytes() == (tmp_path / "b/msk.json").read_bytes()

    def test_invalid_n_exits_2(self, tmp_path):
        r = run_cli("keygen", "--n", "0", "--m", "4", "--q", "13", "--sigma", "2", cwd=tmp_path)
        assert r.returncode == 2
        assert "invalid parameter" in r.stderr

    def test_explicit_params(self, tmp_path):
        r = run_cli(
            "keygen", "--n", "2", "--m", "16", "--q", "257", "--sigma", "3",
            "--seed", "4", cwd=tmp_path,
        )
        assert r.returncode == 0
        assert json.loads((tmp_path / "mpk.json").read_text())["q"] == 257

    def test_preset_from_environment(self, tmp_path):
        r = subprocess.run(
            CLI + ["keygen", "--seed", "2"],
            capture_output=True, text=True, cwd=tmp_path,
            env={"QIBE_PRESET": "toy", "PATH": "/usr/bin:/bin"},
        )
        assert r.returncode == 0 and "q=12289" in r.stdout


class TestExtract:
    def test_two_ids_distinct_keys(self, workspace):
        for name in ("bob", "carol"):
            assert (
                run_cli(
                    "extract", "--mpk", "mpk.json", "--msk", "msk.json",
                    "--id", name, "--out", f"sk-{name}.json", cwd=workspace,
                ).returncode
                == 0
            )
        a = json.loads((workspace / "sk-bob.json").read_text())
        b = json.loads((workspace / "sk-carol.json").read_text())
        assert a["R"] != b["R"]

    def test_corrupted_msk_exits_2(self, workspace):
        (workspace / "bad-msk.json").write_text('{"backend": "oracle_key"}')
        r = run_cli(
            "extract", "--mpk", "mpk.json", "--msk", "bad-msk.json",
            "--id", "dave", cwd=workspace,
        )
        assert r.returncode == 2

    def test_unreadable_file_exits_2(self, workspace):
        r = run_cli(
            "extract", "--mpk", "missing.json", "--msk", "msk.json",
            "--id", "x", cwd=workspace,
        )
        assert r.returncode == 2


class TestEncryptDecrypt:
    def test_roundtrip_via_files(self, workspace):
        r = run_cli(
            "decrypt", "--mpk", "mpk.json", "--sk", "sk.json",
            "--ciphertext", "ct.json", "--out", "pt.json", cwd=workspace,
        )
        assert r.returncode == 0
        assert "basis plaintext bits: 1010" in r.stdout
        state = json.loads((workspace / "pt.json").read_text())
        assert state == {"n": 4, "branches": [{"bits": "1010", "amp": [1.0, 0.0]}]}

    def test_superposition_state_file_roundtrip(self, workspace):
        amp = 0.5**0.5
        (workspace / "in-state.json").write_text(
            json.dumps(
                {"n": 4, "branches": [
                    {"bits": "0000", "amp": [amp, 0.0]},
                    {"bits": "1111", "amp": [amp, 0.0]},
                ]}
            )
        )
        assert (
            run_cli(
                "encrypt", "--mpk", "mpk.json", "--msk", "msk.json", "--id", "alice",
                "--plaintext", "in-state.json", "--out", "ct2.json", "--seed", "6",
                cwd=workspace,
            ).returncode
            == 0
        )
        r = run_cli(
            "decrypt", "--mpk", "mpk.json", "--sk", "sk.json",
            "--ciphertext", "ct2.json", "--out", "pt2.json", cwd=workspace,
        )
        assert r.returncode == 0
        out = json.loads((workspace / "pt2.json").read_text())
        assert [b["bits"] for b in out["branches"]] == ["0000", "1111"]

    def test_encrypt_deterministic_under_seed(self, workspace):
        for name in ("det-a.json", "det-b.json"):
            assert (
                run_cli(
                    "encrypt", "--mpk", "mpk.json", "--msk", "msk.json", "--id", "alice",
                    "--bits", "0011", "--out", name, "--seed", "11", cwd=workspace,
                ).returncode
                == 0
            )
        assert (workspace / "det-a.json").read_bytes() == (workspace / "det-b.json").read_bytes()

    def test_bad_bits_exit_2(self, workspace):
        r = run_cli(
            "encrypt", "--mpk", "mpk.json", "--msk", "msk.json", "--id", "alice",
            "--bits", "10", cwd=workspace,
        )
        assert r.returncode == 2

    def test_oracle_backend_needs_msk(self, workspace):
        r = run_cli(
            "encrypt", "--mpk", "mpk.json", "--id", "alice", "--bits", "1010",
            cwd=workspace,
        )
        assert r.returncode == 2
        assert "authority" in r.stderr

    def test_branch_inconsistent_ciphertext_exits_4(self, workspace):
        # shifting one branch's first word by +1 leaves a valid-looking
        # ciphertext whose decode is branch-inconsistent: guaranteed
        # disentanglement failure, never a silently wrong state
        amp = 0.5**0.5
        (workspace / "pair-state.json").write_text(
            json.dumps(
                {"n": 4, "branches": [
                    {"bits": "0000", "amp": [amp, 0.0]},
                    {"bits": "1111", "amp": [amp, 0.0]},
                ]}
            )
        )
        assert (
            run_cli(
                "encrypt", "--mpk", "mpk.json", "--msk", "msk.json", "--id", "alice",
                "--plaintext", "pair-state.json", "--out", "ct-pair.json", "--seed", "8",
                cwd=workspace,
            ).returncode
            == 0
        )
        data = json.loads((workspace / "ct-pair.json").read_text())
        bits = data["psi"]["branches"][0]["bits"]
        L, q = 14, 12289
        word = sum(1 << k for k in range(L) if bits[k] == "1")
        shifted = (word + 1) % q
        new_bits = "".join(
            ("1" if (shifted >> k) & 1 else "0") if k < L else bits[k]
            for k in range(len(bits))
        )
        data["psi"]["branches"][0]["bits"] = new_bits
        (workspace / "ct-pair-bad.json").write_text(json.dumps(data))
        r = run_cli(
            "decrypt", "--mpk", "mpk.json", "--sk", "sk.json",
            "--ciphertext", "ct-pair-bad.json", cwd=workspace,
        )
        assert r.returncode == 4
        assert "entangled" in r.stderr

    def test_tampered_ciphertext_exits_2(self, workspace):
        data = json.loads((workspace / "ct.json").read_text())
        # force the first ciphertext word to q (out of range)
        bits = list(data["psi"]["branches"][0]["bits"])
        q, length = 12289, 14
        for k in range(length):
            bits[k] = "1" if (q >> k) & 1 else "0"
        data["psi"]["branches"][0]["bits"] = "".join(bits)
        (workspace / "ct-bad.json").write_text(json.dumps(data))
        r = run_cli(
            "decrypt", "--mpk", "mpk.json", "--sk", "sk.json",
            "--ciphertext", "ct-bad.json", cwd=workspace,
        )
        assert r.returncode == 2
        assert "malformed ciphertext" in r.stderr


class TestResources:
    def test_formula_encrypt(self, workspace):
        r = run_cli("resources", "--n", "4", "--q", "101", "--alg", "encrypt", cwd=workspace)
        assert r.returncode == 0
        assert json.loads(r.stdout)["t"] == 1876

    def test_formula_decrypt_qubits(self, workspace):
        r = run_cli("resources", "--n", "4", "--q", "101", "--alg", "decrypt", cwd=workspace)
        assert json.loads(r.stdout)["qubits"] == 184

    def test_counted_linearity(self, workspace):
        reports = {}
        for n in ("1", "2"):
            r = run_cli(
                "resources", "--n", n, "--q", "13", "--alg", "encrypt",
                "--mode", "counted", cwd=workspace,
            )
            reports[n] = json.loads(r.stdout)
        assert all(reports["2"][k] == 2 * reports["1"][k] for k in reports["1"])

    def test_counted_with_constants(self, workspace):
        r = run_cli(
            "resources", "--n", "2", "--q", "13", "--alg", "decrypt",
            "--mode", "counted", "--y", "3,7", cwd=workspace,
        )
        assert r.returncode == 0 and json.loads(r.stdout)["qubits"] > 0

    def test_bad_constant_exits_2(self, workspace):
        r = run_cli(
            "resources", "--n", "1", "--q", "13", "--alg", "encrypt",
            "--mode", "counted", "--x", "13", cwd=workspace,
        )
        assert r.returncode == 2
