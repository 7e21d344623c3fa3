"""The four-algorithm scheme plus its classical reference twin.

qkeygen / qextract are classical; qencrypt / qdecrypt act on sparse
superposition states by building and running the reversible circuits. The
classical functions implement the reference scheme whose ciphertexts are
plain vectors; on basis plaintexts the quantum ciphertext's single branch
must equal the classical c0 word for word, which the tests enforce.

Under the oracle-key backend the identity hash H is programmed by the key
authority (H(id) = A * R_id with R_id derived from the master seed), so
evaluating H takes the master secret or a hash value obtained from whoever
holds it; the basis backend keeps H public. Decryption failure surfaces as
DecryptionError via the disentanglement check, never as a silently wrong
state across branches.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import gaussian, simulator
from .circuits import build_decrypt_circuit, build_encrypt_circuit
from .errors import ContractError, DecryptionError, EntangledRegisterError, InvalidInputError
from .keys import (
    BACKEND_BASIS,
    BACKEND_ORACLE,
    IdentityKey,
    MasterPublicKey,
    MasterSecretKey,
    mpk_fingerprint,
)
from .params import SchemeParams, preset_params
from .rng import derive_rng
from .simulator import SparseState
from .trapdoor import gram_schmidt, sample_image_pair, sample_preimage, trapgen

__all__ = [
    "Ciphertext",
    "ClassicalCiphertext",
    "EncryptionRandomness",
    "NoiseMarginReport",
    "qkeygen",
    "keygen_preset",
    "hash_id",
    "qextract",
    "qencrypt",
    "qdecrypt",
    "classical_encrypt",
    "classical_decrypt",
    "noise_margin_estimate",
    "encode_identity",
    "draw_encryption_randomness",
    "ciphertext_to_dict",
    "ciphertext_from_dict",
    "plaintext_to_dict",
    "plaintext_from_dict",
]


@dataclass(frozen=True, eq=False)
class Ciphertext:
    c1: np.ndarray  # length m
    psi: SparseState  # n registers of L bits each
    params_fingerprint: str


@dataclass(frozen=True, eq=False)
class ClassicalCiphertext:
    c0: np.ndarray  # length n
    c1: np.ndarray  # length m


@dataclass(frozen=True, eq=False)
class EncryptionRandomness:
    s: np.ndarray  # uniform in Z_q^n
    e0: np.ndarray  # Gaussian, length n
    e: np.ndarray  # Gaussian, length m


@dataclass(frozen=True)
class NoiseMarginReport:
    trials: int
    samples: int
    max_abs: float
    p999: float
    gate: int  # floor(q/8)

    @property
    def passed(self) -> bool:
        return self.max_abs < self.gate


def _check_id(id_bits: str, n: int) -> None:
    if len(id_bits) != n or any(c not in "01" for c in id_bits):
        raise InvalidInputError(f"identity must be {n} bits of 0/1, got {id_bits!r}")


def encode_identity(identity: str, n: int) -> str:
    """Hash an arbitrary identity string to the scheme's n-bit id space."""
    digest = hashlib.shake_256(b"qibe/identity-encoding:" + identity.encode()).digest(
        (n + 7) // 8
    )
    return "".join("1" if (digest[k // 8] >> (k % 8)) & 1 else "0" for k in range(n))


def qkeygen(
    params: SchemeParams | None,
    backend: str,
    rng: np.random.Generator,
    *,
    n: int | None = None,
    m: int | None = None,
    q: int | None = None,
) -> tuple[MasterPublicKey, MasterSecretKey]:
    """Generate the master key pair.

    oracle_key: A uniform, msk is a 32-byte PRF seed. basis: (A, T_A) from
    trapgen; if params is None the Gaussian width sigma is derived from the
    measured trapdoor quality (so pass n, m, q instead).
    """
    if backend == BACKEND_ORACLE:
        if params is None:
            raise InvalidInputError("oracle_key backend needs explicit params")
        seed = rng.bytes(32)
        A = rng.integers(0, params.q, size=(params.n, params.m), dtype=np.int64)
        hash_config = {
            "backend": backend,
            "seed": hashlib.sha256(b"qibe/hash-tag:" + seed).hexdigest()[:32],
        }
        return MasterPublicKey(params, A, hash_config), MasterSecretKey(backend, seed=seed)
    if backend == BACKEND_BASIS:
        if params is None:
            if n is None or m is None or q is None:
                raise InvalidInputError("derived-sigma keygen needs n, m, q")
            probe = SchemeParams(n=n, m=m, q=q, sigma=1.0)
        else:
            probe = params
        hash_seed = rng.bytes(16).hex()
        A, T = trapgen(probe, rng)
        if params is None:
            # Smallest sigma honoring the preimage sampler's quality bound,
            # with 5% headroom so the runtime warning stays quiet.
            _, norms = gram_schmidt(T)
            sigma = round(float(norms.max()) * math.sqrt(math.log2(probe.m)) * 1.05, 3)
            params = SchemeParams(n=probe.n, m=probe.m, q=probe.q, sigma=sigma)
        hash_config = {"backend": backend, "seed": hash_seed}
        return MasterPublicKey(params, A, hash_config), MasterSecretKey(backend, basis=T)
    raise InvalidInputError(f"unknown backend {backend!r}")


def keygen_preset(
    name: str, rng: np.random.Generator
) -> tuple[MasterPublicKey, MasterSecretKey]:
    spec = preset_params(name)
    if spec["sigma"] is None:
        return qkeygen(None, spec["backend"], rng, n=spec["n"], m=spec["m"], q=spec["q"])
    params = SchemeParams(n=spec["n"], m=spec["m"], q=spec["q"], sigma=spec["sigma"])
    return qkeygen(params, spec["backend"], rng)


def _oracle_identity_matrix(
    mpk: MasterPublicKey, msk: MasterSecretKey, id_bits: str
) -> np.ndarray:
    rng = derive_rng(msk.seed, "identity-key", id_bits)
    cols = [
        gaussian.sample_vec(mpk.params.m, mpk.params.sigma, rng)
        for _ in range(mpk.params.n)
    ]
    return np.stack(cols, axis=1)


def _xof_uniform_matrix(seed_hex: str, id_bits: str, n: int, q: int) -> np.ndarray:
    mask = (1 << q.bit_length()) - 1
    values: list[int] = []
    counter = 0
    prefix = b"qibe/hash-oracle:" + bytes.fromhex(seed_hex) + b":" + id_bits.encode()
    while len(values) < n * n:
        block = hashlib.shake_256(prefix + counter.to_bytes(4, "little")).digest(4096)
        words = np.frombuffer(block, dtype="<u4") & mask
        values.extend(int(v) for v in words if v < q)
        counter += 1
    return np.array(values[: n * n], dtype=np.int64).reshape(n, n)


def hash_id(mpk: MasterPublicKey, msk: MasterSecretKey | None, id_bits: str) -> np.ndarray:
    """The identity hash H(id) in Z_q^{n x n}.

    oracle_key requires msk (the hash is authority-programmed); basis
    expands a public XOF of (hash seed, id).
    """
    _check_id(id_bits, mpk.params.n)
    backend = mpk.hash_config["backend"]
    if backend == BACKEND_ORACLE:
        if msk is None or msk.backend != BACKEND_ORACLE:
            raise InvalidInputError(
                "oracle_key hash is authority-programmed: pass the master secret "
                "or a hash value obtained from the key authority"
            )
        R = _oracle_identity_matrix(mpk, msk, id_bits)
        return (mpk.A @ R) % mpk.params.q
    return _xof_uniform_matrix(mpk.hash_config["seed"], id_bits, mpk.params.n, mpk.params.q)


def qextract(
    mpk: MasterPublicKey,
    msk: MasterSecretKey,
    id_bits: str,
    rng: np.random.Generator | None = None,
) -> IdentityKey:
    """Issue the identity key R with A R = H(id) (mod q).

    Deterministic per id under oracle_key (the PRF replays); randomized per
    call under the basis backend, which needs an rng.
    """
    _check_id(id_bits, mpk.params.n)
    p = mpk.params
    if msk.backend == BACKEND_ORACLE:
        R = _oracle_identity_matrix(mpk, msk, id_bits)
    else:
        if rng is None:
            raise InvalidInputError("basis-backend extraction needs an rng")
        U = hash_id(mpk, msk, id_bits)
        cols = [
            sample_preimage(mpk.A, msk.basis, U[:, i], p.sigma, p.q, rng)
            for i in range(p.n)
        ]
        R = np.stack(cols, axis=1)
    sk = IdentityKey(id_bits=id_bits, R=R)
    verify_identity_key(mpk, msk, sk)
    return sk


def verify_identity_key(
    mpk: MasterPublicKey, msk: MasterSecretKey | None, sk: IdentityKey
) -> None:
    """Check A R = H(id) (mod q); raises ContractError on mismatch."""
    U = hash_id(mpk, msk, sk.id_bits)
    if ((mpk.A @ sk.R) % mpk.params.q != U).any():
        raise ContractError("identity key contract violated: A R != H(id) (mod q)")


def identity_hash_from_key(mpk: MasterPublicKey, sk: IdentityKey) -> np.ndarray:
    """H(id) recomputed from a held identity key: U = A R mod q."""
    return (mpk.A @ sk.R) % mpk.params.q


def draw_encryption_randomness(
    params: SchemeParams, rng: np.random.Generator
) -> EncryptionRandomness:
    """One (s, e0, e) triple, drawn once per ciphertext and shared by all
    branches and all n bit-circuits."""
    s = rng.integers(0, params.q, size=params.n, dtype=np.int64)
    e0 = gaussian.sample_vec(params.n, params.sigma, rng)
    e = gaussian.sample_vec(params.m, params.sigma, rng)
    return EncryptionRandomness(s=s, e0=e0, e=e)


def _resolve_hash(
    mpk: MasterPublicKey,
    id_bits: str,
    msk: MasterSecretKey | None,
    hash_value: np.ndarray | None,
) -> np.ndarray:
    n, q = mpk.params.n, mpk.params.q
    if hash_value is not None:
        U = np.asarray(hash_value, dtype=np.int64)
        if U.shape != (n, n) or ((U < 0) | (U >= q)).any():
            raise InvalidInputError("hash value must be an n x n matrix over Z_q")
        return U
    return hash_id(mpk, msk, id_bits)


def qencrypt(
    mpk: MasterPublicKey,
    id_bits: str,
    plaintext: SparseState,
    rng: np.random.Generator,
    *,
    msk: MasterSecretKey | None = None,
    hash_value: np.ndarray | None = None,
) -> Ciphertext:
    """Encrypt an n-qubit state to (c1, |psi>).

    Classical vectors x = U^T s + e0 and c1 = A^T s + e are computed first;
    the work registers then absorb x + floor(q/2) m per branch while the
    message qubits are disentangled back to |0>.
    """
    p = mpk.params
    _check_id(id_bits, p.n)
    if plaintext.width != p.n:
        raise InvalidInputError(
            f"plaintext has {plaintext.width} qubits, scheme expects {p.n}"
        )
    U = _resolve_hash(mpk, id_bits, msk, hash_value)
    rand = draw_encryption_randomness(p, rng)
    x = (U.T @ rand.s + rand.e0) % p.q
    c1 = (mpk.A.T @ rand.s + rand.e) % p.q
    circuit = build_encrypt_circuit([int(v) for v in x], p.q)
    state = simulator.apply(circuit, simulator.extend_state(plaintext, circuit.width))
    msg = circuit.register("msg")
    if not simulator.is_register_zero(state, msg):
        raise ContractError("encryption circuit failed to disentangle the message qubits")
    for reg in circuit.registers_with_role("ancilla"):
        if not simulator.is_register_zero(state, reg):
            raise ContractError(f"encryption ancilla register {reg.name} not restored")
    psi = simulator.project_register(state, circuit.register("work"))
    return Ciphertext(c1=c1, psi=psi, params_fingerprint=mpk_fingerprint(mpk))


def qdecrypt(mpk: MasterPublicKey, sk: IdentityKey, ct: Ciphertext) -> SparseState:
    """Recover the n-qubit plaintext state from (c1, |psi>).

    Computes y = R^T c1 mod q classically, runs the decode circuits, then
    checks every work register factored out. A branch-inconsistent decode
    (noise across the threshold on some branches) leaves the work registers
    entangled and raises DecryptionError instead of returning a wrong state.
    """
    p = mpk.params
    _check_ciphertext(mpk, ct)
    if sk.R.shape != (p.m, p.n):
        raise InvalidInputError("identity key dimensions do not match the public key")
    y = (sk.R.T @ ct.c1) % p.q
    circuit = build_decrypt_circuit([int(v) for v in y], p.q)
    state = simulator.apply(circuit, simulator.extend_state(ct.psi, circuit.width))
    for reg in circuit.registers_with_role("ancilla"):
        if not simulator.is_register_zero(state, reg):
            raise DecryptionError(f"work register {reg.name} not restored to |0>")
    try:
        return simulator.project_register(state, circuit.register("out"))
    except EntangledRegisterError as exc:
        raise DecryptionError(
            "message register is still entangled with the ciphertext registers "
            "(decryption noise crossed the decision threshold on some branch)"
        ) from exc


def classical_encrypt(
    mpk: MasterPublicKey,
    id_bits: str,
    message_bits: str,
    randomness: EncryptionRandomness,
    *,
    msk: MasterSecretKey | None = None,
    hash_value: np.ndarray | None = None,
) -> ClassicalCiphertext:
    """Reference scheme: c0 = U^T s + e0 + floor(q/2) m, c1 = A^T s + e (mod q)."""
    p = mpk.params
    _check_id(id_bits, p.n)
    if len(message_bits) != p.n or any(c not in "01" for c in message_bits):
        raise InvalidInputError(f"message must be {p.n} bits, got {message_bits!r}")
    U = _resolve_hash(mpk, id_bits, msk, hash_value)
    m_vec = np.array([int(c) for c in message_bits], dtype=np.int64)
    c0 = (U.T @ randomness.s + randomness.e0 + (p.q // 2) * m_vec) % p.q
    c1 = (mpk.A.T @ randomness.s + randomness.e) % p.q
    return ClassicalCiphertext(c0=c0, c1=c1)


def classical_decrypt(
    mpk: MasterPublicKey, sk: IdentityKey, ct: ClassicalCiphertext
) -> str:
    """Reference decoder: m_i = 1 iff |(c0 - y) mod q - floor(q/2)| < floor(q/4)."""
    p = mpk.params
    y = (sk.R.T @ np.asarray(ct.c1, dtype=np.int64)) % p.q
    b = (np.asarray(ct.c0, dtype=np.int64) - y) % p.q - p.q // 2
    return "".join("1" if abs(int(v)) < p.q // 4 else "0" for v in b)


def noise_margin_estimate(
    params: SchemeParams, trials: int, rng: np.random.Generator
) -> NoiseMarginReport:
    """Monte Carlo over fresh keys and fresh encryption noise.

    The decode noise at coordinate i is e0_i - <r^i, e>; a parameter preset
    is accepted when the observed maximum stays under floor(q/8), a factor-2
    margin below the floor(q/4) decision threshold.
    """
    if trials < 1:
        raise InvalidInputError("need at least one trial")
    n, m, sigma = params.n, params.m, params.sigma
    R = gaussian.sample_vec(trials * m * n, sigma, rng).reshape(trials, m, n)
    e = gaussian.sample_vec(trials * m, sigma, rng).reshape(trials, m)
    e0 = gaussian.sample_vec(trials * n, sigma, rng).reshape(trials, n)
    noise = np.abs(e0 - np.einsum("tmn,tm->tn", R, e))
    flat = noise.reshape(-1).astype(float)
    return NoiseMarginReport(
        trials=trials,
        samples=flat.size,
        max_abs=float(flat.max()),
        p999=float(np.percentile(flat, 99.9)),
        gate=params.q // 8,
    )


# ---------------------------------------------------------------------------
# wire formats


def _check_ciphertext(mpk: MasterPublicKey, ct: Ciphertext) -> None:
    p = mpk.params
    if ct.params_fingerprint != mpk_fingerprint(mpk):
        raise InvalidInputError("ciphertext was made under a different public key")
    if ct.c1.shape != (p.m,) or ((ct.c1 < 0) | (ct.c1 >= p.q)).any():
        raise InvalidInputError("malformed ciphertext: c1 must be length m over Z_q")
    L = p.L
    if ct.psi.width != p.n * L:
        raise InvalidInputError("malformed ciphertext: state width must be n*L")
    mask = (1 << L) - 1
    for key in ct.psi.branches:
        for i in range(p.n):
            if (key >> (i * L)) & mask >= p.q:
                raise InvalidInputError(
                    "malformed ciphertext: branch value exceeds the modulus"
                )


def ciphertext_to_dict(ct: Ciphertext) -> dict:
    return {
        "c1": [int(v) for v in ct.c1],
        "psi": simulator.state_to_dict(ct.psi),
        "params_fingerprint": ct.params_fingerprint,
    }


def ciphertext_from_dict(data: dict, mpk: MasterPublicKey | None = None) -> Ciphertext:
    try:
        ct = Ciphertext(
            c1=np.array([int(v) for v in data["c1"]], dtype=np.int64),
            psi=simulator.state_from_dict(data["psi"]),
            params_fingerprint=str(data["params_fingerprint"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed ciphertext: {exc}") from exc
    if mpk is not None:
        _check_ciphertext(mpk, ct)
    return ct


def plaintext_to_dict(state: SparseState) -> dict:
    payload = simulator.state_to_dict(state)
    return {"n": state.width, "branches": payload["branches"]}


def plaintext_from_dict(data: dict) -> SparseState:
    try:
        return simulator.state_from_dict(
            {"width": int(data["n"]), "branches": data["branches"]}
        )
    except KeyError as exc:
        raise InvalidInputError(f"malformed plaintext state: {exc}") from exc
