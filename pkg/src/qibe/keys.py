"""Key material containers and their JSON wire formats.

All integers serialize as decimals; matrices as row-major lists (flat for
the public matrix A, nested rows for R and the trapdoor basis).
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .params import SchemeParams

__all__ = [
    "MasterPublicKey",
    "MasterSecretKey",
    "IdentityKey",
    "mpk_to_dict",
    "mpk_from_dict",
    "msk_to_dict",
    "msk_from_dict",
    "idkey_to_dict",
    "idkey_from_dict",
    "mpk_fingerprint",
]

BACKEND_ORACLE = "oracle_key"
BACKEND_BASIS = "basis"
BACKENDS = (BACKEND_ORACLE, BACKEND_BASIS)


@dataclass(frozen=True, eq=False)
class MasterPublicKey:
    params: SchemeParams
    A: np.ndarray  # n x m, entries in [0, q)
    hash_config: dict  # {"backend": ..., "seed": hex}

    def __post_init__(self) -> None:
        if self.A.shape != (self.params.n, self.params.m):
            raise InvalidInputError(
                f"A has shape {self.A.shape}, expected {(self.params.n, self.params.m)}"
            )
        if self.hash_config.get("backend") not in BACKENDS:
            raise InvalidInputError(f"unknown hash backend in {self.hash_config}")


@dataclass(frozen=True, eq=False)
class MasterSecretKey:
    backend: str
    seed: bytes | None = None  # oracle_key PRF key
    basis: np.ndarray | None = None  # m x m trapdoor T_A

    def __post_init__(self) -> None:
        if self.backend == BACKEND_ORACLE:
            if not self.seed or len(self.seed) != 32:
                raise InvalidInputError("oracle_key msk needs a 32-byte seed")
        elif self.backend == BACKEND_BASIS:
            if self.basis is None:
                raise InvalidInputError("basis msk needs the trapdoor matrix")
        else:
            raise InvalidInputError(f"unknown msk backend {self.backend!r}")


@dataclass(frozen=True, eq=False)
class IdentityKey:
    id_bits: str
    R: np.ndarray  # m x n short integer matrix

    def __post_init__(self) -> None:
        if not self.id_bits or any(c not in "01" for c in self.id_bits):
            raise InvalidInputError(f"identity must be a bitstring, got {self.id_bits!r}")
        if self.R.shape[1] != len(self.id_bits):
            raise InvalidInputError("identity key column count must equal the id length")


def mpk_to_dict(mpk: MasterPublicKey) -> dict:
    p = mpk.params
    return {
        "n": p.n,
        "m": p.m,
        "q": p.q,
        "sigma": p.sigma,
        "A": [int(v) for v in mpk.A.reshape(-1)],
        "hash_config": dict(mpk.hash_config),
    }


def mpk_from_dict(data: dict) -> MasterPublicKey:
    try:
        params = SchemeParams(
            n=int(data["n"]), m=int(data["m"]), q=int(data["q"]), sigma=float(data["sigma"])
        )
        flat = np.array([int(v) for v in data["A"]], dtype=np.int64)
        hash_config = dict(data["hash_config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed master public key: {exc}") from exc
    if flat.size != params.n * params.m:
        raise InvalidInputError("A has the wrong number of entries")
    if ((flat < 0) | (flat >= params.q)).any():
        raise InvalidInputError("A entries must be reduced mod q")
    return MasterPublicKey(params, flat.reshape(params.n, params.m), hash_config)


def msk_to_dict(msk: MasterSecretKey) -> dict:
    if msk.backend == BACKEND_ORACLE:
        return {"backend": msk.backend, "seed": base64.b64encode(msk.seed).decode()}
    return {"backend": msk.backend, "T_A": [[int(v) for v in row] for row in msk.basis]}


def msk_from_dict(data: dict) -> MasterSecretKey:
    try:
        backend = data["backend"]
        if backend == BACKEND_ORACLE:
            return MasterSecretKey(backend, seed=base64.b64decode(data["seed"]))
        return MasterSecretKey(
            backend, basis=np.array([[int(v) for v in row] for row in data["T_A"]], dtype=np.int64)
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed master secret key: {exc}") from exc


def idkey_to_dict(sk: IdentityKey) -> dict:
    return {"id": sk.id_bits, "R": [[int(v) for v in row] for row in sk.R]}


def idkey_from_dict(data: dict) -> IdentityKey:
    try:
        return IdentityKey(
            id_bits=str(data["id"]),
            R=np.array([[int(v) for v in row] for row in data["R"]], dtype=np.int64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed identity key: {exc}") from exc


def mpk_fingerprint(mpk: MasterPublicKey) -> str:
    """Short stable digest of the public key, used to pair ciphertexts."""
    blob = json.dumps(mpk_to_dict(mpk), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
