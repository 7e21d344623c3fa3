"""HTTP service wrapping the core package.

One process plays the key authority (keygen / extract / hash) and offers
the computational operations (encrypt / decrypt / resources) behind JSON
endpoints whose bodies mirror the on-disk file formats. The CLI's ``serve``
subcommand runs this app with uvicorn.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import scheme
from .circuits import build_decrypt_circuit, build_encrypt_circuit
from .errors import ContractError, DecryptionError, InvalidInputError, QibeError
from .keys import idkey_from_dict, idkey_to_dict, mpk_from_dict, mpk_to_dict, msk_from_dict, msk_to_dict
from .lowering import count_resources, formula_resources, lower_clifford_t
from .params import SchemeParams
from .rng import make_rng
from .simulator import from_basis


class HashConfigModel(BaseModel):
    backend: Literal["oracle_key", "basis"]
    seed: str


class MpkModel(BaseModel):
    n: int
    m: int
    q: int
    sigma: float
    A: list[int] = Field(description="row-major n*m entries, reduced mod q")
    hash_config: HashConfigModel


class MskModel(BaseModel):
    backend: Literal["oracle_key", "basis"]
    seed: Optional[str] = None
    T_A: Optional[list[list[int]]] = None


class IdentityKeyModel(BaseModel):
    id: str
    R: list[list[int]]


class BranchModel(BaseModel):
    bits: str
    amp: tuple[float, float]


class PsiModel(BaseModel):
    width: int
    branches: list[BranchModel]


class PlaintextStateModel(BaseModel):
    n: int
    branches: list[BranchModel]


class CiphertextModel(BaseModel):
    c1: list[int]
    psi: PsiModel
    params_fingerprint: str


class ResourceReportModel(BaseModel):
    h: int
    s: int
    t: int
    cnot: int
    x: int
    qubits: int


class KeygenRequest(BaseModel):
    preset: Optional[str] = None
    n: Optional[int] = None
    m: Optional[int] = None
    q: Optional[int] = None
    sigma: Optional[float] = None
    backend: Literal["oracle_key", "basis"] = "oracle_key"
    seed: Optional[int] = None


class KeygenResponse(BaseModel):
    mpk: MpkModel
    msk: MskModel
    fingerprint: str


class ExtractRequest(BaseModel):
    mpk: MpkModel
    msk: MskModel
    identity: str
    seed: Optional[int] = None


class ExtractResponse(BaseModel):
    identity_key: IdentityKeyModel
    id_bits: str


class HashRequest(BaseModel):
    mpk: MpkModel
    msk: Optional[MskModel] = None
    identity: str


class HashResponse(BaseModel):
    id_bits: str
    u: list[list[int]]


class EncryptRequest(BaseModel):
    mpk: MpkModel
    identity: str
    bits: Optional[str] = None
    plaintext: Optional[PlaintextStateModel] = None
    msk: Optional[MskModel] = None
    hash_value: Optional[list[list[int]]] = None
    seed: Optional[int] = None


class EncryptResponse(BaseModel):
    ciphertext: CiphertextModel


class DecryptRequest(BaseModel):
    mpk: MpkModel
    identity_key: IdentityKeyModel
    ciphertext: CiphertextModel


class DecryptResponse(BaseModel):
    plaintext: PlaintextStateModel


class ResourcesRequest(BaseModel):
    n: int
    q: int
    alg: Literal["encrypt", "decrypt"]
    mode: Literal["formula", "counted"] = "formula"
    x: Optional[list[int]] = None
    y: Optional[list[int]] = None


app = FastAPI(title="qibe", version="0.1.0")


@app.exception_handler(QibeError)
async def _qibe_error(_request: Request, exc: QibeError) -> JSONResponse:
    status = 400
    if isinstance(exc, DecryptionError):
        status = 409
    elif isinstance(exc, ContractError):
        status = 500
    return JSONResponse(status_code=status, content={"detail": str(exc)})


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok"}


@app.post("/keygen", response_model=KeygenResponse)
def keygen(req: KeygenRequest) -> KeygenResponse:
    rng = make_rng(req.seed)
    if req.preset:
        mpk, msk = scheme.keygen_preset(req.preset, rng)
    else:
        if None in (req.n, req.m, req.q, req.sigma):
            raise InvalidInputError("give a preset or all of n, m, q, sigma")
        params = SchemeParams(n=req.n, m=req.m, q=req.q, sigma=req.sigma)
        mpk, msk = scheme.qkeygen(params, req.backend, rng)
    from .keys import mpk_fingerprint

    return KeygenResponse(
        mpk=MpkModel(**mpk_to_dict(mpk)),
        msk=MskModel(**msk_to_dict(msk)),
        fingerprint=mpk_fingerprint(mpk),
    )


@app.post("/extract", response_model=ExtractResponse)
def extract(req: ExtractRequest) -> ExtractResponse:
    mpk = mpk_from_dict(req.mpk.model_dump())
    msk = msk_from_dict(req.msk.model_dump(exclude_none=True))
    id_bits = scheme.encode_identity(req.identity, mpk.params.n)
    sk = scheme.qextract(mpk, msk, id_bits, make_rng(req.seed))
    return ExtractResponse(
        identity_key=IdentityKeyModel(**idkey_to_dict(sk)), id_bits=id_bits
    )


@app.post("/hash", response_model=HashResponse)
def hash_identity(req: HashRequest) -> HashResponse:
    mpk = mpk_from_dict(req.mpk.model_dump())
    msk = msk_from_dict(req.msk.model_dump(exclude_none=True)) if req.msk else None
    id_bits = scheme.encode_identity(req.identity, mpk.params.n)
    u = scheme.hash_id(mpk, msk, id_bits)
    return HashResponse(id_bits=id_bits, u=[[int(v) for v in row] for row in u])


@app.post("/encrypt", response_model=EncryptResponse)
def encrypt(req: EncryptRequest) -> EncryptResponse:
    mpk = mpk_from_dict(req.mpk.model_dump())
    n = mpk.params.n
    if (req.bits is None) == (req.plaintext is None):
        raise InvalidInputError("give exactly one of bits or plaintext")
    if req.bits is not None:
        if len(req.bits) != n or any(c not in "01" for c in req.bits):
            raise InvalidInputError(f"bits must be {n} characters of 0/1")
        state = from_basis(n, sum(1 << i for i, c in enumerate(req.bits) if c == "1"))
    else:
        state = scheme.plaintext_from_dict(req.plaintext.model_dump())
    msk = msk_from_dict(req.msk.model_dump(exclude_none=True)) if req.msk else None
    hash_value = np.array(req.hash_value, dtype=np.int64) if req.hash_value else None
    id_bits = scheme.encode_identity(req.identity, n)
    ct = scheme.qencrypt(
        mpk, id_bits, state, make_rng(req.seed), msk=msk, hash_value=hash_value
    )
    return EncryptResponse(ciphertext=CiphertextModel(**scheme.ciphertext_to_dict(ct)))


@app.post("/decrypt", response_model=DecryptResponse)
def decrypt(req: DecryptRequest) -> DecryptResponse:
    mpk = mpk_from_dict(req.mpk.model_dump())
    sk = idkey_from_dict(req.identity_key.model_dump())
    ct = scheme.ciphertext_from_dict(req.ciphertext.model_dump(), mpk)
    state = scheme.qdecrypt(mpk, sk, ct)
    return DecryptResponse(
        plaintext=PlaintextStateModel(**scheme.plaintext_to_dict(state))
    )


@app.post("/resources", response_model=ResourceReportModel)
def resources(req: ResourcesRequest) -> ResourceReportModel:
    if req.mode == "formula":
        report = formula_resources(req.n, req.q, req.alg)
    else:
        constants = (req.x if req.alg == "encrypt" else req.y) or [0] * req.n
        if len(constants) != req.n:
            raise InvalidInputError(f"need {req.n} constants, got {len(constants)}")
        if req.alg == "encrypt":
            circuit = build_encrypt_circuit(constants, req.q)
        else:
            circuit = build_decrypt_circuit(constants, req.q)
        report = count_resources(lower_clifford_t(circuit), lowered=True)
    return ResourceReportModel(
        h=report.h, s=report.s, t=report.t, cnot=report.cnot, x=report.x, qubits=report.qubits
    )
