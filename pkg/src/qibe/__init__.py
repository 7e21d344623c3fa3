"""Quantum identity-based encryption at desk scale.

Lattice key machinery, reversible encryption/decryption circuits, an exact
sparse simulator to run them on superposition plaintexts, and Clifford+T
resource estimates.
"""

from .circuits import (
    Circuit,
    Gate,
    Register,
    build_abs,
    build_adder,
    build_comparator,
    build_const_xor,
    build_ctrl_copy_const,
    build_decrypt_bit,
    build_decrypt_circuit,
    build_encrypt_bit,
    build_encrypt_circuit,
    build_fanout,
    build_mcx,
    build_mod_adder,
    invert,
)
from .errors import (
    ContractError,
    DecryptionError,
    EntangledRegisterError,
    FrameError,
    HandshakeError,
    InvalidInputError,
    QibeError,
)
from .gaussian import sample_int, sample_vec, statistical_distance
from .keys import IdentityKey, MasterPublicKey, MasterSecretKey, mpk_fingerprint
from .lowering import ResourceReport, count_resources, formula_resources, lower_clifford_t
from .params import PRESETS, SchemeParams
from .rng import derive_rng, make_rng, split_rng
from .scheme import (
    Ciphertext,
    ClassicalCiphertext,
    EncryptionRandomness,
    classical_decrypt,
    classical_encrypt,
    encode_identity,
    hash_id,
    keygen_preset,
    noise_margin_estimate,
    qdecrypt,
    qencrypt,
    qextract,
    qkeygen,
)
from .simulator import (
    SparseState,
    apply,
    fidelity,
    from_basis,
    from_superposition,
    is_register_zero,
    project_register,
)
from .trapdoor import gram_schmidt, sample_image_pair, sample_preimage, trapgen

__version__ = "0.1.0"

__all__ = [
    "Circuit", "Gate", "Register",
    "build_abs", "build_adder", "build_comparator", "build_const_xor",
    "build_ctrl_copy_const", "build_decrypt_bit", "build_decrypt_circuit",
    "build_encrypt_bit", "build_encrypt_circuit", "build_fanout", "build_mcx",
    "build_mod_adder", "invert",
    "QibeError", "InvalidInputError", "ContractError", "DecryptionError",
    "EntangledRegisterError", "FrameError", "HandshakeError",
    "sample_int", "sample_vec", "statistical_distance",
    "IdentityKey", "MasterPublicKey", "MasterSecretKey", "mpk_fingerprint",
    "ResourceReport", "count_resources", "formula_resources", "lower_clifford_t",
    "PRESETS", "SchemeParams",
    "derive_rng", "make_rng", "split_rng",
    "Ciphertext", "ClassicalCiphertext", "EncryptionRandomness",
    "classical_decrypt", "classical_encrypt", "encode_identity", "hash_id",
    "keygen_preset", "noise_margin_estimate", "qdecrypt", "qencrypt",
    "qextract", "qkeygen",
    "SparseState", "apply", "fidelity", "from_basis", "from_superposition",
    "is_register_zero", "project_register",
    "gram_schmidt", "sample_image_pair", "sample_preimage", "trapgen",
]
