import pytest

from qibe.rng import make_rng
from qibe.scheme import keygen_preset, qextract


@pytest.fixture(scope="session")
def toy_keys():
    """One toy-preset key pair shared by read-only tests."""
    return keygen_preset("toy", make_rng(1001))


@pytest.fixture(scope="session")
def toy_identity(toy_keys):
    mpk, msk = toy_keys
    id_bits = "1010"
    return id_bits, qextract(mpk, msk, id_bits)


@pytest.fixture(scope="session")
def tiny_basis_keys():
    """Basis-backend key pair (n=2, m=84, q=101, derived sigma)."""
    return keygen_preset("tiny-basis", make_rng(123))
