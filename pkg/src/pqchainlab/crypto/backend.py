"""Signature and key-establishment backend.

ML-DSA-65, ML-KEM-768 and X25519 ride on the ``cryptography`` package
(C speed, seeded keygen).  SLH-DSA-SHAKE-192s uses the local pure-Python
implementation.  Certificate issuance needs reproducible bytes, so the
deterministic signing paths route through :mod:`pqchainlab.crypto.mldsa`
(the backend's ML-DSA signer is hedged) and the deterministic SLH-DSA
variant.  Handshake-time signing uses the hedged/backend paths.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Optional

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric import mldsa as _pyca_mldsa
from cryptography.hazmat.primitives.asymmetric import mlkem as _pyca_mlkem
from cryptography.hazmat.primitives.asymmetric import x25519 as _pyca_x25519

from ..scenario import KexMode, SigFamily
from . import mldsa, slhdsa

RandomBytes = Callable[[int], bytes]


class CryptoError(Exception):
    """Backend failure (bad key material, signing failure)."""


@dataclass(frozen=True)
class SigParams:
    seed_len: int
    public_key_len: int
    secret_key_len: int
    signature_len: int


SIG_PARAMS = {
    SigFamily.ML_DSA_65: SigParams(
        seed_len=mldsa.SEED_BYTES,
        public_key_len=mldsa.PUBLIC_KEY_BYTES,
        secret_key_len=mldsa.SEED_BYTES,  # stored in seed form
        signature_len=mldsa.SIGNATURE_BYTES,
    ),
    SigFamily.SLH_DSA_SHAKE_192S: SigParams(
        seed_len=slhdsa.SEED_BYTES,
        public_key_len=slhdsa.PUBLIC_KEY_BYTES,
        secret_key_len=4 * slhdsa.N,
        signature_len=slhdsa.SIGNATURE_BYTES,
    ),
}


@dataclass(frozen=True)
class KeyPair:
    algorithm: SigFamily
    public_key: bytes
    secret_key: bytes

    def __post_init__(self):
        params = SIG_PARAMS[self.algorithm]
        if len(self.public_key) != params.public_key_len:
            raise CryptoError(
                f"{self.algorithm.value} public key must be {params.public_key_len} bytes"
            )
        if len(self.secret_key) != params.secret_key_len:
            raise CryptoError(
                f"{self.algorithm.value} secret key must be {params.secret_key_len} bytes"
            )


def generate_keypair(alg: SigFamily, seed: Optional[bytes] = None) -> KeyPair:
    """Generate a signature keypair; a seed makes the result reproducible."""
    params = SIG_PARAMS[alg]
    if seed is None:
        seed = os.urandom(params.seed_len)
    elif len(seed) != params.seed_len:
        raise CryptoError(f"{alg.value} seed must be {params.seed_len} bytes")
    try:
        if alg is SigFamily.ML_DSA_65:
            key = _pyca_mldsa.MLDSA65PrivateKey.from_seed_bytes(seed)
            return KeyPair(alg, key.public_key().public_bytes_raw(), seed)
        pk, key = slhdsa.keygen_from_seed(seed)
        return KeyPair(alg, pk, key.to_bytes())
    except CryptoError:
        raise
    except Exception as exc:  # backend failure
        raise CryptoError(f"keypair generation failed: {exc}") from exc


class Signer:
    """Reusable signing handle; construction cost is paid once per key."""

    def __init__(self, keypair: KeyPair):
        self.algorithm = keypair.algorithm
        self.public_key = keypair.public_key
        self._secret = keypair.secret_key
        if keypair.algorithm is SigFamily.ML_DSA_65:
            self._ml = _pyca_mldsa.MLDSA65PrivateKey.from_seed_bytes(keypair.secret_key)
            self._slh = None
        else:
            self._ml = None
            self._slh = slhdsa.PrivateKey.from_bytes(keypair.secret_key)

    def sign(self, message: bytes) -> bytes:
        """Hedged signature (fresh randomness), used on the live path."""
        try:
            if self._ml is not None:
                return self._ml.sign(message)
            return slhdsa.sign(self._slh, message, opt_rand=os.urandom(slhdsa.N))
        except Exception as exc:
            raise CryptoError(f"signing failed: {exc}") from exc

    def sign_deterministic(self, message: bytes) -> bytes:
        """Reproducible signature, used for certificate issuance."""
        try:
            if self._slh is not None:
                return slhdsa.sign(self._slh, message)
            _, expanded = mldsa.keygen_from_seed(self._secret)
            return mldsa.sign_deterministic(expanded, message)
        except Exception as exc:
            raise CryptoError(f"signing failed: {exc}") from exc


def sign(keypair: KeyPair, message: bytes, deterministic: bool = False) -> bytes:
    signer = Signer(keypair)
    return signer.sign_deterministic(message) if deterministic else signer.sign(message)


def verify(alg: SigFamily, public_key: bytes, message: bytes, signature: bytes) -> bool:
    if alg is SigFamily.ML_DSA_65:
        if len(signature) != mldsa.SIGNATURE_BYTES:
            return False
        try:
            _pyca_mldsa.MLDSA65PublicKey.from_public_bytes(public_key).verify(
                signature, message
            )
            return True
        except InvalidSignature:
            return False
        except Exception as exc:
            raise CryptoError(f"verification failed: {exc}") from exc
    return slhdsa.verify(public_key, message, signature)


# --- key establishment -------------------------------------------------

X25519_PUBLIC_LEN = 32
MLKEM_EK_LEN = 1184
MLKEM_CT_LEN = 1088
SHARED_SECRET_LEN = 32


def client_share_len(mode: KexMode) -> int:
    return {
        KexMode.CLASSICAL: X25519_PUBLIC_LEN,
        KexMode.HYBRID: X25519_PUBLIC_LEN + MLKEM_EK_LEN,
        KexMode.PURE_PQC: MLKEM_EK_LEN,
    }[mode]


def server_share_len(mode: KexMode) -> int:
    return {
        KexMode.CLASSICAL: X25519_PUBLIC_LEN,
        KexMode.HYBRID: X25519_PUBLIC_LEN + MLKEM_CT_LEN,
        KexMode.PURE_PQC: MLKEM_CT_LEN,
    }[mode]


@dataclass
class ClientKexState:
    mode: KexMode
    x25519_key: Optional[_pyca_x25519.X25519PrivateKey]
    mlkem_key: Optional[_pyca_mlkem.MLKEM768PrivateKey]


def client_share(mode: KexMode, rng: RandomBytes = os.urandom) -> tuple[bytes, ClientKexState]:
    """Ephemeral client key share: X25519 public and/or ML-KEM encapsulation key."""
    xk = mk = None
    share = b""
    if mode in (KexMode.CLASSICAL, KexMode.HYBRID):
        xk = _pyca_x25519.X25519PrivateKey.from_private_bytes(rng(32))
        share += xk.public_key().public_bytes_raw()
    if mode in (KexMode.HYBRID, KexMode.PURE_PQC):
        mk = _pyca_mlkem.MLKEM768PrivateKey.from_seed_bytes(rng(64))
        share += mk.public_key().public_bytes_raw()
    return share, ClientKexState(mode, xk, mk)


def server_respond_kex(
    mode: KexMode, client_share_bytes: bytes, rng: RandomBytes = os.urandom
) -> tuple[bytes, Optional[bytes], Optional[bytes]]:
    """Server side: returns (server share, classical_ss, kem_ss).

    ML-KEM encapsulation draws randomness from the backend; the rng
    parameter seeds only the X25519 ephemeral.
    """
    if len(client_share_bytes) != client_share_len(mode):
        raise CryptoError("client key share has wrong length")
    share = b""
    classical_ss = kem_ss = None
    offset = 0
    if mode in (KexMode.CLASSICAL, KexMode.HYBRID):
        peer = _pyca_x25519.X25519PublicKey.from_public_bytes(
            client_share_bytes[:X25519_PUBLIC_LEN]
        )
        offset = X25519_PUBLIC_LEN
        xk = _pyca_x25519.X25519PrivateKey.from_private_bytes(rng(32))
        classical_ss = xk.exchange(peer)
        share += xk.public_key().public_bytes_raw()
    if mode in (KexMode.HYBRID, KexMode.PURE_PQC):
        ek = _pyca_mlkem.MLKEM768PublicKey.from_public_bytes(client_share_bytes[offset:])
        kem_ss, ct = ek.encapsulate()
        share += ct
    return share, classical_ss, kem_ss


def client_complete_kex(
    state: ClientKexState, server_share_bytes: bytes
) -> tuple[Optional[bytes], Optional[bytes]]:
    """Client side: derive (classical_ss, kem_ss) from the server share."""
    if len(server_share_bytes) != server_share_len(state.mode):
        raise CryptoError("server key share has wrong length")
    classical_ss = kem_ss = None
    offset = 0
    if state.x25519_key is not None:
        peer = _pyca_x25519.X25519PublicKey.from_public_bytes(
            server_share_bytes[:X25519_PUBLIC_LEN]
        )
        classical_ss = state.x25519_key.exchange(peer)
        offset = X25519_PUBLIC_LEN
    if state.mlkem_key is not None:
        kem_ss = state.mlkem_key.decapsulate(server_share_bytes[offset:])
    return classical_ss, kem_ss
