"""Certificate hierarchy material: codec, issuance, serving policy, validation.

Certificates use a canonical fixed-order binary encoding (big-endian
integers, u32 length prefixes on variable fields) rather than DER; the
byte budget is dominated by keys and signatures, so transport ratios stay
representative while byte accounting stays exact and reproducible.

Certificate signatures are issued deterministically so that a hierarchy
is a pure function of (scenario, seed).  The lab likewise freezes the
issuance clock by default: wall time in certificate bytes would break
re-provisioning determinism.
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .crypto import backend
from .crypto.backend import CryptoError, KeyPair
from .scenario import Scenario, SigFamily

# Frozen issuance clock: 2026-01-01T00:00:00Z.  Overridable everywhere.
DEFAULT_NOW = 1767225600
VALIDITY_BACKDATE = 86400
VALIDITY_LIFETIME = 365 * 86400

_TBS_VERSION = 1


@dataclass(frozen=True)
class CertificateRecord:
    version: int
    serial: int
    subject: str
    issuer: str
    sig_alg_id: int
    pk_alg_id: int
    public_key: bytes
    not_before: int
    not_after: int
    is_ca: bool
    signature: bytes
    encoded: bytes

    @property
    def signature_family(self) -> SigFamily:
        return SigFamily.from_alg_id(self.sig_alg_id)

    @property
    def key_family(self) -> SigFamily:
        return SigFamily.from_alg_id(self.pk_alg_id)

    def tbs_bytes(self) -> bytes:
        return encode_tbs(
            self.version,
            self.serial,
            self.subject,
            self.issuer,
            self.sig_alg_id,
            self.pk_alg_id,
            self.public_key,
            self.not_before,
            self.not_after,
            self.is_ca,
        )


def encode_tbs(
    version: int,
    serial: int,
    subject: str,
    issuer: str,
    sig_alg_id: int,
    pk_alg_id: int,
    public_key: bytes,
    not_before: int,
    not_after: int,
    is_ca: bool,
) -> bytes:
    subject_b = subject.encode()
    issuer_b = issuer.encode()
    parts = [
        struct.pack(">BQ", version, serial),
        struct.pack(">I", len(subject_b)),
        subject_b,
        struct.pack(">I", len(issuer_b)),
        issuer_b,
        struct.pack(">HH", sig_alg_id, pk_alg_id),
        struct.pack(">I", len(public_key)),
        public_key,
        struct.pack(">QQB", not_before, not_after, 1 if is_ca else 0),
    ]
    return b"".join(parts)


def encode_certificate(tbs: bytes, signature: bytes) -> bytes:
    return struct.pack(">I", len(tbs)) + tbs + struct.pack(">I", len(signature)) + signature


class CodecError(ValueError):
    """Certificate bytes do not parse or are not canonical."""


def decode_certificate(data: bytes) -> CertificateRecord:
    try:
        (tbs_len,) = struct.unpack_from(">I", data, 0)
        tbs = data[4 : 4 + tbs_len]
        (sig_len,) = struct.unpack_from(">I", data, 4 + tbs_len)
        sig_off = 8 + tbs_len
        signature = data[sig_off : sig_off + sig_len]
        if len(data) != sig_off + sig_len or len(signature) != sig_len:
            raise CodecError("trailing or missing certificate bytes")

        off = 0
        version, serial = struct.unpack_from(">BQ", tbs, off)
        off += 9
        (n,) = struct.unpack_from(">I", tbs, off)
        off += 4
        subject = tbs[off : off + n].decode()
        off += n
        (n,) = struct.unpack_from(">I", tbs, off)
        off += 4
        issuer = tbs[off : off + n].decode()
        off += n
        sig_alg_id, pk_alg_id = struct.unpack_from(">HH", tbs, off)
        off += 4
        (n,) = struct.unpack_from(">I", tbs, off)
        off += 4
        public_key = tbs[off : off + n]
        off += n
        not_before, not_after, ca = struct.unpack_from(">QQB", tbs, off)
        off += 17
        if off != len(tbs):
            raise CodecError("trailing tbs bytes")
    except (struct.error, UnicodeDecodeError) as exc:
        raise CodecError(f"malformed certificate: {exc}") from exc

    record = CertificateRecord(
        version=version,
        serial=serial,
        subject=subject,
        issuer=issuer,
        sig_alg_id=sig_alg_id,
        pk_alg_id=pk_alg_id,
        public_key=public_key,
        not_before=not_before,
        not_after=not_after,
        is_ca=bool(ca),
        signature=signature,
        encoded=data,
    )
    if record.tbs_bytes() != tbs:
        raise CodecError("non-canonical tbs encoding")
    return record


def _tbs_digest(tbs: bytes) -> bytes:
    return hashlib.sha256(tbs).digest()


def issue_certificate(
    *,
    serial: int,
    subject: str,
    subject_key: KeyPair,
    issuer_name: str,
    issuer_key: KeyPair,
    is_ca: bool,
    now: int = DEFAULT_NOW,
) -> CertificateRecord:
    """Sign a certificate over hash(tbs) with the issuer key (deterministic)."""
    tbs = encode_tbs(
        _TBS_VERSION,
        serial,
        subject,
        issuer_name,
        issuer_key.algorithm.alg_id,
        subject_key.algorithm.alg_id,
        subject_key.public_key,
        now - VALIDITY_BACKDATE,
        now + VALIDITY_LIFETIME,
        is_ca,
    )
    signature = backend.sign(issuer_key, _tbs_digest(tbs), deterministic=True)
    return decode_certificate(encode_certificate(tbs, signature))


def verify_certificate(cert: CertificateRecord, issuer_public_key: bytes) -> bool:
    return backend.verify(
        cert.signature_family, issuer_public_key, _tbs_digest(cert.tbs_bytes()), cert.signature
    )


@dataclass(frozen=True)
class HierarchyMaterial:
    scenario_id: str
    root: tuple[CertificateRecord, KeyPair]
    intermediate: Optional[tuple[CertificateRecord, KeyPair]]
    leaf: tuple[CertificateRecord, KeyPair]

    @property
    def trust_store(self) -> list[CertificateRecord]:
        return [self.root[0]]

    @property
    def depth(self) -> int:
        return 2 if self.intermediate is None else 3

    def certificates(self) -> list[CertificateRecord]:
        certs = [self.root[0]]
        if self.intermediate is not None:
            certs.append(self.intermediate[0])
        certs.append(self.leaf[0])
        return certs


def _position_seed(master_seed: bytes, scenario_id: str, position: str, n: int) -> bytes:
    material = b"pqchainlab-keyseed\x00" + master_seed + scenario_id.encode() + b"\x00" + position.encode()
    return hashlib.shake_256(material).digest(n)


def build_hierarchy(scenario: Scenario, seed: bytes, now: int = DEFAULT_NOW) -> HierarchyMaterial:
    """Generate keys and issue the scenario's chain; pure in (scenario, seed, now)."""
    sid = scenario.display_id
    placement = scenario.placement

    def keypair(position: str, family: SigFamily) -> KeyPair:
        seed_len = backend.SIG_PARAMS[family].seed_len
        return backend.generate_keypair(family, _position_seed(seed, sid, position, seed_len))

    root_key = keypair("root", placement.root)
    root_cert = issue_certificate(
        serial=1,
        subject=f"{sid}:root",
        subject_key=root_key,
        issuer_name=f"{sid}:root",
        issuer_key=root_key,
        is_ca=True,
        now=now,
    )

    intermediate = None
    leaf_issuer_name = f"{sid}:root"
    leaf_issuer_key = root_key
    if placement.intermediate is not None:
        int_key = keypair("int", placement.intermediate)
        int_cert = issue_certificate(
            serial=2,
            subject=f"{sid}:int",
            subject_key=int_key,
            issuer_name=f"{sid}:root",
            issuer_key=root_key,
            is_ca=True,
            now=now,
        )
        intermediate = (int_cert, int_key)
        leaf_issuer_name = f"{sid}:int"
        leaf_issuer_key = int_key

    leaf_key = keypair("leaf", placement.leaf)
    leaf_cert = issue_certificate(
        serial=3,
        subject=f"{sid}:leaf",
        subject_key=leaf_key,
        issuer_name=leaf_issuer_name,
        issuer_key=leaf_issuer_key,
        is_ca=False,
        now=now,
    )

    return HierarchyMaterial(
        scenario_id=sid,
        root=(root_cert, root_key),
        intermediate=intermediate,
        leaf=(leaf_cert, leaf_key),
    )


class ServedChainPolicy(enum.Enum):
    """What the server puts on the wire.

    MIRROR reproduces the effective two-certificate exposure observed in
    the reference measurements: depth 2 serves [leaf, root], depth 3
    serves [leaf, intermediate] (the root stays out of the wire chain).
    """

    MIRROR = "mirror"
    FULL_CHAIN = "full"
    LEAF_ONLY = "leaf"

    @classmethod
    def from_label(cls, label: str) -> "ServedChainPolicy":
        for policy in cls:
            if policy.value == label:
                return policy
        raise ValueError(f"unknown served-chain policy {label!r}")


def served_chain(h: HierarchyMaterial, policy: ServedChainPolicy) -> list[CertificateRecord]:
    """Ordered wire chain, leaf first."""
    leaf = h.leaf[0]
    if policy is ServedChainPolicy.LEAF_ONLY:
        return [leaf]
    if policy is ServedChainPolicy.FULL_CHAIN:
        if h.intermediate is not None:
            return [leaf, h.intermediate[0], h.root[0]]
        return [leaf, h.root[0]]
    if h.intermediate is not None:
        return [leaf, h.intermediate[0]]
    return [leaf, h.root[0]]


def client_trust_store(
    h: HierarchyMaterial, policy: ServedChainPolicy
) -> list[CertificateRecord]:
    """Trust material a client needs for the given serving policy.

    Serving only the leaf of a depth-3 hierarchy is deployable only when
    clients already hold the intermediate, so LEAF_ONLY preloads it next
    to the root anchor.  The other policies use the root alone.
    """
    store = [h.root[0]]
    if policy is ServedChainPolicy.LEAF_ONLY and h.intermediate is not None:
        store.append(h.intermediate[0])
    return store


def chain_bytes_unique(chain: list[CertificateRecord]) -> int:
    return sum(len(encoded) for encoded in {c.encoded for c in chain})


def chain_len_unique(chain: list[CertificateRecord]) -> int:
    return len({c.encoded for c in chain})


class PathErrorKind(enum.Enum):
    BAD_SIGNATURE = "bad_signature"
    UNKNOWN_ANCHOR = "unknown_anchor"
    EXPIRED = "expired"
    NOT_YET_VALID = "not_yet_valid"
    NOT_CA = "not_ca"


class PathError(Exception):
    def __init__(self, kind: PathErrorKind, position: Optional[int] = None):
        self.kind = kind
        self.position = position
        detail = f" at position {position}" if position is not None else ""
        super().__init__(f"{kind.value}{detail}")


def validate_chain(
    served: list[CertificateRecord],
    trust_store: list[CertificateRecord],
    now: int,
) -> None:
    """Validate a served chain (leaf first) against the trust store.

    Every signature in the chain is verified: each certificate under its
    successor, and the top certificate under the trust-store anchor that
    its issuer name resolves to.  A served root therefore gets its
    self-signature checked against the stored anchor, which keeps the
    validation cost proportional to the signature families actually
    exposed on the wire.  Raises :class:`PathError`; returns None on
    success.
    """
    if not served:
        raise ValueError("served chain is empty")

    for i, cert in enumerate(served):
        if now < cert.not_before:
            raise PathError(PathErrorKind.NOT_YET_VALID, i)
        if now > cert.not_after:
            raise PathError(PathErrorKind.EXPIRED, i)
        if i > 0 and not cert.is_ca:
            raise PathError(PathErrorKind.NOT_CA, i)

    for i in range(len(served) - 1):
        parent = served[i + 1]
        if not verify_certificate(served[i], parent.public_key):
            raise PathError(PathErrorKind.BAD_SIGNATURE, i)

    top = served[-1]
    anchor = next((c for c in trust_store if c.subject == top.issuer), None)
    if anchor is None:
        raise PathError(PathErrorKind.UNKNOWN_ANCHOR)
    if not verify_certificate(top, anchor.public_key):
        raise PathError(PathErrorKind.BAD_SIGNATURE, len(served) - 1)


# --- on-disk layout -----------------------------------------------------

_KEY_MAGIC = struct.Struct(">H")


def _write_key(path: Path, keypair: KeyPair) -> None:
    path.write_bytes(_KEY_MAGIC.pack(keypair.algorithm.alg_id) + keypair.secret_key)


def _read_key(path: Path) -> KeyPair:
    data = path.read_bytes()
    (alg_id,) = _KEY_MAGIC.unpack_from(data, 0)
    family = SigFamily.from_alg_id(alg_id)
    secret = data[2:]
    if family is SigFamily.ML_DSA_65:
        return backend.generate_keypair(family, secret)
    # SLH private bytes embed the public half (pk_seed || pk_root)
    return KeyPair(family, secret[-backend.SIG_PARAMS[family].public_key_len :], secret)


def write_hierarchy(h: HierarchyMaterial, directory: Path | str) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = {"root": h.root, "leaf": h.leaf}
    if h.intermediate is not None:
        names["int"] = h.intermediate
    for name, (cert, keypair) in names.items():
        (directory / f"{name}.cert").write_bytes(cert.encoded)
        _write_key(directory / f"{name}.key", keypair)


def load_hierarchy(directory: Path | str) -> HierarchyMaterial:
    directory = Path(directory)

    def load(name: str) -> tuple[CertificateRecord, KeyPair]:
        cert = decode_certificate((directory / f"{name}.cert").read_bytes())
        key = _read_key(directory / f"{name}.key")
        if key.public_key != cert.public_key:
            raise CryptoError(f"{name} key does not match certificate")
        return cert, key

    intermediate = load("int") if (directory / "int.cert").exists() else None
    root = load("root")
    leaf = load("leaf")
    sid = root[0].subject.rsplit(":", 1)[0]
    return HierarchyMaterial(scenario_id=sid, root=root, intermediate=intermediate, leaf=leaf)
