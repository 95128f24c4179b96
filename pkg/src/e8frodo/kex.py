"""Key encapsulation over plain LWE with the E8 block encoder.

Flow (all matrices mod q)::

    keygen : A = gen_a(seed), S, E <- chi^(n x 8),  B = A S + E
    encaps : S', E' <- chi^(8 x n), E'' <- chi^(8 x 8), k <- {0,1}^l
             U = S' A + E',  V = S' B + E'',  C = V + e8_encode(k)
    decaps : k' = e8_decode(C - U S)

Randomness always comes from a caller-supplied :class:`numpy.random.Generator`
(for seeds and noise) so runs are reproducible.  There is no Fujisaki-Okamoto
wrapper: this is the CPA flow only.
"""
from dataclasses import dataclass
import hashlib

import numpy as np

from .codec import decode_batch, e8_decode, encode_batch
from .noise import ChiTable, build_chi, sample_matrix
from .params import ParamSet

SEED_BYTES = 16
_EXACT_FLOAT = 1 << 53


@dataclass(frozen=True)
class PublicKey:
    seed_a: bytes
    B: np.ndarray  # n x 8


@dataclass(frozen=True)
class SecretKey:
    S: np.ndarray  # n x 8, centred entries


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    secret: SecretKey


@dataclass(frozen=True)
class Ciphertext:
    U: np.ndarray  # 8 x n
    C: np.ndarray  # 8 x 8


def _chi(p: ParamSet, chi):
    return chi if chi is not None else build_chi(p.sigma)


def matmul_mod(X, Y, q: int) -> np.ndarray:
    """X @ Y mod q without overflow.

    Uses binary64 BLAS when every partial sum is provably below 2^53, which
    holds for LWE products with one small (noise-sized) factor; otherwise
    falls back to int64, then to Python integers.
    """
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    bound = X.shape[-1] * int(np.abs(X).max(initial=0)) * int(np.abs(Y).max(initial=0))
    if bound < _EXACT_FLOAT:
        out = (X.astype(np.float64) @ Y.astype(np.float64)).astype(np.int64)
    elif bound < (1 << 63):
        out = X @ Y
    else:
        out = (X.astype(object) @ Y.astype(object)).astype(np.int64)  # pragma: no cover
    return out % q


def gen_a(seed: bytes, p: ParamSet) -> np.ndarray:
    """Expand a 16-byte seed into an n x n matrix mod q with SHAKE-128."""
    if len(seed) != SEED_BYTES:
        raise ValueError(f"seed must be {SEED_BYTES} bytes")
    stream = hashlib.shake_128(b"E8FRODO-A" + seed).digest(2 * p.n * p.n)
    a = np.frombuffer(stream, dtype="<u2") & np.uint16(p.q - 1)
    return a.astype(np.int64).reshape(p.n, p.n)


def _keygen(p, rng, chi, backend):
    seed = rng.bytes(SEED_BYTES)
    A = gen_a(seed, p)
    S = sample_matrix(chi, (p.n, p.nbar), rng, backend)
    E = sample_matrix(chi, (p.n, p.nbar), rng, backend)
    B = (matmul_mod(A, S, p.q) + E) % p.q
    return KeyPair(PublicKey(seed, B), SecretKey(S)), A


def keygen(p: ParamSet, rng: np.random.Generator, chi: ChiTable = None, backend=None) -> KeyPair:
    return _keygen(p, rng, _chi(p, chi), backend)[0]


def encaps_with(pk: PublicKey, p: ParamSet, Sp, Ep, Epp, k, A=None) -> Ciphertext:
    """Deterministic encapsulation from explicit noise matrices and key bits."""
    A = gen_a(pk.seed_a, p) if A is None else A
    U = (matmul_mod(Sp, A, p.q) + Ep) % p.q
    V = (matmul_mod(Sp, pk.B, p.q) + Epp) % p.q
    C = (V + encode_batch(np.asarray(k)[None, :], p)[0]) % p.q
    return Ciphertext(U, C)


def encaps(pk: PublicKey, p: ParamSet, rng: np.random.Generator, chi: ChiTable = None, backend=None):
    """Return ``(ciphertext, key_bits)``."""
    chi = _chi(p, chi)
    Sp = sample_matrix(chi, (p.nbar, p.n), rng, backend)
    Ep = sample_matrix(chi, (p.nbar, p.n), rng, backend)
    Epp = sample_matrix(chi, (p.nbar, p.nbar), rng, backend)
    k = rng.integers(0, 2, size=p.ell, dtype=np.uint8)
    return encaps_with(pk, p, Sp, Ep, Epp, k), k


def decaps(sk: SecretKey, ct: Ciphertext, p: ParamSet, backend=None) -> np.ndarray:
    if ct.U.shape != (p.nbar, p.n) or ct.C.shape != (p.nbar, p.nbar):
        raise ValueError("ciphertext dimensions do not match the parameter set")
    Vp = (ct.C - matmul_mod(ct.U, sk.S, p.q)) % p.q
    return e8_decode(Vp, p, backend=backend)


@dataclass
class TrialStats:
    trials: int = 0
    failures: int = 0

    @property
    def agreements(self) -> int:
        return self.trials - self.failures

    @property
    def rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0


def run_trials(
    p: ParamSet,
    trials: int,
    rng: np.random.Generator,
    chi: ChiTable = None,
    encaps_per_key: int = 1,
    backend=None,
) -> TrialStats:
    """Run honest keygen/encaps/decaps and count key mismatches.

    ``encaps_per_key`` encapsulations share one key pair; they are computed
    as stacked matrix products, which is what makes large trial counts
    affordable.
    """
    chi = _chi(p, chi)
    stats = TrialStats()
    while stats.trials < trials:
        m = min(encaps_per_key, trials - stats.trials)
        kp, A = _keygen(p, rng, chi, backend)
        Sp = sample_matrix(chi, (m * p.nbar, p.n), rng, backend)
        Ep = sample_matrix(chi, (m * p.nbar, p.n), rng, backend)
        Epp = sample_matrix(chi, (m, p.nbar, p.nbar), rng, backend)
        keys = rng.integers(0, 2, size=(m, p.ell), dtype=np.uint8)
        U = (matmul_mod(Sp, A, p.q) + Ep) % p.q
        V = (matmul_mod(Sp, kp.public.B, p.q).reshape(m, p.nbar, p.nbar) + Epp) % p.q
        C = (V + encode_batch(keys, p)) % p.q
        Vp = (C - matmul_mod(U, kp.secret.S, p.q).reshape(m, p.nbar, p.nbar)) % p.q
        got = decode_batch(Vp, p, backend=backend)
        stats.failures += int(np.any(got != keys, axis=1).sum())
        stats.trials += m
    return stats


# -- wire format -------------------------------------------------------------

def pack(M, p: ParamSet) -> bytes:
    """Row-major D-bit big-endian fields, zero-padded to a whole byte."""
    M = np.asarray(M, dtype=np.int64)
    if M.size and (M.min() < 0 or M.max() >= p.q):
        raise ValueError("entries must be reduced mod q")
    D = p.D
    bits = (M.reshape(-1, 1) >> np.arange(D - 1, -1, -1)) & 1
    return np.packbits(bits.astype(np.uint8).reshape(-1)).tobytes()


def unpack(data: bytes, rows: int, cols: int, p: ParamSet) -> np.ndarray:
    D = p.D
    nbits = rows * cols * D
    if len(data) != (nbits + 7) // 8:
        raise ValueError(f"expected {(nbits + 7) // 8} bytes for a {rows}x{cols} matrix, got {len(data)}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    if bits[nbits:].any():
        raise ValueError("nonzero padding bits")
    fields = bits[:nbits].reshape(rows * cols, D).astype(np.int64)
    return (fields << np.arange(D - 1, -1, -1)).sum(axis=1).reshape(rows, cols)


def bandwidth_bytes(p: ParamSet) -> int:
    """Bytes of the (U, C) flow: D * (n + 8)."""
    return p.D * (p.n + p.nbar)


def pack_public_key(pk: PublicKey, p: ParamSet) -> bytes:
    return pk.seed_a + pack(pk.B, p)


def unpack_public_key(data: bytes, p: ParamSet) -> PublicKey:
    return PublicKey(bytes(data[:SEED_BYTES]), unpack(data[SEED_BYTES:], p.n, p.nbar, p))


def pack_ciphertext(ct: Ciphertext, p: ParamSet) -> bytes:
    return pack(ct.U, p) + pack(ct.C, p)


def unpack_ciphertext(data: bytes, p: ParamSet) -> Ciphertext:
    nu = p.D * p.nbar * p.n // 8
    return Ciphertext(unpack(data[:nu], p.nbar, p.n, p), unpack(data[nu:], p.nbar, p.nbar, p))
