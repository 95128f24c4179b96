"""Block encoding of l-bit keys into (beta*E8)^8 / qZ^64 and its inverse.

Each of the 8 substrings of the key picks a coset of E8 / 2^B Z^8: the first 8
bits choose a coset of E8 / 2Z^8 (:func:`f_map`), the remaining 8(B-1) bits a
point of 2Z^8 / 2^B Z^8 (:func:`g_map`).  The 8 resulting vectors are scaled
by beta and spread over the 8x8 matrix along wrapped diagonals, so that no two
entries of a block share a row or column.

Internally coset leaders are handled in "half units" (coordinates times 2),
which keeps everything in integers.
"""
from fractions import Fraction
from typing import Sequence

import numpy as np

from .e8_lattice import GENERATOR, cvp_e8_batch
from .params import ParamSet


class DecodeError(ValueError):
    """Raised when a vector is not a valid codeword (corrupted block)."""


_G2 = np.array([[int(2 * Fraction(c)) for c in row] for row in GENERATOR], dtype=np.int64)
_LAST_MULT = {(0, 0): -1, (0, 1): 0, (1, 0): 1, (1, 1): 2}
_POW4 = 4 ** np.arange(8, dtype=np.int64)


def _bits(b: Sequence[int], length: int) -> np.ndarray:
    arr = np.asarray(b, dtype=np.int64).reshape(-1)
    if arr.size != length:
        raise ValueError(f"expected {length} bits, got {arr.size}")
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("bits must be 0 or 1")
    return arr


def _f_half(b: np.ndarray) -> np.ndarray:
    mult = b.copy()
    mult[7] = _LAST_MULT[int(b[0]), int(b[7])]
    return (mult @ _G2) % 4


def _build_tables():
    fwd = np.empty((256, 8), dtype=np.int64)
    inv = np.full(4**8, -1, dtype=np.int64)
    for code in range(256):
        b = (code >> np.arange(8)) & 1
        leader = _f_half(b)
        fwd[code] = leader
        key = int(leader @ _POW4)
        if inv[key] != -1:
            raise AssertionError("f is not injective")
        inv[key] = code
    return fwd, inv


# code = sum(b[t] << t); leaders stored in half units
_F_TABLE, _F_INV = _build_tables()


def f_map(b: Sequence[int]) -> tuple:
    """Coset leader in [0, 2)^8 of E8 / 2Z^8 for 8 bits (b[0] is b1)."""
    b = _bits(b, 8)
    return tuple(Fraction(int(v), 2) for v in _f_half(b))


def f_inv(c: Sequence) -> tuple:
    """Inverse of :func:`f_map`; raises :class:`DecodeError` outside its image."""
    if len(c) != 8:
        raise DecodeError("coset leader must have 8 coordinates")
    half = []
    for v in c:
        v2 = 2 * Fraction(v)
        if v2.denominator != 1 or not 0 <= v2 < 4:
            raise DecodeError(f"{v} is not a coset-leader coordinate")
        half.append(int(v2))
    code = _F_INV[int(np.asarray(half) @ _POW4)]
    if code < 0:
        raise DecodeError("not a leader of an E8 / 2Z^8 coset")
    return tuple(int(code >> t) & 1 for t in range(8))


def g_map(bits: Sequence[int], B: int) -> tuple:
    """8(B-1) bits -> point of 2Z^8 / 2^B Z^8, coordinate-major, little-endian."""
    w = B - 1
    arr = _bits(bits, 8 * w).reshape(8, w) if w else np.zeros((8, 0), dtype=np.int64)
    m = (arr << np.arange(w)).sum(axis=1)
    return tuple(int(v) for v in 2 * m)


def g_inv(v: Sequence[int], B: int) -> tuple:
    """Inverse of :func:`g_map`."""
    if len(v) != 8:
        raise ValueError("expected 8 coordinates")
    out = []
    for c in v:
        if c != int(c) or int(c) % 2 or not 0 <= c < 2**B:
            raise DecodeError(f"coordinate {c} is not an even residue mod 2^{B}")
        m = int(c) // 2
        out.extend((m >> t) & 1 for t in range(B - 1))
    return tuple(out)


def interleave(R) -> np.ndarray:
    """O[i][j] = R[(8 - i + j) mod 8][j]."""
    R = np.asarray(R)
    if R.shape[-2:] != (8, 8):
        raise ValueError("R must be 8 rows of 8 entries")
    i = np.arange(8)[:, None]
    j = np.arange(8)[None, :]
    return R[..., (8 - i + j) % 8, j]


def block_extract(M, k: int) -> np.ndarray:
    """Block k of an 8x8 matrix: (M[k mod 8][0], M[k+1 mod 8][1], ..., M[k+7 mod 8][7])."""
    M = np.asarray(M)
    j = np.arange(8)
    return M[..., (k + j) % 8, j]


def _all_blocks(M: np.ndarray) -> np.ndarray:
    # (..., 8, 8) -> (..., block k, coordinate j)
    k = np.arange(8)[:, None]
    j = np.arange(8)[None, :]
    return M[..., (k + j) % 8, j]


def encode_batch(keys, p: ParamSet) -> np.ndarray:
    """Encode an (m, ell) bit array into m matrices of shape (8, 8) mod q."""
    keys = np.asarray(keys, dtype=np.int64)
    if keys.ndim != 2 or keys.shape[1] != p.ell:
        raise ValueError(f"keys must have shape (m, {p.ell})")
    B = p.B
    sub = keys.reshape(keys.shape[0], 8, p.ell // 8)
    code = (sub[..., :8] << np.arange(8)).sum(axis=-1)
    leader = _F_TABLE[code]  # (m, 8, 8) half units
    rest = sub[..., 8:].reshape(keys.shape[0], 8, 8, B - 1)
    coarse = (rest << np.arange(B - 1)).sum(axis=-1)  # g_map value / 2
    R2 = leader + 4 * coarse  # 2 * R, with R in [0, 2^B)
    scaled = (R2 * (p.beta // 2)) % p.q
    return interleave(scaled)


def e8_encode(k: Sequence[int], p: ParamSet) -> np.ndarray:
    """Encode one key of ``p.ell`` bits into an 8x8 matrix over Z_q."""
    k = _bits(k, p.ell)
    return encode_batch(k[None, :], p)[0]


def decode_batch(N, p: ParamSet, backend=None) -> np.ndarray:
    """Decode m matrices (m, 8, 8) into an (m, ell) array of bits."""
    N = np.asarray(N, dtype=np.int64)
    if N.ndim != 3 or N.shape[1:] != (8, 8):
        raise ValueError("N must have shape (m, 8, 8)")
    m = N.shape[0]
    B = p.B
    blocks = _all_blocks(N % p.q)  # (m, k, j)
    P2 = cvp_e8_batch(blocks.reshape(-1, 8), p.beta, backend=backend).reshape(m, 8, 8)
    P2 %= 2 << B
    # block k carries row (8 - k) mod 8
    rows = np.empty_like(P2)
    rows[:, (8 - np.arange(8)) % 8] = P2
    leader = rows % 4
    code = _F_INV[leader @ _POW4]
    if np.any(code < 0):
        raise DecodeError("decoded point is not in the image of the encoder")
    coarse = (rows - leader) // 4  # g value / 2, in [0, 2^(B-1))
    fbits = (code[..., None] >> np.arange(8)) & 1
    gbits = ((coarse[..., None] >> np.arange(B - 1)) & 1).reshape(m, 8, 8 * (B - 1))
    return np.concatenate([fbits, gbits], axis=-1).reshape(m, p.ell).astype(np.uint8)


def e8_decode(N, p: ParamSet, backend=None) -> np.ndarray:
    """Decode one 8x8 matrix over Z_q into ``p.ell`` bits."""
    N = np.asarray(N, dtype=np.int64)
    if N.shape != (8, 8):
        raise ValueError("N must be 8x8")
    return decode_batch(N[None], p, backend=backend)[0]
