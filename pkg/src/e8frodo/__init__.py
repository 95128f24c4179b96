"""FrodoKEM-style key encapsulation with a Gosset-lattice (E8) key encoder,
plus rigorous decryption-failure bounds."""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .codec import DecodeError, e8_decode, e8_encode
from .e8_lattice import cvp_e8, is_e8_point, relevant_vectors
from .failure_analysis import Pmf, cubic_pe_bound, pe_bound
from .kex import bandwidth_bytes, decaps, encaps, keygen
from .noise import ChiTable, build_chi
from .params import PARAMSETS, ParamSet, get_paramset

__all__ = [
    "BACKEND", "DecodeError", "e8_decode", "e8_encode", "cvp_e8", "is_e8_point",
    "relevant_vectors", "Pmf", "cubic_pe_bound", "pe_bound", "bandwidth_bytes",
    "decaps", "encaps", "keygen", "ChiTable", "build_chi", "PARAMSETS", "ParamSet",
    "get_paramset",
]
