"""Polar codes, their affine automorphisms, and SC / permutation decoding."""

from .autgroup import (
    AffinePermutation,
    BlockProfile,
    SymmetryReport,
    apply_affine,
    block_profile,
    blta_size,
    identity_perm,
    is_automorphism,
    is_blta_member,
    partial_symmetry,
    phi_set,
    sample_blta,
    sample_lta,
    variable_permutation,
    verify_theorem2,
)
from .f2core import BitMatrix, BitVector
from .monomial import Monomial, MonomialCode, decompose, is_decreasing, parse_code
from .polar import ChannelModel, PolarCode, bec_reliabilities, construct_polar
from .scdec import SoftVector, permutation_decode, sc_decode

__version__ = "0.1.0"

__all__ = [
    "AffinePermutation",
    "BlockProfile",
    "SymmetryReport",
    "apply_affine",
    "block_profile",
    "blta_size",
    "identity_perm",
    "is_automorphism",
    "is_blta_member",
    "partial_symmetry",
    "phi_set",
    "sample_blta",
    "sample_lta",
    "variable_permutation",
    "verify_theorem2",
    "BitMatrix",
    "BitVector",
    "Monomial",
    "MonomialCode",
    "decompose",
    "is_decreasing",
    "parse_code",
    "ChannelModel",
    "PolarCode",
    "bec_reliabilities",
    "construct_polar",
    "SoftVector",
    "permutation_decode",
    "sc_decode",
]
