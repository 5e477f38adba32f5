"""PC(Z)/PI(Z) proofs: IR, checker, generators, and transformations."""

from .model import PC, PCK, PIDIV, Justification, Proof, ProofLine, SubMap, Verdict
from .checker import check
from .builder import ProofBuilder
from .generators import prove_triangular, prove_xxinv
from .transforms import (coef_sum_lemma, coef_transport, eliminate_division_proof,
                         homogenize_proof, normalize_proof, prove_inv_lemma)
from .balance import balance_proof
from .io import decode_proof, encode_proof

__all__ = [
    "PC", "PCK", "PIDIV", "Justification", "Proof", "ProofLine", "SubMap",
    "Verdict", "check", "ProofBuilder", "prove_triangular", "prove_xxinv",
    "coef_sum_lemma", "coef_transport", "eliminate_division_proof",
    "homogenize_proof", "normalize_proof", "prove_inv_lemma", "balance_proof",
    "decode_proof", "encode_proof",
]
