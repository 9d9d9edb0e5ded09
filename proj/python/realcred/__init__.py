"""Synthetic document extraction, cross-document reconciliation and
verifiable credential issuance."""

from ._core import (
    RealcredError,
    Service,
    canonicalize,
    compare_human,
    default_profile,
    extract,
    generate,
    generate_case,
    identity_profile,
    levenshtein,
    normalize,
    reconcile,
    run_benchmark,
    validate_nif,
)

__all__ = [
    "RealcredError",
    "Service",
    "canonicalize",
    "compare_human",
    "default_profile",
    "extract",
    "generate",
    "generate_case",
    "identity_profile",
    "levenshtein",
    "normalize",
    "reconcile",
    "run_benchmark",
    "validate_nif",
]
