"""Python bindings for the svmc model checker."""

from ._svmc import (  # noqa: F401
    ModelError,
    ablate,
    corpus_names,
    corpus_source,
    discharge,
    round_trip,
    verify,
    verify_text,
)

__all__ = [
    "ModelError",
    "ablate",
    "corpus_names",
    "corpus_source",
    "discharge",
    "round_trip",
    "verify",
    "verify_text",
]
