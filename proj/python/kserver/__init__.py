"""Online k-server on trees: constant-time ancestry queries, virtual trees and
an O(k log k) per-request engine for the tree k-server rule."""

from ._core import (
    Engine,
    Instance,
    KServerError,
    QueryOutcome,
    Tree,
    generate_instance,
    naive_query,
    offline_optimum,
    parse_instance,
    serialize_instance,
    solve,
    verify,
    virtual_tree,
)

__all__ = [
    "Engine",
    "Instance",
    "KServerError",
    "QueryOutcome",
    "Tree",
    "generate_instance",
    "naive_query",
    "offline_optimum",
    "parse_instance",
    "serialize_instance",
    "solve",
    "verify",
    "virtual_tree",
]
