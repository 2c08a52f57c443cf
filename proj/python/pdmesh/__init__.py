"""Primal-dual graph networks on triangle meshes."""

from ._pdmesh import (
    GraphPair,
    Mesh,
    build_graph_pair,
    dihedral_angles,
    edge_count,
    evaluate,
    load_obj,
    manifold_report,
    save_obj,
    shapes,
    synth,
    train,
    verify_medial_line_equivalence,
)

__all__ = [
    "GraphPair",
    "Mesh",
    "build_graph_pair",
    "dihedral_angles",
    "edge_count",
    "evaluate",
    "load_obj",
    "manifold_report",
    "save_obj",
    "shapes",
    "synth",
    "train",
    "verify_medial_line_equivalence",
]
