#pragma once

#include "pdmesh/mesh.hpp"
#include "pdmesh/rng.hpp"

namespace pdmesh::shapes {

Mesh tetrahedron();

// Axis-aligned unit cube, each side split into n*n quads, each quad into two
// triangles. 12*n*n faces total.
Mesh cube(int n = 1);

Mesh octahedron();

Mesh icosahedron();

// Icosahedron subdivided `level` times and projected onto the unit sphere.
// 20 * 4^level faces.
Mesh icosphere(int level);

// Torus triangulated on an nu x nv grid (genus 1, watertight).
Mesh torus(int nu, int nv, double major = 1.0, double minor = 0.3);

// Single triangle in the z = 0 plane.
Mesh single_triangle();

// Closed umbrella of n faces around an apex vertex: every face touches the
// apex and consecutive faces share a spoke edge. The spoke edges are
// interior, the rim edges are boundary, so the primal graph is an n-cycle.
Mesh closed_fan(int n);

// Strip of n triangles sharing consecutive edges (primal graph is a path).
Mesh strip(int n);

// Three triangles glued along one common edge (non-manifold fixture).
Mesh three_fans_on_edge();

// Convex hull of `n` random points on the unit sphere, triangulated with
// outward orientation. Brute-force construction, intended for small n.
Mesh random_convex_hull(int n, Rng& rng);

// Moves each vertex toward one of its mesh neighbors by a random fraction
// of the connecting edge, at most `amount` of the way.
Mesh jitter_along_edges(const Mesh& mesh, Rng& rng, double amount);

}  // namespace pdmesh::shapes
