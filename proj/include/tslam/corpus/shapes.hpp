#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "tslam/geom/mesh.hpp"
#include "tslam/geom/voxel_grid.hpp"

namespace ts {

enum class ShapeFamily {
  box,
  sphere,
  cylinder,
  torus,
  cup,
  composite_union,
  composite_difference,
};

std::string to_string(ShapeFamily family);
ShapeFamily family_from_string(const std::string& name);

/// A procedural shape: family plus named parameters in workspace units.
/// Shapes live directly in the unit workspace cube [-0.5, 0.5]^3.
struct ShapeRecipe {
  ShapeFamily family = ShapeFamily::box;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
};

struct GeneratedShape {
  Mesh mesh;
  VoxelGrid grid;
};

/// Draws family parameters from their valid ranges; the result always
/// generates a non-empty watertight solid inside the workspace.
ShapeRecipe sample_recipe(ShapeFamily family, std::uint64_t seed);

/// Builds the watertight mesh for a recipe and voxelizes it at resolution n.
/// Throws std::invalid_argument on out-of-range parameters and
/// std::runtime_error when the result is empty or not watertight.
GeneratedShape generate_shape(const ShapeRecipe& recipe, int n = 32);

/// Subdivided icosahedron (library copy; tests keep an independent one).
Mesh make_icosphere(double radius, int subdivisions);

}  // namespace ts
