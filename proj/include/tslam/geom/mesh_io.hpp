#pragma once

#include <string>

#include "tslam/geom/mesh.hpp"

namespace ts {

/// Loads an ASCII OFF or OBJ mesh (triangles; polygons fan-triangulated).
/// Format is picked by extension, with OFF header sniffing as fallback.
/// Throws std::runtime_error with "<path>:<line>: ..." on parse errors.
Mesh load_mesh(const std::string& path);

Mesh parse_off(std::istream& is, const std::string& name);
Mesh parse_obj(std::istream& is, const std::string& name);

/// Writes "v"/"f" records only.
void save_obj(const Mesh& mesh, const std::string& path);

}  // namespace ts
