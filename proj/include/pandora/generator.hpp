#pragma once

#include <cstdint>
#include <string>

#include "pandora/model.hpp"

namespace pandora {

enum class Shape { kLine, kMultiline, kForest };

Shape shape_from_string(const std::string& s);
std::string shape_to_string(Shape s);

/// Deterministically generates a validated random instance.
///  - line: one directed path of n boxes;
///  - multiline: 1..3 disjoint paths totalling n boxes;
///  - forest: random attachment with branching factor at most 3.
/// When static_matrices is set every component shares one strictly positive
/// transition matrix (hence irreducible and aperiodic).
/// Throws PandoraError("BadShapeParams") when n or k is not positive.
Instance generate_instance(Shape shape, int n, int k, std::uint64_t seed,
                           bool static_matrices);

}  // namespace pandora
