#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace wasn {

/// Owner (sensor index) of every grid cell, row-major with cell (ix, iy)
/// stored at iy * nx + ix.
struct CellAssignment {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::uint32_t> owner;

  CellAssignment() = default;
  CellAssignment(std::size_t nx_, std::size_t ny_, std::vector<std::uint32_t> owners)
      : nx(nx_), ny(ny_), owner(std::move(owners)) {
    if (owner.size() != nx * ny)
      throw std::invalid_argument("CellAssignment: owner count does not match grid");
  }

  std::size_t cell_count() const { return owner.size(); }
  std::uint32_t operator()(std::size_t ix, std::size_t iy) const { return owner[iy * nx + ix]; }

  bool operator==(const CellAssignment&) const = default;
};

}  // namespace wasn
