#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "llg/vec3.hpp"

namespace llg {

/// Structured hexahedral partition of the box [0,1] x [0,1] x [0,L].
///
/// Every cell is an axis-aligned box of size (hx, hy, hz). Vertices and cells
/// are numbered lexicographically with x running fastest, i.e. by (iz, iy, ix).
/// The mesh is immutable after construction.
class Mesh {
public:
    Mesh(int nx, int ny, int nz, double thickness);

    [[nodiscard]] int nx() const noexcept { return nx_; }
    [[nodiscard]] int ny() const noexcept { return ny_; }
    [[nodiscard]] int nz() const noexcept { return nz_; }
    [[nodiscard]] double thickness() const noexcept { return thickness_; }

    [[nodiscard]] double hx() const noexcept { return hx_; }
    [[nodiscard]] double hy() const noexcept { return hy_; }
    [[nodiscard]] double hz() const noexcept { return hz_; }
    /// Maximum cell edge length.
    [[nodiscard]] double meshwidth() const noexcept;
    [[nodiscard]] double cell_volume() const noexcept { return hx_ * hy_ * hz_; }

    [[nodiscard]] std::size_t num_cells() const noexcept { return cells_.size(); }
    [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }

    [[nodiscard]] const Vec3& vertex(std::size_t v) const { return vertices_.at(v); }
    /// Vertex ids of a cell in local lexicographic order (x fastest).
    [[nodiscard]] const std::array<std::size_t, 8>& cell_vertices(std::size_t c) const {
        return cells_.at(c);
    }
    /// Integer coordinates (ix, iy, iz) of a cell.
    [[nodiscard]] std::array<int, 3> cell_index(std::size_t c) const;
    /// Lower-left-front corner of a cell.
    [[nodiscard]] Vec3 cell_origin(std::size_t c) const;

private:
    int nx_, ny_, nz_;
    double thickness_;
    double hx_, hy_, hz_;
    std::vector<Vec3> vertices_;
    std::vector<std::array<std::size_t, 8>> cells_;
};

[[nodiscard]] Mesh build_box_mesh(int nx, int ny, int nz, double thickness);

}  // namespace llg
