#include "llg/mesh.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace llg {

Mesh::Mesh(int nx, int ny, int nz, double thickness)
    : nx_(nx), ny_(ny), nz_(nz), thickness_(thickness) {
    if (nx < 1 || ny < 1 || nz < 1) {
        throw std::invalid_argument("mesh cell counts must be positive, got " + std::to_string(nx) +
                                    "x" + std::to_string(ny) + "x" + std::to_string(nz));
    }
    if (!(thickness > 0.0)) {
        throw std::invalid_argument("mesh thickness must be positive");
    }
    hx_ = 1.0 / nx;
    hy_ = 1.0 / ny;
    hz_ = thickness / nz;

    const auto vx = static_cast<std::size_t>(nx) + 1;
    const auto vy = static_cast<std::size_t>(ny) + 1;
    const auto vz = static_cast<std::size_t>(nz) + 1;
    vertices_.reserve(vx * vy * vz);
    for (std::size_t iz = 0; iz < vz; ++iz) {
        for (std::size_t iy = 0; iy < vy; ++iy) {
            for (std::size_t ix = 0; ix < vx; ++ix) {
                vertices_.push_back({static_cast<double>(ix) * hx_, static_cast<double>(iy) * hy_,
                                     static_cast<double>(iz) * hz_});
            }
        }
    }

    cells_.reserve(static_cast<std::size_t>(nx) * ny * nz);
    for (int iz = 0; iz < nz; ++iz) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                std::array<std::size_t, 8> conn{};
                for (int c = 0; c < 8; ++c) {
                    const std::size_t x = ix + (c & 1);
                    const std::size_t y = iy + ((c >> 1) & 1);
                    const std::size_t z = iz + ((c >> 2) & 1);
                    conn[c] = x + vx * (y + vy * z);
                }
                cells_.push_back(conn);
            }
        }
    }
}

double Mesh::meshwidth() const noexcept { return std::max({hx_, hy_, hz_}); }

std::array<int, 3> Mesh::cell_index(std::size_t c) const {
    if (c >= cells_.size()) {
        throw std::out_of_range("cell index out of range");
    }
    const auto ix = static_cast<int>(c % nx_);
    const auto iy = static_cast<int>((c / nx_) % ny_);
    const auto iz = static_cast<int>(c / (static_cast<std::size_t>(nx_) * ny_));
    return {ix, iy, iz};
}

Vec3 Mesh::cell_origin(std::size_t c) const {
    const auto idx = cell_index(c);
    return {idx[0] * hx_, idx[1] * hy_, idx[2] * hz_};
}

Mesh build_box_mesh(int nx, int ny, int nz, double thickness) {
    return Mesh(nx, ny, nz, thickness);
}

}  // namespace llg
