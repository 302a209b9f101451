/// @file grid.hpp
/// @brief Uniform cartesian grids and staggered field storage.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace apfv {

enum class Boundary { periodic, neumann_ghost };
enum class Staggering { cell, face };

/// 1D uniform grid. Cell k is centred at x_k = k h, faces sit at (k + 1/2) h.
struct Grid1D {
    std::size_t n_cells = 0;
    double h = 0.0;
    Boundary bc = Boundary::periodic;

    std::size_t n_faces() const noexcept {
        return bc == Boundary::periodic ? n_cells : n_cells + 1;
    }
    double x_center(std::size_t k) const noexcept { return double(k) * h; }
    // Face index f on a periodic grid is the face at x_{f+1/2}. On a bounded
    // grid face f sits at x_{f-1/2}, so face 0 is the left wall.
    double x_face(std::size_t f) const noexcept {
        return bc == Boundary::periodic ? (double(f) + 0.5) * h : (double(f) - 0.5) * h;
    }
    double length() const noexcept { return double(n_cells) * h; }
};

Grid1D make_grid1d(std::size_t n_cells, double h, Boundary bc);

/// Cell fields carry one ghost entry on each side: values[0] and
/// values[n+1] are ghosts, values[1..n] the interior. Face fields carry no
/// ghosts.
struct Field {
    Staggering stag = Staggering::cell;
    std::vector<double> values;

    static Field cells(const Grid1D& g, double init = 0.0);
    static Field faces(const Grid1D& g, double init = 0.0);

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const noexcept { return values.size(); }
};

/// Interior view helpers for cell fields.
inline double& cell(Field& f, std::size_t k) { return f.values[k + 1]; }
inline double cell(const Field& f, std::size_t k) { return f.values[k + 1]; }

/// Fills ghost entries of a cell field: wrap for periodic, copy for
/// neumann-ghost. Throws PreconditionError on staggering or size mismatch.
Field apply_bc(Field field, const Grid1D& grid);
void apply_bc_inplace(Field& field, const Grid1D& grid);

/// Index classification for the 3D box.
enum class CellClass { interior, boundary };

/// 3D box of n1 x n2 x n3 cells indexed 0..n_i-1 per direction. Directions 1
/// and 2 are either periodic or bounded; direction 3 is always bounded.
/// Bounded directions get one fictitious layer on each side.
struct Grid3D {
    std::array<std::size_t, 3> n{};
    std::array<double, 3> h{};
    std::array<bool, 3> periodic{false, false, false};

    std::size_t size() const noexcept { return n[0] * n[1] * n[2]; }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return (k * n[1] + j) * n[0] + i;
    }
    std::array<std::size_t, 3> multi(std::size_t id) const noexcept {
        return {id % n[0], (id / n[0]) % n[1], id / (n[0] * n[1])};
    }
    /// K_int: no index on the first or last layer of a bounded direction.
    bool is_interior(std::size_t id) const noexcept;
    /// K_I: in the box but not in K_int.
    bool is_boundary(std::size_t id) const noexcept { return !is_interior(id); }

    /// Neighbour K + s e_dir, s in {-1, +1}. Returns false when the neighbour
    /// lies in the fictitious layer K_F (bounded direction, outside the box).
    bool neighbor(std::size_t id, int dir, int s, std::size_t& out) const noexcept;
    /// Neighbour with homogeneous Neumann ghost copy: a fictitious neighbour
    /// maps back to the cell itself.
    std::size_t neighbor_or_self(std::size_t id, int dir, int s) const noexcept;
};

Grid3D make_grid3d(std::array<std::size_t, 3> n, std::array<double, 3> h,
                   bool periodic_transverse);

}  // namespace apfv
