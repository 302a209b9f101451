#include "apfv/grid.hpp"

#include "apfv/errors.hpp"

#include <cmath>

namespace apfv {

Grid1D make_grid1d(std::size_t n_cells, double h, Boundary bc) {
    if (n_cells < 4) throw PreconditionError("make_grid1d: n_cells must be >= 4");
    if (!(h > 0.0) || !std::isfinite(h)) throw PreconditionError("make_grid1d: h must be positive");
    return Grid1D{n_cells, h, bc};
}

Field Field::cells(const Grid1D& g, double init) {
    return Field{Staggering::cell, std::vector<double>(g.n_cells + 2, init)};
}

Field Field::faces(const Grid1D& g, double init) {
    return Field{Staggering::face, std::vector<double>(g.n_faces(), init)};
}

void apply_bc_inplace(Field& field, const Grid1D& grid) {
    if (field.stag != Staggering::cell)
        throw PreconditionError("apply_bc: ghost layers exist only for cell-centred fields");
    const std::size_t n = grid.n_cells;
    if (field.values.size() != n + 2) throw PreconditionError("apply_bc: field/grid size mismatch");
    auto& v = field.values;
    if (grid.bc == Boundary::periodic) {
        v[0] = v[n];
        v[n + 1] = v[1];
    } else {
        v[0] = v[1];
        v[n + 1] = v[n];
    }
}

Field apply_bc(Field field, const Grid1D& grid) {
    apply_bc_inplace(field, grid);
    return field;
}

bool Grid3D::is_interior(std::size_t id) const noexcept {
    const auto m = multi(id);
    for (int d = 0; d < 3; ++d) {
        if (periodic[d]) continue;
        if (m[d] == 0 || m[d] + 1 == n[d]) return false;
    }
    return true;
}

bool Grid3D::neighbor(std::size_t id, int dir, int s, std::size_t& out) const noexcept {
    auto m = multi(id);
    const auto nd = static_cast<long>(n[dir]);
    long c = static_cast<long>(m[dir]) + s;
    if (c < 0 || c >= nd) {
        if (!periodic[dir]) return false;
        c = (c + nd) % nd;
    }
    m[dir] = static_cast<std::size_t>(c);
    out = index(m[0], m[1], m[2]);
    return true;
}

std::size_t Grid3D::neighbor_or_self(std::size_t id, int dir, int s) const noexcept {
    std::size_t out = id;
    return neighbor(id, dir, s, out) ? out : id;
}

Grid3D make_grid3d(std::array<std::size_t, 3> n, std::array<double, 3> h,
                   bool periodic_transverse) {
    for (int d = 0; d < 3; ++d) {
        if (n[d] < 4) throw PreconditionError("make_grid3d: each extent must be >= 4");
        if (!(h[d] > 0.0)) throw PreconditionError("make_grid3d: cell widths must be positive");
    }
    Grid3D g;
    g.n = n;
    g.h = h;
    g.periodic = {periodic_transverse, periodic_transverse, false};
    return g;
}

}  // namespace apfv
