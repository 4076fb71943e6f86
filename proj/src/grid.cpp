#include "cfdscope/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cfdscope {

GridSpec::GridSpec(int cells, double spacing) : n(cells), h(spacing) {
    if (cells < 1) throw std::invalid_argument("grid needs at least one cell per side");
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw std::invalid_argument("cell edge length must be positive and finite");
}

VelocityField::VelocityField(const GridSpec& spec) : spec_(spec) {
    for (int a = 0; a < 3; ++a) {
        const auto ext = face_extents(spec, static_cast<Axis>(a));
        data_[a].assign(static_cast<std::size_t>(ext[0]) * ext[1] * ext[2], 0.0);
    }
}

Vec3 VelocityField::face_position(Axis a, int i, int j, int k) const {
    Vec3 pos{(i + 0.5) * spec_.h, (j + 0.5) * spec_.h, (k + 0.5) * spec_.h};
    const int ax = static_cast<int>(a);
    const int idx[3] = {i, j, k};
    pos[ax] = idx[ax] * spec_.h;
    return pos;
}

void VelocityField::fill(double value) {
    for (auto& c : data_) std::fill(c.begin(), c.end(), value);
}

ScalarField::ScalarField(const GridSpec& spec, double value) : spec_(spec), data_(spec.cell_count(), value) {}

namespace {

struct LatticeCoord {
    int lo;
    int hi;
    double t;
};

// Clamps lattice coordinate g to [0, extent-1] and splits it into the two
// bracketing nodes and the weight of the upper one.
inline LatticeCoord bracket(double g, int extent) {
    const double top = static_cast<double>(extent - 1);
    g = std::clamp(g, 0.0, top);
    if (extent == 1) return {0, 0, 0.0};
    int lo = static_cast<int>(g);
    if (lo >= extent - 1) lo = extent - 2;
    return {lo, lo + 1, g - lo};
}

}  // namespace

double sample_component(const VelocityField& field, Axis a, const Vec3& point) {
    const GridSpec& spec = field.spec();
    const auto ext = face_extents(spec, a);
    const int ax = static_cast<int>(a);

    LatticeCoord c[3];
    for (int d = 0; d < 3; ++d) {
        const double g = point[d] / spec.h - (d == ax ? 0.0 : 0.5);
        c[d] = bracket(g, ext[d]);
    }

    const auto& data = field.component(a);
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(ext[0]);
    const std::size_t sz = sy * static_cast<std::size_t>(ext[1]);
    auto value = [&](int i, int j, int k) { return data[i * sx + j * sy + k * sz]; };

    const double tx = c[0].t, ty = c[1].t, tz = c[2].t;
    const double c00 = value(c[0].lo, c[1].lo, c[2].lo) * (1 - tx) + value(c[0].hi, c[1].lo, c[2].lo) * tx;
    const double c10 = value(c[0].lo, c[1].hi, c[2].lo) * (1 - tx) + value(c[0].hi, c[1].hi, c[2].lo) * tx;
    const double c01 = value(c[0].lo, c[1].lo, c[2].hi) * (1 - tx) + value(c[0].hi, c[1].lo, c[2].hi) * tx;
    const double c11 = value(c[0].lo, c[1].hi, c[2].hi) * (1 - tx) + value(c[0].hi, c[1].hi, c[2].hi) * tx;
    const double c0 = c00 * (1 - ty) + c10 * ty;
    const double c1 = c01 * (1 - ty) + c11 * ty;
    return c0 * (1 - tz) + c1 * tz;
}

Vec3 sample_velocity(const VelocityField& field, const Vec3& point) {
    if (!std::isfinite(point[0]) || !std::isfinite(point[1]) || !std::isfinite(point[2]))
        throw std::domain_error("non-finite sample position; velocity field is corrupted");
    return {sample_component(field, Axis::x, point), sample_component(field, Axis::y, point),
            sample_component(field, Axis::z, point)};
}

ScalarField divergence(const VelocityField& field) {
    const GridSpec& spec = field.spec();
    const int n = spec.n;
    ScalarField div(spec);
    const auto& u = field.u();
    const auto& v = field.v();
    const auto& w = field.w();
    const double inv_h = 1.0 / spec.h;
    const std::size_t nn = static_cast<std::size_t>(n);

#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                // u lattice is (n+1) x n x n, v is n x (n+1) x n, w is n x n x (n+1).
                const std::size_t iu = i + (nn + 1) * (j + nn * k);
                const std::size_t iv = i + nn * (j + (nn + 1) * k);
                const std::size_t iw = i + nn * (j + nn * k);
                div.data()[iw] = ((u[iu + 1] - u[iu]) + (v[iv + nn] - v[iv]) + (w[iw + nn * nn] - w[iw])) * inv_h;
            }
        }
    }
    return div;
}

double max_abs(const ScalarField& field) {
    double m = 0.0;
    for (double x : field.data()) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace cfdscope
