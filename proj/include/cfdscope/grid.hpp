#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <vector>

namespace cfdscope {

using Vec3 = std::array<double, 3>;

/// Cubic cell-centered grid with origin at 0. Cell (i,j,k) has its center at
/// ((i+1/2)h, (j+1/2)h, (k+1/2)h).
struct GridSpec {
    int n = 1;
    double h = 1.0;

    GridSpec() = default;
    GridSpec(int cells, double spacing);

    [[nodiscard]] double length() const { return n * h; }
    [[nodiscard]] std::size_t cell_count() const {
        return static_cast<std::size_t>(n) * n * n;
    }
    [[nodiscard]] Vec3 cell_center(int i, int j, int k) const {
        return {(i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h};
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Flat cell index, i fastest.
inline std::size_t cell_index(const GridSpec& spec, int i, int j, int k) {
    assert(i >= 0 && i < spec.n && j >= 0 && j < spec.n && k >= 0 && k < spec.n);
    const auto n = static_cast<std::size_t>(spec.n);
    return static_cast<std::size_t>(i) + n * (static_cast<std::size_t>(j) + n * static_cast<std::size_t>(k));
}

enum class Axis { x = 0, y = 1, z = 2 };

/// Extents of the face lattice holding the velocity component normal to
/// `axis`: n+1 along that axis, n along the other two.
inline std::array<int, 3> face_extents(const GridSpec& spec, Axis axis) {
    std::array<int, 3> ext{spec.n, spec.n, spec.n};
    ext[static_cast<int>(axis)] += 1;
    return ext;
}

/// Staggered (MAC) velocity: each component lives on the faces normal to its
/// axis. Face (i,j,k) of component `a` sits at the lower `a`-face of cell
/// (i,j,k), so u(i,j,k) is located at (i h, (j+1/2)h, (k+1/2)h).
class VelocityField {
public:
    VelocityField() = default;
    explicit VelocityField(const GridSpec& spec);

    [[nodiscard]] const GridSpec& spec() const { return spec_; }

    [[nodiscard]] std::vector<double>& component(Axis a) { return data_[static_cast<int>(a)]; }
    [[nodiscard]] const std::vector<double>& component(Axis a) const {
        return data_[static_cast<int>(a)];
    }
    std::vector<double>& u() { return data_[0]; }
    std::vector<double>& v() { return data_[1]; }
    std::vector<double>& w() { return data_[2]; }
    [[nodiscard]] const std::vector<double>& u() const { return data_[0]; }
    [[nodiscard]] const std::vector<double>& v() const { return data_[1]; }
    [[nodiscard]] const std::vector<double>& w() const { return data_[2]; }

    [[nodiscard]] std::size_t face_index(Axis a, int i, int j, int k) const {
        const auto ext = face_extents(spec_, a);
        assert(i >= 0 && i < ext[0] && j >= 0 && j < ext[1] && k >= 0 && k < ext[2]);
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(ext[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(ext[1]) * static_cast<std::size_t>(k));
    }
    double& at(Axis a, int i, int j, int k) { return component(a)[face_index(a, i, j, k)]; }
    [[nodiscard]] double at(Axis a, int i, int j, int k) const {
        return component(a)[face_index(a, i, j, k)];
    }

    /// Physical position of face (i,j,k) of component `a`.
    [[nodiscard]] Vec3 face_position(Axis a, int i, int j, int k) const;

    void fill(double value);

    friend bool operator==(const VelocityField&, const VelocityField&) = default;

private:
    GridSpec spec_;
    std::array<std::vector<double>, 3> data_;
};

/// Cell-centered scalar (pressure, divergence, right-hand side).
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& spec, double value = 0.0);

    [[nodiscard]] const GridSpec& spec() const { return spec_; }
    [[nodiscard]] std::vector<double>& data() { return data_; }
    [[nodiscard]] const std::vector<double>& data() const { return data_; }

    double& at(int i, int j, int k) { return data_[cell_index(spec_, i, j, k)]; }
    [[nodiscard]] double at(int i, int j, int k) const { return data_[cell_index(spec_, i, j, k)]; }

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    GridSpec spec_;
    std::vector<double> data_;
};

/// Trilinear interpolation of one velocity component on its own face
/// lattice. Coordinates outside the lattice hull are clamped.
double sample_component(const VelocityField& field, Axis a, const Vec3& point);

/// Velocity at an arbitrary point. Throws std::domain_error on non-finite
/// input, which only happens when the state has already blown up.
Vec3 sample_velocity(const VelocityField& field, const Vec3& point);

/// Per-cell (u[i+1]-u[i] + v[j+1]-v[j] + w[k+1]-w[k]) / h.
ScalarField divergence(const VelocityField& field);

double max_abs(const ScalarField& field);

}  // namespace cfdscope
