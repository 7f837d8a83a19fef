#ifndef GPE_GRID_HPP
#define GPE_GRID_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "gpe/errors.hpp"

namespace gpe {

using Complex = std::complex<double>;

enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline int axis_index(Axis a) { return static_cast<int>(a); }

/// Rectangular tensor-product grid specification. The box is [-L, L] per
/// axis in harmonic-oscillator units; spacing per axis is h = 2L/(n-1),
/// nodes include both endpoints.
struct GridSpec {
    int dimension = 2;
    std::array<int, 3> points{0, 0, 0};
    std::array<double, 3> half_extent{0.0, 0.0, 0.0};

    static GridSpec square2d(int n, double half_extent);
    static GridSpec cube3d(int n, double half_extent);
};

/// Validated grid with cached spacings and node coordinates.
///
/// Node layout is x-fastest: index = i + nx*(j + ny*k).
class Grid {
  public:
    Grid() = default;

    /// Throws InvalidGridError on malformed specs. Grids down to 7 points
    /// per axis are accepted so that small dense-oracle grids can be built;
    /// production configurations are validated separately (>= 16).
    explicit Grid(const GridSpec& spec);

    int dimension() const { return dim_; }
    int points(int axis) const { return n_[axis]; }
    double half_extent(int axis) const { return half_[axis]; }
    double spacing(int axis) const { return h_[axis]; }
    std::size_t node_count() const { return count_; }
    const GridSpec& spec() const { return spec_; }

    double coord(int axis, int i) const { return coords_[axis][i]; }
    const std::vector<double>& coords(int axis) const { return coords_[axis]; }

    std::size_t index2(int i, int j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_[0]) * j;
    }
    std::size_t index3(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(n_[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_[1]) * k);
    }

    /// Stride of one step along `axis` in the flat value array.
    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(n_[a]);
        return s;
    }

    bool compatible(const Grid& other) const {
        return dim_ == other.dim_ && n_ == other.n_ && half_ == other.half_;
    }

    /// Quadrature weight of a node (trapezoid-consistent uniform h-product
    /// weights).
    double weight2(int i, int j) const { return wx_[0][i] * wx_[1][j]; }
    double weight3(int i, int j, int k) const { return wx_[0][i] * wx_[1][j] * wx_[2][k]; }

    const std::vector<double>& axis_weights(int axis) const { return wx_[axis]; }

  private:
    GridSpec spec_{};
    int dim_ = 0;
    std::array<int, 3> n_{1, 1, 1};
    std::array<double, 3> half_{0, 0, 0};
    std::array<double, 3> h_{0, 0, 0};
    std::size_t count_ = 0;
    std::array<std::vector<double>, 3> coords_;
    std::array<std::vector<double>, 3> wx_;
};

/// Real scalar samples over a grid (densities, potentials, diagnostics).
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(g), values(g.node_count(), 0.0) {}
    ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {}
};

/// Complex amplitudes over a grid; the wave function and operator outputs.
struct ComplexField {
    Grid grid;
    std::vector<Complex> values;

    ComplexField() = default;
    explicit ComplexField(const Grid& g) : grid(g), values(g.node_count(), Complex(0.0, 0.0)) {}
    ComplexField(const Grid& g, std::vector<Complex> v) : grid(g), values(std::move(v)) {}

    std::size_t size() const { return values.size(); }

    /// Shape consistency: value count must match the grid.
    void require_conforming(const char* where) const;
    /// Shape plus finiteness of every amplitude.
    void require_finite(const char* where) const;
};

} // namespace gpe

#endif
