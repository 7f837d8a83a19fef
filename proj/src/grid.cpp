#include "gpe/grid.hpp"

#include <cmath>
#include <string>

namespace gpe {

GridSpec GridSpec::square2d(int n, double half_extent) {
    GridSpec s;
    s.dimension = 2;
    s.points = {n, n, 1};
    s.half_extent = {half_extent, half_extent, 0.0};
    return s;
}

GridSpec GridSpec::cube3d(int n, double half_extent) {
    GridSpec s;
    s.dimension = 3;
    s.points = {n, n, n};
    s.half_extent = {half_extent, half_extent, half_extent};
    return s;
}

Grid::Grid(const GridSpec& spec) : spec_(spec), dim_(spec.dimension) {
    if (dim_ != 2 && dim_ != 3)
        throw InvalidGridError("grid dimension must be 2 or 3, got " + std::to_string(dim_));
    count_ = 1;
    for (int a = 0; a < dim_; ++a) {
        const int n = spec.points[a];
        const double L = spec.half_extent[a];
        if (n < 7)
            throw InvalidGridError("need at least 7 points per axis, got " + std::to_string(n));
        if (!(L > 0.0))
            throw InvalidGridError("half extent must be positive");
        n_[a] = n;
        half_[a] = L;
        h_[a] = 2.0 * L / (n - 1);
        count_ *= static_cast<std::size_t>(n);
        coords_[a].resize(n);
        // Trapezoid-consistent nodal summation: uniform h-product weights.
        // Fields carry Dirichlet decay, so the missing boundary half-factors
        // are below every tolerance in use, and the uniform weight keeps the
        // quadrature inner product exactly compatible with the symmetric
        // stencils (expectation values of Hermitian operators are real to
        // machine precision for any field).
        wx_[a].assign(n, h_[a]);
        for (int i = 0; i < n; ++i) coords_[a][i] = -L + h_[a] * i;
    }
    for (int a = dim_; a < 3; ++a) {
        n_[a] = 1;
        coords_[a] = {0.0};
        wx_[a] = {1.0};
    }
}

void ComplexField::require_conforming(const char* where) const {
    if (grid.node_count() == 0 || values.size() != grid.node_count())
        throw InvalidFieldError(std::string(where) + ": field has " + std::to_string(values.size()) +
                                " values for a grid of " + std::to_string(grid.node_count()) + " nodes");
}

void ComplexField::require_finite(const char* where) const {
    require_conforming(where);
    for (const Complex& z : values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw InvalidFieldError(std::string(where) + ": non-finite amplitude in field");
}

} // namespace gpe
