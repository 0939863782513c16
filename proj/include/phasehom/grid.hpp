#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <string>
#include <vector>

#include "core_math.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace phasehom {

/// Layout of a box grid in a rotated frame: y = rotation * s + origin, with the
/// local box [lo, hi] split into cells of side h.
template <std::size_t Dim>
struct GridSpec {
    Vec<Dim> origin{};
    Mat<Dim> rotation{};
    Vec<Dim> lo{};
    Vec<Dim> hi{};
    double h = 0.25;
    std::array<bool, Dim> periodic{};
    /// Ghost nodes are unknowns rather than boundary data (free-boundary problems).
    bool free_ghosts = false;

    static GridSpec cube(const OrientedCube<Dim>& q, double h) {
        GridSpec g;
        g.origin = q.center;
        g.rotation = q.rotation;
        for (std::size_t i = 0; i < Dim; ++i) {
            g.lo[i] = -q.side / 2.0;
            g.hi[i] = q.side / 2.0;
        }
        g.h = h;
        return g;
    }

    /// Grid on int(T_nu R). The integer part of the base corner is moved into
    /// the origin so that lattice translates of R share their local node set.
    static GridSpec cuboid(const LatticeCuboid<Dim>& t, double h) {
        GridSpec g;
        g.rotation = t.rotation();
        IVec<Dim - 1> whole{};
        auto shifted = t;
        if constexpr (Dim > 1) {
            for (std::size_t i = 0; i < Dim - 1; ++i)
                whole[i] = static_cast<std::int64_t>(std::floor(t.base()[i].first));
            IVec<Dim - 1> neg{};
            for (std::size_t i = 0; i < Dim - 1; ++i) neg[i] = -whole[i];
            shifted = t.translated(neg);
            const auto z = t.shift_vector(whole);
            for (std::size_t i = 0; i < Dim; ++i) g.origin[i] = static_cast<double>(z[i]);
        }
        const auto [lo, hi] = shifted.local_bounds();
        g.lo = lo;
        g.hi = hi;
        g.h = h;
        return g;
    }
};

/// Scalar field on the nodes of a box grid.
///
/// Nodes sit at cell centres, so summing the integrand over them with weight
/// h^n is the midpoint rule on the box. Non-periodic axes carry one ghost layer
/// outside the box which holds boundary data for the stencils; periodic axes wrap.
template <std::size_t Dim>
class GridField {
public:
    static_assert(Dim == 1 || Dim == 2, "only n = 1 and n = 2 are supported");
    /// Neighbour slots per node: -e_i, +e_i for each axis, then the four diagonals in 2D.
    static constexpr int kNeighbors = Dim == 1 ? 2 : 8;

    GridField() = default;

    explicit GridField(const GridSpec<Dim>& spec) : spec_(spec) {
        if (!(spec.h > 0.0)) throw ConfigError("grid spacing must be positive");
        std::size_t total = 1;
        for (std::size_t i = 0; i < Dim; ++i) {
            const double len = spec.hi[i] - spec.lo[i];
            const double n = len / spec.h;
            const auto cells = static_cast<std::int64_t>(std::llround(n));
            if (cells < 1 || std::abs(static_cast<double>(cells) * spec.h - len) > 1e-9)
                throw ConfigError("grid spacing h must divide every side length");
            if (spec.periodic[i] && cells < 3) throw ConfigError("periodic axes need at least three cells");
            cells_[i] = static_cast<int>(cells);
            ghost_[i] = spec.periodic[i] ? 0 : 1;
            extent_[i] = cells_[i] + 2 * ghost_[i];
        }
        for (int i = static_cast<int>(Dim) - 1; i >= 0; --i) {
            stride_[i] = static_cast<int>(total);
            total *= static_cast<std::size_t>(extent_[i]);
        }
        values_.assign(total, 0.0);
        frozen_.assign(total, spec.free_ghosts ? 0 : 1);
        build_tables();
        for (auto k : interior_) frozen_[static_cast<std::size_t>(k)] = 0;
    }

    const GridSpec<Dim>& spec() const noexcept { return spec_; }
    double h() const noexcept { return spec_.h; }
    const Mat<Dim>& rotation() const noexcept { return spec_.rotation; }
    int cells(int axis) const { return cells_[axis]; }
    int extent(int axis) const { return extent_[axis]; }
    bool periodic(int axis) const { return spec_.periodic[axis]; }

    /// R e_n, the interface normal the grid is aligned with.
    Vec<Dim> normal() const {
        Vec<Dim> n{};
        for (std::size_t i = 0; i < Dim; ++i) n[i] = spec_.rotation[i][Dim - 1];
        return n;
    }

    std::size_t size() const noexcept { return values_.size(); }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }

    bool is_frozen(std::size_t k) const { return frozen_[k] != 0; }
    void set_frozen(std::size_t k, bool f) { frozen_[k] = f ? 1 : 0; }
    const std::vector<std::uint8_t>& frozen_mask() const noexcept { return frozen_; }

    /// Nodes inside the box (those carrying quadrature weight), in row-major order.
    const std::vector<std::int32_t>& interior() const noexcept { return interior_; }
    /// Neighbour indices of interior()[k], kNeighbors per node.
    const std::int32_t* neighbors(std::size_t k) const { return &neighbors_[k * kNeighbors]; }

    std::array<int, Dim> multi_index(std::size_t k) const {
        std::array<int, Dim> m{};
        for (std::size_t i = 0; i < Dim; ++i) {
            m[i] = static_cast<int>(k / static_cast<std::size_t>(stride_[i]));
            k %= static_cast<std::size_t>(stride_[i]);
        }
        return m;
    }

    std::size_t flat_index(const std::array<int, Dim>& m) const {
        std::size_t k = 0;
        for (std::size_t i = 0; i < Dim; ++i) k += static_cast<std::size_t>(m[i]) * static_cast<std::size_t>(stride_[i]);
        return k;
    }

    bool is_interior(std::size_t k) const {
        const auto m = multi_index(k);
        for (std::size_t i = 0; i < Dim; ++i)
            if (m[i] < ghost_[i] || m[i] >= ghost_[i] + cells_[i]) return false;
        return true;
    }

    Vec<Dim> local(std::size_t k) const {
        const auto m = multi_index(k);
        Vec<Dim> s{};
        for (std::size_t i = 0; i < Dim; ++i) s[i] = spec_.lo[i] + (m[i] - ghost_[i] + 0.5) * spec_.h;
        return s;
    }

    Vec<Dim> physical(std::size_t k) const { return apply<Dim>(spec_.rotation, local(k)) + spec_.origin; }

    /// Distance from a local point to the non-periodic faces of the box.
    double distance_to_boundary(const Vec<Dim>& s) const {
        double d = INFINITY;
        for (std::size_t i = 0; i < Dim; ++i) {
            if (spec_.periodic[i]) continue;
            d = std::min({d, s[i] - spec_.lo[i], spec_.hi[i] - s[i]});
        }
        return d;
    }

    void fill(const std::function<double(const Vec<Dim>&)>& f) {
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] = f(physical(k));
    }

    /// Freezes every node closer than `width` to a non-periodic face (ghosts included).
    void freeze_frame(double width) {
        for (std::size_t k = 0; k < values_.size(); ++k)
            if (!is_interior(k) || distance_to_boundary(local(k)) < width) frozen_[k] = 1;
    }

    /// Frozen frames on the two faces orthogonal to the last axis, with values -1 below and +1 above.
    void freeze_end_caps(double width) {
        const std::size_t n = Dim - 1;
        for (std::size_t k = 0; k < values_.size(); ++k) {
            const auto s = local(k);
            const double d = std::min(s[n] - spec_.lo[n], spec_.hi[n] - s[n]);
            if (d < width) {
                frozen_[k] = 1;
                values_[k] = s[n] > 0.5 * (spec_.lo[n] + spec_.hi[n]) ? 1.0 : -1.0;
            }
        }
    }

    void unfreeze_all() { std::fill(frozen_.begin(), frozen_.end(), 0); }

    bool same_layout(const GridField& o) const {
        if (cells_ != o.cells_ || spec_.periodic != o.spec_.periodic) return false;
        if (std::abs(spec_.h - o.spec_.h) > 1e-12) return false;
        for (std::size_t i = 0; i < Dim; ++i) {
            if (std::abs(spec_.lo[i] - o.spec_.lo[i]) > 1e-9 || std::abs(spec_.origin[i] - o.spec_.origin[i]) > 1e-9)
                return false;
            for (std::size_t j = 0; j < Dim; ++j)
                if (std::abs(spec_.rotation[i][j] - o.spec_.rotation[i][j]) > 1e-12) return false;
        }
        return true;
    }

    /// Plain-text export: a header line then the interior values row by row.
    void write_text(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw Error("cannot open " + path + " for writing");
        const auto nu = normal();
        out << "# n=" << Dim << " sides=";
        for (std::size_t i = 0; i < Dim; ++i) out << (i ? " " : "") << spec_.hi[i] - spec_.lo[i];
        out << " h=" << spec_.h << " nu=";
        for (std::size_t i = 0; i < Dim; ++i) out << (i ? " " : "") << nu[i];
        out << '\n' << std::setprecision(17);
        const int row = cells_[Dim - 1];
        for (std::size_t k = 0; k < interior_.size(); ++k) {
            out << values_[static_cast<std::size_t>(interior_[k])];
            out << ((k + 1) % static_cast<std::size_t>(row) == 0 ? '\n' : ' ');
        }
    }

private:
    int wrap(int axis, int m) const {
        if (!spec_.periodic[axis]) return m;
        const int n = cells_[axis];
        return ((m % n) + n) % n;
    }

    std::int32_t neighbor_of(std::array<int, Dim> m, const std::array<int, Dim>& d) const {
        for (std::size_t i = 0; i < Dim; ++i) m[i] = wrap(i, m[i] + d[i]);
        return static_cast<std::int32_t>(flat_index(m));
    }

    void build_tables() {
        interior_.clear();
        neighbors_.clear();
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!is_interior(k)) continue;
            interior_.push_back(static_cast<std::int32_t>(k));
            const auto m = multi_index(k);
            for (std::size_t i = 0; i < Dim; ++i) {
                std::array<int, Dim> d{};
                d[i] = -1;
                neighbors_.push_back(neighbor_of(m, d));
                d[i] = 1;
                neighbors_.push_back(neighbor_of(m, d));
            }
            if constexpr (Dim == 2) {
                for (int a : {-1, 1})
                    for (int b : {-1, 1}) neighbors_.push_back(neighbor_of(m, {a, b}));
            }
        }
    }

    GridSpec<Dim> spec_{};
    std::array<int, Dim> cells_{};
    std::array<int, Dim> ghost_{};
    std::array<int, Dim> extent_{};
    std::array<int, Dim> stride_{};
    std::vector<double> values_;
    std::vector<std::uint8_t> frozen_;
    std::vector<std::int32_t> interior_;
    std::vector<std::int32_t> neighbors_;
};

/// Central-difference gradient at interior node interior()[k], local frame.
template <std::size_t Dim>
Vec<Dim> discrete_gradient_local(const GridField<Dim>& f, std::size_t k) {
    const auto* nb = f.neighbors(k);
    Vec<Dim> g{};
    for (std::size_t i = 0; i < Dim; ++i) g[i] = (f[nb[2 * i + 1]] - f[nb[2 * i]]) / (2.0 * f.h());
    return g;
}

/// Second-order Hessian stencils at interior node interior()[k], local frame.
template <std::size_t Dim>
Mat<Dim> discrete_hessian_local(const GridField<Dim>& f, std::size_t k) {
    const auto* nb = f.neighbors(k);
    const double h2 = f.h() * f.h();
    const double u = f[static_cast<std::size_t>(f.interior()[k])];
    Mat<Dim> hess{};
    for (std::size_t i = 0; i < Dim; ++i) hess[i][i] = (f[nb[2 * i + 1]] - 2.0 * u + f[nb[2 * i]]) / h2;
    if constexpr (Dim == 2) {
        // diagonal slots: (-,-), (-,+), (+,-), (+,+)
        const double cross = (f[nb[7]] - f[nb[6]] - f[nb[5]] + f[nb[4]]) / (4.0 * h2);
        hess[0][1] = hess[1][0] = cross;
    }
    return hess;
}

/// Physical-frame gradient R grad_s u.
template <std::size_t Dim>
Vec<Dim> discrete_gradient(const GridField<Dim>& f, std::size_t k) {
    return apply<Dim>(f.rotation(), discrete_gradient_local(f, k));
}

/// Physical-frame Hessian R H_s R^T.
template <std::size_t Dim>
Mat<Dim> discrete_hessian(const GridField<Dim>& f, std::size_t k) {
    return conjugate<Dim>(f.rotation(), discrete_hessian_local(f, k));
}

/// u(y) = eta((y - x0) . nu / epsilon) at every node, ghosts included.
template <std::size_t Dim>
void profile_field(GridField<Dim>& f, const Vec<Dim>& nu, const Vec<Dim>& x0, double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    f.fill([&](const Vec<Dim>& y) { return TransitionProfile::value(dot<Dim>(y - x0, nu) / epsilon); });
}

/// Sharp limit of the profile: +1 where (y - x0) . nu >= 0, else -1.
template <std::size_t Dim>
double jump_function(const Vec<Dim>& y, const Vec<Dim>& nu, const Vec<Dim>& x0) {
    return dot<Dim>(y - x0, nu) >= 0.0 ? 1.0 : -1.0;
}

}  // namespace phasehom
