#pragma once

#include "obstlab/common.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace obstlab {

/// Uniform space-time grid over the box [-R, R]^n x [t_final - T, t_final].
struct GridSpec {
    int n = 1;
    double R = 1.0;
    double T = 1.0;
    double h = 0.05;
    double dt = 0.0025;
    double t_final = 0.0;
};

struct NodeRef {
    std::size_t s = 0;  // spatial linear index
    int k = 0;          // time index
    friend bool operator==(const NodeRef&, const NodeRef&) = default;
    friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

class Grid {
public:
    /// Throws ConfigError unless n in {1,2,3}, h, dt > 0, R/h and T/dt integral
    /// (within 1e-9) and dt <= h^2.
    explicit Grid(const GridSpec& spec);

    const GridSpec& spec() const noexcept { return spec_; }
    int dim() const noexcept { return spec_.n; }
    double h() const noexcept { return spec_.h; }
    double dt() const noexcept { return spec_.dt; }

    int nodes_per_axis() const noexcept { return nx_; }
    std::size_t spatial_count() const noexcept { return ns_; }
    int time_count() const noexcept { return nt_; }
    std::size_t size() const noexcept { return ns_ * static_cast<std::size_t>(nt_); }

    double coord(int i) const noexcept { return -spec_.R + i * spec_.h; }
    double time(int k) const noexcept { return spec_.t_final - spec_.T + k * spec_.dt; }
    double t_start() const noexcept { return spec_.t_final - spec_.T; }

    // Axis 0 is the slowest-varying spatial index.
    std::array<int, 3> unravel(std::size_t s) const noexcept;
    std::size_t ravel(const std::array<int, 3>& idx) const noexcept;
    std::size_t stride(int axis) const noexcept { return strides_[axis]; }
    Vec position(std::size_t s) const;

    /// Values are stored space-major: all time slices of one spatial node are contiguous.
    std::size_t index(std::size_t s, int k) const noexcept {
        return s * static_cast<std::size_t>(nt_) + static_cast<std::size_t>(k);
    }

    bool on_lateral_boundary(std::size_t s) const noexcept;
    /// Nodes with |x| <= R.
    std::vector<bool> ball_mask() const;

    /// Smallest admissible analysis radius (4h).
    double r_min() const noexcept { return 4.0 * spec_.h; }

    /// Nearest node to a spatial point, or throws DomainError when off the grid by more than 1e-9 h.
    std::size_t nearest_spatial(const Vec& x) const;
    /// Exact node lookup: throws DomainError if `p` is not a grid node.
    NodeRef node_at(const SpaceTimePoint& p) const;

    bool same_shape(const Grid& other) const noexcept;

private:
    GridSpec spec_;
    int nx_ = 0;
    int nt_ = 0;
    std::size_t ns_ = 0;
    std::array<std::size_t, 3> strides_{};
};

Grid build_grid(const GridSpec& spec);

/// Discrete scalar function on a Grid. Immutable after construction.
class ScalarField {
public:
    /// Throws NumericalError if any value is not finite, ConfigError on a size mismatch.
    ScalarField(Grid grid, std::vector<double> values);

    static ScalarField sample(const Grid& grid, const std::function<double(const Vec&, double)>& g);
    static ScalarField constant(const Grid& grid, double c);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double at(std::size_t s, int k) const noexcept { return values_[grid_.index(s, k)]; }
    double at(const NodeRef& node) const noexcept { return at(node.s, node.k); }
    double center_time() const noexcept { return grid_.spec().t_final; }

    double min() const;
    double max() const;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Backward cylinder B_r(x0) x (t0 - r^2, t0].
struct Cylinder {
    SpaceTimePoint center;
    double r = 1.0;

    double measure() const;  // |B_r| r^2
};

bool cylinder_inside(const Grid& grid, const Cylinder& cyl);
void require_inside(const Grid& grid, const Cylinder& cyl);

/// Multilinear interpolation in space and time; throws DomainError outside the grid.
double evaluate(const ScalarField& field, const SpaceTimePoint& point);

/// x,t -> field(x0 + rho x, t0 + rho^2 t) / rho^2 sampled on `out`.
/// The default output grid covers Q_1^- with the source's h and dt.
ScalarField rescale(const ScalarField& field, const SpaceTimePoint& center, double rho);
ScalarField rescale(const ScalarField& field, const SpaceTimePoint& center, double rho,
                    const GridSpec& out);

/// Node-based quadrature of a backward cylinder.
///
/// A grid cell belongs to the cylinder when its center lies in it; each cell
/// spreads weight h^n dt evenly over its 2^(n+1) corners. Averages are
/// normalized by the total discrete weight, so constants average exactly.
struct CylinderSamples {
    struct Sample {
        Vec y;          // x - x0
        double s = 0;   // t - t0
        double w = 0;
        double value = 0;
        NodeRef node;
    };
    std::vector<Sample> samples;
    double total_weight = 0.0;
    Cylinder cylinder;
};

/// Throws DomainError if the cylinder leaves the grid.
CylinderSamples cylinder_samples(const ScalarField& field, const Cylinder& cyl);

/// ((1/|Q|) sum |g|^p)^(1/p) on the cylinder; p > 1 and r >= 4h.
double lp_average(const ScalarField& field, const Cylinder& cyl, double p);
double lp_average(const CylinderSamples& q, double p);

/// Lateral shell (closed ball nodes with an axis neighbour outside it) over
/// [t0 - r^2, t0] plus the bottom slice, sorted and unique.
std::vector<NodeRef> parabolic_boundary_nodes(const Grid& grid, const Cylinder& cyl);

}  // namespace obstlab
