#pragma once

#include "obstlab/grid.hpp"
#include "obstlab/verify.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace obstlab {

struct FreeBoundaryPoint {
    double t = 0.0;
    int time_index = 0;
    Vec x;
    int axis = 0;                 // grid line direction of the crossing
    std::size_t positive_node = 0;
    std::size_t zero_node = 0;
    bool classified = false;      // classification ran (f > 0 and cylinders inside)
    bool regular = false;
    Vec normal;                   // fitted nu, empty until classified
    double m_reg = 0.0;
};

struct FreeBoundaryCloud {
    int n = 1;
    std::vector<FreeBoundaryPoint> points;
};

/// h^2/4: below the quadratic growth of u one cell away from the interface.
double default_extraction_threshold(const Grid& grid);

/// Sign changes of {u > eps} between neighbouring nodes along every grid line and
/// time slice k >= 1. The crossing is the zero of the line through sqrt(u) at
/// the positive node and the next node inward, clamped to the cell.
FreeBoundaryCloud extract_free_boundary(const ScalarField& u, std::optional<double> eps_pos = std::nullopt);

/// Runs classify_regular at every `stride`-th point (shifted center). Points whose
/// cylinders leave the domain, or where f <= 0, stay unclassified.
FreeBoundaryCloud classify_points(const ScalarField& u, const ScalarField& f, const FreeBoundaryCloud& cloud,
                                  const CheckOptions& opts, std::size_t stride = 1);

/// Remainder ratios |g(x'+h',t+k) - g(x',t) - h'.D g| / sqrt(|h'|^2 + |k|) of the
/// graph x_axis = g(x', t), binned by parabolic scale (factor-2 bins).
struct GraphDiagnostic {
    int axis = 0;
    std::vector<double> scales;
    std::vector<double> mean_ratio;
    std::vector<double> max_ratio;
    std::vector<std::size_t> counts;
    double slope = 0.0;  // log-log slope of mean_ratio against scale
};
GraphDiagnostic graph_diagnostic(const FreeBoundaryCloud& cloud, const Grid& grid, int axis = 0);

/// `t,x1..xn,regular,nu1..nun`; nu cells are empty for unclassified points.
std::string cloud_csv(const FreeBoundaryCloud& cloud);
void write_cloud_csv(const std::filesystem::path& path, const FreeBoundaryCloud& cloud);

}  // namespace obstlab
