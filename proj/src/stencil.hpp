#pragma once

#include "obstlab/grid.hpp"

#include <vector>

namespace obstlab::detail {

// Interior spatial nodes of a grid with their 2n axis neighbours.
struct Stencil {
    explicit Stencil(const Grid& grid);

    int n;
    double inv_h2;
    std::vector<std::size_t> interior;        // ascending spatial indices
    std::vector<std::size_t> neighbours;      // 2n entries per interior node
    std::vector<unsigned char> is_interior;   // per spatial node

    // Delta_h of a full spatial vector at interior position i.
    double laplacian(const std::vector<double>& v, std::size_t i) const {
        double acc = 0.0;
        const std::size_t* nb = &neighbours[i * 2 * n];
        for (int j = 0; j < 2 * n; ++j) acc += v[nb[j]];
        return (acc - 2.0 * n * v[interior[i]]) * inv_h2;
    }
};

// Copies time slice k of a field into a spatial vector.
std::vector<double> slice(const ScalarField& field, int k);

}  // namespace obstlab::detail
