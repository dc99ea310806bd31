#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ecmlab/quadrature.hpp"

namespace ecmlab {

// Discrete menu of relative jump sizes with probabilities summing to one.
struct JumpMenu {
    struct Entry {
        double size;  // relative jump size
        double prob;
    };
    std::vector<Entry> entries;

    double mean() const {
        double m = 0.0;
        for (const auto& e : entries) m += e.prob * e.size;
        return m;
    }

    double variance() const {
        const double m = mean();
        double v = 0.0;
        for (const auto& e : entries) v += e.prob * (e.size - m) * (e.size - m);
        return v;
    }

    void validate() const {
        if (entries.empty()) throw std::invalid_argument("JumpMenu: empty");
        double total = 0.0;
        for (const auto& e : entries) {
            if (!(e.prob > 0.0 && e.prob <= 1.0))
                throw std::invalid_argument("JumpMenu: probabilities must lie in (0,1]");
            total += e.prob;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("JumpMenu: probabilities must sum to 1");
    }
};

// Gauss-Hermite discretization of a normal jump-size distribution:
// sizes mean + sqrt(2)*std*x_i with probs w_i/sqrt(pi). Polynomial moments
// are exact up to degree 2n-1; an odd n puts the central node at the mean.
inline JumpMenu discretize_jump_distribution(double mean_jump, double jump_std, int node_count) {
    if (node_count < 1)
        throw std::invalid_argument("discretize_jump_distribution: need node_count >= 1");
    if (!(jump_std >= 0.0))
        throw std::invalid_argument("discretize_jump_distribution: jump_std must be >= 0");

    const GaussHermite gh = gauss_hermite(node_count);
    JumpMenu menu;
    menu.entries.reserve(gh.nodes.size());
    const double scale = std::sqrt(2.0) * jump_std;
    const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    for (std::size_t i = 0; i < gh.nodes.size(); ++i)
        menu.entries.push_back({mean_jump + scale * gh.nodes[i], gh.weights[i] * inv_sqrt_pi});
    return menu;
}

}  // namespace ecmlab
