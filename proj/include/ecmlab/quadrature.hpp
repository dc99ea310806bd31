#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ecmlab {

// Gauss-Hermite rule for weight exp(-x^2): sum_i w_i f(x_i) ~ integral.
// Nodes ascending, exactly symmetric; weights sum to sqrt(pi).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: need n >= 1");
    GaussHermite rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);

    const int m = (n + 1) / 2;
    const double pim4 = 0.7511255444649425;  // pi^(-1/4)
    double z = 0.0, z_prev1 = 0.0, z_prev2 = 0.0, pp = 0.0;

    // Largest roots first, by Newton iteration on the recurrence.
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * z_prev2;
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * z_prev2;
        } else {
            z = 2.0 * z - z_prev2;
        }

        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-14 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("gauss_hermite: Newton iteration stalled");

        z_prev2 = z_prev1;
        z_prev1 = z;
        // central node of an odd rule is exactly zero
        const double node = (2 * i + 1 == n) ? 0.0 : z;
        rule.nodes[n - 1 - i] = node;
        rule.nodes[i] = -node;
        rule.weights[n - 1 - i] = 2.0 / (pp * pp);
        rule.weights[i] = rule.weights[n - 1 - i];
    }
    return rule;
}

// Quadrature for expectations under the standard normal:
// E[f(Z)] ~ sum_i weights[i] * f(nodes[i]).
struct NormalQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline NormalQuadrature normal_quadrature(int n) {
    const GaussHermite gh = gauss_hermite(n);
    NormalQuadrature q;
    q.nodes.resize(gh.nodes.size());
    q.weights.resize(gh.weights.size());
    const double sqrt2 = std::sqrt(2.0);
    const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        q.nodes[i] = sqrt2 * gh.nodes[i];
        q.weights[i] = gh.weights[i] * inv_sqrt_pi;
    }
    return q;
}

}  // namespace ecmlab
