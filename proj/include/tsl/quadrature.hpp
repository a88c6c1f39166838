#pragma once

#include <vector>

namespace tsl {

/// Gauss-Legendre rule on [-1, 1] with all nodes listed (n in {4, 7, 10, 15, 20, 25, 30}).
struct QuadratureRule {
    std::vector<double> x;
    std::vector<double> w;

    /// Same rule mapped to [a, b].
    QuadratureRule mapped(double a, double b) const;
};

QuadratureRule gauss_legendre(int n);

/// Normalised bump eta(u) = exp(-1/(1-u^2)) / c on (-1, 1), unit mass.
double bump(double u);

/// Cumulative mass of the bump on (-1, u].
double bump_cdf(double u);

/// Partial moment int_{-1}^{u} s^j eta(s) ds for j in {0, 1, 2}.
double bump_moment(int j, double u);

/// First absolute moment of the bump, int |u| eta(u) du.
double bump_abs_moment();

}  // namespace tsl
