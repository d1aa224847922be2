// oracles.hpp - Independent reference computations used only by the tests.

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "giantbic/model.hpp"

namespace giantbic::oracle {

using big = boost::multiprecision::cpp_bin_float_50;

// Power series sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!) in 50-digit arithmetic.
inline double bessel_series(int n, double xd) {
    const big x = xd;
    const big half = x / 2;
    big term = 1;
    for (int j = 1; j <= n; ++j) term *= half / j;
    big sum = term;
    const big q = half * half;
    for (int k = 1; k < 400; ++k) {
        term *= -q / (big(k) * big(k + n));
        sum += term;
        if (abs(term) < big("1e-45") * (abs(sum) + 1)) break;
    }
    return static_cast<double>(sum);
}

// Boost.Math in 50-digit arithmetic, for arguments where the series cancels badly.
inline double bessel_boost50(int n, double x) {
    return static_cast<double>(boost::math::cyl_bessel_j(big(n), big(x)));
}

// Open chain of length n_c: eigenvalue q (1-based) and normalized eigenvector.
inline double open_chain_energy(int q, int n_c, double omega_c, double xi) {
    return omega_c - 2.0 * xi * std::cos(q * std::numbers::pi / (n_c + 1));
}

inline std::vector<double> open_chain_mode(int q, int n_c) {
    std::vector<double> v(static_cast<std::size_t>(n_c));
    const double norm = std::sqrt(2.0 / (n_c + 1));
    for (int s = 0; s < n_c; ++s) v[static_cast<std::size_t>(s)] = norm * std::sin(q * (s + 1) * std::numbers::pi / (n_c + 1));
    return v;
}

}  // namespace giantbic::oracle
