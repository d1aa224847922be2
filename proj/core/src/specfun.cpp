#include "giantbic/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "giantbic/model.hpp"

namespace giantbic {
namespace {

constexpr double kRescaleAbove = 1e250;

// Even starting order far enough above max(order, x) that the seeded error has
// decayed below double precision by the time the recurrence reaches order.
int miller_start(int order_max, double x) {
    const double top = std::max(static_cast<double>(order_max), x);
    int start = static_cast<int>(top + 30.0 + 15.0 * std::cbrt(x));
    return start + (start & 1);
}

}  // namespace

void bessel_j_row_into(double x, std::span<double> out) {
    if (out.empty()) return;
    if (!(x >= 0.0) || !std::isfinite(x)) throw SolverError("bessel_j: argument must be finite and >= 0");
    std::fill(out.begin(), out.end(), 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return;
    }
    const int order_max = static_cast<int>(out.size()) - 1;
    const int start = miller_start(order_max, x);
    const double two_over_x = 2.0 / x;

    double above = 0.0;   // f_{k+1}
    double current = 1e-300;  // f_k, arbitrary seed
    double norm = 0.0;    // f_0 + 2 sum f_2k
    for (int k = start; k >= 1; --k) {
        const double below = k * two_over_x * current - above;  // f_{k-1}
        above = current;
        current = below;
        const int n = k - 1;
        if (n <= order_max) out[static_cast<std::size_t>(n)] = current;
        if (n > 0 && (n & 1) == 0) norm += 2.0 * current;
        if (std::abs(current) > kRescaleAbove) {
            const double s = 1.0 / kRescaleAbove;
            above *= s;
            current *= s;
            norm *= s;
            for (int m = n; m <= order_max; ++m) out[static_cast<std::size_t>(m)] *= s;
        }
    }
    norm += current;  // f_0
    const double scale = 1.0 / norm;
    for (double& v : out) v *= scale;
}

BesselRow bessel_j_row(int order_max, double x) {
    if (order_max < 0) throw SolverError("bessel_j_row: order_max must be >= 0");
    BesselRow row{order_max, x, std::vector<double>(static_cast<std::size_t>(order_max) + 1)};
    bessel_j_row_into(x, row.values);
    return row;
}

double BesselRow::operator()(int n) const {
    const int a = std::abs(n);
    if (a > order_max) throw SolverError("BesselRow: order outside the tabulated row");
    const double v = values[static_cast<std::size_t>(a)];
    return (n < 0 && (a & 1)) ? -v : v;
}

double bessel_j(int n, double x) {
    const int a = std::abs(n);
    std::vector<double> buf(static_cast<std::size_t>(a) + 1);
    bessel_j_row_into(x, buf);
    const double v = buf.back();
    return (n < 0 && (a & 1)) ? -v : v;
}

}  // namespace giantbic
