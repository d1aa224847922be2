// specfun.hpp - Integer-order Bessel functions of the first kind.
//
// All orders 0..order_max at one argument are produced together by Miller's
// downward recurrence, normalized with J_0 + 2 sum_k J_2k = 1. Downward
// recurrence is stable for every order, so the same path serves n < x and
// n > x. Negative orders follow J_{-n}(x) = (-1)^n J_n(x).

#pragma once

#include <span>
#include <vector>

namespace giantbic {

struct BesselRow {
    int order_max{0};
    double x{0.0};
    std::vector<double> values;  // J_0(x) .. J_order_max(x)

    // Any integer order with |n| <= order_max.
    double operator()(int n) const;
};

double bessel_j(int n, double x);

BesselRow bessel_j_row(int order_max, double x);

// Allocation-free variant for hot loops; out.size() - 1 is the maximal order.
void bessel_j_row_into(double x, std::span<double> out);

}  // namespace giantbic
