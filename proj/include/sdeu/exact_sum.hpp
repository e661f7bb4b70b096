#pragma once

#include <cmath>
#include <vector>

namespace sdeu {

/// Error-free transformation: a + b == sum + err exactly.
inline void two_sum(double a, double b, double& sum, double& err) {
    sum = a + b;
    const double bv = sum - a;
    err = (a - (sum - bv)) + (b - bv);
}

/// Error-free product: a * b == prod + err exactly (needs a correct fma).
inline void two_prod(double a, double b, double& prod, double& err) {
    prod = a * b;
    err = std::fma(a, b, -prod);
}

/**
 * Exact accumulator over doubles (Shewchuk non-overlapping partials with a
 * correctly rounded result, as in Python's math.fsum).
 *
 * The result is the exact sum of every added term rounded once, so it is
 * independent of the order in which terms arrive.
 */
class ExactSum {
public:
    ExactSum() { partials_.reserve(8); }

    void add(double x) {
        std::size_t i = 0;
        for (double y : partials_) {
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials_[i++] = lo;
            x = hi;
        }
        partials_.resize(i);
        partials_.push_back(x);
    }

    /// Adds a - b without rounding the difference.
    void add_difference(double a, double b) {
        double s, e;
        two_sum(a, -b, s, e);
        add(s);
        if (e != 0.0) add(e);
    }

    /// Adds |a - b| without rounding the difference.
    void add_abs_difference(double a, double b) {
        double s, e;
        two_sum(a, -b, s, e);
        if (s < 0.0 || (s == 0.0 && e < 0.0)) {
            s = -s;
            e = -e;
        }
        add(s);
        if (e != 0.0) add(e);
    }

    /// Adds a * b without rounding the product.
    void add_product(double a, double b) {
        double p, e;
        two_prod(a, b, p, e);
        add(p);
        if (e != 0.0) add(e);
    }

    [[nodiscard]] double result() const {
        if (partials_.empty()) return 0.0;
        auto n = partials_.size();
        double hi = partials_[--n];
        double lo = 0.0;
        while (n > 0) {
            const double x = hi;
            const double y = partials_[--n];
            hi = x + y;
            const double yr = hi - x;
            lo = y - yr;
            if (lo != 0.0) break;
        }
        // Half-way case: round using the sign of the next partial.
        if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            const double yr = x - hi;
            if (y == yr) hi = x;
        }
        return hi;
    }

private:
    std::vector<double> partials_;
};

}  // namespace sdeu
