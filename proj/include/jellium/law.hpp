#pragma once

#include <functional>
#include <limits>
#include <string>

namespace jellium {

/// A continuous distribution on the real line seen through its CDF and quantile.
struct ContinuousLaw {
    std::string name;
    std::function<double(double)> cdf;
    std::function<double(double)> quantile;
    double support_lo = -std::numeric_limits<double>::infinity();
    double support_hi = std::numeric_limits<double>::infinity();
};

}  // namespace jellium
