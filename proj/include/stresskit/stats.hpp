#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stresskit::stats {

double mean(std::span<const double> v);

// Population standard deviation (divide by n).
double pop_std(std::span<const double> v);

// Sample skewness g1 = m3 / m2^{3/2}; defined as 0 for zero-variance input
// so flat windows do not propagate NaN.
double skewness(std::span<const double> v);

// Median with the averaging convention for even counts.
double median(std::span<const double> v);

// Median absolute deviation around the median.
double mad(std::span<const double> v);

// Percentile p in [0, 100] via linear interpolation between order
// statistics: h = (n-1)p/100, result = x[floor(h)] + frac(h) * (x[floor(h)+1]
// - x[floor(h)]). This convention is fixed for the whole project.
double percentile(std::span<const double> v, double p);

// Percentile over data already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double p);

struct Quartiles {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

Quartiles quartiles(std::span<const double> v);

// Trapezoidal integral of (t, v) samples.
double trapezoid(std::span<const double> t, std::span<const double> v);

}  // namespace stresskit::stats
