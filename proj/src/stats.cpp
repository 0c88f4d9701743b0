#include "stresskit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stresskit::stats {

double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double pop_std(std::span<const double> v) {
    const double m = mean(v);
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return std::sqrt(s2 / static_cast<double>(v.size()));
}

double skewness(std::span<const double> v) {
    const double m = mean(v);
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("percentile: empty input");
    if (p < 0.0 || p > 100.0) throw std::invalid_argument("percentile: p outside [0,100]");
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = (static_cast<double>(n) - 1.0) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double percentile(std::span<const double> v, double p) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return percentile_sorted(s, p);
}

double median(std::span<const double> v) { return percentile(v, 50.0); }

double mad(std::span<const double> v) {
    const double med = median(v);
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
    return median(dev);
}

Quartiles quartiles(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return Quartiles{percentile_sorted(s, 50.0), percentile_sorted(s, 25.0),
                     percentile_sorted(s, 75.0)};
}

double trapezoid(std::span<const double> t, std::span<const double> v) {
    if (t.size() != v.size()) throw std::invalid_argument("trapezoid: length mismatch");
    double a = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        a += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    return a;
}

}  // namespace stresskit::stats
