#include "openchain/analytics.hpp"

#include <cmath>
#include <numbers>

namespace openchain {

namespace {

double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

struct Line {
    double slope = 0.0, intercept = 0.0, rms = 0.0;
};

Line least_squares(const std::vector<double> &x, const std::vector<double> &y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for(std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for(std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if(!(sxx > 0.0)) throw Error(ErrorKind::invalid_argument, "fit: all abscissae coincide");
    Line l;
    l.slope     = sxy / sxx;
    l.intercept = my - l.slope * mx;
    double ss   = 0.0;
    for(std::size_t k = 0; k < x.size(); ++k) {
        const double r = y[k] - (l.intercept + l.slope * x[k]);
        ss += r * r;
    }
    l.rms = std::sqrt(ss / n);
    return l;
}

// Indices with t in the closed window; checks the window against the data.
std::vector<std::size_t> window_indices(const std::vector<double> &t, const std::vector<double> &s, FitWindow w) {
    if(t.size() != s.size())
        throw Error(ErrorKind::dimension_mismatch, "fit: " + std::to_string(t.size()) + " times but " + std::to_string(s.size()) + " values");
    if(t.empty()) throw Error(ErrorKind::invalid_argument, "fit: empty trace");
    if(!(w.t_min < w.t_max)) throw Error(ErrorKind::invalid_argument, "fit: empty window");
    if(!(w.t_min > 0.0)) throw Error(ErrorKind::invalid_argument, "fit: window must start at t > 0");
    constexpr double slack = 1e-9;
    if(w.t_min < t.front() - slack || w.t_max > t.back() + slack)
        throw Error(ErrorKind::invalid_argument, "fit: window [" + std::to_string(w.t_min) + ", " + std::to_string(w.t_max) +
                                                     "] exceeds the trace span [" + std::to_string(t.front()) + ", " +
                                                     std::to_string(t.back()) + "]");
    std::vector<std::size_t> idx;
    for(std::size_t k = 0; k < t.size(); ++k)
        if(t[k] >= w.t_min - slack && t[k] <= w.t_max + slack) idx.push_back(k);
    if(idx.size() < min_fit_points)
        throw Error(ErrorKind::invalid_argument, "fit: " + std::to_string(idx.size()) + " points in window, need at least " +
                                                     std::to_string(min_fit_points));
    return idx;
}

} // namespace

double two_spin_entropy(double t, double J) {
    const double c = std::cos(t * J / 2.0);
    const double p = c * c;
    return std::max(0.0, -xlog2x(p) - xlog2x(1.0 - p));
}

double jump_time_pdf(double t, long n_sites, double gamma) {
    if(t < 0.0) return 0.0;
    const double rate = static_cast<double>(n_sites) * gamma;
    return rate * std::exp(-rate * t);
}

PlateauTerms plateau_terms(double gamma, double J) {
    if(!(gamma > 0.0)) throw Error(ErrorKind::invalid_argument, "plateau_estimate: gamma must be positive, got " + std::to_string(gamma));
    const double r = J * J / (gamma * gamma);
    PlateauTerms out;
    out.two_site             = r / (16.0 * std::numbers::ln2) * (2.0 * (std::numbers::egamma - 1.0) + std::log(16.0 / r));
    out.four_spin_correction = four_spin_block_weight * r / 8.0;
    return out;
}

FitResult fit_power_law(const std::vector<double> &t, const std::vector<double> &s, FitWindow window) {
    std::vector<double> x, y;
    for(auto k : window_indices(t, s, window)) {
        if(!(s[k] > 0.0))
            throw Error(ErrorKind::invalid_argument, "fit_power_law: nonpositive entropy " + std::to_string(s[k]) + " at t = " + std::to_string(t[k]));
        x.push_back(std::log(t[k]));
        y.push_back(std::log(s[k]));
    }
    const auto l = least_squares(x, y);
    return {"power_law", l.slope, std::exp(l.intercept), window, l.rms, x.size()};
}

FitResult fit_log_growth(const std::vector<double> &t, const std::vector<double> &s, FitWindow window) {
    std::vector<double> x, y;
    for(auto k : window_indices(t, s, window)) {
        x.push_back(std::log2(t[k]));
        y.push_back(s[k]);
    }
    const auto l = least_squares(x, y);
    return {"log_growth", l.slope, l.intercept, window, l.rms, x.size()};
}

} // namespace openchain
