#pragma once

#include <functional>
#include <span>
#include <vector>

#include "s2r/grid.hpp"
#include "s2r/legendre.hpp"
#include "s2r/rng.hpp"

namespace s2r {

// Bandwidth rule h = n^(-1/(2*alpha + d)).
double kde_bandwidth(long n, double alpha, int d);

// Evaluates the kernel density estimate on every lattice point:
//   (1/(n h^d)) * sum_i kernel((x_i - x) / h).
// Values are kept signed; higher-order kernels go negative and clipping
// would break linearity in the samples.
DensityGrid kde_fit(std::span<const std::vector<double>> samples, double h,
                    const KernelSpec& kernel, const Lattice& lattice);

struct RatePoint {
    long n = 0;
    double h = 0.0;
    double mean_sup_err = 0.0;
    double std_sup_err = 0.0;
};

struct RateReport {
    std::vector<RatePoint> points;
    double slope = 0.0;          // from log(mean_sup_err) ~ slope * log(n) + b
    double intercept = 0.0;
    double theoretical_slope = 0.0;  // -alpha / (2*alpha + d)
    std::vector<double> residuals;
};

// Empirical sup-norm convergence of the KDE against a known density,
// fitted at the rule bandwidth for each n in the schedule and averaged over
// trials. `eval_margin` drops lattice points within that distance of the
// support boundary, where kernel overhang keeps the error from shrinking for
// discontinuous targets.
RateReport rate_diagnostic(
    const std::function<std::vector<double>(Rng&)>& sampler,
    const std::function<double(std::span<const double>)>& true_density,
    const KernelSpec& kernel, const Lattice& lattice,
    std::span<const long> n_schedule, int trials, Rng rng,
    double eval_margin = 0.0, const Box* support = nullptr);

// Calibrates the rate constant from diagnostic residuals, modelling
//   err(n) ~ C * n^(-alpha/(2 alpha + d)) * sqrt(log n),
// as the geometric mean of the observed ratios. Feeds the n_dist condition
// when the default of 1.0 is too optimistic for a family.
double calibrate_c_dist(const RateReport& report, double alpha, int d);

}  // namespace s2r
