#include "s2r/kde.hpp"

#include <cmath>

#include "s2r/errors.hpp"

namespace s2r {

double kde_bandwidth(long n, double alpha, int d) {
    if (n < 1) throw InputError("kde_bandwidth: n must be >= 1");
    return std::pow(static_cast<double>(n), -1.0 / (2.0 * alpha + static_cast<double>(d)));
}

DensityGrid kde_fit(std::span<const std::vector<double>> samples, double h,
                    const KernelSpec& kernel, const Lattice& lattice) {
    if (samples.empty()) throw InputError("kde_fit: empty sample list");
    if (h <= 0.0) throw InputError("kde_fit: bandwidth must be positive");
    const std::size_t d = lattice.dim();
    if (static_cast<int>(d) != kernel.dim()) throw InputError("kde_fit: dim mismatch");

    DensityGrid grid;
    grid.lattice = lattice;
    grid.values.assign(lattice.size(), 0.0);
    grid.provenance = GridProvenance::Kde;
    grid.kde_n = static_cast<long>(samples.size());
    grid.kde_h = h;

    const double norm =
        1.0 / (static_cast<double>(samples.size()) * std::pow(h, static_cast<double>(d)));
    std::vector<double> z(d);
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const std::vector<double> x = lattice.point(i);
        double acc = 0.0;
        for (const auto& s : samples) {
            double v = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                v *= kernel.gamma((s[k] - x[k]) / h);
                if (v == 0.0) break;
            }
            acc += v;
        }
        grid.values[i] = norm * acc;
    }
    return grid;
}

double calibrate_c_dist(const RateReport& report, double alpha, int d) {
    if (report.points.empty()) throw InputError("calibrate_c_dist: empty report");
    double acc = 0.0;
    for (const auto& pt : report.points) {
        double n = static_cast<double>(pt.n);
        double model = std::pow(n, -alpha / (2.0 * alpha + d)) * std::sqrt(std::log(n));
        acc += std::log(pt.mean_sup_err / model);
    }
    return std::exp(acc / static_cast<double>(report.points.size()));
}

RateReport rate_diagnostic(
    const std::function<std::vector<double>(Rng&)>& sampler,
    const std::function<double(std::span<const double>)>& true_density,
    const KernelSpec& kernel, const Lattice& lattice,
    std::span<const long> n_schedule, int trials, Rng rng, double eval_margin,
    const Box* support) {
    if (trials <= 0) throw InputError("rate_diagnostic: trials must be >= 1");
    if (n_schedule.empty()) throw InputError("rate_diagnostic: empty schedule");

    // Points kept for the sup: outside the margin strip around the support
    // boundary (all points when margin is zero).
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        if (eval_margin <= 0.0 || support == nullptr) {
            keep.push_back(i);
            continue;
        }
        const auto x = lattice.point(i);
        bool near_edge = false;
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (std::fabs(x[k] - support->lo[k]) < eval_margin ||
                std::fabs(x[k] - support->hi[k]) < eval_margin) {
                near_edge = true;
                break;
            }
        }
        if (!near_edge) keep.push_back(i);
    }
    if (keep.empty()) throw InputError("rate_diagnostic: margin removed every point");

    std::vector<double> truth(lattice.size());
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const auto x = lattice.point(i);
        truth[i] = true_density(x);
    }

    RateReport report;
    report.theoretical_slope =
        -kernel.alpha() / (2.0 * kernel.alpha() + static_cast<double>(kernel.dim()));
    for (std::size_t si = 0; si < n_schedule.size(); ++si) {
        const long n = n_schedule[si];
        const double h = kde_bandwidth(n, kernel.alpha(), kernel.dim());
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            Rng stream = rng.derive({phase_id(Phase::Diagnostic), static_cast<std::uint64_t>(si),
                                     static_cast<std::uint64_t>(t)});
            std::vector<std::vector<double>> samples;
            samples.reserve(static_cast<std::size_t>(n));
            for (long i = 0; i < n; ++i) samples.push_back(sampler(stream));
            DensityGrid fit = kde_fit(samples, h, kernel, lattice);
            double sup = 0.0;
            for (std::size_t i : keep) {
                double e = std::fabs(fit.values[i] - truth[i]);
                if (e > sup) sup = e;
            }
            sum += sup;
            sumsq += sup * sup;
        }
        RatePoint pt;
        pt.n = n;
        pt.h = h;
        pt.mean_sup_err = sum / trials;
        pt.std_sup_err =
            trials > 1 ? std::sqrt(std::max(0.0, (sumsq - sum * sum / trials) / (trials - 1)))
                       : 0.0;
        report.points.push_back(pt);
    }

    if (report.points.size() < 2) {
        report.slope = std::nan("");
        report.intercept = std::nan("");
        return report;
    }
    // Least squares on (log n, log mean err).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(report.points.size());
    for (const auto& pt : report.points) {
        double lx = std::log(static_cast<double>(pt.n));
        double ly = std::log(pt.mean_sup_err);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    report.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    report.intercept = (sy - report.slope * sx) / m;
    for (const auto& pt : report.points) {
        double lx = std::log(static_cast<double>(pt.n));
        double ly = std::log(pt.mean_sup_err);
        report.residuals.push_back(ly - (report.intercept + report.slope * lx));
    }
    return report;
}

}  // namespace s2r
