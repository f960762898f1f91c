#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "s2r/kde.hpp"
#include "s2r/oracle.hpp"
#include "s2r/report.hpp"
#include "s2r/sim2real.hpp"

namespace py = pybind11;
using namespace s2r;

namespace {

// Family handle shared with the oracle and training entry points.
struct PyFamily {
    explicit PyFamily(const std::string& json_text)
        : family(family_from_json_text(json_text)) {}
    static PyFamily builtin(const std::string& name) {
        return PyFamily(family_to_json(builtin_family(name)));
    }

    EnvFamily family;

    std::vector<std::vector<int>> canonical_paths() const {
        std::vector<std::vector<int>> out;
        for (const auto& cs : family.canonical_states()) out.push_back(cs.path);
        return out;
    }

    py::dict optimal_values(const std::vector<double>& theta) const {
        Env env = family.env_at(theta);
        ValueReport rep = optimal_value(env);
        py::dict d;
        d["per_state"] = rep.v_star;
        d["total"] = rep.total;
        d["quad_error"] = rep.quad_error;
        return d;
    }

    std::vector<double> sample_theta(std::uint64_t seed) const {
        Rng rng(seed);
        return family.sample_theta(rng);
    }

    std::string to_json() const { return family_to_json(family.def()); }
};

AlgoConfig algo_from_kwargs(double eps, double delta, double count_scale, int b_override,
                            long n_dist_override, int workers) {
    AlgoConfig cfg;
    cfg.eps = eps;
    cfg.delta = delta;
    cfg.desk.count_scale = count_scale;
    if (b_override > 0) cfg.desk.b_override = b_override;
    if (n_dist_override > 0) cfg.desk.n_dist_override = n_dist_override;
    cfg.workers = workers;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_s2r, m) {
    m.doc() = "Feedback-free sim-to-real training on rich-observation MDPs";
    m.def("version", &version_string);

    // Kernel construction and certification.
    m.def("legendre_psi", [](int order, double t) { return legendre_psi(order, t); },
          py::arg("order"), py::arg("t"));
    m.def("gamma_eval",
          [](double alpha, double t) { return KernelSpec(alpha, 1).gamma(t); },
          py::arg("alpha"), py::arg("t"));
    m.def("kernel_eval",
          [](double alpha, const std::vector<double>& x) {
              return KernelSpec(alpha, static_cast<int>(x.size())).eval(x);
          },
          py::arg("alpha"), py::arg("x"));
    m.def("certify_kernel",
          [](double alpha, int d) {
              KernelCertificate cert = certify_k1(KernelSpec(alpha, d), 1e-8);
              py::dict out;
              out["ok"] = cert.ok;
              out["integral"] = cert.integral;
              double worst = 0.0;
              for (const auto& mm : cert.moments)
                  worst = std::max(worst, std::fabs(mm.value));
              out["max_abs_moment"] = worst;
              out["alpha_moment"] = cert.alpha_moment;
              out["sup_norm"] = cert.sup_norm;
              out["l2_norm"] = cert.l2_norm;
              if (!cert.failure.empty()) out["failure"] = cert.failure;
              return out;
          },
          py::arg("alpha"), py::arg("d"));

    // Density estimation.
    m.def("bandwidth", &kde_bandwidth, py::arg("n"), py::arg("alpha"), py::arg("d"));
    m.def("kde_fit_1d",
          [](const std::vector<double>& samples, double h, double alpha, double lo,
             double hi, std::size_t points) {
              std::vector<std::vector<double>> xs;
              xs.reserve(samples.size());
              for (double s : samples) xs.push_back({s});
              Lattice lat(Box{{lo}, {hi}}, {points});
              DensityGrid g = kde_fit(xs, h, KernelSpec(alpha, 1), lat);
              return g.values;
          },
          py::arg("samples"), py::arg("h"), py::arg("alpha"), py::arg("lo"), py::arg("hi"),
          py::arg("points"));

    py::class_<PyFamily>(m, "Family")
        .def(py::init<const std::string&>(), py::arg("json_text"))
        .def_static("builtin", &PyFamily::builtin, py::arg("name"))
        .def("canonical_paths", &PyFamily::canonical_paths)
        .def("optimal_values", &PyFamily::optimal_values, py::arg("theta"))
        .def("sample_theta", &PyFamily::sample_theta, py::arg("seed"))
        .def("to_json", &PyFamily::to_json);

    m.def("builtin_family_json",
          [](const std::string& name) { return family_to_json(builtin_family(name)); },
          py::arg("name"));

    // End-to-end training run; returns the run report as a JSON string.
    m.def("run_sim2real",
          [](const PyFamily& fam, std::uint64_t seed, int n_decoys, double eps,
             double delta, double count_scale, int b_override, long n_dist_override,
             int workers) {
              AlgoConfig cfg = algo_from_kwargs(eps, delta, count_scale, b_override,
                                                n_dist_override, workers);
              auto cls = std::make_shared<const PredictorClass>(
                  build_class(fam.family, n_decoys, {}, Rng(100)));
              Sim2RealResult run = sim2real(fam.family, cls, cfg, seed);
              return report_to_json(run, "{}");
          },
          py::arg("family"), py::arg("seed"), py::arg("n_decoys") = 7,
          py::arg("eps") = 0.1, py::arg("delta") = 0.2,
          py::arg("count_scale") = 1.25e-5, py::arg("b_override") = 4,
          py::arg("n_dist_override") = 16384, py::arg("workers") = 1);

    // Training followed by a feedback-free deployment on a freshly drawn
    // real environment; reports deployment accounting and oracle regret.
    m.def("run_pipeline",
          [](const PyFamily& fam, std::uint64_t seed, int n_decoys, double eps,
             double delta, double count_scale, int b_override, long n_dist_override,
             int eval_envs) {
              AlgoConfig cfg = algo_from_kwargs(eps, delta, count_scale, b_override,
                                                n_dist_override, 1);
              auto cls = std::make_shared<const PredictorClass>(
                  build_class(fam.family, n_decoys, {}, Rng(100)));
              Sim2RealResult run = sim2real(fam.family, cls, cfg, seed);
              KernelSpec kernel(fam.family.def().alpha, fam.family.def().obs_dim);
              Rng real_stream = Rng(seed).derive({phase_id(Phase::RealEnv)});
              Env real_env = fam.family.sample_env(real_stream);
              DeployResult dep = deploy(run.policy, real_env, run.discovery, run.algo,
                                        kernel, Rng(seed));
              auto edges = cls->geometry().cell_edges();
              OracleOptions opts;
              opts.layer_edges = &edges;
              MetaValue ev = expected_optimal_value(fam.family, eval_envs, Rng(seed), opts);
              auto policy_for = [&](const Env& env, Rng& rng) {
                  DeployResult d = deploy(run.policy, env, run.discovery, run.algo,
                                          kernel, rng);
                  auto bp = std::make_shared<BoundPredictor>(d.policy);
                  return OraclePolicy::reactive(
                      [bp](std::span<const double> x) { return bp->act(x); });
              };
              MetaValue mv =
                  expected_meta_value(fam.family, policy_for, eval_envs, Rng(seed), opts);
              py::dict out;
              out["report"] = report_to_json(run, "{}");
              out["accepted_predictor"] = run.policy.predictor_id;
              out["v_star_hat"] = run.v_star_hat;
              out["real_episodes"] = dep.real_episodes;
              out["canonical_states"] = dep.canonical_count;
              out["firewall_ok"] = dep.firewall_ok;
              out["expected_v_star"] = ev.mean;
              out["expected_v_policy"] = mv.mean;
              out["regret"] = ev.mean - mv.mean;
              return out;
          },
          py::arg("family"), py::arg("seed"), py::arg("n_decoys") = 7,
          py::arg("eps") = 0.1, py::arg("delta") = 0.2,
          py::arg("count_scale") = 1.25e-5, py::arg("b_override") = 4,
          py::arg("n_dist_override") = 16384, py::arg("eval_envs") = 40);
}
