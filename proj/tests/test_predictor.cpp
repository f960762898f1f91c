#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "s2r/oracle.hpp"
#include "s2r/predictor.hpp"

using namespace s2r;

namespace {

const EnvFamily& desk() {
    static EnvFamily fam(builtin_family("desk-h2"));
    return fam;
}

const PredictorClass& desk_class() {
    static PredictorClass cls = build_class(desk(), 7, {}, Rng(100));
    return cls;
}

// Hand-built one-net geometry over a family skeleton, for table-level tests.
std::shared_ptr<PredictorGeometry> tiny_geometry(const EnvFamily& fam, int actions) {
    auto geom = std::make_shared<PredictorGeometry>();
    geom->env = fam.env_spec();
    geom->actions = actions;
    geom->cells_per_axis = 4;
    const int H = fam.env_spec()->horizon();
    std::size_t off = 0;
    for (int h = 1; h <= H; ++h) {
        geom->layer_cell_count.push_back(4);
        geom->layer_offset.push_back(off);
        off += 4 * static_cast<std::size_t>(actions);
    }
    geom->net_stride = off;
    geom->probes.push_back({Path{}, 0});
    geom->windows.push_back({0, 1});
    geom->net_signatures = {{0.0}};
    geom->net_thetas = {0.5};
    return geom;
}

DensityVector trivial_density(const EnvFamily& fam) {
    return fam.true_density_vector(std::vector<double>{0.5});
}

}  // namespace

TEST_CASE("constant predictor returns its constant") {
    EnvFamily fam(builtin_family("unit-reward-h1"));
    auto geom = tiny_geometry(fam, 2);
    std::vector<double> table(geom->net_stride, 0.7);
    Predictor f(0, "constant", 0.0, geom, table);
    DensityVector d = trivial_density(fam);
    for (double x : {-0.9, -0.2, 0.4, 0.97}) {
        std::vector<double> xv{x};
        CHECK(f.predict(d, xv, 0) == doctest::Approx(0.7));
        CHECK(f.predict(d, xv, 1) == doctest::Approx(0.7));
    }
    std::vector<double> outside{1.5};
    CHECK_THROWS_AS(f.predict(d, outside, 0), InputError);
    CHECK_THROWS_AS(f.predict(d, std::vector<double>{0.0}, 5), InputError);
}

TEST_CASE("induced action: argmax, single action, ties") {
    EnvFamily fam(builtin_family("unit-reward-h1"));
    DensityVector d = trivial_density(fam);

    auto geom2 = tiny_geometry(fam, 2);
    std::vector<double> table(geom2->net_stride);
    for (std::size_t c = 0; c < 4; ++c) {
        table[geom2->table_index(0, 1, c, 0)] = 0.3;
        table[geom2->table_index(0, 1, c, 1)] = 0.7;
    }
    Predictor f(0, "test", 0.0, geom2, table);
    CHECK(f.induced_action(d, std::vector<double>{0.1}) == 1);

    std::vector<double> tie(geom2->net_stride, 0.5);
    Predictor g(1, "tie", 0.0, geom2, tie);
    CHECK(g.induced_action(d, std::vector<double>{0.1}) == 0);

    auto geom1 = tiny_geometry(fam, 1);
    std::vector<double> one(geom1->net_stride, 0.9);
    Predictor h(2, "single", 0.0, geom1, one);
    CHECK(h.induced_action(d, std::vector<double>{0.1}) == 0);
}

TEST_CASE("argmax is invariant to constant shifts") {
    const auto& cls = desk_class();
    const Predictor& fstar = cls.member(0);
    std::vector<double> shifted_table = fstar.table();
    for (double& v : shifted_table) v = std::min(1.0, v + 0.2);
    Predictor shifted(99, "shifted", 0.0, cls.geometry_ptr(),
                      shifted_table);
    Rng rng(17);
    for (int t = 0; t < 300; ++t) {
        double theta = rng.uniform();
        DensityVector d = desk().true_density_vector(std::vector<double>{theta});
        int layer = 1 + static_cast<int>(rng.below(2));
        const Box& box = desk().env_spec()->layer_box(layer);
        std::vector<double> x{rng.uniform(box.lo[0], box.hi[0])};
        CHECK(fstar.induced_action(d, x) == shifted.induced_action(d, x));
    }
}

TEST_CASE("build_class basics") {
    PredictorClassOptions opts;
    PredictorClass solo = build_class(desk(), 0, opts, Rng(1));
    CHECK(solo.size() == 1);
    CHECK(solo.star_index() == 0);
    CHECK(solo.member(0).kind() == "planted-optimal");

    const auto& cls = desk_class();
    CHECK(cls.size() == 8);
    for (int i = 1; i < 8; ++i) {
        CHECK(cls.member(i).corruption() >= opts.min_corruption);
        CHECK(cls.member(i).kind() != "planted-optimal");
    }
    CHECK(cls.lipschitz() > 0.0);
}

TEST_CASE("planted optimal predictor reproduces the oracle Q") {
    const auto& cls = desk_class();
    const Predictor& fstar = cls.member(0);
    Rng rng(3);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        double theta = rng.uniform();
        std::vector<double> tv{theta};
        Env env = desk().env_at(tv);
        DensityVector dv = desk().true_density_vector(tv);
        auto report = optimal_value(env);
        const auto& cs = desk().canonical_states()[rng.below(3)];
        Rng draw = rng.derive({static_cast<std::uint64_t>(trial)});
        auto x = sample_observation(env, cs.state, draw);
        int a = static_cast<int>(rng.below(2));
        double pred = fstar.predict(dv, x, a);
        double truth = env.mean_reward(cs.state, x, a);
        if (desk().env_spec()->layer_of(cs.state) < 2)
            truth += report.v_star[static_cast<std::size_t>(
                desk().env_spec()->next_state(cs.state, a))];
        worst = std::max(worst, std::fabs(pred - truth));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("class closure: range and Lipschitz under random density perturbations") {
    const auto& cls = desk_class();
    const double tau = 0.01;
    Rng rng(23);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        double theta = rng.uniform();
        DensityVector d = desk().true_density_vector(std::vector<double>{theta});
        DensityVector d2 = d;
        for (std::size_t s = 0; s < d2.size(); ++s)
            for (double& v : d2.grid(s).values) v += tau * rng.uniform(-1.0, 1.0);

        int member = static_cast<int>(rng.below(static_cast<std::uint64_t>(cls.size())));
        int layer = 1 + static_cast<int>(rng.below(2));
        const Box& box = desk().env_spec()->layer_box(layer);
        std::vector<double> x{rng.uniform(box.lo[0], box.hi[0])};
        int a = static_cast<int>(rng.below(2));
        double va = cls.member(member).predict(d, x, a);
        double vb = cls.member(member).predict(d2, x, a);
        if (va < 0.0 || va > 1.0 || vb < 0.0 || vb > 1.0) ++violations;
        if (std::fabs(va - vb) > cls.lipschitz() * tau + 1e-12) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("serialization round trip preserves predictions") {
    PredictorClassOptions opts;
    opts.n_net = 16;
    opts.cells_per_axis = 16;
    opts.window_half_points = 2;
    PredictorClass cls = build_class(desk(), 3, opts, Rng(9));
    std::string blob = cls.to_json();
    PredictorClass back = PredictorClass::from_json(blob, desk().env_spec());
    CHECK(back.size() == cls.size());
    CHECK(back.lipschitz() == doctest::Approx(cls.lipschitz()));
    Rng rng(31);
    for (int t = 0; t < 100; ++t) {
        double theta = rng.uniform();
        DensityVector d = desk().true_density_vector(std::vector<double>{theta});
        int member = static_cast<int>(rng.below(static_cast<std::uint64_t>(cls.size())));
        int layer = 1 + static_cast<int>(rng.below(2));
        const Box& box = desk().env_spec()->layer_box(layer);
        std::vector<double> x{rng.uniform(box.lo[0], box.hi[0])};
        int a = static_cast<int>(rng.below(2));
        CHECK(cls.member(member).predict(d, x, a) ==
              doctest::Approx(back.member(member).predict(d, x, a)).epsilon(1e-14));
    }
}

TEST_CASE("table values outside [0,1] are rejected") {
    EnvFamily fam(builtin_family("unit-reward-h1"));
    auto geom = tiny_geometry(fam, 2);
    std::vector<double> bad(geom->net_stride, 1.2);
    CHECK_THROWS_AS(Predictor(0, "bad", 0.0, geom, bad), ConstructionError);
}
