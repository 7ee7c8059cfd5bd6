#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ybflow/norms.hpp"
#include "ybflow/profiles.hpp"
#include "ybflow/quadrature.hpp"
#include "ybflow/trajectory.hpp"

using namespace ybflow;

namespace {
ModelParams mp4() {
    static ModelParams mp = make_model_params(4);
    return mp;
}
}  // namespace

TEST_CASE("make_grid contract") {
    auto g = make_grid(20.0, 2001);
    CHECK(g->dx == Catch::Approx(0.02).epsilon(1e-14));
    CHECK(g->nodes[size_t(g->center_index())] == 0.0);
    CHECK(g->nodes.front() == Catch::Approx(-20.0));
    CHECK(g->nodes.back() == Catch::Approx(20.0));
    CHECK_THROWS_AS(make_grid(20.0, 2000), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(-1.0, 21), std::invalid_argument);
}

TEST_CASE("grid quadrature against bubble integrals") {
    auto mp = mp4();
    auto g = make_grid(20.0, 2001);
    Field w4 = field_from(g, [&](double x) { return std::pow(bubble(x, 0.0, mp), 4.0); });
    CHECK(quad(w4) == Catch::Approx(16.0 / 3.0).margin(1e-8));
    Field wp2w2 = field_from(g, [&](double x) {
        const double d = bubble_deriv(x, 0.0, 1, mp);
        const double w = bubble(x, 0.0, mp);
        return d * d * w * w;
    });
    CHECK(quad(wp2w2) == Catch::Approx(16.0 / 15.0).margin(1e-8));

    Field odd = field_from(g, [](double x) { return x * std::exp(-x * x); });
    CHECK(std::abs(quad(odd)) < 1e-14);
}

TEST_CASE("quadrature self-convergence is 4th order") {
    // on [-2, 2] the integrand does not vanish at the ends, so the Simpson
    // truncation error is visible; exact antiderivative of 4 sech^4 is
    // 4 (tanh - tanh^3/3)
    auto mp = mp4();
    const double exact =
        2.0 * 4.0 * (std::tanh(2.0) - std::pow(std::tanh(2.0), 3.0) / 3.0);
    auto weval = [&](int N) {
        auto g = make_grid(2.0, N);
        Field f = field_from(g, [&](double x) { return std::pow(bubble(x, 0.0, mp), 4.0); });
        return quad(f);
    };
    const double e1 = std::abs(weval(51) - exact);
    const double e2 = std::abs(weval(101) - exact);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("weighted inner product") {
    auto mp = mp4();
    auto g = make_grid(20.0, 2001);
    Field w = field_from(g, [&](double x) { return bubble(x, 0.0, mp); }, true);
    Field wp = field_from(g, [&](double x) { return bubble_deriv(x, 0.0, 1, mp); });

    SECTION("parity zeros at zero shift") {
        CHECK(std::abs(weighted_inner(w, wp, 0.0, mp)) < 1e-13);
        CHECK(std::abs(weighted_inner(wp, w, 0.0, mp)) < 1e-13);
    }
    SECTION("w against w recovers int w^{p+1}") {
        CHECK(weighted_inner(w, w, 0.0, mp) == Catch::Approx(16.0 / 3.0).margin(1e-8));
    }
    SECTION("bilinear and symmetric at zero shift") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> dist;
        Field f(g), h(g);
        for (int i = 0; i < g->N; ++i) {
            f[i] = dist(rng) * std::exp(-0.2 * std::abs(g->nodes[size_t(i)]));
            h[i] = dist(rng) * std::exp(-0.2 * std::abs(g->nodes[size_t(i)]));
        }
        const double fh = weighted_inner(f, h, 0.0, mp);
        CHECK(weighted_inner(h, f, 0.0, mp) == Catch::Approx(fh).margin(1e-12));
        Field f2 = f;
        for (auto& v : f2.values) v *= 2.5;
        CHECK(weighted_inner(f2, h, 0.0, mp) == Catch::Approx(2.5 * fh).margin(1e-10));
    }
    SECTION("boundary warning for large shifts") {
        Field ones = field_from(g, [](double) { return 1.0; });
        bool warn = false;
        weighted_inner(ones, w, 15.0, mp, &warn);
        CHECK(warn);
        // wide enough grid that the shifted tail stays below threshold
        auto gw = make_grid(25.0, 2501);
        Field ww = field_from(gw, [&](double x) { return bubble(x, 0.0, mp); }, true);
        warn = true;
        weighted_inner(ww, ww, 0.5, mp, &warn);
        CHECK_FALSE(warn);
    }
    SECTION("cubic resample shift is consistent with the closed form") {
        const double xi = 1.37;
        const double approx = weighted_inner(w, w, xi, mp);
        const double exact = quad_gk(
            [&](double x) {
                return bubble(x - xi, 0.0, mp) * bubble(x, 0.0, mp) * bubble_pm1(x, 0.0, mp);
            },
            -20.0, 20.0, 1e-13, 1e-13);
        CHECK(approx == Catch::Approx(exact).margin(1e-8));
    }
}

TEST_CASE("weighted L2 norm") {
    auto mp = mp4();
    auto g = make_grid(20.0, 2001);
    Field z = ansatz_z(g, 0.0, mp);
    Field zero(g, 0.0, true);
    CHECK(norm_l2_weighted(zero, z, mp) == 0.0);
    CHECK(norm_l2_weighted(z, z, mp) ==
          Catch::Approx(std::sqrt(16.0 * 16.0 / 3.0)).margin(1e-7));
    Field z3 = z;
    for (auto& v : z3.values) v *= -3.0;
    CHECK(norm_l2_weighted(z3, z, mp) ==
          Catch::Approx(3.0 * norm_l2_weighted(z, z, mp)).epsilon(1e-13));
}

TEST_CASE("norms are homogeneous and satisfy the triangle inequality") {
    auto mp = mp4();
    auto g = make_grid(10.0, 301);
    Field z = ansatz_z(g, 2.0, mp);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 1000; ++trial) {
        Field f(g), h(g);
        for (int i = 0; i < g->N; ++i) {
            f[i] = dist(rng);
            h[i] = dist(rng);
        }
        const double nf = norm_l2_weighted(f, z, mp);
        const double nh = norm_l2_weighted(h, z, mp);
        Field fh(g);
        for (int i = 0; i < g->N; ++i) fh[i] = f[i] + h[i];
        CHECK(norm_l2_weighted(fh, z, mp) <= nf + nh + 1e-10);
        const double c = dist(rng);
        Field cf(g);
        for (int i = 0; i < g->N; ++i) cf[i] = c * f[i];
        CHECK(norm_l2_weighted(cf, z, mp) == Catch::Approx(std::abs(c) * nf).margin(1e-10));
    }
}

TEST_CASE("weight alpha_sigma") {
    auto mp = mp4();
    const double sigma = 6.0, theta = 0.01;

    SECTION("positive at all nodes") {
        auto g = make_grid(20.0, 801);
        const double xi = 3.0;
        for (int i = 0; i < g->N; ++i) {
            const double x = g->nodes[size_t(i)];
            CHECK(weight_alpha_sigma(x, xi, z_at(x, xi, mp), sigma, theta, mp) > 0.0);
        }
    }
    SECTION("xi = 0 gives the outer branch off the origin") {
        const double x = 1.0;
        const double zv = z_at(x, 0.0, mp);
        CHECK(weight_alpha_sigma(x, 0.0, zv, sigma, theta, mp) ==
              Catch::Approx(std::pow(zv, mp.n * mp.beta - sigma)));
    }
    SECTION("branch ratio at |x| = xi is bounded uniformly in t") {
        // z(xi, t) = w(0) + w(2 xi) stays of order one on the matching line,
        // so outer/inner is pinched between t-independent constants and
        // stabilizes as t -> -infinity
        auto ratio_at = [&](double t) {
            const double xi = 0.5 * std::log(2.0 * mp.b * std::abs(t));
            const double zv = z_at(xi, xi, mp);
            return std::pow(zv, mp.n * mp.beta - sigma) /
                   std::pow(zv, (2.0 * mp.beta + theta) * sigma);
        };
        double rmin = 1e300, rmax = 0.0;
        for (double lt = 1.0; lt <= 5.0; lt += 0.25) {
            const double r = ratio_at(-std::pow(10.0, lt));
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        const double C = 1e4;
        CHECK(rmin > 1.0 / C);
        CHECK(rmax < C);
        CHECK(ratio_at(-1e4) == Catch::Approx(ratio_at(-1e5)).epsilon(0.05));
    }
}

namespace {
// window of snapshots: time-profile amp(t) times a fixed spatial shape
WindowView make_window(std::vector<Field>& storage, const std::vector<double>& times,
                       const std::function<double(double)>& amp, const Field& shape,
                       double xi_const) {
    storage.clear();
    for (double t : times) {
        Field f = shape;
        for (auto& v : f.values) v *= amp(t);
        storage.push_back(std::move(f));
    }
    WindowView w;
    w.times = times;
    for (auto& f : storage) w.psi.push_back(&f);
    w.xi_of_t = [xi_const](double) { return xi_const; };
    return w;
}
}  // namespace

TEST_CASE("window norms") {
    auto mp = mp4();
    auto g = make_grid(16.0, 801);
    Field w = field_from(g, [&](double x) { return bubble(x, 0.0, mp); }, true);
    std::vector<double> times;
    for (int k = 0; k <= 10; ++k) times.push_back(-50.0 + 0.1 * k);
    std::vector<Field> storage;

    SECTION("psi = 0 gives all zeros") {
        Field zero(g, 0.0, true);
        auto win = make_window(storage, times, [](double) { return 0.0; }, zero, 2.0);
        auto wn = window_norms(win, 6.0, 0.01, mp);
        CHECK(wn.l2 == 0.0);
        CHECK(wn.h1 == 0.0);
        CHECK(wn.h2 == 0.0);
        CHECK(wn.w2sigma == 0.0);
        CHECK(wn.linf_weighted == 0.0);
    }
    SECTION("constant-in-time psi has vanishing psi_t part") {
        auto win = make_window(storage, times, [](double) { return 1.0; }, w, 2.0);
        auto wn = window_norms(win, 6.0, 0.01, mp);
        CHECK(wn.h2 >= wn.h1);
        // explicit zero psi_t gives the same H2
        std::vector<Field> zt(storage.size(), Field(g, 0.0, true));
        WindowView win2 = win;
        for (size_t k = 0; k < zt.size(); ++k) win2.psi_t.push_back(&zt[k]);
        auto wn2 = window_norms(win2, 6.0, 0.01, mp);
        CHECK(wn.h2 == Catch::Approx(wn2.h2).epsilon(1e-12));
    }
    SECTION("norm ordering H1 >= L2") {
        Field z = ansatz_z(g, 2.0, mp);
        auto win = make_window(storage, times, [](double) { return 1.0; }, z, 2.0);
        auto wn = window_norms(win, 6.0, 0.01, mp);
        CHECK(wn.h1 >= wn.l2);
    }
    SECTION("too few time levels is an error") {
        auto win = make_window(storage, {-50.0, -49.5}, [](double) { return 1.0; }, w, 2.0);
        CHECK_THROWS_AS(window_norms(win, 6.0, 0.01, mp), std::invalid_argument);
    }
}

TEST_CASE("global norms of a constructed decaying trajectory") {
    auto mp = mp4();
    auto g = make_grid(16.0, 801);
    const double nu = 0.75;
    Trajectory traj;
    for (int k = 0; k <= 100; ++k) {
        const double t = -60.0 + 0.1 * k;
        Field f = field_from(g, [&](double x) { return bubble(x, 0.0, mp); }, true);
        for (auto& v : f.values) v *= std::pow(std::abs(t), -nu);
        traj.push(t, f);
    }
    auto xi_of_t = [](double) { return 2.0; };
    auto rep = global_norms(traj, xi_of_t, nu, 6.0, 0.01, -50.0, mp);
    REQUIRE(rep.windows.size() >= 9);
    // |tau|^nu-weighted L2 window norms agree across windows to 5%
    double lo = 1e300, hi = 0.0;
    for (const auto& wn : rep.windows) {
        const double v = std::pow(std::abs(wn.tau), nu) * wn.l2;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK((hi - lo) / hi < 0.05);
    // report stores the exponent used
    CHECK(rep.nu == nu);
    CHECK(rep.star_sigma == Catch::Approx(rep.sup_l2 + rep.sup_w2sigma));
    // zero trajectory gives an all-zero report
    Trajectory zt;
    for (int k = 0; k <= 40; ++k) zt.push(-60.0 + 0.1 * k, Field(g, 0.0, true));
    auto zrep = global_norms(zt, xi_of_t, nu, 6.0, 0.01, -57.0, mp);
    CHECK(zrep.sup_l2 == 0.0);
    CHECK(zrep.sup_h2 == 0.0);
    CHECK(zrep.star_2_sigma == 0.0);
}

TEST_CASE("w2sigma window norm is grid-converged to 1%") {
    auto mp = mp4();
    const double xi = 2.5;
    auto value_on = [&](int N) {
        auto g = make_grid(20.0, N);
        Field shape = field_from(g, [&](double x) { return bubble(x, xi, mp); });
        std::vector<double> times;
        for (int k = 0; k <= 10; ++k) times.push_back(-40.0 + 0.1 * k);
        std::vector<Field> storage;
        auto win = make_window(storage, times, [](double) { return 1.0; }, shape, xi);
        return window_norms(win, 6.0, 0.01, mp).w2sigma;
    };
    const double a = value_on(2001);
    const double b = value_on(4001);
    CHECK(std::abs(a - b) / std::abs(b) < 0.01);
}

TEST_CASE("weighted Linf norm") {
    auto mp = mp4();
    auto g = make_grid(16.0, 801);
    const double xi = 2.0;
    Field z = ansatz_z(g, xi, mp);
    CHECK(norm_linf_weighted(Field(g, 0.0, true), xi, mp) == 0.0);
    // psi = z: |psi/z| = 1 outside the neck, plus the inside sup of z
    double max_inside = 0.0;
    for (int i = 0; i < g->N; ++i)
        if (std::abs(g->nodes[size_t(i)]) <= xi) max_inside = std::max(max_inside, z[i]);
    CHECK(norm_linf_weighted(z, xi, mp) == Catch::Approx(1.0 + max_inside).epsilon(1e-12));
    Field zneg = z;
    for (auto& v : zneg.values) v = -v;
    CHECK(norm_linf_weighted(zneg, xi, mp) == Catch::Approx(norm_linf_weighted(z, xi, mp)));
}

TEST_CASE("parameter path norms") {
    const double sigma = 6.0;
    std::vector<double> times, zeros, h, hdot, eta, etadot;
    const double t0 = -50.0;
    const double mu = 0.3;
    for (int k = 0; k <= 1000; ++k) {
        const double t = -150.0 + 0.1 * k;
        times.push_back(t);
        zeros.push_back(0.0);
        h.push_back(std::pow(std::abs(t), -mu));
        hdot.push_back(mu * std::pow(std::abs(t), -mu - 1.0));
        eta.push_back(2.5 / std::abs(t));
        etadot.push_back(2.5 / (t * t));
    }
    SECTION("zero path") {
        auto pn = param_norms(times, zeros, zeros, mu, 1.0 + mu, sigma, t0);
        CHECK(pn.sup_norm == 0.0);
        CHECK(pn.deriv_norm == 0.0);
        CHECK(pn.combined == 0.0);
    }
    SECTION("h = |t|^{-mu} has unit weighted sup") {
        auto pn = param_norms(times, h, hdot, mu, 1.0 + mu, sigma, t0);
        CHECK(pn.sup_norm == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("eta = c/|t| has weighted sup c") {
        auto pn = param_norms(times, eta, etadot, 1.0, 1.0, sigma, t0);
        CHECK(pn.sup_norm == Catch::Approx(2.5).epsilon(1e-12));
    }
    SECTION("undersampled path is rejected") {
        std::vector<double> coarse_t, coarse_v;
        for (int k = 0; k <= 100; ++k) {
            coarse_t.push_back(-150.0 + 1.0 * k);
            coarse_v.push_back(0.0);
        }
        CHECK_THROWS_AS(param_norms(coarse_t, coarse_v, coarse_v, mu, 1.0 + mu, sigma, t0),
                        std::invalid_argument);
    }
}
