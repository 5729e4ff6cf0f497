#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ssnls/fixpoint_solver.hpp"
#include "ssnls/inverse_op.hpp"

using namespace ssnls;

namespace {
struct Fixture {
    PstarResult ps;
    FStar fs;
    Frame frame;
    InverseOp inv;
    Fixture() : ps(generate_pstar(3.0)), fs(ps.P), frame(fs, Params{0.0, 3.0}), inv(frame, 0.0) {}
};
Fixture& fixture() {
    static Fixture f;
    return f;
}

std::function<cplx(double)> random_g(unsigned seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> c(9);
    for (auto& v : c) v = scale * cplx(u(rng), u(rng)) / 3.0;
    ChebSeries s(c);
    return [s](double y) { return s.eval(y); };
}

ChebSeries to_series(const std::vector<double>& rep_ascending, const std::vector<cplx>& vals) {
    std::vector<cplx> v(vals.rbegin(), vals.rend());  // transform wants descending
    return ChebSeries(lobatto_to_coeffs(v));
}
}  // namespace

TEST_CASE("cutoff satisfies the required properties") {
    CHECK(Cutoff::chi(-0.75) == 1.0);
    CHECK(Cutoff::chi(-0.5) == 1.0);
    CHECK(Cutoff::chi(0.0) == 0.0);
    CHECK(Cutoff::chi(0.4) == 0.0);
    double maxslope = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        double y = -1.0 + k * 1e-3;
        maxslope = std::max(maxslope, std::abs(Cutoff::chi_prime(y)));
    }
    CHECK(maxslope <= 3.0);
    CHECK(std::abs(Cutoff::chi_prime(-0.25)) == Catch::Approx(3.0));
}

TEST_CASE("alpha^k: zero input, real-linearity, weighted bounds") {
    auto& fx = fixture();
    for (double y : {-0.7, 0.0, 0.6, 0.95}) {
        auto a0 = fx.inv.alpha_at(y, cplx(0.0));
        for (double v : a0) CHECK(v == 0.0);
        auto a1 = fx.inv.alpha_at(y, cplx(0.3, -0.4));
        auto a2 = fx.inv.alpha_at(y, cplx(-1.1, 0.2));
        auto a12 = fx.inv.alpha_at(y, 2.0 * cplx(0.3, -0.4) + 3.0 * cplx(-1.1, 0.2));
        for (int k = 0; k < 4; ++k)
            CHECK(a12[static_cast<size_t>(k)] ==
                  Catch::Approx(2.0 * a1[static_cast<size_t>(k)] + 3.0 * a2[static_cast<size_t>(k)])
                      .margin(1e-12));
    }

    auto g = random_g(5);
    double ny = norm_Y(g);
    double c12 = 0.0, c34 = 0.0;
    const double q4 = 2.0;
    for (int k = 1; k < 400; ++k) {
        double y = -1.0 + 2.0 * k / 400.0;
        auto a = fx.inv.alpha_at(y, g(y));
        c12 = std::max({c12, std::abs(a[0]) / ny, std::abs(a[1]) / ny});
        double w = std::pow(1.0 - y, 2.0 - q4);  // (1-y)^{4/(p-1)-2} bound for k=3,4
        c34 = std::max({c34, std::abs(a[2]) / (w * ny), std::abs(a[3]) / (w * ny)});
    }
    INFO("empirical alpha bounds: C12=" << c12 << " C34=" << c34);
    CHECK(c12 < 10.0);
    CHECK(c34 < 10.0);
}

TEST_CASE("singular quadrature: endpoint singularity and brute-force agreement") {
    auto [v, e] = adaptive_gk([](double x) { return 1.0 / std::sqrt(1.0 - x); }, 0.0, 1.0, 3e-7);
    CHECK(v == Catch::Approx(2.0).margin(1e-6));

    // non-oscillatory test against a 10^7-point composite Simpson oracle
    auto f = [](double x) { return std::cos(3.0 * x) * std::exp(x); };
    auto [vq, eq] = adaptive_gk(f, -0.5, 0.9, 1e-13);
    const int n = 10000000;
    double h = 1.4 / n, simpson = f(-0.5) + f(0.9);
    for (int k = 1; k < n; ++k) simpson += f(-0.5 + k * h) * ((k % 2) ? 4.0 : 2.0);
    simpson *= h / 3.0;
    CHECK(std::abs(vq - simpson) <= 1e-10);
}

TEST_CASE("oscillatory tail bound of the integration-by-parts lemma") {
    const double q = 1.5, alpha = 1.0;
    auto integrand = [&](double x) {
        return std::polar(std::pow(1.0 - x, q - 2.0), -phase_phi(x, alpha));
    };
    double cprev = -1.0;
    for (double y : {0.9, 0.99, 0.999}) {
        auto [v, e] = singular_quadrature(integrand, y, 1.0, q, alpha, 1e-12, 0.9995);
        double c = std::abs(v) / std::pow(1.0 - y, q + 1.0);
        INFO("y=" << y << " |integral|=" << std::abs(v) << " C=" << c);
        CHECK(c < 2.0);  // |int| <~ (1-y)^{q+1} with a modest constant
        if (cprev > 0.0) CHECK(c < 30.0 * cprev);
        cprev = c;
    }
}

TEST_CASE("formal inverse: zero, linearity, and the inverse identity") {
    auto& fx = fixture();
    auto zero = fx.inv.apply_fn([](double) { return cplx(0.0); }, false);
    for (const auto& v : zero.u) CHECK(std::abs(v) == 0.0);
    CHECK(zero.psi == 0.0);

    auto g1 = random_g(11), g2 = random_g(12);
    auto r1 = fx.inv.apply_fn(g1, false);
    auto r2 = fx.inv.apply_fn(g2, false);
    auto r12 = fx.inv.apply_fn([&](double y) { return 2.0 * g1(y) - 0.5 * g2(y); }, false);
    double lin = 0.0;
    for (size_t i = 0; i < r1.u.size(); ++i)
        lin = std::max(lin, std::abs(r12.u[i] - (2.0 * r1.u[i] - 0.5 * r2.u[i])));
    CHECK(lin <= 1e-11);

    // Ltilde(Ltilde^{-1} g) = g at interior representation nodes
    const auto& rep = fx.inv.rep_nodes();
    for (unsigned seed : {21, 22, 23, 24, 25}) {
        auto g = random_g(seed);
        auto res = fx.inv.apply_fn(g, false, true);
        int checked = 0;
        double worst = 0.0;
        for (size_t i = 1; i + 1 < rep.size() && checked < 50; i += 3) {
            double y = rep[i];
            if (std::abs(y) > 0.9) continue;
            ++checked;
            auto c = fx.frame.tilde_coeffs(y, 0.0);
            cplx lt = res.u2[i] + c.p1 * res.up[i] + c.p2 * std::conj(res.up[i]) + c.q1 * res.u[i] +
                      c.q2 * std::conj(res.u[i]);
            worst = std::max(worst, std::abs(lt - g(y)) / std::max(1.0, std::abs(g(y))));
        }
        CHECK(checked == 50);
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("psi: zero input, bound, real-linearity") {
    auto& fx = fixture();
    CHECK(fx.inv.psi_of([](double) { return cplx(0.0); }) == 0.0);
    double cpsi = 0.0;
    for (unsigned seed : {31, 32, 33, 34}) {
        auto g = random_g(seed);
        cpsi = std::max(cpsi, std::abs(fx.inv.psi_of(g)) / norm_Y(g));
    }
    INFO("empirical |psi| <= C ||g||_Y with C = " << cpsi);
    CHECK(cpsi < 10.0);

    auto g1 = random_g(41), g2 = random_g(42);
    double p1 = fx.inv.psi_of(g1), p2 = fx.inv.psi_of(g2);
    double p12 = fx.inv.psi_of([&](double y) { return 1.5 * g1(y) - 2.5 * g2(y); });
    CHECK(p12 == Catch::Approx(1.5 * p1 - 2.5 * p2).margin(1e-12));
}

TEST_CASE("regularized operator J") {
    auto& fx = fixture();
    auto zero = fx.inv.apply_fn([](double) { return cplx(0.0); }, true);
    for (const auto& v : zero.u) CHECK(std::abs(v) == 0.0);

    const auto& rep = fx.inv.rep_nodes();
    double cj = 0.0;
    for (unsigned seed : {51, 52, 53, 54, 55, 56, 57, 58, 59, 60}) {
        auto g = random_g(seed);
        auto res = fx.inv.apply_fn(g, true);
        ChebSeries ju = to_series(rep, res.u);
        auto jud = ju.derivative();
        double nx = norm_X([&](double y) { return ju.eval(y); }, [&](double y) { return jud.eval(y); });
        cj = std::max(cj, nx / norm_Y(g));
    }
    INFO("empirical ||J(g)||_X <= C ||g||_Y with C = " << cj);
    CHECK(cj < 10.0);

    // with psi(g) = 0 by combination, J coincides with the formal inverse
    auto g1 = random_g(61), g2 = random_g(62);
    double p1 = fx.inv.psi_of(g1), p2 = fx.inv.psi_of(g2);
    double t = -p1 / p2;
    auto gk_ = [&](double y) { return g1(y) + t * g2(y); };
    auto rj = fx.inv.apply_fn(gk_, true);
    auto rl = fx.inv.apply_fn(gk_, false);
    CHECK(std::abs(rj.psi) <= 1e-12);
    double dmax = 0.0;
    for (size_t i = 0; i < rep.size(); ++i) dmax = std::max(dmax, std::abs(rj.u[i] - rl.u[i]));
    CHECK(dmax <= 1e-10);
}

TEST_CASE("J output lies in X: weighted derivative stable under grid refinement") {
    auto& fx = fixture();
    auto g = random_g(71);
    auto res = fx.inv.apply_fn(g, true);
    ChebSeries ju = to_series(fx.inv.rep_nodes(), res.u);
    auto jud = ju.derivative();
    auto wmax = [&](int refine_k) {
        double m = 0.0;
        for (int k = 1; k <= refine_k; ++k) {
            double d = std::ldexp(1.0, -k);
            if (d >= 2.0) continue;
            for (double y : {1.0 - d, -1.0 + d})
                m = std::max(m, (1.0 - y * y) * std::abs(jud.eval(y)));
        }
        return m;
    };
    double m20 = wmax(20), m40 = wmax(40);
    CHECK(m40 <= 1.05 * m20);
}

TEST_CASE("parameter continuity of J toward the cubic case") {
    auto& fx = fixture();
    auto g = random_g(81);
    auto base = fx.inv.apply_fn(g, true);
    ChebSeries ju0 = to_series(fx.inv.rep_nodes(), base.u);
    double prev = 1e300;
    for (int k = 3; k <= 5; ++k) {
        double p = 3.0 + std::ldexp(1.0, -k);
        PstarOptions opt;
        opt.seed = {{fx.ps.P, fx.ps.alpha}};
        auto psp = generate_pstar(p, opt);
        FStar fsp(psp.P);
        Frame frp(fsp, Params{0.0, p});
        InverseOp invp(frp, 0.0);
        auto resp = invp.apply_fn(g, true);
        ChebSeries jup = to_series(invp.rep_nodes(), resp.u);
        double dist = 0.0;
        for (double y = -0.99; y <= 0.99; y += 0.01) dist = std::max(dist, std::abs(jup.eval(y) - ju0.eval(y)));
        CHECK(dist < prev);
        prev = dist;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("frame inverse matches the endpoint asymptotics") {
    auto& fx = fixture();
    // rows 1,2 x cols 3,4 of F^{-1} behave like -phi(f3/W): cross-check the
    // dense solve against the asymptotic formula near the right endpoint
    const double a = 0.0;
    for (double my : {1e-2, 1e-3}) {
        double y = 1.0 - my;
        auto [c3, c4] = [&] {
            auto a1 = fx.inv.alpha_at(y, cplx(1.0, 0.0));  // c3 column
            auto a2 = fx.inv.alpha_at(y, cplx(0.0, 1.0));  // c4 column
            return std::pair{a1, a2};
        }();
        cplx W = fx.frame.wronskian(y, a);
        Deriv2 f1 = fx.frame.eval_right(0, y, a);
        cplx expect13 = -(fx.frame.eval_right(2, y, a).v / W);  // (F^{-1})^1_3 = -Re(f3/W)
        CHECK(std::abs(c3[0] - expect13.real()) <= 5.0 * my * my * std::abs(expect13.real()) + 1e-9);
        cplx expect33 = f1.v / W;  // (F^{-1})^3_3 = Re(f1/W)
        CHECK(std::abs(c3[2] - expect33.real()) <= 5.0 * my * std::abs(expect33.real()) + 1e-9);
    }
}
