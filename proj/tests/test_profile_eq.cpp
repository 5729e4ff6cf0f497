#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ssnls/profile_eq.hpp"

using namespace ssnls;

namespace {
// synthetic smooth base profile; the algebraic identities hold for any P_*
FStar make_test_fstar() {
    auto P = interpolate([](double y) { return cplx(1.2 * std::exp(-0.8 * (y + 1.0)), 0.3 * std::cos(2.0 * y)); },
                         24);
    return FStar(P);
}

ChebSeries random_series(int deg, unsigned seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> c(static_cast<size_t>(deg) + 1);
    for (size_t n = 0; n < c.size(); ++n)
        c[n] = scale * cplx(u(rng), u(rng)) / (1.0 + static_cast<double>(n * n));
    return ChebSeries(c);
}
}  // namespace

TEST_CASE("frozen coefficients at the reference point") {
    auto [p0, q0] = frozen_coeffs(0.0, 1.0, 3.0);
    CHECK(std::abs(p0) < 1e-15);
    CHECK(std::abs(q0 - cplx(-5.0, 1.0)) < 1e-14);
    CHECK_THROWS_AS(frozen_coeffs(1.0, 1.0, 3.0), std::domain_error);
    CHECK_THROWS_AS(frozen_coeffs(-1.0, 1.0, 3.0), std::domain_error);
}

TEST_CASE("p0 grows like 4 i alpha / (1-y)^3 toward the right endpoint") {
    const double alpha = 0.8, p = 3.1;
    for (double my : {1e-3, 1e-4, 1e-5}) {
        auto [p0, q0] = frozen_coeffs(1.0 - my, alpha, p);
        cplx ratio = p0 * (my * my * my) / cplx(0.0, 4.0 * alpha);
        CHECK(std::abs(ratio - 1.0) < 2.0 * my / (4.0 * alpha) * (2.0 * alpha + 1.0));
        (void)q0;
    }
}

TEST_CASE("f_star derivative is base-profile derivative, correction constant in y") {
    auto fs = make_test_fstar();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(-1e-3, 1e-3), up(2.5, 4.5), uy(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        Params prm{ua(rng), up(rng)};
        double y = uy(rng);
        CHECK(std::abs(fs.deriv(y) - fs.base_deriv().eval(y)) < 1e-15);
        // value differs from base by a y-independent constant
        cplx d1 = fs.value(y, prm) - fs.base().eval(y);
        cplx d2 = fs.value(-y, prm) - fs.base().eval(-y);
        CHECK(std::abs(d1 - d2) < 1e-14);
    }
}

TEST_CASE("boundary identity of f_star holds for random (a,p)") {
    auto fs = make_test_fstar();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(-1e-3, 1e-3), up(2.4, 4.9);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        Params prm{ua(rng), up(rng)};
        cplx bc = bc_right(prm.alpha(), prm.p, fs.value(1.0, prm), fs.deriv(1.0));
        worst = std::max(worst, std::abs(bc));
    }
    CHECK(worst <= 1e-13);
}

TEST_CASE("f_star value at the cubic reference point") {
    auto fs = make_test_fstar();
    Params prm{0.0, 3.0};
    cplx expect = fs.base().eval(1.0) +
                  4.0 * cplx(0.0, 1.0) * a_star / (2.0 - 2.0 * cplx(0.0, 1.0) * a_star) * fs.base_deriv().eval(1.0) -
                  fs.base_at_one();
    CHECK(std::abs(fs.value(1.0, prm) - expect) < 1e-14);
}

TEST_CASE("residual of the zero profile vanishes") {
    Params prm{0.0, 3.0};
    for (double y : {-0.9, -0.2, 0.4, 0.95}) CHECK(std::abs(residual_point(prm, y, 0.0, 0.0, 0.0)) == 0.0);
}

TEST_CASE("decomposition R(f_*+f) = R(f_*) + L(f) + N(f) pointwise") {
    auto fs = make_test_fstar();
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> uy(-0.999, 0.999), uc(-1.0, 1.0), ua(-1e-3, 1e-3), up(2.5, 4.5);
    for (int k = 0; k < 50; ++k) {
        Params prm{ua(rng), up(rng)};
        double y = uy(rng);
        cplx f(uc(rng), uc(rng)), fd(uc(rng), uc(rng)), fdd(uc(rng), uc(rng));
        auto base = fstar_vals(fs, y, prm);
        cplx lhs = residual_point(prm, y, base.v + f, base.d + fd, base.dd + fdd);
        cplx rhs = residual_point(prm, y, base.v, base.d, base.dd) +
                   linearize_point(prm, y, base.v, f, fd, fdd) + nonlinear_point(prm, y, base.v, f);
        double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
        CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
    }
}

TEST_CASE("weighted residual of f_star decays linearly at the right endpoint") {
    auto fs = make_test_fstar();
    Params prm{0.0, 3.0};
    std::vector<double> vals;
    for (int k = 2; k <= 6; ++k) {
        double y = 1.0 - std::pow(10.0, -k);
        auto b = fstar_vals(fs, y, prm);
        cplx r = residual_point(prm, y, b.v, b.d, b.dd);
        vals.push_back(std::pow(1.0 - y, 3) * std::abs(r));
    }
    // each decade in (1-y) shrinks the weighted residual by ~10
    for (size_t k = 0; k + 1 < vals.size(); ++k) {
        CHECK(vals[k + 1] < vals[k]);
        CHECK(vals[k + 1] / vals[k] == Catch::Approx(0.1).epsilon(0.5));
    }
}

TEST_CASE("linearization is real-linear but not complex-linear") {
    auto fs = make_test_fstar();
    Params prm{0.0, 3.0};
    const double y = 0.37;
    auto base = fstar_vals(fs, y, prm);
    cplx f(0.4, -0.7), fd(-0.2, 0.1), fdd(0.05, 0.3);

    CHECK(std::abs(linearize_point(prm, y, base.v, 0.0, 0.0, 0.0)) == 0.0);

    cplx Lf = linearize_point(prm, y, base.v, f, fd, fdd);
    cplx L3f = linearize_point(prm, y, base.v, 3.0 * f, 3.0 * fd, 3.0 * fdd);
    CHECK(std::abs(L3f - 3.0 * Lf) <= 1e-12 * std::abs(Lf));

    const cplx i(0.0, 1.0);
    cplx Lif = linearize_point(prm, y, base.v, i * f, i * fd, i * fdd);
    CHECK(std::abs(Lif - i * Lf) > 1e-6 * std::abs(Lf));  // conjugate term breaks C-linearity
}

TEST_CASE("linearization matches directional derivative of R") {
    auto fs = make_test_fstar();
    Params prm{0.0, 3.0};
    auto h = random_series(10, 77);
    auto hd = h.derivative();
    auto hdd = hd.derivative();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uy(-0.95, 0.95);
    for (int k = 0; k < 20; ++k) {
        double y = uy(rng);
        auto b = fstar_vals(fs, y, prm);
        cplx hv = h.eval(y), hdv = hd.eval(y), hddv = hdd.eval(y);
        cplx Lh = linearize_point(prm, y, b.v, hv, hdv, hddv);
        double prev = 1e300;
        for (double eps : {1e-4, 1e-5, 1e-6}) {
            cplx diff = (residual_point(prm, y, b.v + eps * hv, b.d + eps * hdv, b.dd + eps * hddv) -
                         residual_point(prm, y, b.v, b.d, b.dd)) /
                        eps;
            double err = std::abs(diff - Lh);
            CHECK(err < prev * 1.2);  // shrinks (up to roundoff floor)
            prev = err;
        }
        CHECK(prev <= 1e-5 * std::max(1.0, std::abs(Lh)));
    }
}

TEST_CASE("nonlinear remainder vanishes at zero and is quadratically small") {
    auto fs = make_test_fstar();
    Params prm{0.0, 3.0};
    for (double y : {-0.8, 0.0, 0.9}) {
        auto b = fstar_vals(fs, y, prm);
        CHECK(std::abs(nonlinear_point(prm, y, b.v, 0.0)) == 0.0);
    }
    auto f = random_series(8, 13);
    SupGrid grid{512, 30};
    double prev_ratio = 1e300;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        double ny = norm_Y(
            [&](double y) { return nonlinear_point(prm, y, fs.value(y, prm), eps * f.eval(y)); }, grid);
        double ratio = ny / eps;
        CHECK(ratio < prev_ratio);
        prev_ratio = ratio;
    }
    CHECK(prev_ratio < 1e-4);
}

TEST_CASE("norm values on closed forms") {
    SupGrid grid{};
    CHECK(norm_X([](double) { return cplx(1.0); }, [](double) { return cplx(0.0); }, grid) ==
          Catch::Approx(1.0));
    CHECK(norm_X([](double y) { return cplx(y); }, [](double) { return cplx(1.0); }, grid) ==
          Catch::Approx(2.0).margin(1e-5));
    CHECK(norm_X([](double) { return cplx(0.0); }, [](double) { return cplx(0.0); }, grid) == 0.0);

    CHECK(norm_Y([](double y) { return cplx(1.0 / ((1.0 - y) * (1.0 - y))); }, grid) ==
          Catch::Approx(2.0).margin(1e-9));
    CHECK(norm_Y([](double) { return cplx(1.0); }, grid) == Catch::Approx(32.0 / 27.0).margin(1e-5));
    CHECK(norm_Y([](double) { return cplx(0.0); }, grid) == 0.0);
}

TEST_CASE("norms are absolutely homogeneous and satisfy the triangle inequality") {
    auto f = random_series(12, 3);
    auto g = random_series(12, 4);
    auto fd = f.derivative();
    auto gd = g.derivative();
    SupGrid grid{512, 30};
    auto nx = [&](auto&& v, auto&& d) { return norm_X(v, d, grid); };
    double nf = nx([&](double y) { return f.eval(y); }, [&](double y) { return fd.eval(y); });
    double ng = nx([&](double y) { return g.eval(y); }, [&](double y) { return gd.eval(y); });
    double nsum = nx([&](double y) { return f.eval(y) + g.eval(y); },
                     [&](double y) { return fd.eval(y) + gd.eval(y); });
    CHECK(nsum <= nf + ng + 1e-12);
    const cplx s(-2.5, 1.5);
    double nsf = nx([&](double y) { return s * f.eval(y); }, [&](double y) { return s * fd.eval(y); });
    CHECK(nsf == Catch::Approx(std::abs(s) * nf).epsilon(1e-12));

    double yf = norm_Y([&](double y) { return f.eval(y); }, grid);
    double yg = norm_Y([&](double y) { return g.eval(y); }, grid);
    double ysum = norm_Y([&](double y) { return f.eval(y) + g.eval(y); }, grid);
    CHECK(ysum <= yf + yg + 1e-12);
    double ysf = norm_Y([&](double y) { return s * f.eval(y); }, grid);
    CHECK(ysf == Catch::Approx(std::abs(s) * yf).epsilon(1e-12));
}

TEST_CASE("composite profile: stable residual path agrees with the direct formula") {
    auto fs = make_test_fstar();
    Params prm{1e-4, 3.05};
    CompositeProfile cp(prm, fs, random_series(16, 21, 1e-3));
    for (double my : {0.049, 0.02, 0.005}) {
        double y = 1.0 - my;
        cplx direct = residual_point(prm, y, cp.value(y), cp.deriv(y), cp.second(y));
        cplx stable = cp.residual(y);
        CHECK(std::abs(stable - direct) <= 1e-9 * std::abs(direct));
    }
    // far from the endpoint both are the same code path
    CHECK(std::abs(cp.residual(0.3) - residual_point(prm, 0.3, cp.value(0.3), cp.deriv(0.3), cp.second(0.3))) == 0.0);
}

TEST_CASE("composite profile: boundary-combination series matches direct evaluation") {
    auto fs = make_test_fstar();
    Params prm{0.0, 2.9};
    CompositeProfile cp(prm, fs, random_series(10, 8, 1e-2));
    cplx direct = bc_right(prm.alpha(), prm.p, cp.value(1.0), cp.deriv(1.0));
    CHECK(std::abs(cp.bc_defect_right() - direct) <= 1e-13 * std::max(1.0, std::abs(direct)));
    cp.zero_bc_defect();
    CHECK(std::abs(cp.bc_defect_right()) <= 1e-17);
}
