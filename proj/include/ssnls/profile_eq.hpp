#pragma once
//==============================================================================
// profile_eq.hpp
// The compactified radial profile equation on (-1,1):
//   R(alpha,p,f) = f'' + p0 f' + q0 f + f|f|^{p-1}/(1-y)^2
// with the frozen coefficients p0, q0, the ansatz f_* built from a base
// Chebyshev profile, the real-linear linearization L at f_*, the nonlinear
// remainder N (zero-order subtracted so R(f_*+f) = R(f_*) + L(f) + N(f)
// holds identically), and the weighted sup norms of the X and Y spaces.
//==============================================================================

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ssnls/cheb.hpp"

namespace ssnls {

// fixed rational eigenvalue anchor for the cubic case
inline constexpr double a_star_num = 772201763088846.0;
inline constexpr double a_star_den = 841768781900003.0;
inline const double a_star = a_star_num / a_star_den;

inline constexpr double j_star_halfwidth = 1e-10;
inline constexpr double p_lo = 7.0 / 3.0;
inline constexpr double p_hi = 5.0;

struct Params {
    double a = 0.0;
    double p = 3.0;

    double alpha() const { return a_star + a; }
    bool a_in_jstar() const { return std::abs(a) <= j_star_halfwidth; }
    void validate() const {
        if (!(p > p_lo && p < p_hi)) throw std::domain_error("Params: p outside (7/3, 5)");
        if (!(alpha() > 0.0)) throw std::domain_error("Params: alpha must be positive");
    }
};

// |z|^e with a modulus floor; intermediate iterates may graze zero.
inline double abspow(cplx z, double e) {
    double m2 = std::norm(z);
    if (e == 0.0) return 1.0;
    if (m2 < 1e-300) m2 = 1e-300;
    return std::exp(0.5 * e * std::log(m2));
}

struct CoeffPair {
    cplx p0, q0;
};

namespace detail {
inline void require_interior(double y) {
    if (!(y > -1.0 && y < 1.0)) throw std::domain_error("singular point: y must lie strictly inside (-1,1)");
}
}  // namespace detail

inline CoeffPair frozen_coeffs(double y, double alpha, double p) {
    detail::require_interior(y);
    const double my = 1.0 - y, py = 1.0 + y;
    const double pm1 = p - 1.0;
    const cplx i(0.0, 1.0);
    cplx p0 = 4.0 * i * alpha / (my * my * my) - 2.0 * i * alpha / (my * my) -
              (4.0 / pm1 + 2.0 * i / alpha) / my + 2.0 / py;
    cplx q0 = (4.0 * i * alpha / pm1 - 2.0) / (my * my * my) +
              ((2.0 / pm1) * (2.0 / pm1 - 1.0) + (4.0 / pm1 - 1.0) * i / alpha - 1.0 / (alpha * alpha)) /
                  (my * my) -
              (2.0 / pm1 + i / alpha) / my - (2.0 / pm1 + i / alpha) / py;
    return {p0, q0};
}

// p0, q0 with their (1-y)^{-3} parts removed; used for stable residual
// evaluation near y = 1 where the cubic terms cancel against the boundary
// combination of f and f'.
inline CoeffPair frozen_coeffs_rest(double y, double alpha, double p) {
    detail::require_interior(y);
    const double my = 1.0 - y, py = 1.0 + y;
    const double pm1 = p - 1.0;
    const cplx i(0.0, 1.0);
    cplx p0r = -2.0 * i * alpha / (my * my) - (4.0 / pm1 + 2.0 * i / alpha) / my + 2.0 / py;
    cplx q0r = ((2.0 / pm1) * (2.0 / pm1 - 1.0) + (4.0 / pm1 - 1.0) * i / alpha - 1.0 / (alpha * alpha)) /
                   (my * my) -
               (2.0 / pm1 + i / alpha) / my - (2.0 / pm1 + i / alpha) / py;
    return {p0r, q0r};
}

inline CoeffPair frozen_coeffs_dalpha(double y, double alpha, double p) {
    detail::require_interior(y);
    const double my = 1.0 - y, py = 1.0 + y;
    const double pm1 = p - 1.0;
    const cplx i(0.0, 1.0);
    const double a2 = alpha * alpha, a3 = a2 * alpha;
    cplx dp0 = 4.0 * i / (my * my * my) - 2.0 * i / (my * my) + (2.0 * i / a2) / my;
    cplx dq0 = (4.0 * i / pm1) / (my * my * my) + (-(4.0 / pm1 - 1.0) * i / a2 + 2.0 / a3) / (my * my) +
               (i / a2) / my + (i / a2) / py;
    return {dp0, dq0};
}

// Ansatz f_*(y,a,p) = P(y) + c(alpha,p) P'(1) - P(1); the constant correction
// cancels the cubic order of the singularity of R at y = 1 for every (a,p).
class FStar {
  public:
    FStar() = default;
    explicit FStar(ChebSeries pstar)
        : P_(std::move(pstar)), Pd_(P_.derivative()), Pdd_(Pd_.derivative()) {
        if (!(P_.domain() == Domain{}))
            throw std::invalid_argument("FStar: base profile must live on [-1,1]");
        P1_ = P_.eval(1.0);
        Pd1_ = Pd_.eval(1.0);
    }

    static cplx corr_factor(double alpha, double p) {
        const cplx i(0.0, 1.0);
        return 2.0 * i * (p - 1.0) * alpha / ((p - 1.0) - 2.0 * i * alpha);
    }
    cplx correction(const Params& prm) const { return corr_factor(prm.alpha(), prm.p) * Pd1_ - P1_; }

    cplx value(double y, const Params& prm) const { return P_.eval(y) + correction(prm); }
    cplx deriv(double y) const { return Pd_.eval(y); }
    cplx second(double y) const { return Pdd_.eval(y); }

    const ChebSeries& base() const { return P_; }
    const ChebSeries& base_deriv() const { return Pd_; }
    const ChebSeries& base_second() const { return Pdd_; }
    cplx base_at_one() const { return P1_; }
    cplx base_deriv_at_one() const { return Pd1_; }

  private:
    ChebSeries P_, Pd_, Pdd_;
    cplx P1_{}, Pd1_{};
};

// boundary combinations whose vanishing keeps R in Y
inline cplx bc_right(double alpha, double p, cplx f1, cplx fd1) {
    const cplx i(0.0, 1.0);
    return 4.0 * i * alpha * fd1 + (4.0 * i * alpha / (p - 1.0) - 2.0) * f1;
}
inline cplx bc_left(double alpha, double p, cplx fm1, cplx fdm1) {
    const cplx i(0.0, 1.0);
    return 2.0 * fdm1 - (2.0 / (p - 1.0) + i / alpha) * fm1;
}

// pointwise residual of the full equation
inline cplx residual_point(const Params& prm, double y, cplx f, cplx fd, cplx fdd) {
    auto [p0, q0] = frozen_coeffs(y, prm.alpha(), prm.p);
    const double my = 1.0 - y;
    return fdd + p0 * fd + q0 * f + f * abspow(f, prm.p - 1.0) / (my * my);
}

struct FStarVals {
    cplx v, d, dd;
};

inline FStarVals fstar_vals(const FStar& fs, double y, const Params& prm) {
    return {fs.value(y, prm), fs.deriv(y), fs.second(y)};
}

// real-linear linearization of R at f_*
inline cplx linearize_point(const Params& prm, double y, cplx fstar, cplx f, cplx fd, cplx fdd) {
    auto [p0, q0] = frozen_coeffs(y, prm.alpha(), prm.p);
    const double my2 = (1.0 - y) * (1.0 - y);
    const double p = prm.p;
    const double ap1 = abspow(fstar, p - 1.0);
    const cplx v2 = 0.5 * (p - 1.0) * abspow(fstar, p - 3.0) * fstar * fstar;
    return fdd + p0 * fd + q0 * f + 0.5 * (p + 1.0) * ap1 * f / my2 + v2 * std::conj(f) / my2;
}

// nonlinear remainder with the zero-order term subtracted, so that
// R(f_*+f) = R(f_*) + L(f) + N(f) pointwise and N(0) = 0
inline cplx nonlinear_point(const Params& prm, double y, cplx fstar, cplx f) {
    detail::require_interior(y);
    const double my2 = (1.0 - y) * (1.0 - y);
    const double p = prm.p;
    const cplx tot = fstar + f;
    const double ap1 = abspow(fstar, p - 1.0);
    const cplx v2 = 0.5 * (p - 1.0) * abspow(fstar, p - 3.0) * fstar * fstar;
    return (tot * abspow(tot, p - 1.0) - fstar * ap1 - 0.5 * (p + 1.0) * ap1 * f - v2 * std::conj(f)) / my2;
}

//------------------------------------------------------------------------------
// evaluable profile with first derivative
//------------------------------------------------------------------------------
struct ProfileFn {
    enum class Repr { cheb_backed, closed_form, composite };

    std::function<cplx(double)> value;
    std::function<cplx(double)> deriv;
    Repr repr = Repr::closed_form;

    static ProfileFn from_series(const ChebSeries& s) {
        auto d = s.derivative();
        return {[s](double y) { return s.eval(y); }, [d](double y) { return d.eval(y); },
                Repr::cheb_backed};
    }
};

//------------------------------------------------------------------------------
// weighted sup norms on a composite grid: dense Lobatto nodes plus geometric
// refinement toward both endpoints where the weights vary fastest
//------------------------------------------------------------------------------
struct SupGrid {
    int lobatto = 2048;
    int refine_k = 40;

    std::vector<double> points() const {
        auto pts = lobatto_nodes(lobatto);
        pts.erase(pts.begin());   // drop exact +1
        pts.pop_back();           // drop exact -1
        for (int k = 1; k <= refine_k; ++k) {
            const double d = std::ldexp(1.0, -k);
            if (d < 2.0) {
                pts.push_back(1.0 - d);
                pts.push_back(-1.0 + d);
            }
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }
    size_t size() const { return static_cast<size_t>(lobatto) - 1 + 2 * static_cast<size_t>(refine_k); }
};

template <class V, class D>
double norm_X(V&& value, D&& deriv, const SupGrid& grid = {}) {
    double sup_v = 0.0, sup_d = 0.0;
    for (double y : grid.points()) {
        const double av = std::abs(value(y));
        const double ad = (1.0 - y * y) * std::abs(deriv(y));
        if (!std::isfinite(av) || !std::isfinite(ad))
            throw std::runtime_error("norm_X: non-finite sample at y=" + std::to_string(y));
        sup_v = std::max(sup_v, av);
        sup_d = std::max(sup_d, ad);
    }
    return sup_v + sup_d;
}

inline double norm_X(const ProfileFn& f, const SupGrid& grid = {}) {
    return norm_X(f.value, f.deriv, grid);
}

template <class G>
double norm_Y(G&& g, const SupGrid& grid = {}) {
    double sup = 0.0;
    for (double y : grid.points()) {
        const double w = (1.0 + y) * (1.0 - y) * (1.0 - y);
        const double av = w * std::abs(g(y));
        if (!std::isfinite(av)) throw std::runtime_error("norm_Y: non-finite sample at y=" + std::to_string(y));
        sup = std::max(sup, av);
    }
    return sup;
}

//------------------------------------------------------------------------------
// Chebyshev-backed total profile f = f_* + f_p with a residual evaluator that
// stays accurate near y = 1. The cubic part of the coefficients multiplies the
// boundary combination B(y) = 4 i alpha f' + (4 i alpha/(p-1) - 2) f, whose
// value at 1 nearly vanishes; B is therefore evaluated through its own
// coefficient series relative to the right endpoint.
//------------------------------------------------------------------------------
class CompositeProfile {
  public:
    CompositeProfile(Params prm, FStar fs, ChebSeries fp)
        : prm_(prm), fs_(std::move(fs)), fp_(std::move(fp)), fpd_(fp_.derivative()), fpdd_(fpd_.derivative()) {
        corr_ = fs_.correction(prm_);
        build_bc_series();
    }

    const Params& params() const { return prm_; }
    const FStar& fstar() const { return fs_; }
    const ChebSeries& correction_series() const { return fp_; }

    cplx value(double y) const { return fs_.base().eval(y) + corr_ + reg_offset_ + fp_.eval(y); }
    cplx deriv(double y) const { return fs_.base_deriv().eval(y) + fpd_.eval(y); }
    cplx second(double y) const { return fs_.base_second().eval(y) + fpdd_.eval(y); }

    ProfileFn as_profile_fn() const {
        auto self = *this;
        return {[self](double y) { return self.value(y); }, [self](double y) { return self.deriv(y); },
                ProfileFn::Repr::composite};
    }

    // residual defect of the right boundary combination, exact sum of the B-series
    cplx bc_defect_right() const { return bc_effective(); }

    cplx residual(double y) const {
        detail::require_interior(y);
        const cplx f = value(y), fd = deriv(y), fdd = second(y);
        const double my = 1.0 - y;
        if (my > stable_window_) return residual_point(prm_, y, f, fd, fdd);
        const cplx b = bc_effective() + bseries_.eval_minus_right_end(y);
        auto [p0r, q0r] = frozen_coeffs_rest(y, prm_.alpha(), prm_.p);
        return b / (my * my * my) + fdd + p0r * fd + q0r * f +
               f * abspow(f, prm_.p - 1.0) / (my * my);
    }

    // Shift the profile by a constant ~ulp so the right boundary combination
    // cancels below double rounding; removes a spurious 1/(1-y) noise floor
    // from the weighted residual. The offset is kept out of the coefficient
    // array, where it would be quantized away.
    void zero_bc_defect() {
        for (int pass = 0; pass < 2; ++pass) reg_offset_ -= bc_effective() / cb_();
    }

  private:
    void build_bc_series() {
        const cplx i(0.0, 1.0);
        const double alpha = prm_.alpha();
        const cplx cA = 4.0 * i * alpha;
        const cplx cB = 4.0 * i * alpha / (prm_.p - 1.0) - 2.0;
        // B = cA (P' + fp') + cB (P + corr + fp)
        ChebSeries b = cA * (fs_.base_deriv() + fpd_) + cB * (fs_.base() + fp_);
        auto c = b.coeffs();
        c[0] += cB * corr_;
        bseries_ = ChebSeries(c, b.domain());
        // B(1) = sum of coefficients, compensated so the zeroing pass below
        // can push the defect under the plain-summation noise floor
        auto neumaier = [](auto&& get, size_t n) {
            double s = 0.0, comp = 0.0;
            for (size_t k = 0; k < n; ++k) {
                double x = get(k);
                double t = s + x;
                comp += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
                s = t;
            }
            return s + comp;
        };
        const auto& bc = bseries_.coeffs();
        bc_core_ = cplx(neumaier([&](size_t k) { return bc[k].real(); }, bc.size()),
                        neumaier([&](size_t k) { return bc[k].imag(); }, bc.size()));
    }

    cplx cb_() const { return cplx(0.0, 4.0 * prm_.alpha() / (prm_.p - 1.0)) - 2.0; }
    cplx bc_effective() const { return bc_core_ + cb_() * reg_offset_; }

    Params prm_;
    FStar fs_;
    ChebSeries fp_, fpd_, fpdd_;
    cplx corr_{};
    cplx reg_offset_{};
    ChebSeries bseries_;
    cplx bc_core_{};
    double stable_window_ = 0.05;
};

}  // namespace ssnls
