#pragma once
//==============================================================================
// fundsys.hpp
// Approximate fundamental systems of the linearized operator, glued into the
// global 4x4 frame F(y,a,p).
//
//   left  (y <= 0):  f_L1 = 1 + (1+y)P1,        f_L2 = i + (1+y)P2,
//                    f_L3 = 1/(1+y) + (1+y)P3,  f_L4 = i/(1+y) + (1+y)P4
//   right (y >= 0):  f_R1 = 1 + k(1-y) + (1-y)^2 P1,  f_R2 = i + ik(1-y) + (1-y)^2 P2,
//                    f_R3 = E [1 + nu(1-y) + (1-y)^2 P3] + Ebar Q3,
//                    f_R4 = E [i(1 + nu(1-y)) + (1-y)^2 P4] + Ebar Q4,
//   with E = e^{i phi}(1-y)^{3-4/(p-1)} and Ebar = e^{-i phi}(1-y)^{7-4/(p-1)}.
//
// Polynomial corrections are regenerated by least-squares collocation of the
// linearized equation with the leading behavior peeled off. On the right the
// conjugated operator coefficients carry (1-y)^{-6}..(1-y)^{-4} terms that
// cancel algebraically for the e^{+i phi} block; both operators are therefore
// evaluated from explicit per-power coefficient tables, never by subtracting
// large numbers.
//
// The explicit first-order terms carry all (a,p) dependence; connection matrix
// M(a,p) = F_L(0)^{-1} F_R(0,a,p) glues the systems continuously at 0.
//==============================================================================

#include <Eigen/Dense>
#include <array>

#include "ssnls/cheb.hpp"
#include "ssnls/profile_eq.hpp"

namespace ssnls {

inline double phase_phi(double y, double alpha) {
    if (!(y < 1.0)) throw std::domain_error("phase_phi: y must be < 1");
    const double my = 1.0 - y;
    return -2.0 * alpha / (my * my) + 2.0 * alpha / my - (2.0 / alpha) * std::log(my);
}
inline double phase_phi_d1(double y, double alpha) {
    const double s = 1.0 / (1.0 - y);
    return ((-4.0 * alpha * s + 2.0 * alpha) * s + 2.0 / alpha) * s;
}
inline double phase_phi_d2(double y, double alpha) {
    const double s = 1.0 / (1.0 - y);
    return (((-12.0 * alpha * s + 4.0 * alpha) * s + 2.0 / alpha) * s) * s;
}

struct FrameOptions {
    int degree_left = 16;
    int degree_right_P = 30;
    int degree_right_Q = 26;
    double window_left = -0.999;   // collocation window [window_left, 0]
    double window_right = 0.999;   // [0, window_right]
    int oversample = 4;
};

struct Deriv2 {
    cplx v, d1, d2;
};

struct TildeCoeffs {
    cplx p1, p2, q1, q2;
};

namespace detail {

// a(y) = sum_k cs[k] s^k + u sum_k cu[k] s^k with s = 1/(1-y), u = 1/(1+y);
// explicit tables for the operator conjugated by the oscillatory envelopes.
struct PeelOp {
    std::array<cplx, 7> a0s{}, a0u{};
    std::array<cplx, 4> a1s{}, a1u{};

    cplx a0(double y) const { return horner(a0s, y) + horner(a0u, y) / (1.0 + y); }
    cplx a1(double y) const { return horner(a1s, y) + horner(a1u, y) / (1.0 + y); }

    template <size_t N>
    static cplx horner(const std::array<cplx, N>& c, double y) {
        const double s = 1.0 / (1.0 - y);
        cplx acc = c[N - 1];
        for (int k = static_cast<int>(N) - 2; k >= 0; --k) acc = acc * s + c[static_cast<size_t>(k)];
        return acc;
    }
};

inline PeelOp peel_op_E(double alpha, double p) {
    const cplx i(0.0, 1.0);
    const double pm = p - 1.0;
    PeelOp op;
    op.a0s[3] = -2.0 + 2.0 * i * alpha * (3.0 - p) / pm;
    op.a0s[2] = (2.0 * alpha * alpha * (3.0 * p - 5.0) * (p - 2.0) - i * alpha * (5.0 * p - 9.0) * pm -
                 pm * pm) /
                (alpha * alpha * pm * pm);
    op.a0s[1] = -2.0 / pm - i / alpha;
    op.a0u[3] = -8.0 * i * alpha;
    op.a0u[2] = 4.0 * i * alpha;
    op.a0u[1] = 2.0 * (7.0 - 3.0 * p) / pm + 4.0 * i / alpha;
    op.a0u[0] = -2.0 / pm - i / alpha;
    op.a1s[3] = -4.0 * i * alpha;
    op.a1s[2] = 2.0 * i * alpha;
    op.a1s[1] = 2.0 * (5.0 - 3.0 * p) / pm + 2.0 * i / alpha;
    op.a1u[0] = 2.0;
    return op;
}

inline PeelOp peel_op_Ebar(double alpha, double p) {
    const cplx i(0.0, 1.0);
    const double pm = p - 1.0;
    PeelOp op;
    op.a0s[6] = -32.0 * alpha * alpha;
    op.a0s[5] = 32.0 * alpha * alpha;
    op.a0s[4] = 8.0 * (-alpha * alpha + 4.0) - 8.0 * i * alpha * (9.0 * p - 13.0) / pm;
    op.a0s[3] = -18.0 + 2.0 * i * alpha * (19.0 * p - 25.0) / pm;
    op.a0s[2] = (2.0 * alpha * alpha * (3.0 * p - 4.0) * (7.0 * p - 9.0) +
                 3.0 * i * alpha * (13.0 * p - 17.0) * pm - 9.0 * pm * pm) /
                (alpha * alpha * pm * pm);
    op.a0s[1] = -2.0 / pm - i / alpha;
    op.a0u[3] = 8.0 * i * alpha;
    op.a0u[2] = -4.0 * i * alpha;
    op.a0u[1] = 2.0 * (11.0 - 7.0 * p) / pm - 4.0 * i / alpha;
    op.a0u[0] = -2.0 / pm - i / alpha;
    op.a1s[3] = 12.0 * i * alpha;
    op.a1s[2] = -6.0 * i * alpha;
    op.a1s[1] = 2.0 * (9.0 - 7.0 * p) / pm - 6.0 * i / alpha;
    op.a1u[0] = 2.0;
    return op;
}

// potentials of the linearization at f_*
struct Potentials {
    const FStar* fs;
    Params prm;
    cplx v1(double y) const {
        const double my2 = (1.0 - y) * (1.0 - y);
        return 0.5 * (prm.p + 1.0) * abspow(fs->value(y, prm), prm.p - 1.0) / my2;
    }
    cplx v2(double y) const {
        const double my2 = (1.0 - y) * (1.0 - y);
        cplx f = fs->value(y, prm);
        return 0.5 * (prm.p - 1.0) * abspow(f, prm.p - 3.0) * f * f / my2;
    }
};

// least squares over stacked real rows; columns are Re/Im of the complex
// coefficients, which is required because conjugation couples them
inline std::vector<cplx> solve_rlinear_lsq(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs) {
    Eigen::VectorXd sol = m.colPivHouseholderQr().solve(rhs);
    std::vector<cplx> out(static_cast<size_t>(sol.size() / 2));
    for (size_t n = 0; n < out.size(); ++n) out[n] = cplx(sol(2 * n), sol(2 * n + 1));
    return out;
}

}  // namespace detail

class Frame {
  public:
    Frame(const FStar& fs, Params ref, FrameOptions opt = {})
        : fs_(&fs), ref_(ref), opt_(opt), mu_(3.0 - 4.0 / (ref.p - 1.0)) {
        ref_.validate();
        build_left();
        build_right();
        fl0_ = FL(0.0);
        fl0_lu_ = Eigen::PartialPivLU<Eigen::Matrix4d>(fl0_);
    }

    double p() const { return ref_.p; }
    double a_ref() const { return ref_.a; }
    double mu() const { return mu_; }
    const FrameOptions& options() const { return opt_; }

    //--------------------------------------------------------------------------
    // fundamental solutions
    //--------------------------------------------------------------------------
    Deriv2 eval_left(int j, double y) const {
        const ChebSeries &P = pl_[static_cast<size_t>(j)], &Pd = pld_[static_cast<size_t>(j)],
                         &Pdd = pldd_[static_cast<size_t>(j)];
        const double py = 1.0 + y;
        cplx pv = P.eval(y), pd = Pd.eval(y), pdd = Pdd.eval(y);
        Deriv2 r{py * pv, pv + py * pd, 2.0 * pd + py * pdd};
        if (j == 0) {
            r.v += 1.0;
        } else if (j == 1) {
            r.v += cplx(0.0, 1.0);
        } else {
            const cplx lead = (j == 2) ? cplx(1.0) : cplx(0.0, 1.0);
            r.v += lead / py;
            r.d1 += -lead / (py * py);
            r.d2 += 2.0 * lead / (py * py * py);
        }
        return r;
    }

    Deriv2 eval_right(int j, double y, double a) const {
        const double alpha = a_star + a;
        const double my = 1.0 - y;
        const ChebSeries &P = pr_[static_cast<size_t>(j)], &Pd = prd_[static_cast<size_t>(j)],
                         &Pdd = prdd_[static_cast<size_t>(j)];
        cplx pv = P.eval(y), pd = Pd.eval(y), pdd = Pdd.eval(y);
        if (j == 0 || j == 1) {
            const cplx kap = kappa(alpha);
            const cplx lead0 = (j == 0) ? cplx(1.0) : cplx(0.0, 1.0);
            const cplx lead1 = lead0 * kap;
            return {lead0 + lead1 * my + my * my * pv,
                    -lead1 - 2.0 * my * pv + my * my * pd,
                    2.0 * pv - 4.0 * my * pd + my * my * pdd};
        }
        // oscillatory pair: f = E v + Ebar w
        const cplx lead0 = (j == 2) ? cplx(1.0) : cplx(0.0, 1.0);
        const cplx nv = lead0 * nu(alpha);
        cplx v = lead0 + nv * my + my * my * pv;
        cplx vd = -nv - 2.0 * my * pv + my * my * pd;
        cplx vdd = 2.0 * pv - 4.0 * my * pd + my * my * pdd;
        const ChebSeries &Q = qr_[static_cast<size_t>(j - 2)], &Qd = qrd_[static_cast<size_t>(j - 2)],
                         &Qdd = qrdd_[static_cast<size_t>(j - 2)];
        cplx w = Q.eval(y), wd = Qd.eval(y), wdd = Qdd.eval(y);

        auto [E, e1, e1p] = envelope_E(y, alpha);
        auto [Eb, b1, b1p] = envelope_Ebar(y, alpha);
        Deriv2 r;
        r.v = E * v + Eb * w;
        r.d1 = E * (vd + e1 * v) + Eb * (wd + b1 * w);
        r.d2 = E * (vdd + 2.0 * e1 * vd + (e1 * e1 + e1p) * v) +
               Eb * (wdd + 2.0 * b1 * wd + (b1 * b1 + b1p) * w);
        return r;
    }

    // glued complex fundamental solution f_j (j = 0..3) and derivative
    Deriv2 eval_glued(int j, double y, double a) const {
        if (y > 0.0) return eval_right(j, y, a);
        Eigen::Matrix4d m = connection(a);
        Deriv2 r{};
        for (int l = 0; l < 4; ++l) {
            Deriv2 fl = eval_left(l, y);
            r.v += m(l, j) * fl.v;
            r.d1 += m(l, j) * fl.d1;
            r.d2 += m(l, j) * fl.d2;
        }
        return r;
    }

    //--------------------------------------------------------------------------
    // 4x4 frames: rows (Re f_j, Im f_j, Re f_j', Im f_j'), columns j
    //--------------------------------------------------------------------------
    Eigen::Matrix4d FL(double y) const { return pack_rows(&Frame::eval_left_shim, y, 0.0, false); }
    Eigen::Matrix4d FLprime(double y) const { return pack_rows(&Frame::eval_left_shim, y, 0.0, true); }
    Eigen::Matrix4d FR(double y, double a) const { return pack_rows(&Frame::eval_right_shim, y, a, false); }
    Eigen::Matrix4d FRprime(double y, double a) const {
        return pack_rows(&Frame::eval_right_shim, y, a, true);
    }

    Eigen::Matrix4d connection(double a) const { return fl0_lu_.solve(FR(0.0, a)); }

    // glued frame F(y,a) and its derivative frame
    Eigen::Matrix4d F(double y, double a) const {
        if (y > 0.0) return FR(y, a);
        return FL(y) * connection(a);
    }
    Eigen::Matrix4d Fprime(double y, double a) const {
        if (y > 0.0) return FRprime(y, a);
        return FLprime(y) * connection(a);
    }

    // coefficients associated to F via A = -F' F^{-1}
    TildeCoeffs tilde_coeffs(double y, double a) const {
        Eigen::Matrix4d aM;
        if (y > 0.0) {
            aM = -FRprime(y, a) * FR(y, a).inverse();
        } else {
            aM = -FLprime(y) * FL(y).inverse();  // connection cancels on the left
        }
        return coeffs_from_A(aM);
    }

    static TildeCoeffs coeffs_from_A(const Eigen::Matrix4d& aM) {
        TildeCoeffs c;
        c.p1 = cplx(0.5 * (aM(2, 2) + aM(3, 3)), 0.5 * (aM(3, 2) - aM(2, 3)));
        c.p2 = cplx(0.5 * (aM(2, 2) - aM(3, 3)), 0.5 * (aM(3, 2) + aM(2, 3)));
        c.q1 = cplx(0.5 * (aM(2, 0) + aM(3, 1)), 0.5 * (aM(3, 0) - aM(2, 1)));
        c.q2 = cplx(0.5 * (aM(2, 0) - aM(3, 1)), 0.5 * (aM(3, 0) + aM(2, 1)));
        return c;
    }

    cplx ltilde_apply(double y, double a, cplx f, cplx fd, cplx fdd) const {
        auto c = tilde_coeffs(y, a);
        return fdd + c.p1 * fd + c.p2 * std::conj(fd) + c.q1 * f + c.q2 * std::conj(f);
    }

    cplx wronskian(double y, double a) const {
        Deriv2 f1 = (y > 0.0) ? eval_right(0, y, a) : eval_glued(0, y, a);
        Deriv2 f3 = (y > 0.0) ? eval_right(2, y, a) : eval_glued(2, y, a);
        return f1.v * f3.d1 - f1.d1 * f3.v;
    }

    // generation diagnostics: sup of the linearized-equation residual of the
    // approximate solutions (peeled evaluation); optionally in the Y-weight,
    // the measure in which the operator difference acts downstream
    double residual_left(int j, bool y_weighted = false, double window_lo = -0.99,
                         int samples = 2000) const {
        double sup = 0.0;
        for (int k = 0; k <= samples; ++k) {
            double y = window_lo - window_lo * k / samples;
            double w = y_weighted ? (1.0 + y) * (1.0 - y) * (1.0 - y) : 1.0;
            sup = std::max(sup, w * std::abs(left_equation_residual(j, y)));
        }
        return sup;
    }
    double residual_right(int j, bool y_weighted = true, double window_hi = 0.99,
                          int samples = 2000) const {
        double sup = 0.0;
        for (int k = 0; k <= samples; ++k) {
            double y = window_hi * k / samples;
            double w = y_weighted ? (1.0 + y) * (1.0 - y) * (1.0 - y) : 1.0;
            sup = std::max(sup, w * right_equation_residual(j, y));
        }
        return sup;
    }

    // Oscillation-free decomposition of det F_R near y = 1:
    //   alpha^6 (1-y)^{2(4-4/(p-1))} det F_R = cos^2 P_dR + cos sin Q2 + sin^2 Q3.
    struct DetDecomposition {
        double p_dr, q2, q3;
    };
    DetDecomposition det_decomposition(double y, double a) const {
        const double alpha = a_star + a;
        const double my = 1.0 - y;
        const double q4 = 4.0 / (ref_.p - 1.0);
        Eigen::Matrix4d p0m = Eigen::Matrix4d::Zero(), pcm = Eigen::Matrix4d::Zero(),
                        psm = Eigen::Matrix4d::Zero();
        for (int j = 0; j < 2; ++j) {
            Deriv2 f = eval_right(j, y, a);
            p0m(0, j) = alpha * f.v.real();
            p0m(1, j) = alpha * f.v.imag();
            p0m(2, j) = alpha * f.d1.real();
            p0m(3, j) = alpha * f.d1.imag();
        }
        const double scale = alpha * alpha * std::pow(my, 4.0 - q4);
        for (int j = 2; j < 4; ++j) {
            const cplx lead0 = (j == 2) ? cplx(1.0) : cplx(0.0, 1.0);
            const cplx nv = lead0 * nu(alpha);
            const ChebSeries& P = pr_[static_cast<size_t>(j)];
            const ChebSeries& Q = qr_[static_cast<size_t>(j - 2)];
            cplx v = lead0 + nv * my + my * my * P.eval(y);
            cplx vd = -nv - 2.0 * my * P.eval(y) + my * my * prd_[static_cast<size_t>(j)].eval(y);
            cplx w = Q.eval(y), wd = qrd_[static_cast<size_t>(j - 2)].eval(y);
            const double s = 1.0 / my;
            const cplx e1 = cplx(0.0, phase_phi_d1(y, alpha)) - mu_ * s;
            const cplx b1 = -cplx(0.0, phase_phi_d1(y, alpha)) - (mu_ + 4.0) * s;
            const double envE = std::pow(my, mu_), envB = std::pow(my, mu_ + 4.0);
            // entry = e^{i phi} X + e^{-i phi} Z per row; split into cos/sin parts
            cplx Xv = envE * v, Zv = envB * w;
            cplx Xd = envE * (vd + e1 * v), Zd = envB * (wd + b1 * w);
            auto fill = [&](int row, cplx X, cplx Z, bool imag_part) {
                if (!imag_part) {
                    pcm(row, j) = scale * (X + Z).real();
                    psm(row, j) = -scale * (X - Z).imag();
                } else {
                    pcm(row, j) = scale * (X + Z).imag();
                    psm(row, j) = scale * (X - Z).real();
                }
            };
            fill(0, Xv, Zv, false);
            fill(1, Xv, Zv, true);
            fill(2, Xd, Zd, false);
            fill(3, Xd, Zd, true);
        }
        DetDecomposition d;
        d.p_dr = (p0m + pcm).determinant();
        d.q3 = (p0m + psm).determinant();
        d.q2 = 0.5 * ((p0m + pcm + psm).determinant() - (p0m + pcm - psm).determinant());
        return d;
    }

    cplx left_equation_residual(int j, double y) const {
        Deriv2 f = eval_left(j, y);
        auto [p0, q0] = frozen_coeffs(y, ref_.alpha(), ref_.p);
        detail::Potentials pot{fs_, ref_};
        return f.d2 + p0 * f.d1 + q0 * f.v + pot.v1(y) * f.v + pot.v2(y) * std::conj(f.v);
    }

    double right_equation_residual(int j, double y) const {
        detail::Potentials pot{fs_, ref_};
        const double alpha = ref_.alpha();
        const double my = 1.0 - y;
        if (j == 0 || j == 1) {
            Deriv2 f = eval_right(j, y, ref_.a);
            auto [p0, q0] = frozen_coeffs(y, alpha, ref_.p);
            return std::abs(f.d2 + p0 * f.d1 + q0 * f.v + pot.v1(y) * f.v + pot.v2(y) * std::conj(f.v));
        }
        // peeled evaluation |E A| + |Ebar B| avoids the large cancelling powers
        const cplx lead0 = (j == 2) ? cplx(1.0) : cplx(0.0, 1.0);
        const cplx nv = lead0 * nu(alpha);
        const ChebSeries &P = pr_[static_cast<size_t>(j)], &Q = qr_[static_cast<size_t>(j - 2)];
        cplx v = lead0 + nv * my + my * my * P.eval(y);
        cplx vd = -nv - 2.0 * my * P.eval(y) + my * my * prd_[static_cast<size_t>(j)].eval(y);
        cplx vdd = 2.0 * P.eval(y) - 4.0 * my * prd_[static_cast<size_t>(j)].eval(y) +
                   my * my * prdd_[static_cast<size_t>(j)].eval(y);
        cplx w = Q.eval(y), wd = qrd_[static_cast<size_t>(j - 2)].eval(y),
             wdd = qrdd_[static_cast<size_t>(j - 2)].eval(y);
        auto peelE = detail::peel_op_E(alpha, ref_.p);
        auto peelB = detail::peel_op_Ebar(alpha, ref_.p);
        const double m4 = my * my * my * my;
        cplx A = vdd + peelE.a1(y) * vd + peelE.a0(y) * v + pot.v1(y) * v + pot.v2(y) * m4 * std::conj(w);
        cplx B = wdd + peelB.a1(y) * wd + peelB.a0(y) * w + pot.v1(y) * w + pot.v2(y) / m4 * std::conj(v);
        const double envE = std::pow(my, mu_), envB = std::pow(my, mu_ + 4.0);
        return envE * std::abs(A) + envB * std::abs(B);
    }

    const ChebSeries& left_correction(int j) const { return pl_[static_cast<size_t>(j)]; }
    const ChebSeries& right_correction_P(int j) const { return pr_[static_cast<size_t>(j)]; }
    const ChebSeries& right_correction_Q(int j) const { return qr_[static_cast<size_t>(j - 2)]; }

    cplx kappa(double alpha) const {
        return cplx(0.5, 0.5 / alpha) + (3.0 - ref_.p) / (2.0 * (ref_.p - 1.0));
    }
    cplx nu(double alpha) const { return cplx(1.0, -0.5 / alpha); }

    // envelope E = e^{i phi}(1-y)^mu with log-derivative data
    std::tuple<cplx, cplx, cplx> envelope_E(double y, double alpha) const {
        const double my = 1.0 - y;
        const double s = 1.0 / my;
        cplx E = std::polar(std::pow(my, mu_), phase_phi(y, alpha));
        cplx e1 = cplx(0.0, phase_phi_d1(y, alpha)) - mu_ * s;
        cplx e1p = cplx(0.0, phase_phi_d2(y, alpha)) - mu_ * s * s;
        return {E, e1, e1p};
    }
    std::tuple<cplx, cplx, cplx> envelope_Ebar(double y, double alpha) const {
        const double my = 1.0 - y;
        const double s = 1.0 / my;
        cplx E = std::polar(std::pow(my, mu_ + 4.0), -phase_phi(y, alpha));
        cplx e1 = -cplx(0.0, phase_phi_d1(y, alpha)) - (mu_ + 4.0) * s;
        cplx e1p = -cplx(0.0, phase_phi_d2(y, alpha)) - (mu_ + 4.0) * s * s;
        return {E, e1, e1p};
    }

  private:
    Deriv2 eval_left_shim(int j, double y, double) const { return eval_left(j, y); }
    Deriv2 eval_right_shim(int j, double y, double a) const { return eval_right(j, y, a); }

    template <class Fn>
    Eigen::Matrix4d pack_rows(Fn fn, double y, double a, bool prime) const {
        Eigen::Matrix4d m;
        for (int j = 0; j < 4; ++j) {
            Deriv2 f = (this->*fn)(j, y, a);
            if (!prime) {
                m(0, j) = f.v.real();
                m(1, j) = f.v.imag();
                m(2, j) = f.d1.real();
                m(3, j) = f.d1.imag();
            } else {
                m(0, j) = f.d1.real();
                m(1, j) = f.d1.imag();
                m(2, j) = f.d2.real();
                m(3, j) = f.d2.imag();
            }
        }
        return m;
    }

    //--------------------------------------------------------------------------
    // generation by weighted least-squares collocation
    //--------------------------------------------------------------------------
    void build_left() {
        const Domain dom{-1.0, 0.0};
        const int nc = opt_.oversample * (opt_.degree_left + 1);
        std::vector<double> yc;
        for (double t : lobatto_nodes(nc, Domain{opt_.window_left, 0.0})) yc.push_back(t);

        detail::Potentials pot{fs_, ref_};
        const int nb = opt_.degree_left + 1;

        // basis series (1+y) T_n(2y+1) and derivatives
        std::vector<ChebSeries> tb, tbd, tbdd;
        for (int n = 0; n < nb; ++n) {
            std::vector<cplx> e(static_cast<size_t>(n) + 1, cplx(0.0));
            e.back() = 1.0;
            tb.emplace_back(e, dom);
            tbd.push_back(tb.back().derivative());
            tbdd.push_back(tbd.back().derivative());
        }

        for (int j = 0; j < 4; ++j) {
            Eigen::MatrixXd mat(2 * static_cast<int>(yc.size()), 2 * nb);
            Eigen::VectorXd rhs(2 * static_cast<int>(yc.size()));
            for (size_t c = 0; c < yc.size(); ++c) {
                const double y = yc[c];
                auto [p0, q0] = frozen_coeffs(y, ref_.alpha(), ref_.p);
                const cplx v1 = pot.v1(y), v2 = pot.v2(y);
                const double py = 1.0 + y;
                // the singular pair needs the (1+y) taming; the bounded pair
                // is best fit in the plain residual
                const double w = (j < 2) ? 1.0 : py;

                for (int n = 0; n < nb; ++n) {
                    // b_n = (1+y) T_n, real-valued
                    const cplx t = tb[static_cast<size_t>(n)].eval(y);
                    const cplx td = tbd[static_cast<size_t>(n)].eval(y);
                    const cplx tdd = tbdd[static_cast<size_t>(n)].eval(y);
                    const cplx b = py * t, bd = t + py * td, bdd = 2.0 * td + py * tdd;
                    const cplx img_lin = bdd + p0 * bd + (q0 + v1) * b;  // multiplies c_n
                    const cplx img_conj = v2 * b;                        // multiplies conj(c_n)
                    const cplx colx = w * (img_lin + img_conj);
                    const cplx coly = w * cplx(0.0, 1.0) * (img_lin - img_conj);
                    mat(2 * static_cast<int>(c), 2 * n) = colx.real();
                    mat(2 * static_cast<int>(c) + 1, 2 * n) = colx.imag();
                    mat(2 * static_cast<int>(c), 2 * n + 1) = coly.real();
                    mat(2 * static_cast<int>(c) + 1, 2 * n + 1) = coly.imag();
                }
                // inhomogeneity from the leading term
                cplx lead, leadd(0.0), leaddd(0.0);
                if (j == 0) {
                    lead = 1.0;
                } else if (j == 1) {
                    lead = cplx(0.0, 1.0);
                } else {
                    const cplx l0 = (j == 2) ? cplx(1.0) : cplx(0.0, 1.0);
                    lead = l0 / py;
                    leadd = -l0 / (py * py);
                    leaddd = 2.0 * l0 / (py * py * py);
                }
                cplx r = -(leaddd + p0 * leadd + (q0 + v1) * lead + v2 * std::conj(lead)) * w;
                rhs(2 * static_cast<int>(c)) = r.real();
                rhs(2 * static_cast<int>(c) + 1) = r.imag();
            }
            auto coef = detail::solve_rlinear_lsq(mat, rhs);
            pl_[static_cast<size_t>(j)] = ChebSeries(coef, dom);
            pld_[static_cast<size_t>(j)] = pl_[static_cast<size_t>(j)].derivative();
            pldd_[static_cast<size_t>(j)] = pld_[static_cast<size_t>(j)].derivative();
        }
    }

    void build_right() {
        const Domain dom{0.0, 1.0};
        const double alpha = ref_.alpha();
        detail::Potentials pot{fs_, ref_};
        const int nbP = opt_.degree_right_P + 1;
        const int nbQ = opt_.degree_right_Q + 1;

        std::vector<ChebSeries> tb, tbd, tbdd;
        for (int n = 0; n < std::max(nbP, nbQ); ++n) {
            std::vector<cplx> e(static_cast<size_t>(n) + 1, cplx(0.0));
            e.back() = 1.0;
            tb.emplace_back(e, dom);
            tbd.push_back(tb.back().derivative());
            tbdd.push_back(tbd.back().derivative());
        }

        // smooth pair j = 0,1: f = lead + (1-y)^2 P, collocated on the plain equation
        {
            const int nc = opt_.oversample * nbP;
            auto yc = lobatto_nodes(nc, Domain{0.0, opt_.window_right});
            for (int j = 0; j < 2; ++j) {
                Eigen::MatrixXd mat(2 * static_cast<int>(yc.size()), 2 * nbP);
                Eigen::VectorXd rhs(2 * static_cast<int>(yc.size()));
                const cplx lead0 = (j == 0) ? cplx(1.0) : cplx(0.0, 1.0);
                const cplx lead1 = lead0 * kappa(alpha);
                for (size_t c = 0; c < yc.size(); ++c) {
                    const double y = yc[c];
                    const double my = 1.0 - y;
                    auto [p0, q0] = frozen_coeffs(y, alpha, ref_.p);
                    const cplx v1 = pot.v1(y), v2 = pot.v2(y);
                    const double w = (1.0 + y) * my * my;
                    for (int n = 0; n < nbP; ++n) {
                        const cplx t = tb[static_cast<size_t>(n)].eval(y);
                        const cplx td = tbd[static_cast<size_t>(n)].eval(y);
                        const cplx tdd = tbdd[static_cast<size_t>(n)].eval(y);
                        const cplx b = my * my * t;
                        const cplx bd = -2.0 * my * t + my * my * td;
                        const cplx bdd = 2.0 * t - 4.0 * my * td + my * my * tdd;
                        const cplx img_lin = bdd + p0 * bd + (q0 + v1) * b;
                        const cplx img_conj = v2 * b;
                        const cplx colx = w * (img_lin + img_conj);
                        const cplx coly = w * cplx(0.0, 1.0) * (img_lin - img_conj);
                        mat(2 * static_cast<int>(c), 2 * n) = colx.real();
                        mat(2 * static_cast<int>(c) + 1, 2 * n) = colx.imag();
                        mat(2 * static_cast<int>(c), 2 * n + 1) = coly.real();
                        mat(2 * static_cast<int>(c) + 1, 2 * n + 1) = coly.imag();
                    }
                    const cplx lead = lead0 + lead1 * my;
                    const cplx leadd = -lead1;
                    cplx r = -(p0 * leadd + (q0 + v1) * lead + v2 * std::conj(lead)) * w;
                    rhs(2 * static_cast<int>(c)) = r.real();
                    rhs(2 * static_cast<int>(c) + 1) = r.imag();
                }
                auto coef = detail::solve_rlinear_lsq(mat, rhs);
                pr_[static_cast<size_t>(j)] = ChebSeries(coef, dom);
                prd_[static_cast<size_t>(j)] = pr_[static_cast<size_t>(j)].derivative();
                prdd_[static_cast<size_t>(j)] = prd_[static_cast<size_t>(j)].derivative();
            }
        }

        // oscillatory pair j = 2,3: peeled two-block system for (P_j, Q_j)
        {
            auto peelE = detail::peel_op_E(alpha, ref_.p);
            auto peelB = detail::peel_op_Ebar(alpha, ref_.p);
            const int nunk = nbP + nbQ;
            const int nc = opt_.oversample * nunk / 2;
            auto yc = lobatto_nodes(nc, Domain{0.0, opt_.window_right});

            for (int j = 2; j < 4; ++j) {
                Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(4 * static_cast<int>(yc.size()), 2 * nunk);
                Eigen::VectorXd rhs(4 * static_cast<int>(yc.size()));
                const cplx lead0 = (j == 2) ? cplx(1.0) : cplx(0.0, 1.0);
                const cplx nv = lead0 * nu(alpha);
                for (size_t c = 0; c < yc.size(); ++c) {
                    const double y = yc[c];
                    const double my = 1.0 - y;
                    const double m4 = my * my * my * my;
                    const cplx v1 = pot.v1(y), v2 = pot.v2(y);
                    const cplx a1E = peelE.a1(y), a0E = peelE.a0(y);
                    const cplx a1B = peelB.a1(y), a0B = peelB.a0(y);
                    const double wA = (1.0 + y) * std::pow(my, 2.0 + mu_);
                    const double wB = (1.0 + y) * std::pow(my, 6.0 + mu_);
                    const int rA = 4 * static_cast<int>(c), rB = rA + 2;

                    for (int n = 0; n < nbP; ++n) {  // P columns act on the A block, conj-couple into B
                        const cplx t = tb[static_cast<size_t>(n)].eval(y);
                        const cplx td = tbd[static_cast<size_t>(n)].eval(y);
                        const cplx tdd = tbdd[static_cast<size_t>(n)].eval(y);
                        const cplx b = my * my * t;
                        const cplx bd = -2.0 * my * t + my * my * td;
                        const cplx bdd = 2.0 * t - 4.0 * my * td + my * my * tdd;
                        const cplx imgA = bdd + a1E * bd + (a0E + v1) * b;  // times c_n
                        const cplx imgB = v2 / m4 * b;                      // times conj(c_n)
                        const cplx ax = wA * imgA, bx = wB * imgB;
                        mat(rA, 2 * n) = ax.real();
                        mat(rA + 1, 2 * n) = ax.imag();
                        mat(rA, 2 * n + 1) = (wA * cplx(0.0, 1.0) * imgA).real();
                        mat(rA + 1, 2 * n + 1) = (wA * cplx(0.0, 1.0) * imgA).imag();
                        mat(rB, 2 * n) = bx.real();
                        mat(rB + 1, 2 * n) = bx.imag();
                        mat(rB, 2 * n + 1) = (wB * cplx(0.0, -1.0) * imgB).real();
                        mat(rB + 1, 2 * n + 1) = (wB * cplx(0.0, -1.0) * imgB).imag();
                    }
                    for (int n = 0; n < nbQ; ++n) {  // Q columns act on the B block, conj-couple into A
                        const cplx t = tb[static_cast<size_t>(n)].eval(y);
                        const cplx td = tbd[static_cast<size_t>(n)].eval(y);
                        const cplx tdd = tbdd[static_cast<size_t>(n)].eval(y);
                        const cplx imgB = tdd + a1B * td + (a0B + v1) * t;  // times d_n
                        const cplx imgA = v2 * m4 * t;                      // times conj(d_n)
                        const int col = 2 * nbP + 2 * n;
                        const cplx bx = wB * imgB, ax = wA * imgA;
                        mat(rB, col) = bx.real();
                        mat(rB + 1, col) = bx.imag();
                        mat(rB, col + 1) = (wB * cplx(0.0, 1.0) * imgB).real();
                        mat(rB + 1, col + 1) = (wB * cplx(0.0, 1.0) * imgB).imag();
                        mat(rA, col) = ax.real();
                        mat(rA + 1, col) = ax.imag();
                        mat(rA, col + 1) = (wA * cplx(0.0, -1.0) * imgA).real();
                        mat(rA + 1, col + 1) = (wA * cplx(0.0, -1.0) * imgA).imag();
                    }
                    const cplx lead = lead0 + nv * my;
                    const cplx leadd = -nv;
                    cplx resA = -(a1E * leadd + (a0E + v1) * lead) * wA;
                    cplx resB = -(v2 / m4 * std::conj(lead)) * wB;
                    rhs(rA) = resA.real();
                    rhs(rA + 1) = resA.imag();
                    rhs(rB) = resB.real();
                    rhs(rB + 1) = resB.imag();
                }
                auto coef = detail::solve_rlinear_lsq(mat, rhs);
                std::vector<cplx> cp(coef.begin(), coef.begin() + nbP);
                std::vector<cplx> cq(coef.begin() + nbP, coef.end());
                pr_[static_cast<size_t>(j)] = ChebSeries(cp, dom);
                prd_[static_cast<size_t>(j)] = pr_[static_cast<size_t>(j)].derivative();
                prdd_[static_cast<size_t>(j)] = prd_[static_cast<size_t>(j)].derivative();
                qr_[static_cast<size_t>(j - 2)] = ChebSeries(cq, dom);
                qrd_[static_cast<size_t>(j - 2)] = qr_[static_cast<size_t>(j - 2)].derivative();
                qrdd_[static_cast<size_t>(j - 2)] = qrd_[static_cast<size_t>(j - 2)].derivative();
            }
        }
    }

    const FStar* fs_;
    Params ref_;
    FrameOptions opt_;
    double mu_;
    std::array<ChebSeries, 4> pl_, pld_, pldd_;      // left corrections
    std::array<ChebSeries, 4> pr_, prd_, prdd_;      // right P corrections
    std::array<ChebSeries, 2> qr_, qrd_, qrdd_;      // right Q corrections (j=3,4)
    Eigen::Matrix4d fl0_;
    Eigen::PartialPivLU<Eigen::Matrix4d> fl0_lu_;
};

}  // namespace ssnls
