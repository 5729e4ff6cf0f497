#pragma once
//==============================================================================
// inverse_op.hpp
// Inversion machinery for the approximate operator:
//   alpha^k(a,p,g)(y) = F^{-1}(y)^k_3 Re g(y) + F^{-1}(y)^k_4 Im g(y),
//   the variation-of-constants inverse Ltilde^{-1}, the obstruction functional
//   psi, and the regularized operator J = Ltilde^{-1} - chi f_L4 psi.
//
// Quadrature layout: fixed Gauss-Kronrod panels between representation nodes.
// Up to x_tail the subdivision resolves the oscillation of alpha^{3,4}; beyond
// x_tail those two tail integrals come from one analytic integration by parts,
//   int_y^1 (alpha^3 + i alpha^4) dx ~= -i (alpha^3 + i alpha^4)(y) / phi'(y),
// with O((1-y)^2/alpha) relative remainder. The bounded pair alpha^{1,2} keeps
// ordinary panels through the tail region (its oscillatory component decays
// like (1-y)^3 and is ignorable there).
//
// Near y = -1 the naive formula subtracts two (1+y)^{-1} singular terms. The
// assembly groups them through the exact identity sum_k f_k alpha^k = 0 into
//   (1+y)^{-1} [ int_{-1}^y beta + i (1-chi) psi ],
//   beta(x) = -(1+x) sum_k rho_k(x) alpha^k(x),
// where rho_k = f_k - (M^3_k + i M^4_k)/(1+x) is the regular part of f_k; the
// bracket is O((1+y)^2) and every term is evaluated without cancellation,
// including the endpoint limits themselves.
//==============================================================================

#include <functional>

#include "ssnls/fundsys.hpp"

namespace ssnls {

//------------------------------------------------------------------------------
// Gauss-Kronrod 7-15 rule
//------------------------------------------------------------------------------
namespace gk {

inline constexpr double xk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                                 0.741531185599394, 0.586087235467691, 0.405845151377397,
                                 0.207784955007898, 0.0};
inline constexpr double wk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                                 0.140653259715525, 0.169004726639267, 0.190350578064785,
                                 0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                 0.417959183673469};

inline void nodes(double a, double b, double* x15) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < 7; ++i) {
        x15[i] = c - h * xk[i];
        x15[14 - i] = c + h * xk[i];
    }
    x15[7] = c;
}

template <class T>
std::pair<T, double> sum(const T* f, double a, double b) {
    const double h = 0.5 * (b - a);
    T k = f[7] * wk[7], g = f[7] * wg[3];
    for (int i = 0; i < 7; ++i) k += wk[i] * (f[i] + f[14 - i]);
    for (int i = 0; i < 3; ++i) g += wg[i] * (f[2 * i + 1] + f[13 - 2 * i]);
    k *= h;
    g *= h;
    return {k, std::abs(k - g)};
}

}  // namespace gk

template <class F>
auto gk15(F&& f, double a, double b) {
    using T = decltype(f(a));
    double x[15];
    gk::nodes(a, b, x);
    T v[15];
    for (int i = 0; i < 15; ++i) v[i] = f(x[i]);
    return gk::sum(v, a, b);
}

// adaptive bisection on the worst segment
template <class F>
auto adaptive_gk(F&& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    using T = decltype(f(a));
    struct Seg {
        double a, b, err;
        T val;
        int depth;
    };
    auto [v0, e0] = gk15(f, a, b);
    std::vector<Seg> segs{{a, b, e0, v0, 0}};
    double total_err = e0;
    while (total_err > tol) {
        size_t worst = 0;
        for (size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err) worst = i;
        Seg s = segs[worst];
        if (s.depth >= max_depth)
            throw std::runtime_error("adaptive_gk: tolerance not met, estimate " +
                                     std::to_string(total_err));
        double m = 0.5 * (s.a + s.b);
        auto [v1, e1] = gk15(f, s.a, m);
        auto [v2, e2] = gk15(f, m, s.b);
        segs[worst] = {s.a, m, e1, v1, s.depth + 1};
        segs.push_back({m, s.b, e2, v2, s.depth + 1});
        total_err += e1 + e2 - s.err;
    }
    T acc(0.0);
    for (const auto& s : segs) acc += s.val;
    return std::pair<T, double>{acc, total_err};
}

// Integral over [a,b], b near 1, of smooth * (1-x)^{q-2} e^{-i phi(x,alpha)}:
// adaptive on the bulk plus one integration by parts for the tail, whose kept
// boundary term is -i f(x_t)/phi'(x_t) and whose dropped remainder is recorded.
template <class F>
std::pair<cplx, double> singular_quadrature(F&& f, double a, double b, double q, double alpha,
                                            double tol = 1e-12, double x_tail = 0.97) {
    if (b <= x_tail || q <= 1.0) return adaptive_gk(f, a, b, tol);
    auto [bulk, err] = adaptive_gk(f, a, x_tail, tol);
    cplx tail = -cplx(0.0, 1.0) * f(x_tail) / phase_phi_d1(x_tail, alpha);
    double tail_err = std::abs(tail) * (1.0 - x_tail) * (1.0 - x_tail) / (4.0 * alpha) +
                      std::pow(1.0 - b, q + 1.0) * std::abs(f(x_tail)) * std::pow(1.0 - x_tail, 2.0 - q);
    return {bulk + tail, err + tail_err};
}

//------------------------------------------------------------------------------
// smooth cutoff, descending from 1 to 0 on [-1/2, 0]; |chi'| <= 3 with equality
// at the midpoint
//------------------------------------------------------------------------------
struct Cutoff {
    static double chi(double y) {
        if (y <= -0.5) return 1.0;
        if (y >= 0.0) return 0.0;
        const double t = 2.0 * y + 1.0;
        return 1.0 - t * t * (3.0 - 2.0 * t);
    }
    static double chi_prime(double y) {
        if (y <= -0.5 || y >= 0.0) return 0.0;
        const double t = 2.0 * y + 1.0;
        return -12.0 * t * (1.0 - t);
    }
    static double chi_second(double y) {
        if (y <= -0.5 || y >= 0.0) return 0.0;
        const double t = 2.0 * y + 1.0;
        return -24.0 * (1.0 - 2.0 * t);
    }
};

struct QuadOptions {
    int rep_degree = 160;      // Lobatto degree of the output representation
    double x_tail = 0.97;      // IBP tail treatment beyond this point
    double end_gap = 1e-7;     // smooth-pair panels stop at 1 - end_gap
    double tol = 1e-12;        // absolute target per integral (diagnostic)
    int panels_per_cycle = 4;  // oscillation resolution up to x_tail
    int base_panels = 2;
};

//------------------------------------------------------------------------------
// InverseOp: frame fixed at one parameter point a, quadrature layout and all
// g-independent data precomputed. apply() consumes g sampled at eval_points().
//------------------------------------------------------------------------------
class InverseOp {
  public:
    InverseOp(const Frame& frame, double a, QuadOptions opt = {})
        : frame_(&frame), a_(a), opt_(opt), alpha_(a_star + a) {
        build_layout();
        cache_nodes();
    }

    const Frame& frame() const { return *frame_; }
    double a() const { return a_; }
    double p() const { return frame_->p(); }
    const QuadOptions& options() const { return opt_; }
    const Eigen::Matrix4d& connection() const { return M_; }

    const std::vector<double>& rep_nodes() const { return rep_; }     // ascending, incl. +-1
    const std::vector<double>& eval_points() const { return pts_; }   // where g is sampled

    struct Result {
        std::vector<cplx> u, up;                 // values and derivatives at rep nodes
        std::vector<cplx> u2;                    // second derivatives (only if requested)
        double psi = 0.0;
        std::array<double, 4> full_integrals{};  // int_{-1}^{1} alpha^k
        double gk_error = 0.0;
        double tail_error = 0.0;
    };

    Result apply(const std::vector<cplx>& g, bool regularized = true, bool with_second = false) const {
        if (g.size() != pts_.size()) throw std::invalid_argument("InverseOp::apply: bad sample count");
        const size_t np = panels_.size();
        const size_t nr = rep_.size();

        std::array<std::vector<double>, 4> pint;
        for (auto& v : pint) v.assign(np, 0.0);
        std::vector<cplx> beta_panel(np, cplx(0.0));
        double gk_err = 0.0;

        for (size_t pnl = 0; pnl < np; ++pnl) {
            const Panel& P = panels_[pnl];
            double vals[4][15];
            cplx beta[15];
            for (int i = 0; i < 15; ++i) {
                const size_t ix = P.offset + static_cast<size_t>(i);
                const cplx gv = g[ix];
                const NodeCache& nc = nodes_[ix];
                for (int k = 0; k < 4; ++k)
                    vals[k][i] = nc.c3[static_cast<size_t>(k)] * gv.real() +
                                 nc.c4[static_cast<size_t>(k)] * gv.imag();
                if (P.left) {
                    cplx bsum(0.0);
                    for (int k = 0; k < 4; ++k) bsum += nc.rho[static_cast<size_t>(k)] * vals[k][i];
                    beta[i] = -(1.0 + pts_[ix]) * bsum;
                }
            }
            const int kmax = P.osc_valid ? 4 : 2;  // alpha^{3,4} sums are invalid past x_tail
            for (int k = 0; k < kmax; ++k) {
                auto [v, e] = gk::sum(vals[k], P.lo, P.hi);
                pint[static_cast<size_t>(k)][pnl] = v;
                gk_err += e;
            }
            if (P.left) {
                auto [v, e] = gk::sum(beta, P.lo, P.hi);
                beta_panel[pnl] = v;
                gk_err += e;
            }
        }

        // prefix sums from -1 upward (B_k, Brk) and from x_tail downward (S_k)
        std::array<std::vector<double>, 4> B, S;
        std::vector<cplx> Brk(nr, cplx(0.0));
        for (int k = 0; k < 4; ++k) {
            B[static_cast<size_t>(k)].assign(nr, 0.0);
            S[static_cast<size_t>(k)].assign(nr, 0.0);
        }
        {
            std::array<double, 4> acc{};
            cplx bacc(0.0);
            size_t pnl = 0;
            for (size_t i = 0; i < nr; ++i) {
                while (pnl < np && panels_[pnl].hi <= rep_[i] + 1e-15) {
                    const int kmax = panels_[pnl].osc_valid ? 4 : 2;
                    for (int k = 0; k < kmax; ++k)
                        acc[static_cast<size_t>(k)] += pint[static_cast<size_t>(k)][pnl];
                    if (panels_[pnl].left) bacc += beta_panel[pnl];
                    ++pnl;
                }
                for (int k = 0; k < 4; ++k) B[static_cast<size_t>(k)][i] = acc[static_cast<size_t>(k)];
                Brk[i] = bacc;
            }
        }
        {
            std::array<double, 4> acc{};
            size_t pnl = np;
            for (size_t ii = nr; ii-- > 0;) {
                while (pnl > 0 && panels_[pnl - 1].lo >= rep_[ii] - 1e-15) {
                    --pnl;
                    if (!panels_[pnl].osc_valid) continue;
                    for (int k = 2; k < 4; ++k)
                        acc[static_cast<size_t>(k)] += pint[static_cast<size_t>(k)][pnl];
                }
                for (int k = 2; k < 4; ++k) S[static_cast<size_t>(k)][ii] = acc[static_cast<size_t>(k)];
            }
        }

        // oscillatory tail pair via the IBP boundary term
        double tail_err = 0.0;
        auto tail_pair = [&](size_t ix) {
            const NodeCache& nc = nodes_[ix];
            const cplx gv = g[ix];
            cplx z(nc.c3[2] * gv.real() + nc.c4[2] * gv.imag(),
                   nc.c3[3] * gv.real() + nc.c4[3] * gv.imag());
            cplx t = -cplx(0.0, 1.0) * z / nc.phi_d1;
            const double my = 1.0 - pts_[ix];
            tail_err += std::abs(t) * my * my / (4.0 * alpha_);
            return t;
        };
        const cplx t_at_tail = tail_pair(ix_tail_);

        std::array<double, 4> C{};
        for (int k = 0; k < 4; ++k) C[static_cast<size_t>(k)] = B[static_cast<size_t>(k)].back();
        C[2] += t_at_tail.real();
        C[3] += t_at_tail.imag();

        const double ratio3 = M_(2, 2) / M_(2, 0), ratio4 = M_(2, 3) / M_(2, 0);
        const double psi = (M_(3, 0) * ratio3 - M_(3, 2)) * C[2] + (M_(3, 0) * ratio4 - M_(3, 3)) * C[3];
        const double rterm = ratio3 * C[2] + ratio4 * C[3];

        // limit datum for u'(-1): sum_k rho_k(-1) alpha^k(-1), probed just inside
        cplx rho_alpha_left(0.0);
        {
            const NodeCache& nc = nodes_[ix_left_probe_];
            const cplx gv = g[ix_left_probe_];
            for (int k = 0; k < 4; ++k) {
                double av = nc.c3[static_cast<size_t>(k)] * gv.real() +
                            nc.c4[static_cast<size_t>(k)] * gv.imag();
                rho_alpha_left += rho_probe_[static_cast<size_t>(k)] * av;
            }
        }

        Result res;
        res.psi = psi;
        res.full_integrals = C;
        res.gk_error = gk_err;
        res.u.assign(nr, cplx(0.0));
        res.up.assign(nr, cplx(0.0));
        if (with_second) res.u2.assign(nr, cplx(0.0));

        for (size_t i = 0; i < nr; ++i) {
            const double y = rep_[i];
            const RepCache& rc = repc_[i];
            double T3, T4;
            if (i + 1 == nr) {
                T3 = T4 = 0.0;
            } else if (y >= opt_.x_tail - 1e-15) {
                cplx t = tail_pair(rep_ix_[i]);
                T3 = t.real();
                T4 = t.imag();
            } else {
                T3 = S[2][i] + t_at_tail.real();
                T4 = S[3][i] + t_at_tail.imag();
            }

            if (y > 0.0) {
                res.u[i] = rc.f[0] * (B[0][i] + rterm) + rc.f[1] * B[1][i] - rc.f[2] * T3 - rc.f[3] * T4;
                res.up[i] =
                    rc.fd[0] * (B[0][i] + rterm) + rc.fd[1] * B[1][i] - rc.fd[2] * T3 - rc.fd[3] * T4;
            } else {
                const double chi = regularized ? Cutoff::chi(y) : 0.0;
                const double chip = regularized ? Cutoff::chi_prime(y) : 0.0;
                cplx u = rc.rho[0] * (B[0][i] + rterm) + rc.rho[1] * B[1][i] - rc.rho[2] * T3 -
                         rc.rho[3] * T4;
                cplx up = rc.rhod[0] * (B[0][i] + rterm) + rc.rhod[1] * B[1][i] - rc.rhod[2] * T3 -
                          rc.rhod[3] * T4;
                u -= chi * psi * rc.p4reg;
                up -= chip * psi * rc.p4reg + chi * psi * rc.p4regd;
                const cplx brk = Brk[i] + cplx(0.0, (1.0 - chi) * psi);
                if (i == 0) {
                    up += 0.5 * rho_alpha_left;  // lim Brk/(1+y)^2 with chi == 1 there
                } else {
                    const double py = 1.0 + y;
                    u += brk / py;
                    up += -brk / (py * py) - cplx(0.0, chip * psi) / py;
                }
                res.u[i] = u;
                res.up[i] = up;
            }

            if (with_second && i > 0 && i + 1 < nr) {
                // direct form; adequate away from the endpoints where it is used
                cplx u2 = rc.f2[0] * (B[0][i] + rterm) + rc.f2[1] * B[1][i] - rc.f2[2] * T3 -
                          rc.f2[3] * T4 + g[rep_ix_[i]];
                if (y <= 0.0 && regularized) {
                    const double chi = Cutoff::chi(y), chip = Cutoff::chi_prime(y);
                    const double chis = Cutoff::chi_second(y);
                    u2 -= psi * (chis * rc.fl4.v + 2.0 * chip * rc.fl4.d1 + chi * rc.fl4.d2);
                }
                res.u2[i] = u2;
            }
        }
        res.tail_error = tail_err;
        return res;
    }

    Result apply_fn(const std::function<cplx(double)>& g, bool regularized = true,
                    bool with_second = false) const {
        std::vector<cplx> gv(pts_.size());
        for (size_t i = 0; i < pts_.size(); ++i) gv[i] = g(pts_[i]);
        return apply(gv, regularized, with_second);
    }

    // point evaluation of alpha^k, k = 0..3 (paper numbering 1..4)
    std::array<double, 4> alpha_at(double y, cplx gy) const {
        auto [c3, c4] = finv_columns(y);
        std::array<double, 4> out;
        for (int k = 0; k < 4; ++k)
            out[static_cast<size_t>(k)] =
                c3[static_cast<size_t>(k)] * gy.real() + c4[static_cast<size_t>(k)] * gy.imag();
        return out;
    }

    double psi_of(const std::function<cplx(double)>& g) const { return apply_fn(g, true).psi; }

  private:
    struct Panel {
        double lo, hi;
        size_t offset;
        bool left;       // entirely in y <= 0
        bool osc_valid;  // below x_tail: alpha^{3,4} oscillation resolved
    };
    struct NodeCache {
        std::array<double, 4> c3{}, c4{};
        std::array<cplx, 4> rho{};
        double phi_d1 = 0.0;
    };
    struct RepCache {
        std::array<cplx, 4> f{}, fd{}, f2{};
        std::array<cplx, 4> rho{}, rhod{};
        cplx p4reg{}, p4regd{};
        Deriv2 fl4{};  // full f_L4 for the second-derivative path
    };

    void push_panel(double a, double b) {
        Panel P{a, b, pts_.size(), b <= 0.0, b <= opt_.x_tail + 1e-15};
        double x15[15];
        gk::nodes(a, b, x15);
        for (double x : x15) pts_.push_back(x);
        panels_.push_back(P);
    }

    void build_layout() {
        const int n = opt_.rep_degree;
        rep_ = lobatto_nodes(n);
        std::reverse(rep_.begin(), rep_.end());  // ascending
        pts_.clear();
        panels_.clear();

        for (size_t i = 0; i + 1 < rep_.size(); ++i) {
            double lo = rep_[i], hi = rep_[i + 1];
            if (lo >= opt_.x_tail) {
                // smooth-pair panels through the tail region; geometric split
                // toward 1 on the last interval
                double cap = std::min(hi, 1.0 - opt_.end_gap);
                if (cap <= lo) break;
                if (i + 2 == rep_.size()) {
                    double a = lo;
                    while (1.0 - a > 8.0 * opt_.end_gap) {
                        double b = 1.0 - 0.25 * (1.0 - a);
                        push_panel(a, b);
                        a = b;
                    }
                    push_panel(a, 1.0 - opt_.end_gap);
                } else {
                    push_panel(lo, cap);
                }
                continue;
            }
            double cap = std::min(hi, opt_.x_tail);
            int sub = opt_.base_panels;
            if (cap > 0.3) {
                double dphi =
                    std::abs(phase_phi(cap, alpha_) - phase_phi(std::max(lo, 0.3), alpha_));
                sub = std::max(sub, static_cast<int>(opt_.panels_per_cycle * dphi / (2.0 * pi)) + 1);
            }
            for (int s = 0; s < sub; ++s)
                push_panel(lo + (cap - lo) * s / sub, lo + (cap - lo) * (s + 1) / sub);
            if (cap < hi && hi <= 1.0 - opt_.end_gap && hi - cap > 1e-14) push_panel(cap, hi);
        }

        rep_ix_.resize(rep_.size());
        for (size_t i = 0; i < rep_.size(); ++i) {
            rep_ix_[i] = pts_.size();
            pts_.push_back(std::min(std::max(rep_[i], -1.0 + 1e-13), 1.0 - 1e-13));
        }
        ix_tail_ = pts_.size();
        pts_.push_back(opt_.x_tail);
        ix_left_probe_ = pts_.size();
        pts_.push_back(-1.0 + 1e-5);
    }

    std::pair<std::array<double, 4>, std::array<double, 4>> finv_columns(double y) const {
        Eigen::Matrix4d F = frame_->F(y, a_);
        Eigen::Vector4d rs;
        for (int r = 0; r < 4; ++r) rs(r) = 1.0 / std::max(1e-300, F.row(r).cwiseAbs().maxCoeff());
        Eigen::PartialPivLU<Eigen::Matrix4d> lu(rs.asDiagonal() * F);
        Eigen::Vector4d e3 = Eigen::Vector4d::Zero(), e4 = Eigen::Vector4d::Zero();
        e3(2) = 1.0;
        e4(3) = 1.0;
        Eigen::Vector4d c3 = lu.solve(rs.asDiagonal() * e3);
        Eigen::Vector4d c4 = lu.solve(rs.asDiagonal() * e4);
        std::array<double, 4> a3, a4;
        for (int k = 0; k < 4; ++k) {
            a3[static_cast<size_t>(k)] = c3(k);
            a4[static_cast<size_t>(k)] = c4(k);
        }
        return {a3, a4};
    }

    void cache_nodes() {
        M_ = frame_->connection(a_);

        nodes_.resize(pts_.size());
        for (size_t ix = 0; ix < pts_.size(); ++ix) {
            const double y = pts_[ix];
            NodeCache nc;
            auto [c3, c4] = finv_columns(y);
            nc.c3 = c3;
            nc.c4 = c4;
            if (y <= 0.0) nc.rho = rho_at(y).first;
            if (y > 0.5) nc.phi_d1 = phase_phi_d1(y, alpha_);
            nodes_[ix] = nc;
        }

        repc_.resize(rep_.size());
        for (size_t i = 0; i < rep_.size(); ++i) {
            const double y = rep_[i];
            RepCache rc;
            if (y > 0.0) {
                for (int j = 0; j < 4; ++j) {
                    Deriv2 f = (y >= 1.0) ? right_at_one(j) : frame_->eval_right(j, y, a_);
                    rc.f[static_cast<size_t>(j)] = f.v;
                    rc.fd[static_cast<size_t>(j)] = f.d1;
                    rc.f2[static_cast<size_t>(j)] = f.d2;
                }
            } else {
                auto [rho, rhod] = rho_at(y);
                rc.rho = rho;
                rc.rhod = rhod;
                const ChebSeries& P4 = frame_->left_correction(3);
                rc.p4reg = (1.0 + y) * P4.eval(y);
                rc.p4regd = P4.eval(y) + (1.0 + y) * P4.derivative().eval(y);
                if (y > -1.0) {
                    for (int j = 0; j < 4; ++j) {
                        Deriv2 f = frame_->eval_glued(j, y, a_);
                        rc.f[static_cast<size_t>(j)] = f.v;
                        rc.fd[static_cast<size_t>(j)] = f.d1;
                        rc.f2[static_cast<size_t>(j)] = f.d2;
                    }
                    rc.fl4 = frame_->eval_left(3, y);
                }
            }
            repc_[i] = rc;
        }
        rho_probe_ = rho_at(-1.0).first;
    }

    Deriv2 right_at_one(int j) const {
        const cplx kap = frame_->kappa(alpha_);
        if (j == 0) return {cplx(1.0), -kap, cplx(0.0)};
        if (j == 1) return {cplx(0.0, 1.0), -cplx(0.0, 1.0) * kap, cplx(0.0)};
        return {cplx(0.0), cplx(0.0), cplx(0.0)};
    }

    std::pair<std::array<cplx, 4>, std::array<cplx, 4>> rho_at(double y) const {
        std::array<cplx, 4> rho{}, rhod{};
        Deriv2 l1 = frame_->eval_left(0, y), l2 = frame_->eval_left(1, y);
        const ChebSeries& P3 = frame_->left_correction(2);
        const ChebSeries& P4 = frame_->left_correction(3);
        const double py = 1.0 + y;
        cplx p3 = P3.eval(y), p3d = P3.derivative().eval(y);
        cplx p4 = P4.eval(y), p4d = P4.derivative().eval(y);
        for (int k = 0; k < 4; ++k) {
            rho[static_cast<size_t>(k)] =
                M_(0, k) * l1.v + M_(1, k) * l2.v + M_(2, k) * py * p3 + M_(3, k) * py * p4;
            rhod[static_cast<size_t>(k)] = M_(0, k) * l1.d1 + M_(1, k) * l2.d1 +
                                           M_(2, k) * (p3 + py * p3d) + M_(3, k) * (p4 + py * p4d);
        }
        return {rho, rhod};
    }

    const Frame* frame_;
    double a_;
    QuadOptions opt_;
    double alpha_;
    Eigen::Matrix4d M_;

    std::vector<double> rep_;
    std::vector<double> pts_;
    std::vector<Panel> panels_;
    std::vector<size_t> rep_ix_;
    size_t ix_tail_ = 0, ix_left_probe_ = 0;
    std::vector<NodeCache> nodes_;
    std::vector<RepCache> repc_;
    std::array<cplx, 4> rho_probe_{};
};

}  // namespace ssnls
