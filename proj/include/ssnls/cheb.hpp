#pragma once
//==============================================================================
// cheb.hpp
// Complex Chebyshev series on an affine interval.
//   - Clenshaw evaluation (backward recurrence), stable for |t| <= 1.
//   - Derivative series with the affine chain-rule factor.
//   - Gauss-Lobatto nodes, interpolation, nodal <-> coefficient transforms.
// Degrees stay in the tens, so all transforms are direct O(N^2).
//==============================================================================

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssnls {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

struct Domain {
    double lo = -1.0;
    double hi = 1.0;

    // affine map to the reference variable t in [-1,1]
    double to_unit(double y) const { return (2.0 * y - (hi + lo)) / (hi - lo); }
    double from_unit(double t) const { return 0.5 * ((hi - lo) * t + (hi + lo)); }
    double scale() const { return 2.0 / (hi - lo); }
    bool operator==(const Domain&) const = default;
};

class ChebSeries {
  public:
    ChebSeries() : c_(1, cplx(0.0)) {}
    explicit ChebSeries(std::vector<cplx> coeffs, Domain dom = {})
        : c_(std::move(coeffs)), dom_(dom) {
        if (c_.empty()) c_.assign(1, cplx(0.0));
        if (!(dom_.hi > dom_.lo)) throw std::invalid_argument("ChebSeries: empty domain");
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<cplx>& coeffs() const { return c_; }
    const Domain& domain() const { return dom_; }

    // Clenshaw evaluation at the reference variable t (no domain check).
    cplx eval_unit(double t) const {
        cplx b1(0.0), b2(0.0);
        const double t2 = 2.0 * t;
        for (int k = degree(); k >= 1; --k) {
            cplx b0 = t2 * b1 - b2 + c_[static_cast<size_t>(k)];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c_[0];
    }

    cplx eval(double y) const { return eval_unit(checked_unit(y)); }

    // Sum of c_n (T_n(t) - 1), evaluated as -2 sum c_n sin^2(n acos(t)/2).
    // Cancellation-free form of eval(t) - eval(1) for t near 1.
    cplx eval_minus_right_end(double t) const {
        t = std::min(1.0, std::max(-1.0, t));
        const double th = std::acos(t);
        cplx s(0.0);
        for (int n = 1; n <= degree(); ++n) {
            const double sn = std::sin(0.5 * n * th);
            s += c_[static_cast<size_t>(n)] * (-2.0 * sn * sn);
        }
        return s;
    }

    ChebSeries derivative() const {
        const int n = degree();
        if (n == 0) return ChebSeries(std::vector<cplx>{cplx(0.0)}, dom_);
        std::vector<cplx> d(static_cast<size_t>(n) + 1, cplx(0.0));
        d[static_cast<size_t>(n)] = 0.0;
        d[static_cast<size_t>(n - 1)] = 2.0 * static_cast<double>(n) * c_[static_cast<size_t>(n)];
        for (int k = n - 1; k >= 1; --k)
            d[static_cast<size_t>(k - 1)] =
                d[static_cast<size_t>(k + 1)] + 2.0 * static_cast<double>(k) * c_[static_cast<size_t>(k)];
        d[0] *= 0.5;
        d.resize(static_cast<size_t>(std::max(1, n)));
        const double s = dom_.scale();
        for (auto& v : d) v *= s;
        return ChebSeries(std::move(d), dom_);
    }

    ChebSeries& operator+=(const ChebSeries& o) {
        if (!(dom_ == o.dom_)) throw std::invalid_argument("ChebSeries: domain mismatch");
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), cplx(0.0));
        for (size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    ChebSeries& operator*=(cplx s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    friend ChebSeries operator+(ChebSeries a, const ChebSeries& b) { return a += b; }
    friend ChebSeries operator*(cplx s, ChebSeries a) { return a *= s; }

  private:
    double checked_unit(double y) const {
        double t = dom_.to_unit(y);
        constexpr double slack = 1e-12;
        if (t < -1.0 - slack || t > 1.0 + slack)
            throw std::domain_error("ChebSeries::eval: y=" + std::to_string(y) + " outside domain [" +
                                    std::to_string(dom_.lo) + "," + std::to_string(dom_.hi) + "]");
        return std::min(1.0, std::max(-1.0, t));
    }

    std::vector<cplx> c_;
    Domain dom_;
};

// Chebyshev-Gauss-Lobatto nodes, descending: y_0 = hi, ..., y_n = lo.
inline std::vector<double> lobatto_nodes(int n, Domain dom = {}) {
    if (n < 1) throw std::invalid_argument("lobatto_nodes: need n >= 1");
    std::vector<double> y(static_cast<size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) y[static_cast<size_t>(j)] = dom.from_unit(std::cos(j * pi / n));
    y.front() = dom.hi;
    y.back() = dom.lo;
    if (n % 2 == 0) y[static_cast<size_t>(n / 2)] = dom.from_unit(0.0);
    return y;
}

// Coefficients of the degree-n interpolant through Lobatto-node values
// (values ordered like lobatto_nodes). Direct cosine transform.
inline std::vector<cplx> lobatto_to_coeffs(const std::vector<cplx>& v) {
    const int n = static_cast<int>(v.size()) - 1;
    if (n < 0) throw std::invalid_argument("lobatto_to_coeffs: empty data");
    if (n == 0) return {v[0]};
    std::vector<cplx> c(static_cast<size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        cplx s(0.0);
        for (int k = 0; k <= n; ++k) {
            const double w = (k == 0 || k == n) ? 0.5 : 1.0;
            s += w * v[static_cast<size_t>(k)] * std::cos(j * k * pi / n);
        }
        const double fac = (j == 0 || j == n) ? 1.0 / n : 2.0 / n;
        c[static_cast<size_t>(j)] = fac * s;
    }
    return c;
}

template <class F>
ChebSeries interpolate(F&& sampler, int degree, Domain dom = {}) {
    if (degree < 0) throw std::invalid_argument("interpolate: degree must be >= 0");
    if (degree == 0) {
        cplx v = sampler(dom.from_unit(0.0));
        return ChebSeries(std::vector<cplx>{v}, dom);
    }
    const auto nodes = lobatto_nodes(degree, dom);
    std::vector<cplx> vals(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        vals[i] = sampler(nodes[i]);
        if (!std::isfinite(vals[i].real()) || !std::isfinite(vals[i].imag()))
            throw std::runtime_error("interpolate: non-finite sample at node y=" + std::to_string(nodes[i]) +
                                     " (index " + std::to_string(i) + ")");
    }
    return ChebSeries(lobatto_to_coeffs(vals), dom);
}

}  // namespace ssnls
