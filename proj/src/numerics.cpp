// numerics.cpp — Gauss-Kronrod quadrature, RK4/Dormand-Prince propagation, null spaces

#include "strongdecoh/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "strongdecoh/errors.hpp"

namespace strongdecoh::numerics {

namespace {

constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525381825, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// 10-point Gauss weights for nodes kXgk[1], kXgk[3], ..., kXgk[9]
constexpr double kWg[5] = {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
                           0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
                           0.295524224714752870173892994651338};

struct Segment {
    double a, b;
    cplx value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

cplx checked(const ComplexFn& f, double x) {
    cplx v = f(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw NumericalError("non-finite integrand value at x = " + std::to_string(x));
    return v;
}

Segment gk21(const ComplexFn& f, double a, double b, long& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    cplx fv[21];
    fv[0] = checked(f, c);
    for (int j = 0; j < 10; ++j) {
        fv[2 * j + 1] = checked(f, c - h * kXgk[j]);
        fv[2 * j + 2] = checked(f, c + h * kXgk[j]);
    }
    evals += 21;
    cplx rk = kWgk[10] * fv[0];
    cplx rg{0.0, 0.0};
    double resabs = kWgk[10] * std::abs(fv[0]);
    for (int j = 0; j < 10; ++j) {
        const cplx s = fv[2 * j + 1] + fv[2 * j + 2];
        rk += kWgk[j] * s;
        resabs += kWgk[j] * (std::abs(fv[2 * j + 1]) + std::abs(fv[2 * j + 2]));
        if (j % 2 == 1) rg += kWg[j / 2] * s;
    }
    const cplx mean = 0.5 * rk;
    double resasc = kWgk[10] * std::abs(fv[0] - mean);
    for (int j = 0; j < 10; ++j)
        resasc += kWgk[j] * (std::abs(fv[2 * j + 1] - mean) + std::abs(fv[2 * j + 2] - mean));
    const double ah = std::abs(h);
    resabs *= ah;
    resasc *= ah;
    double err = std::abs((rk - rg) * h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return Segment{a, b, rk * h, err};
}

} // namespace

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("quadrature tolerances must be > 0");
    if (!(omega_max > 0.0)) throw ConfigError("quadrature omega_max must be > 0");
    if (max_subdivisions < 1) throw ConfigError("quadrature max_subdivisions must be >= 1");
    if (!(decay_threshold > 0.0) || !(max_horizon > 0.0) || !(time_scale > 0.0))
        throw ConfigError("kernel truncation parameters must be > 0");
}

QuadResult integrate_interval(const ComplexFn& f, double a, double b, const QuadratureSpec& spec,
                              std::span<const double> breakpoints) {
    QuadResult out;
    if (a == b) return out;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> pts{a};
    for (double p : breakpoints)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::priority_queue<Segment> heap;
    cplx total{0.0, 0.0};
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Segment s = gk21(f, pts[i], pts[i + 1], out.evaluations);
        total += s.value;
        err += s.error;
        heap.push(s);
    }
    int subdivisions = static_cast<int>(heap.size());
    bool roundoff = false;
    while (err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (subdivisions >= spec.max_subdivisions) break;
        Segment s = heap.top();
        const double mid = 0.5 * (s.a + s.b);
        if (!(mid > s.a && mid < s.b) || (s.b - s.a) < 1e-15 * std::max(1.0, std::abs(mid))) {
            roundoff = true;
            break;
        }
        heap.pop();
        Segment l = gk21(f, s.a, mid, out.evaluations);
        Segment r = gk21(f, mid, s.b, out.evaluations);
        total += l.value + r.value - s.value;
        err += l.error + r.error - s.error;
        heap.push(l);
        heap.push(r);
        ++subdivisions;
    }
    // resum to shed accumulated update roundoff
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = sign * total;
    out.abs_error = err;
    out.converged = !roundoff && err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) * 1.0000001;
    return out;
}

QuadResult integrate_frequency(const ComplexFn& f, const QuadratureSpec& spec, std::span<const double> breakpoints) {
    spec.validate();
    const double wm = spec.omega_max;
    QuadResult head = integrate_interval(f, 0.0, wm, spec, breakpoints);
    // tail: w = wm / x, dw = wm / x^2 dx on (0, 1]
    auto g = [&](double x) -> cplx {
        if (x <= 0.0) return 0.0;
        const double w = wm / x;
        if (!std::isfinite(w)) return 0.0;
        return f(w) * (wm / (x * x));
    };
    QuadratureSpec tail_spec = spec;
    tail_spec.abs_tol = std::max(spec.abs_tol, 0.1 * spec.rel_tol * std::abs(head.value));
    std::vector<double> tail_breaks;
    for (double p : breakpoints)
        if (p > wm) tail_breaks.push_back(wm / p);
    QuadResult tail = integrate_interval(g, 0.0, 1.0, tail_spec, tail_breaks);
    QuadResult out;
    out.value = head.value + tail.value;
    out.abs_error = head.abs_error + tail.abs_error;
    out.evaluations = head.evaluations + tail.evaluations;
    out.converged = out.abs_error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(out.value)) * 1.0000001 ||
                    (head.converged && tail.converged);
    return out;
}

QuadResult integrate_kernel(const ComplexFn& zeta, double w0, double upper, const QuadratureSpec& spec) {
    spec.validate();
    if (upper < 0.0) throw DomainError("kernel integral upper limit must be >= 0");
    double window_max = 0.0;
    ComplexFn f = [&](double tau) -> cplx {
        const cplx z = zeta(tau);
        window_max = std::max(window_max, std::abs(z));
        return z * std::exp(cplx(0.0, w0 * tau));
    };
    QuadResult out;
    out.converged = true;
    double a = 0.0;
    double width = spec.time_scale;
    while (a < upper) {
        const double b = std::min(a + width, upper);
        window_max = 0.0;
        QuadratureSpec ws = spec;
        ws.abs_tol = std::max(spec.abs_tol, 0.1 * spec.rel_tol * std::abs(out.value));
        QuadResult r = integrate_interval(f, a, b, ws);
        out.value += r.value;
        out.abs_error += r.abs_error;
        out.evaluations += r.evaluations;
        out.converged = out.converged && r.converged;
        if (window_max < spec.decay_threshold) break;
        if (b >= spec.max_horizon && b < upper)
            throw NonDecayingKernelError("kernel |zeta| still " + std::to_string(window_max) + " at tau = " +
                                         std::to_string(b) + " fs (max horizon " +
                                         std::to_string(spec.max_horizon) + " fs)");
        a = b;
        width *= 2.0;
    }
    return out;
}

std::vector<cplx> cumulative_kernel_integral(const ComplexFn& zeta, double w0, std::span<const double> times,
                                             const QuadratureSpec& spec) {
    spec.validate();
    double window_max = 0.0;
    ComplexFn f = [&](double tau) -> cplx {
        const cplx z = zeta(tau);
        window_max = std::max(window_max, std::abs(z));
        return z * std::exp(cplx(0.0, w0 * tau));
    };
    std::vector<cplx> out(times.size());
    cplx cum{0.0, 0.0};
    double prev = 0.0;
    bool done = false;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (t < prev) throw DomainError("cumulative kernel integral needs sorted nonnegative times");
        double a = prev;
        while (!done && a < t) {
            // sub-windows keep the adaptive partition local for long gaps between output times
            const double b = std::min(t, a + std::max(spec.time_scale, a));
            window_max = 0.0;
            QuadratureSpec ws = spec;
            ws.abs_tol = std::max(spec.abs_tol, 0.1 * spec.rel_tol * std::abs(cum));
            cum += integrate_interval(f, a, b, ws).value;
            if (window_max < spec.decay_threshold && a > 0.0) done = true;
            a = b;
        }
        out[k] = cum;
        prev = t;
    }
    return out;
}

TimeGrid TimeGrid::uniform(double start, double end, double step) {
    if (!(step > 0.0)) throw ConfigError("time grid step must be > 0");
    if (!(end >= start)) throw ConfigError("time grid end must be >= start");
    TimeGrid g;
    const auto n = static_cast<long>(std::llround((end - start) / step));
    for (long k = 0; k <= n; ++k) g.nodes.push_back(start + static_cast<double>(k) * step);
    if (g.nodes.back() < end - 1e-9 * step) g.nodes.push_back(end);
    g.validate();
    return g;
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
    TimeGrid g{std::move(nodes)};
    g.validate();
    return g;
}

void TimeGrid::validate() const {
    if (nodes.empty()) throw ConfigError("time grid is empty");
    if (nodes.front() < 0.0) throw ConfigError("time grid must start at t >= 0");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1])) throw ConfigError("time grid nodes must be strictly increasing");
}

namespace {

template <class Vec, class Rhs>
std::vector<Vec> propagate_impl(const Rhs& rhs, const Vec& y0, const TimeGrid& grid, const PropagateOptions& opts) {
    grid.validate();
    if (!(opts.max_step > 0.0)) throw ConfigError("max_step must be > 0");
    std::vector<Vec> out;
    out.reserve(grid.size());
    out.push_back(y0);
    Vec y = y0;
    const Eigen::Index n = y0.size();
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n);

    if (opts.stepper == Stepper::rk4) {
        double h_target = opts.max_step;
        if (opts.generator_norm > 0.0) h_target = std::min(h_target, 0.01 / opts.generator_norm);
        for (std::size_t k = 1; k < grid.size(); ++k) {
            const double t0 = grid.nodes[k - 1];
            const double span = grid.nodes[k] - t0;
            const long steps = std::max(1L, static_cast<long>(std::ceil(span / h_target - 1e-9)));
            const double h = span / static_cast<double>(steps);
            for (long s = 0; s < steps; ++s) {
                const double t = t0 + static_cast<double>(s) * h;
                rhs(t, y, k1);
                tmp = y + (0.5 * h) * k1;
                rhs(t + 0.5 * h, tmp, k2);
                tmp = y + (0.5 * h) * k2;
                rhs(t + 0.5 * h, tmp, k3);
                tmp = y + h * k3;
                rhs(t + h, tmp, k4);
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            out.push_back(y);
        }
        return out;
    }

    // Dormand-Prince 5(4)
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    const double tol = opts.tolerance;
    double h = std::min(opts.max_step, (grid.end() - grid.start()) / 100.0);
    if (!(h > 0.0)) h = opts.max_step;
    bool have_k1 = false;
    double t = grid.start();
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double t1 = grid.nodes[k];
        while (t < t1) {
            double hs = std::min(h, t1 - t);
            const bool clipped = hs < h;
            if (!have_k1) {
                rhs(t, y, k1);
                have_k1 = true;
            }
            rhs(t + 0.2 * hs, (y + hs * a21 * k1).eval(), k2);
            rhs(t + 0.3 * hs, (y + hs * (a31 * k1 + a32 * k2)).eval(), k3);
            rhs(t + 0.8 * hs, (y + hs * (a41 * k1 + a42 * k2 + a43 * k3)).eval(), k4);
            rhs(t + 8.0 / 9.0 * hs, (y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval(), k5);
            rhs(t + hs, (y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval(), k6);
            tmp = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            rhs(t + hs, tmp, k7);
            const Vec errv = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double err = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double sc = tol * (1.0 + std::max(std::abs(y[i]), std::abs(tmp[i])));
                err = std::max(err, std::abs(errv[i]) / sc);
            }
            if (err <= 1.0) {
                t = (hs == t1 - t) ? t1 : t + hs;
                y = tmp;
                k1 = k7;
                const double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
                if (!clipped) h = std::min(opts.max_step, hs * fac);
            } else {
                h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
                if (h < opts.min_step)
                    throw NumericalError("adaptive step underflow at t = " + std::to_string(t) + " fs");
            }
        }
        out.push_back(y);
    }
    return out;
}

template <class Mat>
double op_norm_impl(const Mat& A) {
    if (A.size() == 0) return 0.0;
    if (A.rows() <= 16 && A.cols() <= 16) return Eigen::JacobiSVD<Mat>(A).singularValues()(0);
    return Eigen::BDCSVD<Mat>(A).singularValues()(0);
}

template <class Mat, class Vec>
Vec null_space_impl(const Mat& L, const Vec& w) {
    const Eigen::Index n = L.rows();
    if (n == 0 || L.cols() != n) throw DomainError("generator must be a nonempty square matrix");
    Eigen::BDCSVD<Mat> svd(L);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    int kdim = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) <= 1e-11 * smax || smax == 0.0) ++kdim;
    if (kdim != 1)
        throw NonErgodicError("generator kernel has dimension " + std::to_string(kdim) + " (expected 1)", kdim);
    Mat A(n + 1, n);
    A.topRows(n) = L;
    A.row(n) = w.transpose();
    Vec b = Vec::Zero(n + 1);
    b(n) = 1.0;
    auto qr = A.colPivHouseholderQr();
    Vec v = qr.solve(b);
    Vec r = b - A * v;
    v += qr.solve(r);
    return v;
}

} // namespace

std::vector<Eigen::VectorXcd> propagate(const ComplexRhs& rhs, const Eigen::VectorXcd& y0, const TimeGrid& grid,
                                        const PropagateOptions& opts) {
    return propagate_impl(rhs, y0, grid, opts);
}

std::vector<Eigen::VectorXd> propagate(const RealRhs& rhs, const Eigen::VectorXd& y0, const TimeGrid& grid,
                                       const PropagateOptions& opts) {
    return propagate_impl(rhs, y0, grid, opts);
}

std::vector<Eigen::VectorXd> propagate(const Eigen::MatrixXd& L, const Eigen::VectorXd& y0, const TimeGrid& grid,
                                       PropagateOptions opts) {
    if (opts.generator_norm <= 0.0) opts.generator_norm = op_norm_impl(L);
    RealRhs rhs = [&L](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy.noalias() = L * y; };
    return propagate_impl(rhs, y0, grid, opts);
}

std::vector<Eigen::VectorXcd> propagate(const Eigen::MatrixXcd& L, const Eigen::VectorXcd& y0,
                                        const TimeGrid& grid, PropagateOptions opts) {
    if (opts.generator_norm <= 0.0) opts.generator_norm = op_norm_impl(L);
    ComplexRhs rhs = [&L](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy.noalias() = L * y; };
    return propagate_impl(rhs, y0, grid, opts);
}

Eigen::VectorXd steady_null_space(const Eigen::MatrixXd& L) {
    Eigen::VectorXd v = null_space_impl(L, Eigen::VectorXd::Ones(L.rows()).eval());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) < -1e-10) throw NumericalError("steady state has negative population " + std::to_string(v(i)));
        if (v(i) < 0.0) v(i) = 0.0;
    }
    return v / v.sum();
}

Eigen::VectorXcd steady_null_space(const Eigen::MatrixXcd& L, const Eigen::VectorXcd& w) {
    return null_space_impl(L, w);
}

double operator_norm(const Eigen::MatrixXd& A) { return op_norm_impl(A); }
double operator_norm(const Eigen::MatrixXcd& A) { return op_norm_impl(A); }

double trace_norm(const Eigen::MatrixXcd& A) {
    if (A.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(A).singularValues().sum();
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& X) {
    return Eigen::Map<const Eigen::VectorXcd>(X.data(), X.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index n) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    Eigen::MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

Eigen::MatrixXcd sandwich(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    return kron(B.transpose(), A);
}

Eigen::MatrixXcd left_mult(const Eigen::MatrixXcd& A) {
    return kron(Eigen::MatrixXcd::Identity(A.cols(), A.cols()), A);
}

Eigen::MatrixXcd right_mult(const Eigen::MatrixXcd& B) {
    return kron(B.transpose(), Eigen::MatrixXcd::Identity(B.rows(), B.rows()));
}

Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& H, cplx s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in expm_hermitian");
    Eigen::VectorXcd d(H.rows());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(s * es.eigenvalues()(i));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace strongdecoh::numerics
