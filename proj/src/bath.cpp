// bath.cpp — Spectral forms, frequency-domain quadratures for C, g, gdot and the lineshape table

#include "strongdecoh/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "strongdecoh/errors.hpp"

namespace strongdecoh::bath {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

cplx tabulated_value(const Tabulated& tab, double w) {
    const auto& x = tab.omega;
    if (x.empty() || w < x.front() || w > x.back()) return 0.0;
    auto it = std::upper_bound(x.begin(), x.end(), w);
    if (it == x.end()) return tab.values.back();
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    if (k == 0) return tab.values.front();
    const double s = (w - x[k - 1]) / (x[k] - x[k - 1]);
    return (1.0 - s) * tab.values[k - 1] + s * tab.values[k];
}

// smallest u >= peak where u^s e^{-u} drops below 1e-12 of its maximum
double exp_tail_cutoff(double s) {
    auto logratio = [s](double u) { return s * std::log(u / s) + s - u; };
    double lo = s, hi = s + 10.0;
    while (logratio(hi) > std::log(1e-12)) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (logratio(mid) > std::log(1e-12) ? lo : hi) = mid;
    }
    return hi;
}

double coth_half(double beta, double w) { return 1.0 / std::tanh(0.5 * beta * w); }

// (sin x - x) / w^2 with x = w t, stable for small x
double sin_minus_x_over_w2(double w, double t) {
    const double x = w * t;
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return t * t * x * (-1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (-1.0 / 5040.0 + x2 / 362880.0)));
    }
    return (std::sin(x) - x) / (w * w);
}

numerics::QuadratureSpec entry_spec(const SpectralForm& f, const numerics::QuadratureSpec& base) {
    numerics::QuadratureSpec s = base;
    const double wc = frequency_cutoff(f);
    if (wc > 0.0) s.omega_max = wc;
    return s;
}

std::vector<double> entry_breaks(const SpectralForm& f) {
    return std::visit(overloaded{
                          [](const Zero&) { return std::vector<double>{}; },
                          [](const DrudeLorentz& d) {
                              return std::vector<double>{d.cutoff, 10 * d.cutoff, 100 * d.cutoff, 1000 * d.cutoff};
                          },
                          [](const OhmicExp& o) {
                              return std::vector<double>{o.cutoff, 5 * o.cutoff, 15 * o.cutoff};
                          },
                          [](const SuperOhmic& o) {
                              const double s = o.exponent;
                              return std::vector<double>{o.cutoff, s * o.cutoff, 3 * s * o.cutoff,
                                                         (3 * s + 10) * o.cutoff};
                          },
                          [](const Tabulated& t) { return t.omega; },
                      },
                      f);
}

cplx quad_entry(const SpectralDensityMatrix& J, int a, int b, const numerics::QuadratureSpec& spec,
                const std::function<cplx(double, cplx)>& kernel, const char* what) {
    const SpectralForm& f = J.form(a, b);
    if (is_zero(f)) return 0.0;
    const auto brk = entry_breaks(f);
    auto r = numerics::integrate_frequency([&](double w) { return kernel(w, J(a, b, w)); }, entry_spec(f, spec), brk);
    (void)what;
    return r.value;
}


enum class Quantity { correlation, lineshape, derivative };

// real-axis integrands for t >= 0 (S = Re J_ab, A = Im J_ab)
cplx real_axis_integrand(Quantity q, double beta, double t, double w, cplx j) {
    const double S = j.real(), A = j.imag();
    const double x = w * t;
    const double ct = coth_half(beta, w);
    switch (q) {
    case Quantity::correlation: {
        const double c = std::cos(x), s = std::sin(x);
        return cplx(ct * (S * c + A * s), A * c - S * s);
    }
    case Quantity::lineshape: {
        const double sh = std::sin(0.5 * x);
        const double co = -2.0 * sh * sh / (w * w);
        const double so = sin_minus_x_over_w2(w, t);
        return -cplx(ct * (S * co + A * so), A * co - S * so);
    }
    case Quantity::derivative: {
        const double sh = std::sin(0.5 * x);
        const double co = -2.0 * sh * sh / w;
        const double so = std::sin(x) / w;
        return cplx(ct * (S * so - A * co), A * so + S * co);
    }
    }
    return 0.0;
}

bool analytic_form(const SpectralForm& f) { return !std::holds_alternative<Tabulated>(f); }

cplx evaluate_complex(const SpectralForm& f, cplx w) {
    return std::visit(overloaded{
                          [](const Zero&) { return cplx(0.0); },
                          [w](const DrudeLorentz& d) {
                              return 2.0 * d.eta * d.cutoff * w / (kPi * (w * w + d.cutoff * d.cutoff));
                          },
                          [w](const OhmicExp& o) { return o.eta * (w / o.cutoff) * std::exp(-w / o.cutoff); },
                          [w](const SuperOhmic& o) {
                              const cplx u = w / o.cutoff;
                              return o.eta / std::tgamma(o.exponent) * std::pow(u, o.exponent) * std::exp(-u);
                          },
                          [](const Tabulated&) -> cplx { throw DomainError("tabulated density has no continuation"); },
                      },
                      f);
}

cplx bose_complex(double beta, cplx w) {
    const cplx z = beta * w;
    if (z.real() > 40.0) return std::exp(-z) / (1.0 - std::exp(-z));
    if (std::abs(z) < 1e-4) {
        const cplx em1 = z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
        return 1.0 / em1;
    }
    return 1.0 / (std::exp(z) - 1.0);
}

// C, g or gdot of a real analytic entry: direct on [0, W], tail [W, inf) split into a
// non-oscillatory part on the real axis and the e^{+-iwt} parts rotated onto W +- iu.
cplx time_function_analytic(const SpectralForm& f, double beta, double t, Quantity q,
                            const numerics::QuadratureSpec& spec) {
    const double wmax = frequency_cutoff(f);
    const double W = std::min(wmax, 50.0 / t);
    std::vector<double> brk;
    for (double p : entry_breaks(f))
        if (p < W) brk.push_back(p);
    numerics::QuadratureSpec hs = spec;
    auto head = numerics::integrate_interval(
        [&](double w) { return real_axis_integrand(q, beta, t, w, evaluate(f, w)); }, 0.0, W, hs, brk);
    cplx total = head.value;
    numerics::QuadratureSpec ts = spec;
    ts.abs_tol = std::max(spec.abs_tol, 0.01 * spec.rel_tol * std::abs(total));
    if (q != Quantity::correlation) {
        // w = W / x on (0, 1]
        auto nonosc = [&](double x) -> cplx {
            if (x <= 0.0) return 0.0;
            const double w = W / x;
            const double j = evaluate(f, w).real();
            const cplx v = (q == Quantity::lineshape) ? cplx(j * coth_half(beta, w) / (w * w), -t * j / w)
                                                      : cplx(0.0, -j / w);
            return v * (W / (x * x));
        };
        total += numerics::integrate_interval(nonosc, 0.0, 1.0, ts).value;
    }
    // kernel multiplying e^{+iwt} (weight n) and e^{-iwt} (weight n+1)
    auto weight = [&](cplx w) -> cplx {
        const cplx j = evaluate_complex(f, w);
        switch (q) {
        case Quantity::correlation: return j;
        case Quantity::lineshape: return -j / (w * w);
        case Quantity::derivative: return j / w;
        }
        return 0.0;
    };
    // derivative: e^{iwt} term carries -i n, e^{-iwt} term +i (n+1)
    const cplx cp = (q == Quantity::derivative) ? cplx(0.0, -1.0) : cplx(1.0);
    const cplx cm = (q == Quantity::derivative) ? cplx(0.0, 1.0) : cplx(1.0);
    const double U = 60.0 / t;
    auto up = [&](double u) {
        const cplx w(W, u);
        return weight(w) * bose_complex(beta, w) * std::exp(-u * t);
    };
    auto down = [&](double u) {
        const cplx w(W, -u);
        return weight(w) * (bose_complex(beta, w) + 1.0) * std::exp(-u * t);
    };
    const cplx Iu = numerics::integrate_interval(up, 0.0, U, ts).value;
    const cplx Id = numerics::integrate_interval(down, 0.0, U, ts).value;
    const cplx I(0.0, 1.0);
    total += cp * I * std::exp(I * (W * t)) * Iu - cm * I * std::exp(-I * (W * t)) * Id;
    return total;
}

cplx time_function(const BathSpec& bath, int a, int b, double t, Quantity q, const numerics::QuadratureSpec& spec) {
    const SpectralForm& f = bath.spectral.form(a, b);
    if (is_zero(f)) return 0.0;
    if (t > 0.0 && analytic_form(f)) return time_function_analytic(f, bath.beta, t, q, spec);
    const double beta = bath.beta;
    return quad_entry(
        bath.spectral, a, b, spec, [&](double w, cplx j) { return real_axis_integrand(q, beta, t, w, j); }, "time");
}

} // namespace

cplx evaluate(const SpectralForm& f, double w) {
    if (w < 0.0) return 0.0;
    return std::visit(overloaded{
                          [](const Zero&) { return cplx(0.0); },
                          [w](const DrudeLorentz& d) {
                              return cplx(2.0 * d.eta * d.cutoff * w / (kPi * (w * w + d.cutoff * d.cutoff)));
                          },
                          [w](const OhmicExp& o) { return cplx(o.eta * (w / o.cutoff) * std::exp(-w / o.cutoff)); },
                          [w](const SuperOhmic& o) {
                              const double u = w / o.cutoff;
                              return cplx(o.eta / std::tgamma(o.exponent) * std::pow(u, o.exponent) * std::exp(-u));
                          },
                          [w](const Tabulated& t) { return tabulated_value(t, w); },
                      },
                      f);
}

bool is_zero(const SpectralForm& f) {
    return std::visit(overloaded{
                          [](const Zero&) { return true; },
                          [](const DrudeLorentz& d) { return d.eta == 0.0; },
                          [](const OhmicExp& o) { return o.eta == 0.0; },
                          [](const SuperOhmic& o) { return o.eta == 0.0; },
                          [](const Tabulated& t) {
                              return std::all_of(t.values.begin(), t.values.end(),
                                                 [](cplx v) { return v == 0.0; });
                          },
                      },
                      f);
}

double small_frequency_slope(const SpectralForm& f) {
    return std::visit(overloaded{
                          [](const Zero&) { return 0.0; },
                          [](const DrudeLorentz& d) { return 2.0 * d.eta / (kPi * d.cutoff); },
                          [](const OhmicExp& o) { return o.eta / o.cutoff; },
                          [](const SuperOhmic& o) { return o.exponent == 1.0 ? o.eta / o.cutoff : 0.0; },
                          [](const Tabulated& t) {
                              if (t.omega.size() < 2 || t.omega.front() > 0.0) return 0.0;
                              return t.values[1].real() / t.omega[1];
                          },
                      },
                      f);
}

double frequency_scale(const SpectralForm& f) {
    return std::visit(overloaded{
                          [](const Zero&) { return 0.0; },
                          [](const DrudeLorentz& d) { return d.cutoff; },
                          [](const OhmicExp& o) { return o.cutoff; },
                          [](const SuperOhmic& o) { return o.cutoff; },
                          [](const Tabulated& t) {
                              // frequency of the largest |J|
                              std::size_t k = 0;
                              for (std::size_t i = 0; i < t.values.size(); ++i)
                                  if (std::abs(t.values[i]) > std::abs(t.values[k])) k = i;
                              return t.omega.empty() ? 0.0 : std::max(t.omega[k], t.omega.back() * 1e-3);
                          },
                      },
                      f);
}

double frequency_cutoff(const SpectralForm& f) {
    return std::visit(overloaded{
                          [](const Zero&) { return 0.0; },
                          [](const DrudeLorentz& d) { return 1e4 * d.cutoff; },
                          [](const OhmicExp& o) { return exp_tail_cutoff(1.0) * o.cutoff; },
                          [](const SuperOhmic& o) {
                              return std::min(exp_tail_cutoff(o.exponent), 1e4) * o.cutoff;
                          },
                          [](const Tabulated& t) { return t.omega.empty() ? 0.0 : t.omega.back(); },
                      },
                      f);
}

SpectralDensityMatrix::SpectralDensityMatrix(int channels) : m_(channels) {
    if (channels < 0) throw ConfigError("negative number of bath channels");
    upper_.assign(static_cast<std::size_t>(m_ * (m_ + 1) / 2), Zero{});
}

SpectralDensityMatrix SpectralDensityMatrix::diagonal(const std::vector<SpectralForm>& forms) {
    SpectralDensityMatrix J(static_cast<int>(forms.size()));
    for (int a = 0; a < J.size(); ++a) J.set(a, a, forms[static_cast<std::size_t>(a)]);
    return J;
}

std::size_t SpectralDensityMatrix::index(int a, int b) const {
    if (a < 0 || b < 0 || a >= m_ || b >= m_) throw DomainError("bath channel index out of range");
    if (a > b) std::swap(a, b);
    return static_cast<std::size_t>(a * m_ - a * (a - 1) / 2 + (b - a));
}

void SpectralDensityMatrix::set(int a, int b, SpectralForm f) {
    if (a > b) {
        if (auto* t = std::get_if<Tabulated>(&f))
            for (auto& v : t->values) v = std::conj(v);
    }
    upper_[index(a, b)] = std::move(f);
}

const SpectralForm& SpectralDensityMatrix::form(int a, int b) const { return upper_[index(a, b)]; }

cplx SpectralDensityMatrix::operator()(int a, int b, double w) const {
    const cplx v = evaluate(form(a, b), w);
    return a <= b ? v : std::conj(v);
}

bool SpectralDensityMatrix::entry_real(int a, int b) const {
    const auto* t = std::get_if<Tabulated>(&form(a, b));
    if (!t) return true;
    return std::all_of(t->values.begin(), t->values.end(), [](cplx v) { return v.imag() == 0.0; });
}

bool SpectralDensityMatrix::all_drude_lorentz() const {
    for (const auto& f : upper_)
        if (!is_zero(f) && !std::holds_alternative<DrudeLorentz>(f)) return false;
    return true;
}

bool SpectralDensityMatrix::is_diagonal() const {
    for (int a = 0; a < m_; ++a)
        for (int b = a + 1; b < m_; ++b)
            if (!entry_zero(a, b)) return false;
    return true;
}

double SpectralDensityMatrix::min_scale() const {
    double s = 0.0;
    for (const auto& f : upper_) {
        const double v = frequency_scale(f);
        if (v > 0.0) s = (s == 0.0) ? v : std::min(s, v);
    }
    return s;
}

double SpectralDensityMatrix::max_scale() const {
    double s = 0.0;
    for (const auto& f : upper_) s = std::max(s, frequency_scale(f));
    return s;
}

double SpectralDensityMatrix::max_cutoff() const {
    double s = 0.0;
    for (const auto& f : upper_) s = std::max(s, frequency_cutoff(f));
    return s;
}

std::vector<double> SpectralDensityMatrix::breakpoints() const {
    std::vector<double> out;
    for (const auto& f : upper_) {
        auto b = entry_breaks(f);
        out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void SpectralDensityMatrix::validate() const {
    for (int a = 0; a < m_; ++a) {
        for (int b = a; b < m_; ++b) {
            const SpectralForm& f = form(a, b);
            const std::string where = "J[" + std::to_string(a) + "][" + std::to_string(b) + "]";
            std::visit(overloaded{
                           [](const Zero&) {},
                           [&](const DrudeLorentz& d) {
                               if (!(d.cutoff > 0.0)) throw ConfigError(where + ": Drude-Lorentz cutoff must be > 0");
                               if (a == b && d.eta < 0.0) throw ConfigError(where + ": diagonal eta must be >= 0");
                           },
                           [&](const OhmicExp& o) {
                               if (!(o.cutoff > 0.0)) throw ConfigError(where + ": Ohmic cutoff must be > 0");
                               if (a == b && o.eta < 0.0) throw ConfigError(where + ": diagonal eta must be >= 0");
                           },
                           [&](const SuperOhmic& o) {
                               if (!(o.cutoff > 0.0)) throw ConfigError(where + ": super-Ohmic cutoff must be > 0");
                               if (!(o.exponent >= 1.0))
                                   throw ConfigError(where + ": exponent must be >= 1 (sub-Ohmic not supported)");
                               if (a == b && o.eta < 0.0) throw ConfigError(where + ": diagonal eta must be >= 0");
                           },
                           [&](const Tabulated& t) {
                               if (t.omega.size() != t.values.size() || t.omega.size() < 3)
                                   throw ConfigError(where + ": tabulated density needs >= 3 matching nodes");
                               for (std::size_t i = 0; i < t.omega.size(); ++i) {
                                   if (t.omega[i] < 0.0) throw ConfigError(where + ": negative frequency node");
                                   if (i > 0 && !(t.omega[i] > t.omega[i - 1]))
                                       throw ConfigError(where + ": frequency nodes must increase");
                                   if (a == b && (t.values[i].imag() != 0.0 || t.values[i].real() < 0.0))
                                       throw ConfigError(where + ": diagonal entries must be real and >= 0");
                               }
                               if (t.omega.front() == 0.0 && t.values.front() != 0.0)
                                   throw ConfigError(where + ": J(0) must vanish (Ohmic or super-Ohmic)");
                               // O(w) check on the first two positive nodes
                               std::size_t k = t.omega.front() == 0.0 ? 1 : 0;
                               const double r1 = std::abs(t.values[k]) / t.omega[k];
                               const double r2 = std::abs(t.values[k + 1]) / t.omega[k + 1];
                               if (r1 > 10.0 * r2 && r1 > 0.0)
                                   throw ConfigError(where + ": tabulated density not O(w) at small w");
                               if (t.values[0].imag() != 0.0 || t.values[1].imag() != 0.0)
                                   throw ConfigError(where + ": Im J must vanish at the first two nodes");
                           },
                       },
                       f);
        }
    }
}

void BathSpec::validate() const {
    if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
    spectral.validate();
    if (high_temperature) {
        if (!spectral.all_drude_lorentz())
            throw ConfigError("high_temperature mode requires every nonzero entry to be Drude-Lorentz");
        for (int a = 0; a < spectral.size(); ++a)
            for (int b = a; b < spectral.size(); ++b)
                if (const auto* d = std::get_if<DrudeLorentz>(&spectral.form(a, b)))
                    if (d->eta != 0.0 && !(beta * d->cutoff < 1.0))
                        throw ConfigError("high_temperature mode requires beta*Omega < 1 (got " +
                                          std::to_string(beta * d->cutoff) + ")");
    }
}

double bose_einstein(double w, double beta) {
    if (!(w > 0.0)) throw DomainError("bose_einstein requires w > 0");
    return 1.0 / std::expm1(beta * w);
}

Eigen::MatrixXcd reorganization_matrix(const SpectralDensityMatrix& J, const numerics::QuadratureSpec& spec) {
    const int M = J.size();
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(M, M);
    for (int a = 0; a < M; ++a)
        for (int b = a; b < M; ++b) {
            R(a, b) = quad_entry(J, a, b, spec, [](double w, cplx j) { return j / w; }, "reorganization");
            R(b, a) = std::conj(R(a, b));
        }
    return R;
}

Eigen::MatrixXcd correlation(const BathSpec& bath, double t, const numerics::QuadratureSpec& spec) {
    const int M = bath.spectral.size();
    const double tt = std::abs(t);
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(M, M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            if (bath.spectral.entry_zero(a, b)) continue;
            if (bath.high_temperature) {
                const auto& d = std::get<DrudeLorentz>(bath.spectral.form(a, b));
                C(a, b) = d.eta * d.cutoff * cplx(2.0 / (bath.beta * d.cutoff), -1.0) * std::exp(-d.cutoff * tt);
                continue;
            }
            if (b < a && bath.spectral.entry_real(a, b)) {
                C(a, b) = C(b, a);
                continue;
            }
            C(a, b) = time_function(bath, a, b, tt, Quantity::correlation, spec);
        }
    if (t < 0.0) return C.adjoint();
    return C;
}

Eigen::MatrixXcd lineshape_asymptotic_slope(const BathSpec& bath, const numerics::QuadratureSpec& spec) {
    const int M = bath.spectral.size();
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(M, M);
    for (int a = 0; a < M; ++a)
        for (int b = a; b < M; ++b) {
            const SpectralForm& f = bath.spectral.form(a, b);
            if (is_zero(f)) continue;
            if (bath.high_temperature) {
                const auto& d = std::get<DrudeLorentz>(f);
                s(a, b) = d.eta * cplx(2.0 / (bath.beta * d.cutoff), -1.0);
                s(b, a) = s(a, b);
                continue;
            }
            const double beta = bath.beta;
            const cplx re_part =
                kPi * small_frequency_slope(f) / beta +
                (bath.spectral.entry_real(a, b)
                     ? cplx(0.0)
                     : quad_entry(bath.spectral, a, b, spec,
                                  [beta](double w, cplx j) { return cplx(j.imag() * coth_half(beta, w) / w); },
                                  "slope"));
            const cplx im_part =
                quad_entry(bath.spectral, a, b, spec, [](double w, cplx j) { return cplx(j.real() / w); }, "slope");
            s(a, b) = cplx(re_part.real(), -im_part.real());
            // J_ba = conj(J_ab): S unchanged, A flips sign
            s(b, a) = cplx(kPi * small_frequency_slope(f) / beta - (re_part.real() - kPi * small_frequency_slope(f) / beta),
                           -im_part.real());
        }
    return s;
}

cplx lineshape_direct(const BathSpec& bath, int a, int b, double t, const numerics::QuadratureSpec& spec) {
    if (t < 0.0) return std::conj(lineshape_direct(bath, b, a, -t, spec));
    if (t == 0.0) return 0.0;
    return time_function(bath, a, b, t, Quantity::lineshape, spec);
}

cplx lineshape_derivative_direct(const BathSpec& bath, int a, int b, double t, const numerics::QuadratureSpec& spec) {
    if (t < 0.0) return -std::conj(lineshape_derivative_direct(bath, b, a, -t, spec));
    if (t == 0.0) return 0.0;
    return time_function(bath, a, b, t, Quantity::derivative, spec);
}

numerics::TimeGrid default_lineshape_grid(const BathSpec& bath) {
    const double nu1 = 2.0 * kPi / bath.beta;
    const double hi = std::max(bath.spectral.max_scale(), nu1);
    double lo = bath.spectral.min_scale();
    lo = lo > 0.0 ? std::min(lo, nu1) : nu1;
    const double hmax = std::min(1.0, 0.25 / hi);
    const double t_mem = 30.0 / lo;
    std::vector<double> nodes{0.0};
    double h = 1e-3 * hmax;
    double t = 0.0;
    while (t < t_mem) {
        t += h;
        nodes.push_back(t);
        h = std::min(hmax, h * 1.1);
    }
    return numerics::TimeGrid::from_nodes(std::move(nodes));
}

LineshapeTable lineshape(const BathSpec& bath, const numerics::QuadratureSpec& spec) {
    bath.validate();
    numerics::TimeGrid grid = default_lineshape_grid(bath);
    if (!bath.high_temperature) {
        // stretch geometrically until gdot has reached its slope on every diagonal entry
        const Eigen::MatrixXcd s = lineshape_asymptotic_slope(bath, spec);
        double T = grid.end();
        const double t_cap = 64.0 * T;
        auto settled = [&](double t) {
            for (int a = 0; a < bath.spectral.size(); ++a) {
                if (bath.spectral.entry_zero(a, a)) continue;
                const cplx d = lineshape_derivative_direct(bath, a, a, t, spec) - s(a, a);
                if (std::abs(d) > 1e-10 * std::abs(s(a, a))) return false;
            }
            return true;
        };
        while (T < t_cap && !settled(T)) {
            const double target = 2.0 * T;
            while (T < target) {
                T *= 1.02;
                grid.nodes.push_back(T);
            }
        }
    }
    return lineshape(bath, grid, spec);
}

LineshapeTable lineshape(const BathSpec& bath, const numerics::TimeGrid& grid, const numerics::QuadratureSpec& spec) {
    bath.validate();
    grid.validate();
    if (grid.nodes.front() != 0.0) throw DomainError("lineshape grid must start at t = 0");
    LineshapeTable tab;
    const int M = bath.spectral.size();
    tab.m_ = M;
    tab.beta_ = bath.beta;
    tab.high_temperature_ = bath.high_temperature;
    tab.t_ = grid.nodes;
    tab.reorg_ = reorganization_matrix(bath.spectral, spec);
    tab.slope_ = lineshape_asymptotic_slope(bath, spec);
    const double lo = bath.spectral.min_scale();
    tab.memory_time_ = std::max(lo > 0.0 ? 1.0 / lo : 1.0, bath.beta / (2.0 * kPi));
    const auto MM = static_cast<std::size_t>(M * M);
    tab.gv_.assign(MM, {});
    tab.gd_.assign(MM, {});
    tab.asym_const_.assign(MM, 0.0);
    tab.ht_coeff_.assign(MM, 0.0);
    tab.ht_rate_.assign(MM, 0.0);
    if (bath.high_temperature) {
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < M; ++b)
                if (const auto* d = std::get_if<DrudeLorentz>(&bath.spectral.form(a, b))) {
                    const auto k = static_cast<std::size_t>(a * M + b);
                    tab.ht_coeff_[k] = d->eta * d->cutoff * cplx(2.0 / (bath.beta * d->cutoff), -1.0);
                    tab.ht_rate_[k] = d->cutoff;
                }
        return tab;
    }
    const double T = grid.end();
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            if (bath.spectral.entry_zero(a, b)) continue;
            const auto k = static_cast<std::size_t>(a * M + b);
            if (b < a && bath.spectral.entry_real(a, b)) {
                const auto kt = static_cast<std::size_t>(b * M + a);
                tab.gv_[k] = tab.gv_[kt];
                tab.gd_[k] = tab.gd_[kt];
                tab.asym_const_[k] = tab.asym_const_[kt];
                continue;
            }
            auto& gv = tab.gv_[k];
            auto& gd = tab.gd_[k];
            gv.resize(grid.size());
            gd.resize(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                gv[i] = lineshape_direct(bath, a, b, grid.nodes[i], spec);
                gd[i] = lineshape_derivative_direct(bath, a, b, grid.nodes[i], spec);
            }
            tab.asym_const_[k] = gv.back() - tab.slope_(a, b) * T;
        }
    return tab;
}

cplx LineshapeTable::g_pos(int a, int b, double t) const {
    const auto k = static_cast<std::size_t>(a * m_ + b);
    if (high_temperature_) {
        const double W = ht_rate_[k];
        if (W == 0.0) return 0.0;
        const double x = W * t;
        // e^{-x} + x - 1 without cancellation at small x
        const double e = x < 1e-3 ? x * x * (0.5 - x / 6.0 + x * x / 24.0) : std::exp(-x) + x - 1.0;
        return ht_coeff_[k] / (W * W) * e;
    }
    const auto& gv = gv_[k];
    if (gv.empty()) return 0.0;
    if (t >= t_.back()) return asym_const_[k] + slope_(a, b) * t;
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const auto& gd = gd_[k];
    return (2 * s3 - 3 * s2 + 1) * gv[i] + (s3 - 2 * s2 + s) * h * gd[i] + (-2 * s3 + 3 * s2) * gv[i + 1] +
           (s3 - s2) * h * gd[i + 1];
}

cplx LineshapeTable::gdot_pos(int a, int b, double t) const {
    const auto k = static_cast<std::size_t>(a * m_ + b);
    if (high_temperature_) {
        const double W = ht_rate_[k];
        if (W == 0.0) return 0.0;
        return ht_coeff_[k] / W * (-std::expm1(-W * t));
    }
    const auto& gv = gv_[k];
    if (gv.empty()) return 0.0;
    if (t >= t_.back()) return slope_(a, b);
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double s2 = s * s;
    const auto& gd = gd_[k];
    return ((6 * s2 - 6 * s) * gv[i] + (-6 * s2 + 6 * s) * gv[i + 1]) / h + (3 * s2 - 4 * s + 1) * gd[i] +
           (3 * s2 - 2 * s) * gd[i + 1];
}

cplx LineshapeTable::g(int a, int b, double t) const {
    if (t >= 0.0) return g_pos(a, b, t);
    return std::conj(g_pos(b, a, -t));
}

cplx LineshapeTable::gdot(int a, int b, double t) const {
    if (t >= 0.0) return gdot_pos(a, b, t);
    return -std::conj(gdot_pos(b, a, -t));
}

Eigen::MatrixXcd LineshapeTable::g(double t) const {
    Eigen::MatrixXcd G(m_, m_);
    for (int a = 0; a < m_; ++a)
        for (int b = 0; b < m_; ++b) G(a, b) = g(a, b, t);
    return G;
}

cplx gamma_bath_halfline(const LineshapeTable& table, int a, int b, double w, const numerics::QuadratureSpec& spec) {
    const cplx s = table.slope()(a, b);
    if (table.high_temperature()) {
        const double W = table.ht_rate(a, b);
        if (W == 0.0) return 0.0;
        return table.ht_coefficient(a, b) / cplx(W, -w);
    }
    if (s == 0.0 && table.gdot(a, b, table.memory_time()) == 0.0) return 0.0;
    if (w == 0.0) return s;
    const double scale = std::max(std::abs(s), 1e-300);
    numerics::QuadratureSpec ks = spec;
    ks.time_scale = std::max(0.5, table.memory_time() / 8.0);
    auto r = numerics::integrate_kernel_halfline([&](double tau) { return (table.gdot(a, b, tau) - s) / scale; }, w,
                                                 ks);
    return s - cplx(0.0, w) * scale * r.value;
}

cplx full_line_spectrum(const BathSpec& bath, int a, int b, double w) {
    if (w > 0.0) return 2.0 * kPi * bath.spectral(a, b, w) * (bose_einstein(w, bath.beta) + 1.0);
    if (w < 0.0) return 2.0 * kPi * bath.spectral(b, a, -w) * bose_einstein(-w, bath.beta);
    return 2.0 * kPi * small_frequency_slope(bath.spectral.form(a, b)) / bath.beta;
}

} // namespace strongdecoh::bath
