// bath.hpp — Spectral densities, Bose-Einstein factors, correlation and lineshape functions

#pragma once

#include <complex>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "strongdecoh/numerics.hpp"

namespace strongdecoh::bath {

using cplx = std::complex<double>;

// All parameters in rad/fs. eta is the reorganization energy int J(w)/w dw for every parametric form.
struct DrudeLorentz {
    double eta{0.0};
    double cutoff{0.0}; // Omega
};
struct OhmicExp {
    double eta{0.0};
    double cutoff{0.0}; // w_c; J = eta (w/w_c) e^{-w/w_c}
};
struct SuperOhmic {
    double exponent{3.0}; // s >= 1; J = eta/Gamma(s) (w/w_c)^s e^{-w/w_c}
    double eta{0.0};
    double cutoff{0.0};
};
struct Tabulated {
    std::vector<double> omega; // rad/fs, strictly increasing, >= 0
    std::vector<cplx> values;  // rad/fs; linear interpolation, zero outside
};
struct Zero {};

using SpectralForm = std::variant<Zero, DrudeLorentz, OhmicExp, SuperOhmic, Tabulated>;

cplx evaluate(const SpectralForm& f, double w);
bool is_zero(const SpectralForm& f);
// lim_{w->0} Re J(w)/w
double small_frequency_slope(const SpectralForm& f);
// typical frequency of the form (cutoff); 0 for Zero
double frequency_scale(const SpectralForm& f);
// frequency beyond which J < 1e-12 max J, capped at 1e4 x scale
double frequency_cutoff(const SpectralForm& f);

// Hermitian matrix of spectral densities J_ab(w); only a <= b is stored, J_ba = conj(J_ab).
class SpectralDensityMatrix {
public:
    SpectralDensityMatrix() = default;
    explicit SpectralDensityMatrix(int channels);
    static SpectralDensityMatrix diagonal(const std::vector<SpectralForm>& forms);

    void set(int a, int b, SpectralForm f);
    int size() const { return m_; }
    cplx operator()(int a, int b, double w) const;
    const SpectralForm& form(int a, int b) const;
    bool entry_zero(int a, int b) const { return is_zero(form(a, b)); }
    // true if J_ab(w) is real for all w (then g_ab = g_ba)
    bool entry_real(int a, int b) const;
    bool all_drude_lorentz() const;
    bool is_diagonal() const;
    double min_scale() const;
    double max_scale() const;
    double max_cutoff() const;
    std::vector<double> breakpoints() const;
    void validate() const;

private:
    int m_{0};
    std::vector<SpectralForm> upper_; // row-major upper triangle incl. diagonal
    std::size_t index(int a, int b) const;
};

struct BathSpec {
    double beta{0.0}; // fs
    SpectralDensityMatrix spectral;
    bool high_temperature{false};

    void validate() const;
};

double bose_einstein(double w, double beta);

// delta_eps_ab = int J_ab / w
Eigen::MatrixXcd reorganization_matrix(const SpectralDensityMatrix& J, const numerics::QuadratureSpec& spec = {});

// C_ab(t); closed-form exponential in high-temperature mode
Eigen::MatrixXcd correlation(const BathSpec& bath, double t, const numerics::QuadratureSpec& spec = {});

// lim dg_ab/dt
Eigen::MatrixXcd lineshape_asymptotic_slope(const BathSpec& bath, const numerics::QuadratureSpec& spec = {});

// direct quadrature of g_ab(t) and its derivative (t >= 0)
cplx lineshape_direct(const BathSpec& bath, int a, int b, double t, const numerics::QuadratureSpec& spec = {});
cplx lineshape_derivative_direct(const BathSpec& bath, int a, int b, double t,
                                 const numerics::QuadratureSpec& spec = {});

// Immutable g_ab(t) table with cubic Hermite interpolation and linear continuation past the last node.
class LineshapeTable {
public:
    cplx g(int a, int b, double t) const;
    cplx gdot(int a, int b, double t) const;
    Eigen::MatrixXcd g(double t) const;
    int channels() const { return m_; }
    double beta() const { return beta_; }
    bool high_temperature() const { return high_temperature_; }
    const std::vector<double>& times() const { return t_; }
    const Eigen::MatrixXcd& reorganization() const { return reorg_; }
    const Eigen::MatrixXcd& slope() const { return slope_; }
    // relaxation time scale used to size windows (fs)
    double memory_time() const { return memory_time_; }
    // high-temperature mode: C_ab(t) = c_ab e^{-Omega_ab t} for t >= 0
    cplx ht_coefficient(int a, int b) const { return ht_coeff_[static_cast<std::size_t>(a * m_ + b)]; }
    double ht_rate(int a, int b) const { return ht_rate_[static_cast<std::size_t>(a * m_ + b)]; }

private:
    friend LineshapeTable lineshape(const BathSpec&, const numerics::TimeGrid&, const numerics::QuadratureSpec&);
    friend LineshapeTable lineshape(const BathSpec&, const numerics::QuadratureSpec&);

    cplx g_pos(int a, int b, double t) const;
    cplx gdot_pos(int a, int b, double t) const;

    int m_{0};
    double beta_{0.0};
    bool high_temperature_{false};
    double memory_time_{1.0};
    std::vector<double> t_;
    std::vector<std::vector<cplx>> gv_, gd_; // per entry a*M+b (empty for zero entries)
    std::vector<cplx> asym_const_;
    std::vector<cplx> ht_coeff_;            // high-temperature: c_ab = eta Omega (2/(beta Omega) - i)
    std::vector<double> ht_rate_;           // Omega per entry
    Eigen::MatrixXcd reorg_, slope_;
};

LineshapeTable lineshape(const BathSpec& bath, const numerics::TimeGrid& grid,
                         const numerics::QuadratureSpec& spec = {});
// table on the default grid: graded near 0, uniform in the memory window, stretched until g is linear
LineshapeTable lineshape(const BathSpec& bath, const numerics::QuadratureSpec& spec = {});

numerics::TimeGrid default_lineshape_grid(const BathSpec& bath);

// Gamma_ab(w) = int_0^inf e^{i w t} C_ab(t) dt from the table (integration by parts against gdot)
cplx gamma_bath_halfline(const LineshapeTable& table, int a, int b, double w,
                         const numerics::QuadratureSpec& spec = {});

// int_{-inf}^{inf} C_ab(t) e^{i w t} dt in closed form: 2 pi J_ab(w)(n+1) for w > 0, 2 pi J_ba(|w|) n for w < 0
cplx full_line_spectrum(const BathSpec& bath, int a, int b, double w);

} // namespace strongdecoh::bath
