#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

namespace bumpcert {

/// Convex increasing Phi with Phi(0) = 0. Carries log-space evaluators so the
/// parametric gauge construction can reach s far below the double range of Phi.
class YoungFunction {
public:
    using Fn = std::function<double(double)>;

    /// Phi(t) = t * (ln(e + t))^alpha, alpha > 1.
    static YoungFunction log_power(double alpha);
    /// User-supplied evaluator and derivative.
    static YoungFunction custom(Fn eval, Fn deriv, std::string name);

    double eval(double t) const;
    double deriv(double t) const;
    /// ln Phi(e^y)
    double log_eval_exp(double y) const;
    /// ln Phi'(e^y)
    double log_deriv_exp(double y) const;
    /// Phi^{-1}(value) by bisection.
    double inverse(double value) const;

    const std::string& name() const { return name_; }
    /// Family parameter; NaN for custom evaluators.
    double alpha() const { return alpha_; }

private:
    YoungFunction() = default;

    Fn eval_;
    Fn deriv_;
    Fn log_eval_exp_;
    Fn log_deriv_exp_;
    std::string name_;
    double alpha_ = 0.0;
};

/// Normalized Orlicz norm inf{lambda > 0 : sum m_j Phi(v_j / lambda) / sum m_j <= 1}.
double orlicz_norm(std::span<const double> masses, std::span<const double> values,
                   const YoungFunction& phi);

struct GaugeConstants {
    double k = 0.0;      ///< normalization factor applied to the raw gauge
    double s_star = 1.0; ///< sup{s : Psi(s) >= 1}
    double c_psi = 1.0;  ///< <w> <= c_psi * n_Psi
    double c = 0.0;      ///< constant of the second-derivative bound
    double c25 = 0.0;    ///< 16 / c
    double c26 = 16.0;
};

namespace detail {
class GaugeModel;
}

/// A normalized bump gauge Psi on (0, 1] with the derived functions
/// phi(s) = s Psi(s), m'(s) = int_0^s dr / phi(r) and m(s) = int_0^s m'.
/// Internally everything is parametrized by x = ln(1/s) so the tail near s = 0
/// never underflows. Immutable; copies share the model.
class BumpGauge {
public:
    double psi(double s) const;
    double raw_psi(double s) const;
    double phi(double s) const;
    /// d Psi / ds
    double psi_prime(double s) const;
    double phi_prime(double s) const;
    double m_prime(double s) const;
    double m(double s) const;

    /// Same functions in the log variable x = ln(1/s).
    double psi_x(double x) const;
    double m_prime_x(double x) const;

    const GaugeConstants& constants() const { return constants_; }
    double k() const { return constants_.k; }
    double s_star() const { return constants_.s_star; }
    double c_psi() const { return constants_.c_psi; }
    double c() const { return constants_.c; }
    double c25() const { return constants_.c25; }
    double c26() const { return constants_.c26; }

    const std::string& name() const;
    bool has_closed_forms() const;

private:
    friend BumpGauge make_log_gauge(double);
    friend BumpGauge make_gauge(std::function<double(double)>, std::string);
    friend BumpGauge make_gauge_log_variable(std::function<double(double)>, std::string);
    friend BumpGauge psi_from_young(const YoungFunction&, double);

    explicit BumpGauge(std::shared_ptr<const detail::GaugeModel> model);

    std::shared_ptr<const detail::GaugeModel> model_;
    GaugeConstants constants_;
};

/// Raw gauge (alpha + ln(1/s))^alpha with closed-form normalization and m'.
BumpGauge make_log_gauge(double alpha);

/// Generic gauge from a raw evaluator on (0, 1]; m' and m by quadrature.
/// Below the smallest positive double the evaluator cannot be sampled, so the
/// integrals stop at ln(1/s) ~ 745. Heavy tails should use the log-variable form.
BumpGauge make_gauge(std::function<double(double)> raw_psi, std::string name);

/// Same, with the raw evaluator given as a function of x = ln(1/s) in [0, inf).
BumpGauge make_gauge_log_variable(std::function<double(double)> raw_psi_of_x, std::string name);

/// Psi(s) = Phi'(t) where s = 1 / (Phi(t) Phi'(t)), t >= t_min, then normalized.
BumpGauge psi_from_young(const YoungFunction& phi, double t_min = 1e-6);

/// T(A, N) = N m'(N/A) and its derivatives.
struct TValues {
    double value = 0.0;
    double d_a = 0.0;
    double d_n = 0.0;
    double d_aa = 0.0;
    double d_an = 0.0;
    double d_nn = 0.0;

    double hessian_det() const { return d_aa * d_nn - d_an * d_an; }
};

TValues t_scalar(const BumpGauge& gauge, double a, double n);

/// Constant C_L with n_Psi(N_I^w) <= C_L ||w||_{L^Phi(I)} for a matched pair
/// built by psi_from_young. Splits the integral into the part where
/// Psi(N) <= k Phi'(t) (at most k), the head t < t_one (at most t_one Psi(1))
/// and the tail where N(t) < 1/(Phi Phi') (at most k int_{t_one}^inf dt/Phi).
struct MatchedPairConstant {
    double k_match = 0.0;
    double t_one = 0.0;
    double head = 0.0;
    double tail = 0.0;
    double value = 0.0;
};

MatchedPairConstant matched_pair_constant(const YoungFunction& phi, const BumpGauge& gauge);

/// Gauge from a family tag: "log" or "young-log".
BumpGauge make_gauge_family(const std::string& family, double alpha);

} // namespace bumpcert
