#include "bumpcert/gauge.hpp"

#include "bisect.hpp"
#include "bumpcert/error.hpp"
#include "bumpcert/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>

#include <cmath>
#include <limits>
#include <numbers>

namespace bumpcert {

// ---------------------------------------------------------------- Young

YoungFunction YoungFunction::log_power(double alpha) {
    if (!(alpha > 1.0)) throw ParameterError("log-power Young function needs alpha > 1");
    constexpr double e = std::numbers::e;
    YoungFunction f;
    f.alpha_ = alpha;
    f.name_ = "young-log";
    f.eval_ = [alpha](double t) { return t * std::pow(std::log(e + t), alpha); };
    f.deriv_ = [alpha](double t) {
        const double l = std::log(e + t);
        return std::pow(l, alpha - 1.0) * (l + alpha * t / (e + t));
    };
    // ln(e + e^y), kept accurate for large |y|
    auto log_e_plus = [](double y) {
        return y > 1.0 ? y + std::log1p(std::exp(1.0 - y)) : 1.0 + std::log1p(std::exp(y - 1.0));
    };
    f.log_eval_exp_ = [alpha, log_e_plus](double y) {
        return y + alpha * std::log(log_e_plus(y));
    };
    f.log_deriv_exp_ = [alpha, log_e_plus](double y) {
        const double l = log_e_plus(y);
        const double ratio = 1.0 / (1.0 + std::exp(1.0 - y)); // t / (e + t)
        return (alpha - 1.0) * std::log(l) + std::log(l + alpha * ratio);
    };
    return f;
}

YoungFunction YoungFunction::custom(Fn eval, Fn deriv, std::string name) {
    if (!eval || !deriv) throw ParameterError("custom Young function needs eval and deriv");
    YoungFunction f;
    f.alpha_ = std::numeric_limits<double>::quiet_NaN();
    f.name_ = std::move(name);
    f.eval_ = std::move(eval);
    f.deriv_ = std::move(deriv);
    f.log_eval_exp_ = [ev = f.eval_](double y) { return std::log(ev(std::exp(y))); };
    f.log_deriv_exp_ = [dv = f.deriv_](double y) { return std::log(dv(std::exp(y))); };
    return f;
}

double YoungFunction::eval(double t) const { return t <= 0.0 ? 0.0 : eval_(t); }
double YoungFunction::deriv(double t) const { return deriv_(std::max(t, 0.0)); }
double YoungFunction::log_eval_exp(double y) const { return log_eval_exp_(y); }
double YoungFunction::log_deriv_exp(double y) const { return log_deriv_exp_(y); }

double YoungFunction::inverse(double value) const {
    if (value <= 0.0) return 0.0;
    double hi = 1.0;
    while (eval(hi) < value) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw DomainError("Young function inverse out of range");
    }
    return detail::bisect([&](double t) { return eval(t) < value; }, 0.0, hi);
}

double orlicz_norm(std::span<const double> masses, std::span<const double> values,
                   const YoungFunction& phi) {
    if (masses.size() != values.size()) throw ParameterError("orlicz_norm: size mismatch");
    double total = 0.0;
    double mean = 0.0;
    double top = 0.0;
    for (std::size_t j = 0; j < masses.size(); ++j) {
        if (values[j] < 0.0 || masses[j] < 0.0)
            throw ParameterError("orlicz_norm: negative mass or value");
        total += masses[j];
        mean += masses[j] * values[j];
        top = std::max(top, values[j]);
    }
    if (!(total > 0.0)) throw ParameterError("orlicz_norm: total mass must be positive");
    if (top == 0.0) return 0.0;
    mean /= total;
    auto average_phi = [&](double lambda) {
        double acc = 0.0;
        for (std::size_t j = 0; j < masses.size(); ++j)
            acc += masses[j] * phi.eval(values[j] / lambda);
        return acc / total;
    };
    // Jensen brackets the root: mean/Phi^{-1}(1) <= norm <= max/Phi^{-1}(1).
    const double unit = phi.inverse(1.0);
    double lo = mean / unit;
    double hi = top / unit;
    if (hi - lo <= detail::kBisectRelWidth * hi) return hi;
    return detail::bisect([&](double lambda) { return average_phi(lambda) > 1.0; }, lo, hi);
}

// ---------------------------------------------------------------- models

namespace detail {

// Raw (un-normalized) gauge in the variable x = ln(1/s) >= 0.
class GaugeModel {
public:
    virtual ~GaugeModel() = default;
    virtual double raw_psi_x(double x) const = 0;
    virtual double raw_dpsi_dx(double x) const {
        const double h = 1e-4 * std::max(1.0, x);
        const double lo = std::max(0.0, x - h);
        return (raw_psi_x(x + h) - raw_psi_x(lo)) / (x + h - lo);
    }
    virtual bool closed_form() const { return false; }
    // Normalized m'(s), m(s) given k; generic versions use quadrature.
    virtual double m_prime_x(double x, double k) const {
        if (x == std::numeric_limits<double>::infinity()) return 0.0;
        quad::Options opts;
        opts.abs_tol = 1e-12;
        const auto r = quad::integrate_to_infinity(
            [this](double xi) { return 1.0 / raw_psi_x(xi); }, x, opts);
        return r.value / k;
    }
    virtual double m_x(double x, double k) const {
        if (x == std::numeric_limits<double>::infinity()) return 0.0;
        // m(s) = s m'(s) - int_0^s dr / Psi(r)
        quad::Options opts;
        opts.abs_tol = 1e-12;
        const auto r = quad::integrate_to_infinity(
            [this](double xi) { return std::exp(-xi) / raw_psi_x(xi); }, x, opts);
        return std::exp(-x) * m_prime_x(x, k) - r.value / k;
    }
    virtual double raw_normalization_integral() const {
        quad::Options opts;
        opts.abs_tol = 1e-13;
        return quad::integrate_to_infinity([this](double xi) { return 1.0 / raw_psi_x(xi); }, 0.0,
                                           opts)
            .value;
    }
    std::string name;
};

namespace {

class LogModel final : public GaugeModel {
public:
    explicit LogModel(double alpha) : alpha_(alpha) { name = "log"; }

    double raw_psi_x(double x) const override { return std::pow(alpha_ + x, alpha_); }
    double raw_dpsi_dx(double x) const override {
        return alpha_ * std::pow(alpha_ + x, alpha_ - 1.0);
    }
    bool closed_form() const override { return true; }
    double m_prime_x(double x, double) const override {
        return std::pow(1.0 + x / alpha_, 1.0 - alpha_);
    }
    // m(s) = alpha^(alpha-1) e^alpha Gamma(2 - alpha, alpha + ln(1/s))
    double m_x(double x, double) const override {
        if (x > 700.0) return 0.0;
        const double g = gsl_sf_gamma_inc(2.0 - alpha_, alpha_ + x);
        return std::pow(alpha_, alpha_ - 1.0) * std::exp(alpha_) * g;
    }
    double raw_normalization_integral() const override {
        return std::pow(alpha_, 1.0 - alpha_) / (alpha_ - 1.0);
    }

private:
    double alpha_;
};

class EvaluatorModel final : public GaugeModel {
public:
    EvaluatorModel(std::function<double(double)> raw, bool log_variable)
        : raw_(std::move(raw)), log_variable_(log_variable) {}
    double raw_psi_x(double x) const override { return log_variable_ ? raw_(x) : raw_(std::exp(-x)); }

private:
    std::function<double(double)> raw_;
    bool log_variable_;
};

class YoungModel final : public GaugeModel {
public:
    YoungModel(YoungFunction phi, double t_min) : phi_(std::move(phi)), y_min_(std::log(t_min)) {
        name = "young:" + phi_.name();
        x_min_ = level(y_min_);
    }

    // ln(Phi(t) Phi'(t)) at t = e^y; strictly increasing in y.
    double level(double y) const { return phi_.log_eval_exp(y) + phi_.log_deriv_exp(y); }

    double solve_log_t(double x) const {
        if (x < x_min_)
            throw DomainError("psi_from_young: s outside the parametric range for t >= t_min");
        double hi = std::max(y_min_ + 1.0, x);
        double step = 1.0;
        while (level(hi) < x) {
            hi += step;
            step *= 2.0;
            if (!std::isfinite(hi)) throw DomainError("psi_from_young: bracket overflow");
        }
        return detail::bisect([&](double y) { return level(y) < x; }, y_min_, hi);
    }

    double raw_psi_x(double x) const override { return std::exp(phi_.log_deriv_exp(solve_log_t(x))); }

    double x_min() const { return x_min_; }

private:
    YoungFunction phi_;
    double y_min_;
    double x_min_;
};

} // namespace
} // namespace detail

BumpGauge::BumpGauge(std::shared_ptr<const detail::GaugeModel> model) : model_(std::move(model)) {
    const double integral = model_->raw_normalization_integral();
    if (!(integral > 0.0) || !std::isfinite(integral))
        throw ParameterError("gauge: 1/(s Psi(s)) is not integrable on (0, 1]");
    constants_.k = integral;
    if (psi(1.0) >= 1.0) {
        constants_.s_star = 1.0;
    } else {
        double hi = 1.0;
        while (psi_x(hi) < 1.0) {
            hi *= 2.0;
            if (hi > 1e6) throw ParameterError("gauge: Psi never reaches 1");
        }
        const double x_star = detail::bisect([&](double x) { return psi_x(x) < 1.0; }, 0.0, hi);
        constants_.s_star = std::exp(-x_star);
    }
    constants_.c_psi = std::max(1.0, 1.0 / constants_.s_star);
    constants_.c = 2.0 / (8.0 + 2.0 * constants_.c_psi);
    constants_.c25 = 16.0 / constants_.c;
    constants_.c26 = 16.0;
}

namespace {
double log_inv(double s) {
    if (!(s > 0.0) || s > 1.0 + 1e-15) throw DomainError("gauge evaluated outside (0, 1]");
    return s >= 1.0 ? 0.0 : -std::log(s);
}
} // namespace

double BumpGauge::psi_x(double x) const { return constants_.k * model_->raw_psi_x(x); }
double BumpGauge::raw_psi(double s) const { return model_->raw_psi_x(log_inv(s)); }
double BumpGauge::psi(double s) const { return psi_x(log_inv(s)); }
double BumpGauge::phi(double s) const { return s == 0.0 ? 0.0 : s * psi(s); }

double BumpGauge::psi_prime(double s) const {
    return -constants_.k * model_->raw_dpsi_dx(log_inv(s)) / s;
}

double BumpGauge::phi_prime(double s) const {
    const double x = log_inv(s);
    return constants_.k * (model_->raw_psi_x(x) - model_->raw_dpsi_dx(x));
}

double BumpGauge::m_prime_x(double x) const { return model_->m_prime_x(x, constants_.k); }

double BumpGauge::m_prime(double s) const {
    if (s == 0.0) return 0.0;
    return m_prime_x(log_inv(s));
}

double BumpGauge::m(double s) const {
    if (s == 0.0) return 0.0;
    return model_->m_x(log_inv(s), constants_.k);
}

const std::string& BumpGauge::name() const { return model_->name; }
bool BumpGauge::has_closed_forms() const { return model_->closed_form(); }

BumpGauge make_log_gauge(double alpha) {
    if (!(alpha > 1.0))
        throw ParameterError("log gauge needs alpha > 1 (1/(s Psi) is not integrable otherwise)");
    static const bool gsl_quiet = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)gsl_quiet;
    return BumpGauge(std::make_shared<detail::LogModel>(alpha));
}

BumpGauge make_gauge(std::function<double(double)> raw_psi, std::string name) {
    if (!raw_psi) throw ParameterError("make_gauge: empty evaluator");
    auto model = std::make_shared<detail::EvaluatorModel>(std::move(raw_psi), false);
    model->name = std::move(name);
    return BumpGauge(std::move(model));
}

BumpGauge make_gauge_log_variable(std::function<double(double)> raw_psi_of_x, std::string name) {
    if (!raw_psi_of_x) throw ParameterError("make_gauge_log_variable: empty evaluator");
    auto model = std::make_shared<detail::EvaluatorModel>(std::move(raw_psi_of_x), true);
    model->name = std::move(name);
    return BumpGauge(std::move(model));
}

BumpGauge psi_from_young(const YoungFunction& phi, double t_min) {
    if (!(t_min > 0.0)) throw ParameterError("psi_from_young: t_min must be positive");
    auto model = std::make_shared<detail::YoungModel>(phi, t_min);
    if (model->x_min() > 0.0)
        throw DomainError("psi_from_young: Phi(t_min) Phi'(t_min) > 1, so Psi is undefined near s = 1");
    return BumpGauge(std::move(model));
}

BumpGauge make_gauge_family(const std::string& family, double alpha) {
    if (family == "log") return make_log_gauge(alpha);
    if (family == "young-log") return psi_from_young(YoungFunction::log_power(alpha));
    throw ParameterError("unknown gauge family '" + family + "'");
}

TValues t_scalar(const BumpGauge& gauge, double a, double n) {
    if (a < 1.0 || a > 2.0 || n < 0.0 || n > 1.0)
        throw DomainError("T(A, N) needs A in [1, 2] and N in [0, 1]");
    TValues t;
    if (n == 0.0) {
        t.d_nn = std::numeric_limits<double>::infinity();
        return t;
    }
    const double s = n / a;
    const double phi = gauge.phi(s);
    const double dphi = gauge.phi_prime(s);
    const double psi = gauge.psi(s);
    const double a2phi = a * a * phi;
    t.value = n * gauge.m_prime(s);
    t.d_a = -n * n / a2phi;
    t.d_n = gauge.m_prime(s) + 1.0 / psi;
    t.d_aa = n * n * (2.0 * a * phi - n * dphi) / (a2phi * a2phi);
    t.d_an = -2.0 * n / a2phi + n * n * dphi / (a * a2phi * phi);
    t.d_nn = (1.0 / phi - gauge.psi_prime(s) / (psi * psi)) / a;
    return t;
}

MatchedPairConstant matched_pair_constant(const YoungFunction& phi, const BumpGauge& gauge) {
    MatchedPairConstant out;
    out.k_match = gauge.k();
    // t_one: Phi(t) Phi'(t) = 1, i.e. the parameter of s = 1.
    auto level = [&](double y) { return phi.log_eval_exp(y) + phi.log_deriv_exp(y); };
    double lo = -1.0;
    while (level(lo) > 0.0) lo *= 2.0;
    double hi = 1.0;
    while (level(hi) < 0.0) hi *= 2.0;
    out.t_one = std::exp(detail::bisect([&](double y) { return level(y) < 0.0; }, lo, hi));
    out.head = out.t_one * gauge.psi(1.0);
    quad::Options opts;
    opts.abs_tol = 1e-12;
    // t = e^y turns the 1/(t log^a t) tail into an algebraic one
    const double tail_integral =
        quad::integrate_to_infinity(
            [&](double y) { return std::exp(y - phi.log_eval_exp(y)); }, std::log(out.t_one), opts)
            .value;
    out.tail = out.k_match * tail_integral;
    out.value = out.k_match + out.head + out.tail;
    return out;
}

} // namespace bumpcert
