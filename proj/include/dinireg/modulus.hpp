#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dinireg/common.hpp"

namespace dinireg {

/// A modulus of continuity / mean oscillation: a nondecreasing function
/// w : [0,a] -> [0,inf) with w(0) = 0.  Closed forms keep oracles exact;
/// measured moduli live in monotone sample tables with linear
/// interpolation; transform outputs carry their own evaluators.
///
/// Evaluation outside [0,a] throws; use clamped() where saturation at the
/// right end is the intended semantics.
class Modulus {
public:
    enum class Kind { zero, power, log_power, power_log, table, derived };

    Modulus() = default;  // the zero modulus on [0,1]

    /// w(t) = 0.
    static Modulus zero(double a = 1.0) {
        Modulus m;
        m.kind_ = Kind::zero;
        m.a_ = check_right_end(a);
        return m;
    }

    /// w(t) = coef * t^alpha, alpha in (0,1].
    static Modulus power(double alpha, double coef = 1.0, double a = 1.0) {
        if (!(alpha > 0.0) || !(coef >= 0.0))
            throw invalid_input("Modulus::power: need alpha > 0 and coef >= 0");
        Modulus m;
        m.kind_ = Kind::power;
        m.alpha_ = alpha;
        m.coef_ = coef;
        m.a_ = check_right_end(a);
        return m;
    }

    /// w(t) = coef * (ln(e/t))^{-gamma}; requires a <= 1 so ln(e/t) >= 1.
    static Modulus log_power(double gamma, double coef = 1.0, double a = 1.0) {
        if (!(gamma > 0.0) || !(coef >= 0.0))
            throw invalid_input("Modulus::log_power: need gamma > 0 and coef >= 0");
        if (a > 1.0) throw invalid_input("Modulus::log_power: right end must be <= 1");
        Modulus m;
        m.kind_ = Kind::log_power;
        m.gamma_ = gamma;
        m.coef_ = coef;
        m.a_ = check_right_end(a);
        return m;
    }

    /// w(t) = coef * t^alpha * (ln(e/t))^{-gamma}, a <= 1.
    static Modulus power_log(double alpha, double gamma, double coef = 1.0, double a = 1.0) {
        if (!(alpha > 0.0) || !(gamma > 0.0) || !(coef >= 0.0))
            throw invalid_input("Modulus::power_log: need alpha, gamma > 0 and coef >= 0");
        if (a > 1.0) throw invalid_input("Modulus::power_log: right end must be <= 1");
        Modulus m;
        m.kind_ = Kind::power_log;
        m.alpha_ = alpha;
        m.gamma_ = gamma;
        m.coef_ = coef;
        m.a_ = check_right_end(a);
        return m;
    }

    /// Monotone sample table (t_i, w_i), linearly interpolated.  The point
    /// (0,0) is prepended when absent.  Non-monotone input is rejected.
    static Modulus table(std::vector<double> t, std::vector<double> w) {
        if (t.size() != w.size() || t.empty())
            throw invalid_input("Modulus::table: size mismatch or empty table");
        if (t.front() > 0.0) {
            t.insert(t.begin(), 0.0);
            w.insert(w.begin(), 0.0);
        }
        if (t.front() != 0.0 || w.front() != 0.0)
            throw invalid_input("Modulus::table: table must start at (0, 0)");
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (!(t[i] > t[i - 1]))
                throw invalid_input("Modulus::table: abscissae must be strictly increasing");
            if (w[i] < w[i - 1] - 1e-15 * (1.0 + std::abs(w[i])))
                throw invalid_input("Modulus::table: values must be nondecreasing");
        }
        Modulus m;
        m.kind_ = Kind::table;
        m.a_ = t.back();
        m.ts_ = std::make_shared<std::vector<double>>(std::move(t));
        m.ws_ = std::make_shared<std::vector<double>>(std::move(w));
        return m;
    }

    /// Wrap an arbitrary evaluator (used by transform outputs).  The caller
    /// guarantees monotonicity and eval(0) = 0.
    static Modulus derived(std::function<double(double)> eval, double a, std::string label) {
        Modulus m;
        m.kind_ = Kind::derived;
        m.a_ = check_right_end(a);
        m.eval_ = std::make_shared<std::function<double(double)>>(std::move(eval));
        m.label_ = std::move(label);
        return m;
    }

    Kind kind() const { return kind_; }
    double right_end() const { return a_; }
    double power_exponent() const { return alpha_; }
    double log_exponent() const { return gamma_; }
    double coefficient() const { return coef_; }
    const std::string& label() const { return label_; }
    bool is_closed_form() const {
        return kind_ == Kind::zero || kind_ == Kind::power || kind_ == Kind::log_power ||
               kind_ == Kind::power_log;
    }
    const std::vector<double>& table_t() const { return *ts_; }
    const std::vector<double>& table_w() const { return *ws_; }

    double operator()(double t) const {
        if (t < 0.0 || t > a_ * (1.0 + 1e-12))
            throw std::domain_error("Modulus: argument outside [0, a]");
        t = std::min(t, a_);
        return eval_unchecked(t);
    }

    /// Evaluate with the argument clamped into [0,a].
    double clamped(double t) const { return eval_unchecked(std::clamp(t, 0.0, a_)); }

    /// New modulus u(t) = w(a * t) on [0,1].
    Modulus rescaled_to_unit() const {
        if (a_ == 1.0) return *this;
        double a = a_;
        Modulus self = *this;
        switch (kind_) {
            case Kind::zero:
                return zero(1.0);
            case Kind::power:
                return power(alpha_, coef_ * std::pow(a, alpha_), 1.0);
            default:
                return derived([self, a](double t) { return self.clamped(a * t); }, 1.0,
                               label_.empty() ? "rescaled" : label_ + "/rescaled");
        }
    }

    /// Measured doubling constants: extremes of w(s)/w(t) over sampled
    /// t <= a, s in [t/2, t], skipping t with w(t) = 0.
    std::pair<double, double> doubling_constants(int t_samples = 200, int s_samples = 8) const {
        double c1 = 1.0, c2 = 1.0;
        for (int i = 0; i < t_samples; ++i) {
            // log-spaced t over ~10 decades
            double t = a_ * std::pow(10.0, -10.0 * (i + 1.0) / t_samples);
            double wt = eval_unchecked(t);
            if (wt <= 0.0) continue;
            for (int j = 0; j <= s_samples; ++j) {
                double s = t * (0.5 + 0.5 * j / s_samples);
                double r = eval_unchecked(s) / wt;
                c1 = std::min(c1, r);
                c2 = std::max(c2, r);
            }
        }
        return {c1, c2};
    }

    nlohmann::json to_json() const {
        using nlohmann::json;
        switch (kind_) {
            case Kind::zero:
                return json{{"kind", "zero"}, {"a", a_}};
            case Kind::power:
                return json{{"kind", "power"}, {"alpha", alpha_}, {"coef", coef_}, {"a", a_}};
            case Kind::log_power:
                return json{{"kind", "log_power"}, {"gamma", gamma_}, {"coef", coef_}, {"a", a_}};
            case Kind::power_log:
                return json{{"kind", "power_log"},
                            {"alpha", alpha_},
                            {"gamma", gamma_},
                            {"coef", coef_},
                            {"a", a_}};
            case Kind::table:
                return json{{"kind", "table"}, {"t", *ts_}, {"w", *ws_}};
            case Kind::derived:
                return sampled_table(257).to_json();
        }
        return {};
    }

    static Modulus from_json(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "zero") return zero(j.value("a", 1.0));
        if (kind == "power")
            return power(j.at("alpha").get<double>(), j.value("coef", 1.0), j.value("a", 1.0));
        if (kind == "log_power")
            return log_power(j.at("gamma").get<double>(), j.value("coef", 1.0), j.value("a", 1.0));
        if (kind == "power_log")
            return power_log(j.at("alpha").get<double>(), j.at("gamma").get<double>(),
                             j.value("coef", 1.0), j.value("a", 1.0));
        if (kind == "table")
            return table(j.at("t").get<std::vector<double>>(), j.at("w").get<std::vector<double>>());
        throw invalid_input("Modulus::from_json: unknown kind '" + kind + "'");
    }

    /// Sample into a monotone table on a log-spaced grid (for serialization
    /// of derived moduli).
    Modulus sampled_table(int n) const {
        std::vector<double> t(n), w(n);
        for (int i = 0; i < n; ++i) {
            t[i] = a_ * std::pow(10.0, -8.0 * (n - 1.0 - i) / (n - 1.0));
            w[i] = eval_unchecked(t[i]);
        }
        // enforce monotonicity against evaluator noise
        for (int i = 1; i < n; ++i) w[i] = std::max(w[i], w[i - 1]);
        return table(std::move(t), std::move(w));
    }

private:
    static double check_right_end(double a) {
        if (!(a > 0.0)) throw invalid_input("Modulus: right end must be positive");
        return a;
    }

    double eval_unchecked(double t) const {
        switch (kind_) {
            case Kind::zero:
                return 0.0;
            case Kind::power:
                return t == 0.0 ? 0.0 : coef_ * std::pow(t, alpha_);
            case Kind::log_power:
                return t == 0.0 ? 0.0 : coef_ * std::pow(1.0 - std::log(t), -gamma_);
            case Kind::power_log:
                return t == 0.0 ? 0.0
                                : coef_ * std::pow(t, alpha_) * std::pow(1.0 - std::log(t), -gamma_);
            case Kind::table: {
                const auto& ts = *ts_;
                const auto& ws = *ws_;
                auto it = std::upper_bound(ts.begin(), ts.end(), t);
                if (it == ts.begin()) return ws.front();
                if (it == ts.end()) return ws.back();
                std::size_t i = static_cast<std::size_t>(it - ts.begin());
                double lambda = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
                return ws[i - 1] + lambda * (ws[i] - ws[i - 1]);
            }
            case Kind::derived:
                return t == 0.0 ? 0.0 : (*eval_)(t);
        }
        return 0.0;
    }

    Kind kind_ = Kind::zero;
    double a_ = 1.0;
    double alpha_ = 0.0, gamma_ = 0.0, coef_ = 1.0;
    std::shared_ptr<std::vector<double>> ts_, ws_;
    std::shared_ptr<std::function<double(double)>> eval_;
    std::string label_;
};

}  // namespace dinireg
