#include "cfront/pressure.hpp"

#include "cfront/errors.hpp"

#include <cmath>
#include <sstream>

namespace cfront {

namespace {

constexpr double kSeriesRadius = 0.5;
constexpr int kMaxSeriesTerms = 400;

std::string describe(const char* what, double v) {
    std::ostringstream os;
    os.precision(17);
    os << what << " (v = " << v << ")";
    return os.str();
}

void require_volume(double v, const char* where) {
    if (!(v > 1.0)) throw DomainError(describe(where, v), v);
}

// Neumaier's variant of compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

ModelParams::ModelParams(double epsilon, double gamma, double mu, double v_plus, double u_plus)
    : epsilon_(epsilon), gamma_(gamma), mu_(mu), v_plus_(v_plus), u_plus_(u_plus) {
    if (!(epsilon > 0.0)) throw UsageError("model.epsilon must be > 0");
    if (!(gamma >= 1.0)) throw UsageError("model.gamma must be >= 1");
    if (!(mu > 0.0)) throw UsageError("model.mu must be > 0");
    if (!(v_plus > 1.0)) throw UsageError("model.v_plus must be > 1");
    if (!std::isfinite(u_plus)) throw UsageError("model.u_plus must be finite");
    v_minus_ = 1.0 + std::pow(epsilon, 1.0 / gamma);
    if (!(v_minus_ < v_plus)) {
        std::ostringstream os;
        os << "v_minus = 1 + eps^(1/gamma) = " << v_minus_ << " is not below v_plus = " << v_plus
           << "; reduce model.epsilon";
        throw UsageError(os.str());
    }
}

double ModelParams::limit_speed() const noexcept { return 1.0 / std::sqrt(v_plus_ - 1.0); }

double pressure(double v, int k, const ModelParams& params) {
    if (k < 0 || k > 4) throw UsageError("pressure derivative order must be in 0..4");
    require_volume(v, "pressure evaluated at or below the congestion threshold");
    const double g = params.gamma();
    double coeff = params.epsilon();
    for (int j = 0; j < k; ++j) coeff *= -(g + j);
    return coeff * std::exp(-(g + k) * std::log(v - 1.0));
}

namespace detail {

double taylor_remainder(double t, double g) {
    if (!(t > -1.0)) throw DomainError(describe("Taylor remainder needs 1 + t > 0", 1.0 + t), 1.0 + t);
    if (g == 1.0) return t * t / (1.0 + t);
    if (g == 2.0) return t * t * (3.0 + 2.0 * t) / ((1.0 + t) * (1.0 + t));
    if (std::abs(t) > kSeriesRadius) return std::expm1(-g * std::log1p(t)) + g * t;

    // sum_{k>=2} binom(-g, k) t^k
    CompensatedSum sum;
    double coeff = 0.5 * g * (g + 1.0);
    double power = t * t;
    for (int k = 2; k < kMaxSeriesTerms; ++k) {
        const double term = coeff * power;
        sum.add(term);
        if (std::abs(term) <= 1e-18 * std::abs(sum.value())) break;
        coeff *= -(g + k) / (k + 1.0);
        power *= t;
    }
    return sum.value();
}

double taylor_remainder_slope(double a, double b, double g) {
    if (!(a > -1.0) || !(b > -1.0))
        throw DomainError("Taylor remainder needs 1 + t > 0", 1.0 + std::min(a, b));
    if (g == 1.0) return (a + b + a * b) / ((1.0 + a) * (1.0 + b));
    if (g == 2.0) {
        const double s = a + b;
        const double pm1 = s + a * b;  // (1+a)(1+b) - 1
        const double num = s * (3.0 + 2.0 * pm1) + 2.0 * a * b * (2.0 + pm1);
        const double den = (1.0 + a) * (1.0 + a) * (1.0 + b) * (1.0 + b);
        return num / den;
    }
    if (std::max(std::abs(a), std::abs(b)) > kSeriesRadius) {
        if (a == b) return g - g * std::exp(-(g + 1.0) * std::log1p(a));
        return (taylor_remainder(a, g) - taylor_remainder(b, g)) / (a - b);
    }
    // sum_{k>=2} binom(-g, k) (a^k - b^k)/(a - b), with
    // S_k = sum_{j<k} a^j b^(k-1-j) and S_{k+1} = a S_k + b^k.
    CompensatedSum sum;
    double coeff = 0.5 * g * (g + 1.0);
    double s_k = a + b;
    double b_pow = b * b;
    for (int k = 2; k < kMaxSeriesTerms; ++k) {
        const double term = coeff * s_k;
        sum.add(term);
        if (std::abs(term) <= 1e-18 * std::abs(sum.value()) && k > 3) break;
        coeff *= -(g + k) / (k + 1.0);
        s_k = a * s_k + b_pow;
        b_pow *= b;
    }
    return sum.value();
}

double log_remainder(double x) {
    if (!(x > -1.0)) throw DomainError(describe("log remainder needs 1 + x > 0", 1.0 + x), 1.0 + x);
    if (std::abs(x) > kSeriesRadius) return std::log1p(x) - x;
    CompensatedSum sum;
    double power = x * x;
    for (int k = 2; k < kMaxSeriesTerms; ++k) {
        const double term = ((k % 2 == 0) ? -1.0 : 1.0) * power / k;
        sum.add(term);
        if (std::abs(term) <= 1e-18 * std::abs(sum.value())) break;
        power *= x;
    }
    return sum.value();
}

double log_remainder_slope(double a, double b) {
    if (!(a > -1.0) || !(b > -1.0))
        throw DomainError("log remainder needs 1 + x > 0", 1.0 + std::min(a, b));
    if (std::max(std::abs(a), std::abs(b)) > kSeriesRadius) {
        if (a == b) return 1.0 / (1.0 + a) - 1.0;
        return (std::log1p((a - b) / (1.0 + b)) - (a - b)) / (a - b);
    }
    CompensatedSum sum;
    double s_k = a + b;
    double b_pow = b * b;
    for (int k = 2; k < kMaxSeriesTerms; ++k) {
        const double term = ((k % 2 == 0) ? -1.0 : 1.0) * s_k / k;
        sum.add(term);
        if (std::abs(term) <= 1e-18 * std::abs(sum.value()) && k > 3) break;
        s_k = a * s_k + b_pow;
        b_pow *= b;
    }
    return sum.value();
}

}  // namespace detail

double nonlinear_F(double f, double v_base, const ModelParams& params) {
    require_volume(v_base, "nonlinear_F reference volume at or below 1");
    require_volume(v_base + f, "nonlinear_F shifted volume at or below 1");
    const double t = f / (v_base - 1.0);
    return -pressure(v_base, 0, params) * detail::taylor_remainder(t, params.gamma());
}

double nonlinear_H(double f, double v_base, const ModelParams& /*params*/) {
    if (!(v_base > 0.0)) throw DomainError(describe("nonlinear_H needs v_base > 0", v_base), v_base);
    const double x = f / v_base;
    if (!(1.0 + x > 0.0)) throw DomainError(describe("nonlinear_H needs v_base + f > 0", v_base + f), v_base + f);
    return detail::log_remainder(x);
}

double nonlinear_F_diff(double f1, double f2, double v_base, const ModelParams& params) {
    require_volume(v_base, "nonlinear_F_diff reference volume at or below 1");
    require_volume(v_base + f1, "nonlinear_F_diff shifted volume at or below 1");
    require_volume(v_base + f2, "nonlinear_F_diff shifted volume at or below 1");
    if (f1 == f2) return 0.0;
    const double a = f1 / (v_base - 1.0);
    const double b = f2 / (v_base - 1.0);
    // (f1 - f2) is formed before scaling: a - b would carry the rounding of both quotients
    return -pressure(v_base, 0, params) * ((f1 - f2) / (v_base - 1.0)) * detail::taylor_remainder_slope(a, b, params.gamma());
}

double nonlinear_H_diff(double f1, double f2, double v_base, const ModelParams& /*params*/) {
    if (!(v_base > 0.0)) throw DomainError(describe("nonlinear_H_diff needs v_base > 0", v_base), v_base);
    if (!(v_base + f1 > 0.0)) throw DomainError(describe("nonlinear_H_diff needs v_base + f > 0", v_base + f1), v_base + f1);
    if (!(v_base + f2 > 0.0)) throw DomainError(describe("nonlinear_H_diff needs v_base + f > 0", v_base + f2), v_base + f2);
    if (f1 == f2) return 0.0;
    const double a = f1 / v_base;
    const double b = f2 / v_base;
    return ((f1 - f2) / v_base) * detail::log_remainder_slope(a, b);
}

}  // namespace cfront
