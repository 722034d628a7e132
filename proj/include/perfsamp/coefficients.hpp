#ifndef PERFSAMP_COEFFICIENTS_HPP
#define PERFSAMP_COEFFICIENTS_HPP

/** @file
 * Coefficient sequences of binary linear kernels
 *
 *   p(g | w) = 1/2 + (g/2) * sum_{k>=1} theta_k w_{-k},   sum_k |theta_k| = 1,
 *
 * their tails and support structure, and the uniqueness classifier.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace perfsamp {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NormalizationError : ModelError {
    using ModelError::ModelError;
};
struct EmptySupportError : ModelError {
    using ModelError::ModelError;
};
struct ParameterError : ModelError {
    using ModelError::ModelError;
};
struct GcdError : ModelError {
    using ModelError::ModelError;
};

/// Tolerance on sum |theta_k| = 1 for user-supplied finite vectors.
inline constexpr double normalization_tolerance = 1e-12;

/// Largest lag ever returned by a sampler; heavier draws are saturated here.
inline constexpr std::int64_t max_representable_lag = std::int64_t{1} << 62;

/// Periodic sign assignment sign(theta_k) = pattern[(k-1) mod P].
class SignPattern {
public:
    SignPattern() : signs_{1} {}

    explicit SignPattern(std::vector<int> signs) : signs_(std::move(signs))
    {
        if (signs_.empty())
            throw ParameterError("sign pattern must be nonempty");
        for (int s : signs_)
            if (s != 1 && s != -1)
                throw ParameterError("sign pattern entries must be +1 or -1");
    }

    int at_lag(std::int64_t k) const
    {
        return signs_[static_cast<std::size_t>((k - 1) % static_cast<std::int64_t>(signs_.size()))];
    }

    std::size_t period() const { return signs_.size(); }
    const std::vector<int>& signs() const { return signs_; }

    bool operator==(const SignPattern&) const = default;

private:
    std::vector<int> signs_;
};

enum class Family { finite, geometric, power_law };

namespace detail {

/// sum_{m>=k} m^{-alpha} by Euler-Maclaurin, accurate for large k.
inline double power_tail_asymptotic(double alpha, double k)
{
    // B_{2j} / (2j)!
    constexpr double coef[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0};
    const double base = std::pow(k, -alpha);
    double sum = base * k / (alpha - 1.0) + 0.5 * base;
    double rising = alpha;     // alpha (alpha+1) ... (alpha+2j-2)
    double power = base / k;   // k^{-alpha-2j+1}
    for (int j = 0; j < 4; ++j) {
        sum += coef[j] * rising * power;
        rising *= (alpha + 2 * j + 1) * (alpha + 2 * j + 2);
        power /= k * k;
    }
    return sum;
}

/// Unnormalized suffix sums of k^{-alpha}: exact summation up to
/// direct_terms, Euler-Maclaurin remainder beyond.
class PowerLawTable {
public:
    static constexpr std::int64_t direct_terms = std::int64_t{1} << 20;

    explicit PowerLawTable(double alpha) : alpha_(alpha), raw_(direct_terms + 2)
    {
        raw_[direct_terms + 1] = power_tail_asymptotic(alpha, static_cast<double>(direct_terms + 1));
        for (std::int64_t k = direct_terms; k >= 1; --k)
            raw_[k] = raw_[k + 1] + std::pow(static_cast<double>(k), -alpha);
        raw_[0] = raw_[1];
    }

    double zeta() const { return raw_[1]; }

    double raw_tail(std::int64_t k) const
    {
        if (k <= direct_terms + 1)
            return raw_[static_cast<std::size_t>(k)];
        return power_tail_asymptotic(alpha_, static_cast<double>(k));
    }

private:
    double alpha_;
    std::vector<double> raw_;
};

inline void require_lag(std::int64_t k)
{
    if (k < 1)
        throw std::invalid_argument("lag must be >= 1");
}

} // namespace detail

/**
 * A normalized coefficient sequence. Instances are only obtainable through
 * the validating factories, so every live model satisfies sum |theta_k| = 1
 * (to normalization_tolerance for finite vectors, exactly otherwise).
 */
class CoefficientModel {
public:
    /// theta_1..theta_m. Throws EmptySupportError / NormalizationError / ParameterError.
    static CoefficientModel finite(std::vector<double> theta)
    {
        for (double t : theta)
            if (!std::isfinite(t))
                throw ParameterError("coefficients must be finite numbers");
        std::int64_t last = 0;
        double total = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (theta[i] != 0.0)
                last = static_cast<std::int64_t>(i) + 1;
            total += std::abs(theta[i]);
        }
        if (last == 0)
            throw EmptySupportError("coefficient vector has empty support");
        if (std::abs(total - 1.0) > normalization_tolerance) {
            std::ostringstream os;
            os.precision(17);
            os << "sum |theta_k| = " << total << " differs from 1";
            throw NormalizationError(os.str());
        }
        CoefficientModel m(Family::finite);
        theta.resize(static_cast<std::size_t>(last));
        m.theta_ = std::move(theta);
        m.max_lag_ = last;
        m.suffix_.assign(m.theta_.size() + 1, 0.0);
        for (std::size_t i = m.theta_.size(); i-- > 0;)
            m.suffix_[i] = m.suffix_[i + 1] + std::abs(m.theta_[i]);
        m.prefix_.assign(m.theta_.size(), 0.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < m.theta_.size(); ++i)
            m.prefix_[i] = (acc += std::abs(m.theta_[i]));
        return m;
    }

    /// |theta_k| = (1-q) q^{k-1}.
    static CoefficientModel geometric(double q, SignPattern signs = {})
    {
        if (!(q > 0.0 && q < 1.0))
            throw ParameterError("geometric ratio q must lie in (0,1)");
        CoefficientModel m(Family::geometric);
        m.q_ = q;
        m.signs_ = std::move(signs);
        return m;
    }

    /// |theta_k| = k^{-alpha} / zeta(alpha).
    static CoefficientModel power_law(double alpha, SignPattern signs = {})
    {
        if (!(alpha > 1.0) || !std::isfinite(alpha))
            throw ParameterError("power-law exponent alpha must exceed 1");
        CoefficientModel m(Family::power_law);
        m.alpha_ = alpha;
        m.signs_ = std::move(signs);
        m.table_ = std::make_shared<const detail::PowerLawTable>(alpha);
        return m;
    }

    Family family() const { return family_; }
    bool has_finite_support() const { return family_ == Family::finite; }

    /// Largest lag in the support; finite vectors only.
    std::int64_t max_lag() const
    {
        if (family_ != Family::finite)
            throw std::logic_error("max_lag: model has infinite support");
        return max_lag_;
    }

    const std::vector<double>& coefficients() const
    {
        if (family_ != Family::finite)
            throw std::logic_error("coefficients: model has infinite support");
        return theta_;
    }

    double q() const { return q_; }
    double alpha() const { return alpha_; }
    const SignPattern& sign_pattern() const { return signs_; }

    double abs_theta(std::int64_t k) const
    {
        detail::require_lag(k);
        switch (family_) {
        case Family::finite:
            return k <= max_lag_ ? std::abs(theta_[static_cast<std::size_t>(k - 1)]) : 0.0;
        case Family::geometric:
            return (1.0 - q_) * std::pow(q_, static_cast<double>(k - 1));
        case Family::power_law:
            return std::pow(static_cast<double>(k), -alpha_) / table_->zeta();
        }
        return 0.0;
    }

    int sign_theta(std::int64_t k) const
    {
        detail::require_lag(k);
        if (family_ == Family::finite) {
            if (k > max_lag_)
                return 0;
            const double t = theta_[static_cast<std::size_t>(k - 1)];
            return (t > 0.0) - (t < 0.0);
        }
        return signs_.at_lag(k);
    }

    double theta(std::int64_t k) const { return sign_theta(k) * abs_theta(k); }

    /// T(k) = sum_{m>=k} |theta_m|.
    double tail(std::int64_t k) const
    {
        detail::require_lag(k);
        switch (family_) {
        case Family::finite:
            return k <= max_lag_ ? suffix_[static_cast<std::size_t>(k - 1)] : 0.0;
        case Family::geometric:
            return std::pow(q_, static_cast<double>(k - 1));
        case Family::power_law:
            return table_->raw_tail(k) / table_->zeta();
        }
        return 0.0;
    }

    /// sum_{m<=k} |theta_m|, computed without cancellation for finite vectors.
    double cdf(std::int64_t k) const
    {
        if (k < 1)
            return 0.0;
        if (family_ == Family::finite)
            return prefix_[static_cast<std::size_t>(std::min(k, max_lag_) - 1)];
        return 1.0 - tail(k + 1);
    }

    /// Smallest k with T(k) < eps.
    std::int64_t tail_horizon(double eps) const
    {
        if (family_ == Family::finite)
            return max_lag_ + 1;
        std::int64_t hi = 1;
        while (!(tail(hi) < eps)) {
            if (hi >= max_representable_lag / 2)
                return max_representable_lag;
            hi *= 2;
        }
        std::int64_t lo = hi / 2; // tail(lo) >= eps, or lo == 0
        while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            (tail(mid) < eps ? hi : lo) = mid;
        }
        return hi;
    }

    std::string describe() const
    {
        std::ostringstream os;
        switch (family_) {
        case Family::finite:
            os << "finite(";
            for (std::size_t i = 0; i < theta_.size(); ++i)
                os << (i ? ", " : "") << theta_[i];
            os << ")";
            return os.str();
        case Family::geometric:
            os << "geometric(q=" << q_;
            break;
        case Family::power_law:
            os << "powerlaw(alpha=" << alpha_;
            break;
        }
        os << ", signs=";
        for (int s : signs_.signs())
            os << (s > 0 ? '+' : '-');
        os << ")";
        return os.str();
    }

private:
    explicit CoefficientModel(Family f) : family_(f) {}

    Family family_;
    std::vector<double> theta_;
    std::vector<double> suffix_;
    std::vector<double> prefix_;
    std::int64_t max_lag_ = 0;
    double q_ = 0.0;
    double alpha_ = 0.0;
    SignPattern signs_;
    std::shared_ptr<const detail::PowerLawTable> table_;
};

/// Re-checks the model invariants; throws the same errors as the factories.
inline void validate(const CoefficientModel& model)
{
    switch (model.family()) {
    case Family::finite:
        (void)CoefficientModel::finite(model.coefficients());
        break;
    case Family::geometric:
        (void)CoefficientModel::geometric(model.q(), model.sign_pattern());
        break;
    case Family::power_law:
        if (!(model.alpha() > 1.0))
            throw ParameterError("power-law exponent alpha must exceed 1");
        break;
    }
}

/**
 * Kernel with a constant bias term theta_0 / 2 and lag mass r_0 < 1:
 *
 *   p(g | w) = 1/2 + (g/2) (theta_0 + r_0 sum_k theta_k w_{-k})
 *
 * where theta_k are the coefficients of the normalized @ref base.
 */
struct BiasedModel {
    CoefficientModel base;
    double lag_mass;  ///< r_0
    double bias;      ///< theta_0

    BiasedModel(CoefficientModel base_model, double r0, double theta0)
        : base(std::move(base_model)), lag_mass(r0), bias(theta0)
    {
        if (!(r0 >= 0.0 && r0 < 1.0))
            throw ParameterError("biased model requires 0 <= r_0 < 1");
        if (!(theta0 >= -1.0 && theta0 <= 1.0))
            throw ParameterError("bias theta_0 must lie in [-1,1]");
        if (r0 + std::abs(theta0) > 1.0 + normalization_tolerance)
            throw ParameterError("biased model requires r_0 + |theta_0| <= 1");
    }

    /// P(U = +1) for the terminal sign of a stuck particle.
    double stuck_plus_probability() const
    {
        const double p = (1.0 - lag_mass + bias) / (2.0 * (1.0 - lag_mass));
        return std::clamp(p, 0.0, 1.0);
    }
};

// ---------------------------------------------------------------------------
// Support structure and classification

/// gcd of the support {k : theta_k != 0}; 1 for the full-support families.
inline std::int64_t support_gcd(const CoefficientModel& model)
{
    if (!model.has_finite_support())
        return 1;
    std::int64_t g = 0;
    const auto& theta = model.coefficients();
    for (std::size_t i = 0; i < theta.size(); ++i)
        if (theta[i] != 0.0)
            g = std::gcd(g, static_cast<std::int64_t>(i) + 1);
    return g;
}

namespace detail {

/// Lags whose signs determine every sign-based property: the whole support
/// of a finite vector, or 1..2P for a periodic pattern of period P.
inline std::int64_t sign_inspection_horizon(const CoefficientModel& model)
{
    if (model.has_finite_support())
        return model.max_lag();
    return 2 * static_cast<std::int64_t>(model.sign_pattern().period());
}

} // namespace detail

/// Which lags certify the sign condition (0 when absent).
struct SignConditionWitness {
    bool holds = false;
    std::int64_t even_negative = 0;
    std::int64_t odd_negative = 0;
    std::int64_t odd_positive = 0;

    std::string describe() const
    {
        std::ostringstream os;
        if (even_negative)
            os << "even lag " << even_negative << " negative";
        else if (holds)
            os << "odd lag " << odd_negative << " negative, odd lag " << odd_positive << " positive";
        else
            os << "no even negative lag and no mixed-sign odd lags";
        return os.str();
    }
};

inline SignConditionWitness sign_condition_witness(const CoefficientModel& model)
{
    SignConditionWitness w;
    const std::int64_t horizon = detail::sign_inspection_horizon(model);
    for (std::int64_t k = 1; k <= horizon; ++k) {
        const int s = model.sign_theta(k);
        if (k % 2 == 0) {
            if (s < 0 && !w.even_negative)
                w.even_negative = k;
        } else if (s < 0 && !w.odd_negative) {
            w.odd_negative = k;
        } else if (s > 0 && !w.odd_positive) {
            w.odd_positive = k;
        }
    }
    w.holds = w.even_negative || (w.odd_negative && w.odd_positive);
    return w;
}

/// Some even lag is negative, or odd lags of both signs exist.
inline bool check_condition_ii(const CoefficientModel& model)
{
    return sign_condition_witness(model).holds;
}

/// sum_k T(k)^2 < infinity, decided analytically per family.
inline bool check_condition_iii(const CoefficientModel& model)
{
    switch (model.family()) {
    case Family::finite:
    case Family::geometric:
        return true;
    case Family::power_law:
        return model.alpha() > 1.5;
    }
    return false;
}

enum class VerdictKind {
    non_unique_gcd,
    non_unique_coherent_constant,
    non_unique_coherent_checkerboard,
    non_unique_reduced_coherent,
    unique,
    undetermined,
};

struct ClassificationVerdict {
    VerdictKind kind = VerdictKind::undetermined;
    std::int64_t gcd = 1;
    /// Verdict of theta*_k = theta_{k gcd} when gcd > 1.
    std::shared_ptr<const ClassificationVerdict> reduced;
    SignConditionWitness sign_condition;
    bool tail_condition = false;
    Family family = Family::finite;
    double alpha = 0.0;

    bool is_unique() const { return kind == VerdictKind::unique; }
    bool is_non_unique() const
    {
        return kind != VerdictKind::unique && kind != VerdictKind::undetermined;
    }

    std::string tail_evidence() const
    {
        std::ostringstream os;
        switch (family) {
        case Family::finite:
            return "finite support";
        case Family::geometric:
            return "geometric tails";
        case Family::power_law:
            os << "power-law alpha=" << alpha << (tail_condition ? " > 3/2" : " <= 3/2");
            return os.str();
        }
        return {};
    }

    /// One-line verdict.
    std::string headline() const
    {
        std::ostringstream os;
        switch (kind) {
        case VerdictKind::non_unique_gcd:
        case VerdictKind::non_unique_reduced_coherent:
            os << "NonUnique: gcd = " << gcd;
            break;
        case VerdictKind::non_unique_coherent_constant:
            os << "NonUnique: coherent constant configurations";
            break;
        case VerdictKind::non_unique_coherent_checkerboard:
            os << "NonUnique: coherent checkerboard configurations";
            break;
        case VerdictKind::unique:
            os << "Unique (i: gcd=" << gcd << "; ii: " << sign_condition.describe()
               << "; iii: " << tail_evidence() << ")";
            break;
        case VerdictKind::undetermined:
            os << "Undetermined (i: gcd=" << gcd << "; ii: " << sign_condition.describe()
               << "; iii fails: " << tail_evidence() << ")";
            break;
        }
        return os.str();
    }
};

inline const char* to_string(VerdictKind kind)
{
    switch (kind) {
    case VerdictKind::non_unique_gcd: return "NonUniqueGcd";
    case VerdictKind::non_unique_coherent_constant: return "NonUniqueCoherentConstant";
    case VerdictKind::non_unique_coherent_checkerboard: return "NonUniqueCoherentCheckerboard";
    case VerdictKind::non_unique_reduced_coherent: return "NonUniqueReducedCoherent";
    case VerdictKind::unique: return "Unique";
    case VerdictKind::undetermined: return "Undetermined";
    }
    return "?";
}

/// theta*_k = theta_{k * step}; finite vectors only.
inline CoefficientModel reduce_by_gcd(const CoefficientModel& model, std::int64_t step)
{
    const auto& theta = model.coefficients();
    std::vector<double> reduced;
    for (std::int64_t k = step; k <= model.max_lag(); k += step)
        reduced.push_back(theta[static_cast<std::size_t>(k - 1)]);
    return CoefficientModel::finite(std::move(reduced));
}

/**
 * Uniqueness verdict. With gcd > 1 the kernel is never unique; the reduced
 * sequence is classified for information and, when it is itself coherent,
 * the verdict is reported as NonUniqueReducedCoherent. With gcd = 1, the two
 * coherent sign structures (all theta_k >= 0; or odd lags <= 0 and even
 * lags >= 0) give nonuniqueness; otherwise uniqueness follows when the tail
 * condition also holds.
 */
inline ClassificationVerdict classify(const CoefficientModel& model)
{
    ClassificationVerdict v;
    v.family = model.family();
    v.alpha = model.alpha();
    v.gcd = support_gcd(model);
    v.sign_condition = sign_condition_witness(model);
    v.tail_condition = check_condition_iii(model);

    if (v.gcd > 1) {
        auto sub = std::make_shared<ClassificationVerdict>(classify(reduce_by_gcd(model, v.gcd)));
        const bool coherent = sub->kind == VerdictKind::non_unique_coherent_constant ||
                              sub->kind == VerdictKind::non_unique_coherent_checkerboard;
        v.kind = coherent ? VerdictKind::non_unique_reduced_coherent : VerdictKind::non_unique_gcd;
        v.reduced = std::move(sub);
        return v;
    }

    const std::int64_t horizon = detail::sign_inspection_horizon(model);
    bool all_nonnegative = true;
    bool checkerboard = true;
    for (std::int64_t k = 1; k <= horizon; ++k) {
        const int s = model.sign_theta(k);
        if (s < 0)
            all_nonnegative = false;
        if ((k % 2 == 1 && s > 0) || (k % 2 == 0 && s < 0))
            checkerboard = false;
    }
    if (all_nonnegative)
        v.kind = VerdictKind::non_unique_coherent_constant;
    else if (checkerboard)
        v.kind = VerdictKind::non_unique_coherent_checkerboard;
    else
        v.kind = v.tail_condition ? VerdictKind::unique : VerdictKind::undetermined;
    return v;
}

/// A periodic ±1 configuration s_n = period[n mod |period|] and the number
/// of (site, lag) pairs on which coherence was verified.
struct CoherentConfiguration {
    std::vector<int> period;
    std::size_t pairs_checked = 0;
};

namespace detail {

inline bool is_coherent(const CoefficientModel& model, const std::vector<int>& period,
                        std::size_t& pairs_checked)
{
    const auto p = static_cast<std::int64_t>(period.size());
    const std::int64_t horizon = sign_inspection_horizon(model);
    pairs_checked = 0;
    for (std::int64_t n = 0; n < p; ++n) {
        for (std::int64_t k = 1; k <= horizon; ++k) {
            const int s = model.sign_theta(k);
            if (s == 0)
                continue;
            const auto back = static_cast<std::size_t>(((n - k) % p + p) % p);
            ++pairs_checked;
            if (period[static_cast<std::size_t>(n)] * period[back] * s <= 0)
                return false;
        }
    }
    return true;
}

} // namespace detail

/**
 * The constant and checkerboard configurations coherent with the model,
 * i.e. s_n s_{n-k} theta_k > 0 for every support lag k. For gcd = 1 these
 * are the only coherent configurations.
 */
inline std::vector<CoherentConfiguration> coherent_configurations(const CoefficientModel& model)
{
    if (const auto g = support_gcd(model); g > 1)
        throw GcdError("coherent_configurations requires gcd 1 (got " + std::to_string(g) +
                       "); reduce the model first");
    const std::vector<std::vector<int>> candidates = {{1}, {-1}, {1, -1}, {-1, 1}};
    std::vector<CoherentConfiguration> out;
    for (const auto& c : candidates) {
        std::size_t checked = 0;
        if (detail::is_coherent(model, c, checked))
            out.push_back({c, checked});
    }
    return out;
}

} // namespace perfsamp

#endif // PERFSAMP_COEFFICIENTS_HPP
