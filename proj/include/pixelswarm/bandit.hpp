#pragma once

// Arm selection policies for the Curriculum Manager.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <json.hpp>

#include "rng.hpp"

namespace pixelswarm {

enum class Algorithm { TS, UCB1, EpsGreedy };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::TS: return "ts";
        case Algorithm::UCB1: return "ucb1";
        case Algorithm::EpsGreedy: return "eps";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
    if (s == "ts") return Algorithm::TS;
    if (s == "ucb1") return Algorithm::UCB1;
    if (s == "eps") return Algorithm::EpsGreedy;
    throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (expected ts|ucb1|eps)");
}

namespace detail {
inline void check_reward(double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("bandit update: reward must lie in [0,1]");
}
inline void check_arm(int arm, std::size_t k) {
    if (arm < 0 || static_cast<std::size_t>(arm) >= k) throw std::out_of_range("bandit: arm index out of range");
}
}  // namespace detail

class ThompsonSampling {
public:
    explicit ThompsonSampling(int num_arms, double alpha0 = 1.0, double beta0 = 1.0)
        : alpha0_(alpha0), beta0_(beta0) {
        if (num_arms < 1) throw std::invalid_argument("ThompsonSampling: need at least one arm");
        if (!(alpha0 > 0.0 && beta0 > 0.0)) throw std::invalid_argument("ThompsonSampling: priors must be > 0");
        alpha_.assign(static_cast<std::size_t>(num_arms), alpha0);
        beta_.assign(static_cast<std::size_t>(num_arms), beta0);
        pulls_.assign(static_cast<std::size_t>(num_arms), 0);
    }

    int num_arms() const noexcept { return static_cast<int>(alpha_.size()); }

    /// One Beta draw per arm, in arm order; first maximum wins.
    template <class Urbg>
    int select(Urbg& rng) const {
        int best = 0;
        double best_val = -1.0;
        for (std::size_t k = 0; k < alpha_.size(); ++k) {
            const double theta = sample_beta(rng, alpha_[k], beta_[k]);
            if (theta > best_val) {
                best_val = theta;
                best = static_cast<int>(k);
            }
        }
        return best;
    }

    void update(int arm, double r) {
        detail::check_arm(arm, alpha_.size());
        detail::check_reward(r);
        const auto k = static_cast<std::size_t>(arm);
        alpha_[k] += r;
        beta_[k] += 1.0 - r;
        pulls_[k] += 1;
    }

    double alpha(int arm) const { return alpha_.at(static_cast<std::size_t>(arm)); }
    double beta(int arm) const { return beta_.at(static_cast<std::size_t>(arm)); }
    double alpha0() const noexcept { return alpha0_; }
    double beta0() const noexcept { return beta0_; }
    double posterior_mean(int arm) const { return alpha(arm) / (alpha(arm) + beta(arm)); }
    const std::vector<std::int64_t>& pulls() const noexcept { return pulls_; }

private:
    double alpha0_;
    double beta0_;
    std::vector<double> alpha_;
    std::vector<double> beta_;
    std::vector<std::int64_t> pulls_;
};

/// Incremental per-arm means shared by UCB1 and epsilon-greedy.
class EmpiricalMeans {
public:
    explicit EmpiricalMeans(int num_arms) {
        if (num_arms < 1) throw std::invalid_argument("bandit: need at least one arm");
        mean_.assign(static_cast<std::size_t>(num_arms), 0.0);
        pulls_.assign(static_cast<std::size_t>(num_arms), 0);
    }

    int num_arms() const noexcept { return static_cast<int>(mean_.size()); }

    void update(int arm, double r) {
        detail::check_arm(arm, mean_.size());
        detail::check_reward(r);
        const auto k = static_cast<std::size_t>(arm);
        pulls_[k] += 1;
        mean_[k] += (r - mean_[k]) / static_cast<double>(pulls_[k]);
        total_ += 1;
    }

    double mean(int arm) const { return mean_.at(static_cast<std::size_t>(arm)); }
    const std::vector<std::int64_t>& pulls() const noexcept { return pulls_; }
    std::int64_t total_pulls() const noexcept { return total_; }

    int greedy_arm() const {
        int best = 0;
        for (std::size_t k = 1; k < mean_.size(); ++k)
            if (mean_[k] > mean_[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
        return best;
    }

protected:
    std::vector<double> mean_;
    std::vector<std::int64_t> pulls_;
    std::int64_t total_ = 0;
};

class Ucb1 : public EmpiricalMeans {
public:
    using EmpiricalMeans::EmpiricalMeans;

    /// Untried arms first in index order, then argmax of mean + sqrt(2 ln t / n).
    int select() const {
        for (std::size_t k = 0; k < pulls_.size(); ++k)
            if (pulls_[k] == 0) return static_cast<int>(k);
        const double log_t = std::log(static_cast<double>(total_));
        int best = 0;
        double best_val = -1.0;
        for (std::size_t k = 0; k < mean_.size(); ++k) {
            const double v = mean_[k] + std::sqrt(2.0 * log_t / static_cast<double>(pulls_[k]));
            if (v > best_val) {
                best_val = v;
                best = static_cast<int>(k);
            }
        }
        return best;
    }

    template <class Urbg>
    int select(Urbg&) const {
        return select();
    }
};

class EpsGreedy : public EmpiricalMeans {
public:
    explicit EpsGreedy(int num_arms, double epsilon = 0.1) : EmpiricalMeans(num_arms), epsilon_(epsilon) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("EpsGreedy: epsilon must be in [0,1]");
    }

    template <class Urbg>
    int select(Urbg& rng) const {
        CounterRng local(rng());
        if (local.uniform() < epsilon_) {
            const auto k = static_cast<std::uint64_t>(mean_.size());
            return static_cast<int>(std::uniform_int_distribution<std::uint64_t>(0, k - 1)(local));
        }
        return greedy_arm();
    }

    double epsilon() const noexcept { return epsilon_; }

private:
    double epsilon_;
};

using BanditState = std::variant<ThompsonSampling, Ucb1, EpsGreedy>;

struct BanditOptions {
    int num_arms = 8;
    double alpha0 = 1.0;
    double beta0 = 1.0;
    double epsilon = 0.1;
};

inline BanditState make_bandit(Algorithm algo, const BanditOptions& opt = {}) {
    switch (algo) {
        case Algorithm::TS: return ThompsonSampling(opt.num_arms, opt.alpha0, opt.beta0);
        case Algorithm::UCB1: return Ucb1(opt.num_arms);
        case Algorithm::EpsGreedy: return EpsGreedy(opt.num_arms, opt.epsilon);
    }
    throw std::invalid_argument("make_bandit: unknown algorithm");
}

template <class Urbg>
int bandit_select(const BanditState& state, Urbg& rng) {
    return std::visit([&rng](const auto& b) { return b.select(rng); }, state);
}

inline void bandit_update(BanditState& state, int arm, double r) {
    std::visit([&](auto& b) { b.update(arm, r); }, state);
}

inline const std::vector<std::int64_t>& bandit_pulls(const BanditState& state) {
    return std::visit([](const auto& b) -> const std::vector<std::int64_t>& { return b.pulls(); }, state);
}

/// Posterior mean for TS, empirical mean otherwise.
inline double bandit_value(const BanditState& state, int arm) {
    return std::visit(
        [arm](const auto& b) {
            if constexpr (std::is_same_v<std::decay_t<decltype(b)>, ThompsonSampling>)
                return b.posterior_mean(arm);
            else
                return b.mean(arm);
        },
        state);
}

inline int best_arm(const BanditState& state) {
    const int k = std::visit([](const auto& b) { return b.num_arms(); }, state);
    int best = 0;
    for (int a = 1; a < k; ++a)
        if (bandit_value(state, a) > bandit_value(state, best)) best = a;
    return best;
}

struct ArmPosterior {
    double alpha = 1.0;
    double beta = 1.0;
    double mean = 0.5;
    double ci_low = 0.0;
    double ci_high = 1.0;
};

/// Equal-tailed 95% credible interval from the Beta quantiles.
inline ArmPosterior arm_posterior(double alpha, double beta) {
    boost::math::beta_distribution<double> dist(alpha, beta);
    return {alpha, beta, alpha / (alpha + beta), boost::math::quantile(dist, 0.025),
            boost::math::quantile(dist, 0.975)};
}

inline nlohmann::json posterior_snapshot(const ThompsonSampling& ts, std::int64_t tick) {
    nlohmann::json arms = nlohmann::json::array();
    for (int k = 0; k < ts.num_arms(); ++k) {
        const auto p = arm_posterior(ts.alpha(k), ts.beta(k));
        arms.push_back({{"arm", k},
                        {"alpha", p.alpha},
                        {"beta", p.beta},
                        {"mean", p.mean},
                        {"ci95", {p.ci_low, p.ci_high}},
                        {"pulls", ts.pulls()[static_cast<std::size_t>(k)]}});
    }
    return {{"tick", tick}, {"arms", arms}};
}

}  // namespace pixelswarm
