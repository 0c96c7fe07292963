#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "warnsim/dissemination/games.hpp"

namespace warnsim::dissemination {

void GameConfig::validate() const {
  if (!(cost_k > 0.0)) throw std::invalid_argument("game.cost_k must be positive");
  if (!(fg_benefit > 0.0) || !(fg_cost > 0.0)) {
    throw std::invalid_argument("game.fg_benefit and game.fg_cost must be positive");
  }
  if (!(fg_cost < fg_benefit)) throw std::invalid_argument("game.fg_cost must be below fg_benefit");
  if (!(fg_tol > 0.0)) throw std::invalid_argument("game.fg_tol must be positive");
  if (fg_max_iters < 1) throw std::invalid_argument("game.fg_max_iters must be at least 1");
}

double distance_factor(double d_sr, double d_rint, double r_max) {
  if (!(r_max > 0.0)) throw std::invalid_argument("r_max must be positive");
  if (!(d_sr >= 0.0) || d_sr > r_max) {
    throw std::invalid_argument("d_sr=" + std::to_string(d_sr) +
                                " outside [0, r_max]: receiver cannot hear the sender");
  }
  if (!(d_rint >= 0.0)) throw std::invalid_argument("d_rint must be non-negative");
  if (d_rint > r_max) return d_sr / r_max;
  return 1.0 - d_rint / (d_rint + 1.0);
}

double utility(const UtilityInputs& in) {
  if (!(in.df >= 0.0 && in.df <= 1.0)) throw std::invalid_argument("df must lie in [0, 1]");
  if (!(in.lqf >= 0.0 && in.lqf <= 1.0)) throw std::invalid_argument("lqf must lie in [0, 1]");
  if (std::abs(in.alpha1 + in.alpha2 - 10.0) > 1e-9) {
    throw std::invalid_argument("alpha1+alpha2 must equal 10");
  }
  return std::pow(10.0, 10.0 - (in.alpha1 * in.df + in.alpha2 * in.lqf));
}

double vod_forward_probability(double u, int n_candidates, double cost_k) {
  if (n_candidates < 1) throw std::invalid_argument("n_candidates must be at least 1");
  if (!(cost_k > 0.0)) throw std::invalid_argument("cost_k must be positive");
  if (!(u > 0.0)) throw std::invalid_argument("utility must be positive");
  if (n_candidates == 1 || u <= cost_k) return 1.0;
  const double p = std::pow(cost_k / u, static_cast<double>(n_candidates - 1));
  return std::clamp(p, 0.0, 1.0);
}

double availability(double d_sr, double r_max, double abe_norm) {
  if (!(r_max > 0.0)) throw std::invalid_argument("r_max must be positive");
  if (!(d_sr >= 0.0) || d_sr > r_max) throw std::invalid_argument("d_sr outside [0, r_max]");
  if (!(abe_norm >= 0.0 && abe_norm <= 1.0)) throw std::invalid_argument("abe_norm outside [0, 1]");
  return 0.5 * (d_sr / r_max) + 0.5 * abe_norm;
}

double forwarding_advantage(std::span<const double> avails, std::span<const double> p,
                            std::size_t i, const GameConfig& cfg) {
  double silent_others = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j != i) silent_others *= 1.0 - p[j];
  }
  const double q_others = 1.0 - silent_others;
  const double forward = cfg.fg_benefit * avails[i] - cfg.fg_cost;
  const double stay = cfg.fg_benefit * avails[i] * q_others;
  return forward - stay;
}

ForwardingGameResult forwarding_game_equilibrium(std::span<const double> avails,
                                                 const GameConfig& cfg) {
  cfg.validate();
  if (avails.empty()) throw std::invalid_argument("forwarding game needs at least one player");
  for (double a : avails) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("availability outside [0, 1]");
  }
  ForwardingGameResult res;
  res.p.assign(avails.size(), 0.0);

  // Players that can profit from forwarding, strongest (lowest ratio) first.
  // ratio_i = cost / (benefit * a_i) is the silent-probability of the others
  // that leaves player i indifferent.
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < avails.size(); ++i) {
    if (cfg.fg_benefit * avails[i] > cfg.fg_cost) active.push_back(i);
  }
  const auto ratio = [&](std::size_t i) { return cfg.fg_cost / (cfg.fg_benefit * avails[i]); };
  std::stable_sort(active.begin(), active.end(),
                   [&](std::size_t a, std::size_t b) { return ratio(a) < ratio(b); });

  if (active.empty()) return res;
  if (active.size() == 1) {
    res.p[active.front()] = 1.0;
    res.iterations = 1;
    return res;
  }

  // Shrink the support from the weakest end until the indifference
  // solution is a proper mixed profile: prod_S (1 - p_j) <= min ratio.
  const double min_ratio = ratio(active.front());
  bool found = false;
  for (std::size_t m = active.size(); m >= 2; --m) {
    ++res.iterations;
    if (res.iterations > cfg.fg_max_iters) break;
    double log_sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) log_sum += std::log(ratio(active[k]));
    const double log_silent = log_sum / static_cast<double>(m - 1);
    if (log_silent > std::log(min_ratio) + 1e-12) continue;
    std::fill(res.p.begin(), res.p.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double l_i = log_silent - std::log(ratio(active[k]));
      res.p[active[k]] = std::clamp(1.0 - std::exp(l_i), 0.0, 1.0);
    }
    found = true;
    break;
  }
  if (!found) {
    res.converged = false;
    return res;
  }
  // Verify the mutual best response: mixing players are indifferent, silent ones
  // do not gain by forwarding.
  for (std::size_t i = 0; i < avails.size(); ++i) {
    const double adv = forwarding_advantage(avails, res.p, i, cfg);
    const bool mixing = res.p[i] > 0.0 && res.p[i] < 1.0;
    if ((mixing && std::abs(adv) > cfg.fg_tol * std::max(1.0, cfg.fg_benefit)) ||
        (res.p[i] == 0.0 && adv > cfg.fg_tol)) {
      res.converged = false;
    }
  }
  return res;
}

}  // namespace warnsim::dissemination
