#pragma once

#include <span>
#include <vector>

namespace warnsim::dissemination {

/// Inputs of the exponential utility. Lower utility marks a better relay.
struct UtilityInputs {
  double df = 0.0;      // distance factor, [0,1]
  double lqf = 0.0;     // link-quality factor, [0,1]
  double alpha1 = 6.0;  // weight of df
  double alpha2 = 4.0;  // weight of lqf; alpha1 + alpha2 = 10
};

enum class GameMechanism { VolunteerDilemma, ForwardingGame };

struct GameConfig {
  GameMechanism mechanism = GameMechanism::VolunteerDilemma;
  double cost_k = 1.0;
  double fg_benefit = 2.0;
  double fg_cost = 1.0;
  double fg_tol = 1e-6;
  int fg_max_iters = 100;

  void validate() const;
};

/// Distance factor of a receiver `d_sr` meters from the sender and `d_rint`
/// meters from its nearest intersection:
///   d_rint >  r_max : d_sr / r_max
///   d_rint <= r_max : 1 - d_rint / (d_rint + 1)
/// Throws std::invalid_argument when d_sr lies outside [0, r_max].
double distance_factor(double d_sr, double d_rint, double r_max);

/// 10^(10 - (alpha1 * df + alpha2 * lqf)).
double utility(const UtilityInputs& in);

/// Asymmetric volunteer's dilemma forwarding probability: 1 for a sole
/// candidate or when u <= cost_k, otherwise (cost_k / u)^(n_candidates - 1).
double vod_forward_probability(double u, int n_candidates, double cost_k);

/// Player availability: 0.5 * d_sr / r_max + 0.5 * abe_norm.
double availability(double d_sr, double r_max, double abe_norm);

struct ForwardingGameResult {
  std::vector<double> p;
  bool converged = true;
  int iterations = 0;
};

/// Mixed equilibrium of the forwarding game. A player forwarding earns
/// benefit * a_i - cost; staying silent earns benefit * a_i * q_-i where
/// q_-i = 1 - prod_{j != i} (1 - p_j). Players with benefit * a_i <= cost
/// never forward; the others are made indifferent on the widest feasible
/// support (strongest players first).
ForwardingGameResult forwarding_game_equilibrium(std::span<const double> avails,
                                                 const GameConfig& cfg);

/// Payoff advantage of forwarding for player i under profile p
/// (positive means forwarding is strictly better).
double forwarding_advantage(std::span<const double> avails, std::span<const double> p,
                            std::size_t i, const GameConfig& cfg);

}  // namespace warnsim::dissemination
