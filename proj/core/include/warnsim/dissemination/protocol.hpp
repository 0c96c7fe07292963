#pragma once

#include <span>
#include <string>
#include <string_view>

#include "warnsim/dissemination/games.hpp"
#include "warnsim/dissemination/timers.hpp"
#include "warnsim/radio/radio.hpp"
#include "warnsim/sim/rng.hpp"

namespace warnsim {

enum class Protocol {
  Gpsr,
  Mrp3,
  Mrp3Dsw,
  FloodingDistance,
  Jsf,
  Nsf,
  Njl,
  AddVod,
  AddFg,
  CtdQuery,
  CtdPassive,
  NoneAssessment,
};

enum class ProtocolFamily { Unicast, Dissemination, Ctd };

std::string_view to_string(Protocol p);
/// Accepts the config names (gpsr, 3mrp, 3mrp-dsw, flooding-distance, jsf, nsf,
/// njl, add-vod, add-fg, ctd-query, ctd-passive, none-assessment).
Protocol parse_protocol(std::string_view name);
ProtocolFamily family_of(Protocol p);

}  // namespace warnsim

namespace warnsim::dissemination {

enum class Action { ForwardNow, ScheduleTimer, StoreCarry, Suppress };

std::string_view to_string(Action a);

/// What a receiver knows when a warning copy arrives.
struct ReceiveContext {
  Protocol protocol = Protocol::AddVod;
  bool duplicate = false;
  double d_sender = 0.0;        // m, distance to the transmitting node
  double r_max = 300.0;         // m
  double d_threshold = 240.0;   // m, distance-flooding trigger
  double d_rint = 0.0;          // m, distance to nearest intersection
  bool at_intersection = false;
  bool closest_to_intersection = false;  // NJL: lowest d_rint among hearers
  radio::LinkQualityInputs link;
  int fresh_neighbors = 0;      // receiver's fresh neighbors other than the sender
  double alpha1 = 6.0;
  double alpha2 = 4.0;
  GameConfig game;
  TimerScheme timer = TimerScheme::None;  // defers forwards to a retransmission timer
  // Forwarding game: this receiver's availability and the other players'.
  double avail_self = 0.0;
  std::span<const double> avail_others;
};

struct Decision {
  Action action = Action::Suppress;
  double p_forward = 0.0;
  bool nonconverged = false;
};

/// Protocol-dispatched reaction to an incoming warning copy. Draws from `game_rng`
/// only for the game-based schemes. With a timer scheme set, a forward becomes
/// ScheduleTimer: the node rebroadcasts on each timer expiry instead.
Decision on_receive_warning(const ReceiveContext& ctx, sim::RngStream& game_rng);

}  // namespace warnsim::dissemination
