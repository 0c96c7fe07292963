#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "warnsim/dissemination/frames.hpp"
#include "warnsim/dissemination/protocol.hpp"
#include "warnsim/dissemination/timers.hpp"

namespace warnsim {

namespace {

constexpr std::array<std::pair<Protocol, std::string_view>, 12> kProtocolNames{{
    {Protocol::Gpsr, "gpsr"},
    {Protocol::Mrp3, "3mrp"},
    {Protocol::Mrp3Dsw, "3mrp-dsw"},
    {Protocol::FloodingDistance, "flooding-distance"},
    {Protocol::Jsf, "jsf"},
    {Protocol::Nsf, "nsf"},
    {Protocol::Njl, "njl"},
    {Protocol::AddVod, "add-vod"},
    {Protocol::AddFg, "add-fg"},
    {Protocol::CtdQuery, "ctd-query"},
    {Protocol::CtdPassive, "ctd-passive"},
    {Protocol::NoneAssessment, "none-assessment"},
}};

}  // namespace

std::string_view to_string(Protocol p) {
  for (const auto& [k, name] : kProtocolNames) {
    if (k == p) return name;
  }
  return "?";
}

Protocol parse_protocol(std::string_view name) {
  for (const auto& [k, n] : kProtocolNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown protocol '" + std::string(name) + "'");
}

ProtocolFamily family_of(Protocol p) {
  switch (p) {
    case Protocol::Gpsr:
    case Protocol::Mrp3:
    case Protocol::Mrp3Dsw:
      return ProtocolFamily::Unicast;
    case Protocol::CtdQuery:
    case Protocol::CtdPassive:
    case Protocol::NoneAssessment:
      return ProtocolFamily::Ctd;
    default:
      return ProtocolFamily::Dissemination;
  }
}

}  // namespace warnsim

namespace warnsim::dissemination {

// --- timers -----------------------------------------------------------------

std::string_view to_string(TimerScheme s) {
  switch (s) {
    case TimerScheme::None: return "none";
    case TimerScheme::Fixed: return "fixed";
    case TimerScheme::SpeedAdaptive: return "speed";
    case TimerScheme::MapPolling: return "map";
  }
  return "?";
}

TimerScheme parse_timer_scheme(std::string_view name) {
  for (auto s : {TimerScheme::None, TimerScheme::Fixed, TimerScheme::SpeedAdaptive,
                 TimerScheme::MapPolling}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown timer scheme '" + std::string(name) + "'");
}

void TimerConfig::validate() const {
  if (!(t_fixed > 0.0)) throw std::invalid_argument("timer t_fixed must be positive");
  if (!(t_min > 0.0) || !(t_min <= t_max)) {
    throw std::invalid_argument("timer requires 0 < t_min <= t_max");
  }
  if (!(poll > 0.0)) throw std::invalid_argument("timer poll must be positive");
}

double retransmission_delay(const TimerConfig& cfg, double v, double v_max, bool at_intersection) {
  if (!(v_max > 0.0) || !(v >= 0.0) || v > v_max) {
    throw std::invalid_argument("retransmission_delay requires 0 <= v <= v_max");
  }
  switch (cfg.scheme) {
    case TimerScheme::None:
    case TimerScheme::Fixed:
      return cfg.t_fixed;
    case TimerScheme::SpeedAdaptive:
      return cfg.t_min + (cfg.t_max - cfg.t_min) * (1.0 - v / v_max);
    case TimerScheme::MapPolling:
      return at_intersection ? std::min(cfg.poll, cfg.t_max) : cfg.t_max;
  }
  return cfg.t_fixed;
}

double map_polling_delay(const TimerConfig& cfg,
                         const std::function<bool(double)>& at_intersection) {
  const auto ticks = static_cast<long>(std::floor(cfg.t_max / cfg.poll + 1e-9));
  for (long k = 1; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * cfg.poll;
    if (at_intersection(t)) return t;
  }
  return cfg.t_max;
}

// --- receive dispatch ---------------------------------------------------------

std::string_view to_string(Action a) {
  switch (a) {
    case Action::ForwardNow: return "forward";
    case Action::ScheduleTimer: return "timer";
    case Action::StoreCarry: return "store";
    case Action::Suppress: return "suppress";
  }
  return "?";
}

namespace {

Decision game_decision(const ReceiveContext& ctx, sim::RngStream& rng) {
  Decision d;
  if (ctx.fresh_neighbors <= 0) {
    d.action = Action::StoreCarry;
    return d;
  }
  const double df = distance_factor(ctx.d_sender, ctx.d_rint, ctx.r_max);
  const double lq = radio::lqf(ctx.link);
  if (ctx.protocol == Protocol::AddVod) {
    const double u = utility({df, lq, ctx.alpha1, ctx.alpha2});
    d.p_forward = vod_forward_probability(u, ctx.fresh_neighbors + 1, ctx.game.cost_k);
  } else {
    std::vector<double> avails;
    avails.reserve(ctx.avail_others.size() + 1);
    avails.push_back(ctx.avail_self);
    avails.insert(avails.end(), ctx.avail_others.begin(), ctx.avail_others.end());
    const auto eq = forwarding_game_equilibrium(avails, ctx.game);
    d.p_forward = eq.p.front();
    d.nonconverged = !eq.converged;
  }
  d.action = rng.bernoulli(d.p_forward) ? Action::ForwardNow : Action::Suppress;
  return d;
}

}  // namespace

Decision on_receive_warning(const ReceiveContext& ctx, sim::RngStream& game_rng) {
  Decision d;
  if (ctx.duplicate) return d;
  switch (ctx.protocol) {
    case Protocol::FloodingDistance:
      d.p_forward = ctx.d_sender > ctx.d_threshold ? 1.0 : 0.0;
      d.action = d.p_forward > 0.0 ? Action::ForwardNow : Action::Suppress;
      break;
    case Protocol::Jsf:
      d.p_forward = ctx.at_intersection ? 1.0 : 0.0;
      d.action = ctx.at_intersection ? Action::ForwardNow : Action::StoreCarry;
      break;
    case Protocol::Nsf:
      d.action = Action::StoreCarry;
      break;
    case Protocol::Njl:
      d.p_forward = ctx.closest_to_intersection ? 1.0 : 0.0;
      d.action = ctx.closest_to_intersection ? Action::ForwardNow : Action::Suppress;
      break;
    case Protocol::AddVod:
    case Protocol::AddFg:
      d = game_decision(ctx, game_rng);
      break;
    default:
      throw std::invalid_argument("on_receive_warning: " + std::string(to_string(ctx.protocol)) +
                                  " is not a dissemination protocol");
  }
  if (d.action == Action::ForwardNow && ctx.timer != TimerScheme::None) {
    d.action = Action::ScheduleTimer;
  }
  return d;
}

// --- frames -------------------------------------------------------------------

char to_char(FrameType t) {
  switch (t) {
    case FrameType::I: return 'I';
    case FrameType::P: return 'P';
    case FrameType::B: return 'B';
  }
  return '?';
}

std::vector<Frame> read_frame_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("frame trace: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame_index,frame_type,size_bytes") {
    throw std::runtime_error("frame trace: expected header 'frame_index,frame_type,size_bytes'");
  }
  std::vector<Frame> frames;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string idx, type, size;
    if (!std::getline(ss, idx, ',') || !std::getline(ss, type, ',') || !std::getline(ss, size)) {
      throw std::runtime_error("frame trace line " + std::to_string(lineno) + ": expected 3 fields");
    }
    Frame f;
    try {
      f.index = static_cast<std::uint32_t>(std::stoul(idx));
      f.size_bytes = static_cast<std::uint32_t>(std::stoul(size));
    } catch (const std::exception&) {
      throw std::runtime_error("frame trace line " + std::to_string(lineno) + ": bad number");
    }
    if (type == "I") f.type = FrameType::I;
    else if (type == "P") f.type = FrameType::P;
    else if (type == "B") f.type = FrameType::B;
    else throw std::runtime_error("frame trace line " + std::to_string(lineno) + ": bad frame type");
    if (f.size_bytes == 0) {
      throw std::runtime_error("frame trace line " + std::to_string(lineno) + ": zero size");
    }
    if (!frames.empty() && f.index <= frames.back().index) {
      throw std::runtime_error("frame trace line " + std::to_string(lineno) +
                               ": frame indices must increase");
    }
    frames.push_back(f);
  }
  return frames;
}

void write_frame_trace(std::ostream& out, const std::vector<Frame>& frames) {
  out << "frame_index,frame_type,size_bytes\n";
  for (const auto& f : frames) out << f.index << ',' << to_char(f.type) << ',' << f.size_bytes << '\n';
}

std::vector<Frame> synthetic_frames(double bitrate, double fps, double seconds) {
  if (!(bitrate > 0.0) || !(fps > 0.0) || !(seconds > 0.0)) {
    throw std::invalid_argument("synthetic_frames: bitrate, fps and seconds must be positive");
  }
  constexpr std::string_view gop = "IBBPBBPBBPBB";
  // Units per GOP: one I (5), three P (2 each), eight B (1 each).
  constexpr double units_per_gop = 5.0 + 3 * 2.0 + 8 * 1.0;
  const double bytes_per_gop = bitrate / 8.0 / fps * static_cast<double>(gop.size());
  const double unit = bytes_per_gop / units_per_gop;
  const auto count = static_cast<std::uint32_t>(std::llround(fps * seconds));
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Frame f;
    f.index = i;
    switch (gop[i % gop.size()]) {
      case 'I': f.type = FrameType::I; break;
      case 'P': f.type = FrameType::P; break;
      default: f.type = FrameType::B; break;
    }
    const double units = f.type == FrameType::I ? 5.0 : f.type == FrameType::P ? 2.0 : 1.0;
    f.size_bytes = static_cast<std::uint32_t>(std::max(1.0, std::round(units * unit)));
    frames.push_back(f);
  }
  return frames;
}

}  // namespace warnsim::dissemination
