#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "warnsim/ctd/ctd.hpp"
#include "warnsim/dissemination/frames.hpp"
#include "warnsim/dissemination/protocol.hpp"
#include "warnsim/radio/channel.hpp"
#include "warnsim/roadnet/mobility.hpp"
#include "warnsim/routing/gpsr.hpp"
#include "warnsim/routing/multimetric.hpp"
#include "warnsim/scenario/run.hpp"
#include "warnsim/sim/rng.hpp"

namespace warnsim::scenario {

namespace {

using dissemination::Action;
using roadnet::NodeKind;
using sim::EventKind;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kContentionWindow = 15;  // slots
constexpr int kMaxReroutes = 3;

enum class RouteMode { Originate, Relay, Reroute };

enum class MsgKind : std::uint8_t { Beacon, Warning, Data, Query, Reply, Alert };

const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Beacon: return "beacon";
    case MsgKind::Warning: return "warning";
    case MsgKind::Data: return "data";
    case MsgKind::Query: return "query";
    case MsgKind::Reply: return "reply";
    case MsgKind::Alert: return "alert";
  }
  return "?";
}

struct Packet {
  MsgKind kind = MsgKind::Beacon;
  NodeId origin = kNoNode;
  NodeId next_hop = kNoNode;  // unicast link destination; kNoNode for broadcast
  std::uint32_t msg = 0;      // warning packet, data packet or alert index
  std::uint32_t bytes = 0;
  int ttl = 0;
  Point tx_pos;
  // hello payload
  Point pos;
  double speed = 0.0;
  Point heading;
  double density = 0.0;
  double abe = 0.0;
  double mac_loss = 0.0;
  std::shared_ptr<const std::vector<std::uint8_t>> have_map;
  // unicast payload
  NodeId final_dest = kNoNode;
  Point dest_pos;
  double created = 0.0;
  routing::PerimeterState perim;
  int reroutes = 0;  // next-hop changes after link failures at the current hop
  // ctd payload
  bool confirm = false;
};

struct Outgoing {
  Packet pkt;
  int attempts = 0;
};

struct WarnPacket {
  std::uint32_t frame = 0;
  std::uint32_t bytes = 0;
  double created = 0.0;
};

struct FrameInfo {
  dissemination::FrameType type = dissemination::FrameType::I;
  std::uint32_t first_packet = 0;
  std::uint32_t packets = 0;
  double created = 0.0;
};

struct Node {
  NodeKind kind = NodeKind::Vehicle;
  bool is_origin = false;
  bool mobile = false;
  Point pos;
  double speed = 0.0;
  Point heading;
  bool active = true;
  routing::NeighborTable nbrs;
  std::deque<Outgoing> queue;
  bool mac_busy = false;
  routing::MetricWeights weights;
  // dissemination
  std::vector<std::uint8_t> have;
  std::vector<std::uint8_t> relays;
  std::vector<std::int16_t> rx_ttl;
  std::vector<double> first_rx;
  std::vector<std::uint32_t> carried;
  std::unordered_map<NodeId, std::shared_ptr<const std::vector<std::uint8_t>>> nbr_have;
  std::uint32_t last_junction = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t timer_junction = std::numeric_limits<std::uint32_t>::max();  // map polling
  // ctd
  ctd::AlertStore store;
  std::vector<std::uint8_t> alert_seen;
  std::vector<std::uint8_t> alert_relays;
  int confirms = 0;
  int replies = 0;
  bool querying = false;
};

std::uint64_t mix_seed(std::uint64_t seed, double density) {
  // splitmix64 finalizer over (seed, density) so paired protocols share mobility.
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(std::llround(density * 1000.0));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class World {
 public:
  World(const ScenarioConfig& cfg, const RunSpec& spec)
      : cfg_(cfg),
        spec_(spec),
        family_(family_of(spec.protocol)),
        seed_(mix_seed(spec.seed, spec.density)),
        mac_rng_(seed_, sim::StreamId::Mac),
        game_rng_(seed_, sim::StreamId::GameDraw),
        assess_rng_(seed_, sim::StreamId::Assessment),
        traffic_rng_(seed_, sim::StreamId::Traffic),
        ledger_(cfg.rings) {
    build_population();
    channel_.emplace(cfg_.radio, cfg_.radio.obstacle_blocking ? &*graph_ : nullptr, nodes_.size(),
                     seed_);
    ctd_cfg_ = cfg_.ctd.base;
    ctd_cfg_.p_a = spec_.p_a;
  }

  RunResult run() {
    update_positions();
    sim_.schedule(cfg_.mobility.step, EventKind::MobilityStep, sim::kEngineTarget,
                  [this](const sim::SimEvent&) { on_mobility_step(); });
    if (cfg_.beacon.enabled) {
      for (NodeId n = 0; n < nodes_.size(); ++n) {
        sim_.schedule(mac_rng_.uniform(0.0, cfg_.beacon.interval), EventKind::Beacon, n,
                      [this, n](const sim::SimEvent&) { on_beacon(n); });
      }
    }
    switch (family_) {
      case ProtocolFamily::Unicast: setup_unicast(); break;
      case ProtocolFamily::Dissemination: setup_dissemination(); break;
      case ProtocolFamily::Ctd: setup_ctd(); break;
    }
    sim_.run_until(cfg_.duration);
    return finish();
  }

 private:
  // --- population -------------------------------------------------------------

  void build_population() {
    std::vector<NodeKind> kinds;
    if (!cfg_.mobility.trace_file.empty()) {
      std::ifstream g(cfg_.resolve(cfg_.mobility.graph_file));
      if (!g) throw std::runtime_error("cannot open graph file " + cfg_.mobility.graph_file);
      graph_.emplace(roadnet::read_graph_json(g));
      std::ifstream t(cfg_.resolve(cfg_.mobility.trace_file));
      if (!t) throw std::runtime_error("cannot open trace file " + cfg_.mobility.trace_file);
      trace_ = roadnet::read_trace_csv(t);
      kinds.assign(trace_.node_count(),
                   family_ == ProtocolFamily::Ctd ? NodeKind::Pedestrian : NodeKind::Vehicle);
    } else if (!cfg_.mobility.graph_file.empty()) {
      std::ifstream g(cfg_.resolve(cfg_.mobility.graph_file));
      if (!g) throw std::runtime_error("cannot open graph file " + cfg_.mobility.graph_file);
      graph_.emplace(roadnet::read_graph_json(g));
      populate_on_graph(kinds);
    } else {
      graph_.emplace(roadnet::make_grid_graph(cfg_.area.width, cfg_.area.height,
                                              cfg_.area.block_size, cfg_.mobility.speed_limit,
                                              cfg_.mobility.obstacles, 5.0));
      populate_on_graph(kinds);
    }
    mobile_count_ = trace_.node_count();
    nodes_.resize(mobile_count_);
    cursors_.reserve(mobile_count_);
    for (NodeId n = 0; n < mobile_count_; ++n) {
      nodes_[n].kind = kinds[n];
      nodes_[n].mobile = true;
      cursors_.emplace_back(trace_, n);
    }
    if (family_ == ProtocolFamily::Unicast) {
      for (const auto& p : cfg_.routing.rsus) {
        Node rsu;
        rsu.kind = NodeKind::Rsu;
        rsu.pos = p;
        rsu_ids_.push_back(static_cast<NodeId>(nodes_.size()));
        nodes_.push_back(std::move(rsu));
      }
    }
    if (family_ == ProtocolFamily::Dissemination) {
      Node origin;
      origin.kind = NodeKind::Rsu;
      origin.is_origin = true;
      origin.pos = cfg_.origin();
      origin_id_ = static_cast<NodeId>(nodes_.size());
      nodes_.push_back(std::move(origin));
    }
    positions_.resize(nodes_.size());
    active_.assign(nodes_.size(), 1);
  }

  void populate_on_graph(std::vector<NodeKind>& kinds) {
    if (family_ == ProtocolFamily::Ctd) {
      roadnet::append_waypoint_walkers(*graph_, trace_, kinds,
                                       static_cast<std::size_t>(std::llround(spec_.density)),
                                       cfg_.mobility.pedestrian_speed, cfg_.duration + 1.0,
                                       NodeKind::Pedestrian, seed_);
    } else {
      const double area_km2 = cfg_.area.width * cfg_.area.height / 1e6;
      const auto count = static_cast<std::size_t>(std::llround(spec_.density * area_km2));
      roadnet::append_vehicle_trips(*graph_, trace_, kinds, count, cfg_.duration + 1.0,
                                    cfg_.mobility.min_speed_fraction, seed_);
    }
  }

  // --- mobility -----------------------------------------------------------------

  void update_positions() {
    const double now = sim_.now();
    for (NodeId n = 0; n < nodes_.size(); ++n) {
      Node& node = nodes_[n];
      if (node.mobile) {
        const auto track = trace_.track(n);
        if (track.empty() || now < track.front().time || now > track.back().time) {
          node.active = false;
        } else {
          const auto k = cursors_[n].at(now);
          node.active = true;
          node.pos = k.pos;
          node.speed = k.speed;
          node.heading = k.heading;
        }
      }
      positions_[n] = node.pos;
      active_[n] = node.active ? 1 : 0;
    }
    channel_->set_positions(positions_, active_);
  }

  void on_mobility_step() {
    update_positions();
    if (spec_.protocol == Protocol::Jsf) check_junctions();
    const double next = sim_.now() + cfg_.mobility.step;
    if (next <= cfg_.duration) {
      sim_.schedule(next, EventKind::MobilityStep, sim::kEngineTarget,
                    [this](const sim::SimEvent&) { on_mobility_step(); });
    }
  }

  // --- MAC ------------------------------------------------------------------------

  double backoff() {
    return static_cast<double>(mac_rng_.index(kContentionWindow + 1)) * cfg_.radio.slot;
  }

  void enqueue(NodeId n, Packet pkt, double delay) {
    Node& node = nodes_[n];
    node.queue.push_back({std::move(pkt), 0});
    if (!node.mac_busy) {
      node.mac_busy = true;
      schedule_attempt(n, sim_.now() + delay + 2.0 * cfg_.radio.slot + backoff());
    }
  }

  void schedule_attempt(NodeId n, double t) {
    sim_.schedule(t, EventKind::TransmitStart, n, [this, n](const sim::SimEvent&) { attempt(n); });
  }

  void attempt(NodeId n) {
    Node& node = nodes_[n];
    if (node.queue.empty()) {
      node.mac_busy = false;
      return;
    }
    const double now = sim_.now();
    if (!node.active) {
      node.queue.clear();
      node.mac_busy = false;
      return;
    }
    if (channel_->sensing_busy(n, now)) {
      schedule_attempt(n, channel_->idle_at(n, now) + 2.0 * cfg_.radio.slot + backoff());
      return;
    }
    Packet& pkt = node.queue.front().pkt;
    pkt.tx_pos = node.pos;
    if (node.queue.front().attempts == 0) ledger_.record_message(kind_name(pkt.kind));
    const radio::TxId tx = channel_->begin(n, now, pkt.bytes);
    inflight_.emplace(tx, pkt);
    sim_.schedule(channel_->end_time(tx), EventKind::TransmitEnd, n,
                  [this, tx](const sim::SimEvent&) { on_tx_end(tx); }, tx);
  }

  void on_tx_end(radio::TxId tx) {
    const NodeId sender = channel_->sender_of(tx);
    const auto receptions = channel_->end(tx);
    auto it = inflight_.find(tx);
    const Packet pkt = it->second;
    inflight_.erase(it);

    bool acked = pkt.next_hop == kNoNode;
    for (const auto& r : receptions) {
      if (r.outcome != radio::RxOutcome::Delivered) continue;
      if (r.receiver == pkt.next_hop) acked = true;
      deliver(r.receiver, sender, pkt);
    }

    Node& node = nodes_[sender];
    if (!node.queue.empty()) {
      auto& head = node.queue.front();
      const bool unicast = head.pkt.next_hop != kNoNode && head.pkt.kind == MsgKind::Data;
      if (unicast && !acked && head.attempts < cfg_.routing.mac_retries) {
        ++head.attempts;
      } else if (unicast && !acked) {
        // Link-layer failure: forget the neighbor and pick another next hop.
        Packet failed = std::move(head.pkt);
        node.queue.pop_front();
        node.nbrs.erase(failed.next_hop);
        if (failed.reroutes < kMaxReroutes) {
          ++failed.reroutes;
          route(sender, std::move(failed), RouteMode::Reroute);
        } else {
          ledger_.record_drop("mac");
        }
      } else {
        node.queue.pop_front();
      }
    }
    if (node.queue.empty()) {
      node.mac_busy = false;
    } else {
      schedule_attempt(sender, sim_.now() + 2.0 * cfg_.radio.slot + backoff());
    }
  }

  void deliver(NodeId rx, NodeId sender, const Packet& pkt) {
    switch (pkt.kind) {
      case MsgKind::Beacon: on_hello(rx, sender, pkt); break;
      case MsgKind::Warning: on_warning(rx, sender, pkt); break;
      case MsgKind::Data:
        if (pkt.next_hop == rx) on_data(rx, pkt);
        break;
      case MsgKind::Query: on_query(rx, sender, pkt); break;
      case MsgKind::Reply:
        if (pkt.next_hop == rx) on_reply(rx, pkt);
        break;
      case MsgKind::Alert: on_alert(rx, sender, pkt); break;
    }
  }

  // --- hello beacons --------------------------------------------------------------

  double advertised_density(NodeId n) const {
    const double area_km2 = std::numbers::pi * cfg_.radio.r_max * cfg_.radio.r_max / 1e6;
    const auto count = nodes_[n].nbrs.fresh_count(sim_.now(), cfg_.beacon.neighbor_timeout);
    return static_cast<double>(count) / area_km2;
  }

  void on_beacon(NodeId n) {
    Node& node = nodes_[n];
    const double now = sim_.now();
    double interval = cfg_.beacon.interval;
    if (cfg_.beacon.adaptive) {
      interval = radio::atb_interval(channel_->busy_ratio(n, now), cfg_.beacon.i_min,
                                     cfg_.beacon.i_max);
    }
    if (now + interval <= cfg_.duration) {
      sim_.schedule(now + interval, EventKind::Beacon, n,
                    [this, n](const sim::SimEvent&) { on_beacon(n); });
    }
    if (!node.active) return;
    node.nbrs.expire(now, cfg_.beacon.neighbor_timeout);
    if (spec_.protocol == Protocol::Mrp3Dsw && node.kind == NodeKind::Vehicle) update_weights(n);
    if (is_add()) reevaluate_buffer(n);

    Packet b;
    b.kind = MsgKind::Beacon;
    b.origin = n;
    b.bytes = cfg_.beacon.size_bytes;
    b.pos = node.pos;
    b.speed = node.speed;
    b.heading = node.heading;
    b.density = advertised_density(n);
    b.abe = radio::abe_estimate(channel_->busy_ratio(n, now), cfg_.radio.bitrate);
    b.mac_loss = channel_->loss_fraction(n, now);
    if (is_add()) {
      // Held-copy bitmap, one bit per warning packet.
      b.have_map = std::make_shared<const std::vector<std::uint8_t>>(node.have);
      b.bytes += static_cast<std::uint32_t>((warn_.size() + 7) / 8);
    }
    enqueue(n, b, 0.0);
  }

  void on_hello(NodeId rx, NodeId sender, const Packet& pkt) {
    Node& node = nodes_[rx];
    routing::NeighborEntry e;
    e.id = sender;
    e.pos = pkt.pos;
    e.speed = pkt.speed;
    e.heading = pkt.heading;
    e.advertised_density = pkt.density;
    e.advertised_abe = pkt.abe;
    e.advertised_mac_loss = std::clamp(pkt.mac_loss, 0.0, 1.0);
    e.last_heard = sim_.now();
    const bool fresh_contact = node.nbrs.upsert(e, sim_.now(), cfg_.beacon.neighbor_timeout);
    if (pkt.have_map) node.nbr_have[sender] = pkt.have_map;
    if (fresh_contact && !node.carried.empty()) {
      if (spec_.protocol == Protocol::Nsf) {
        flush_carried(rx);
      } else if (is_add()) {
        flush_carried(rx);
      }
    }
  }

  // --- unicast routing ------------------------------------------------------------

  void setup_unicast() {
    std::vector<NodeId> vehicles;
    for (NodeId n = 0; n < mobile_count_; ++n) vehicles.push_back(n);
    const int sources = std::min<int>(cfg_.routing.sources, static_cast<int>(vehicles.size()));
    const double interval = cfg_.routing.packet_bytes * 8.0 / cfg_.routing.rate_bps;
    for (int s = 0; s < sources; ++s) {
      const std::size_t pick = s + traffic_rng_.index(vehicles.size() - s);
      std::swap(vehicles[s], vehicles[pick]);
      const NodeId src = vehicles[s];
      const double phase = traffic_rng_.uniform(0.0, interval);
      sim_.schedule(cfg_.routing.start_time + phase, EventKind::TimerExpiry, src,
                    [this, src, interval](const sim::SimEvent&) { generate_data(src, interval); });
    }
  }

  NodeId closest_rsu(Point p) const {
    NodeId best = kNoNode;
    double bd = kInf;
    for (NodeId r : rsu_ids_) {
      const double d = distance(p, nodes_[r].pos);
      if (d < bd) {
        bd = d;
        best = r;
      }
    }
    return best;
  }

  void generate_data(NodeId src, double interval) {
    const double now = sim_.now();
    if (now + interval <= cfg_.routing.stop_time) {
      sim_.schedule(now + interval, EventKind::TimerExpiry, src,
                    [this, src, interval](const sim::SimEvent&) { generate_data(src, interval); });
    }
    Packet p;
    p.kind = MsgKind::Data;
    p.origin = src;
    p.msg = data_count_++;
    p.bytes = cfg_.routing.packet_bytes;
    p.ttl = cfg_.routing.ttl;
    p.created = now;
    p.final_dest = closest_rsu(nodes_[src].pos);
    p.dest_pos = nodes_[p.final_dest].pos;
    ledger_.record_packet_sent(std::nullopt);
    if (!nodes_[src].active) {
      ledger_.record_drop("inactive");
      return;
    }
    route(src, std::move(p), RouteMode::Originate);
  }

  void on_data(NodeId rx, const Packet& pkt) {
    if (rx == pkt.final_dest) {
      ledger_.record_packet_delivered(std::nullopt, sim_.now() - pkt.created);
      return;
    }
    route(rx, pkt, RouteMode::Relay);
  }

  void route(NodeId n, Packet pkt, RouteMode mode) {
    Node& node = nodes_[n];
    const double now = sim_.now();
    if (mode == RouteMode::Relay) {
      pkt.reroutes = 0;
      ++props_.forwards;
      if (pkt.ttl <= 1) {
        ledger_.record_drop("ttl");
        return;
      }
      const int next_ttl = pkt.ttl - 1;
      ++props_.ttl_hops;
      if (next_ttl != pkt.ttl - 1 || next_ttl >= pkt.ttl) ++props_.ttl_violations;
      pkt.ttl = next_ttl;
    }
    const auto fresh = node.nbrs.fresh(now, cfg_.beacon.neighbor_timeout);
    NodeId next = kNoNode;
    for (const auto& e : fresh) {
      if (e.id == pkt.final_dest) next = e.id;
    }
    if (next == kNoNode) {
      if (pkt.perim.active && routing::perimeter_should_exit(pkt.perim, node.pos, pkt.dest_pos)) {
        pkt.perim = routing::PerimeterState{};
      }
      if (!pkt.perim.active) {
        if (spec_.protocol == Protocol::Gpsr) {
          if (auto g = routing::gpsr_greedy_next(node.pos, fresh, pkt.dest_pos)) next = *g;
        } else {
          std::vector<routing::NeighborEntry> progress;
          const double here = distance(node.pos, pkt.dest_pos);
          for (const auto& e : fresh) {
            if (distance(e.pos, pkt.dest_pos) < here) progress.push_back(e);
          }
          const auto w = spec_.protocol == Protocol::Mrp3Dsw ? node.weights
                                                             : routing::MetricWeights::equal();
          if (auto c = routing::select_forwarder(progress, node.pos, pkt.dest_pos, w,
                                                 metric_config())) {
            next = c->id;
          }
        }
      }
      if (next == kNoNode) {
        const auto d = routing::gpsr_perimeter_next(n, node.pos, fresh, pkt.dest_pos, pkt.perim);
        if (d.status == routing::PerimeterStatus::Drop) {
          ledger_.record_drop("no-route");
          return;
        }
        next = d.next;
      }
    }
    pkt.next_hop = next;
    enqueue(n, std::move(pkt), 0.0);
  }

  routing::MetricConfig metric_config() const {
    return {cfg_.radio.bitrate, cfg_.routing.density_ref, 1.0};
  }

  void update_weights(NodeId n) {
    Node& node = nodes_[n];
    const auto fresh = node.nbrs.fresh(sim_.now(), cfg_.beacon.neighbor_timeout);
    const NodeId rsu = closest_rsu(node.pos);
    if (rsu == kNoNode) return;
    std::vector<routing::MetricVector> snaps;
    snaps.reserve(fresh.size());
    for (const auto& e : fresh) {
      snaps.push_back(routing::normalize_metrics(e, node.pos, nodes_[rsu].pos, metric_config()));
    }
    node.weights = routing::dsw_update(snaps, node.weights, cfg_.routing.lambda, cfg_.routing.w_floor);
    ++props_.weight_updates;
    if (!node.weights.valid(cfg_.routing.w_floor)) ++props_.weight_violations;
  }

  // --- dissemination ----------------------------------------------------------------

  bool is_add() const {
    return spec_.protocol == Protocol::AddVod || spec_.protocol == Protocol::AddFg;
  }

  void setup_dissemination() {
    std::vector<dissemination::Frame> frames;
    if (!cfg_.warning.frame_trace.empty()) {
      std::ifstream in(cfg_.resolve(cfg_.warning.frame_trace));
      if (!in) throw std::runtime_error("cannot open frame trace " + cfg_.warning.frame_trace);
      frames = dissemination::read_frame_trace(in);
    } else {
      const double seconds = cfg_.warning.frames > 0 ? cfg_.warning.frames / cfg_.warning.fps
                                                     : cfg_.warning.video_seconds;
      frames = dissemination::synthetic_frames(cfg_.warning.bitrate, cfg_.warning.fps, seconds);
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
      FrameInfo fi;
      fi.type = frames[i].type;
      fi.first_packet = static_cast<std::uint32_t>(warn_.size());
      fi.created = cfg_.warning.start_time + static_cast<double>(i) / cfg_.warning.fps;
      std::uint32_t left = frames[i].size_bytes;
      const std::uint32_t n = dissemination::packet_count(left, cfg_.dissemination.mtu);
      fi.packets = n;
      for (std::uint32_t k = 0; k < n; ++k) {
        const std::uint32_t b = std::min(left, cfg_.dissemination.mtu);
        left -= b;
        warn_.push_back({static_cast<std::uint32_t>(i), std::max<std::uint32_t>(b, 1), fi.created});
      }
      frames_.push_back(fi);
    }
    for (auto& node : nodes_) {
      node.have.assign(warn_.size(), 0);
      node.relays.assign(warn_.size(), 0);
      node.rx_ttl.assign(warn_.size(), 0);
      node.first_rx.assign(warn_.size(), kInf);
    }
    for (std::size_t f = 0; f < frames_.size(); ++f) {
      if (frames_[f].created > cfg_.duration) break;
      sim_.schedule(frames_[f].created, EventKind::TimerExpiry, origin_id_,
                    [this, f](const sim::SimEvent&) { originate_frame(f); });
    }
  }

  bool alive(std::uint32_t m) const {
    return sim_.now() <= warn_[m].created + cfg_.dissemination.lifetime;
  }

  Packet warning_packet(NodeId n, std::uint32_t m) const {
    Packet p;
    p.kind = MsgKind::Warning;
    p.origin = origin_id_;
    p.msg = m;
    p.bytes = warn_[m].bytes;
    p.ttl = nodes_[n].rx_ttl[m];
    p.created = warn_[m].created;
    return p;
  }

  double jitter() { return mac_rng_.uniform(0.0, cfg_.dissemination.max_jitter); }

  /// Rebroadcast of a copy this node already holds. Relays carry ttl one below
  /// the copy they received; the origin sends the initial ttl. `on_receipt`
  /// marks the immediate relay decided when the first copy arrived.
  void transmit_warning(NodeId n, std::uint32_t m, bool on_receipt) {
    Node& node = nodes_[n];
    if (!node.have[m]) {
      ++props_.forwards_without_receipt;
      return;
    }
    Packet p = warning_packet(n, m);
    if (!node.is_origin) {
      ++props_.forwards;
      ++props_.ttl_hops;
      p.ttl = node.rx_ttl[m] - 1;
      if (p.ttl >= node.rx_ttl[m]) ++props_.ttl_violations;
      if (p.ttl < 1) return;
      if (on_receipt) {
        node.relays[m] = static_cast<std::uint8_t>(std::min(255, node.relays[m] + 1));
        props_.max_relays_per_message =
            std::max<std::uint64_t>(props_.max_relays_per_message, node.relays[m]);
      }
    }
    enqueue(n, std::move(p), jitter());
  }

  void originate_frame(std::size_t f) {
    Node& o = nodes_[origin_id_];
    const auto& fi = frames_[f];
    for (std::uint32_t k = 0; k < fi.packets; ++k) {
      const std::uint32_t m = fi.first_packet + k;
      o.have[m] = 1;
      o.first_rx[m] = sim_.now();
      o.rx_ttl[m] = static_cast<std::int16_t>(cfg_.dissemination.ttl);
      if (is_add() && o.nbrs.fresh_count(sim_.now(), cfg_.beacon.neighbor_timeout) == 0) {
        o.carried.push_back(m);
        ledger_.record_scf_store();
        continue;
      }
      transmit_warning(origin_id_, m, false);
      if (spec_.timer.scheme != dissemination::TimerScheme::None) arm_timer(origin_id_, m);
    }
  }

  void on_warning(NodeId rx, NodeId sender, const Packet& pkt) {
    Node& node = nodes_[rx];
    const std::uint32_t m = pkt.msg;
    if (node.have[m]) {
      ledger_.record_duplicate(sim_.now());
      return;
    }
    node.have[m] = 1;
    node.first_rx[m] = sim_.now();
    node.rx_ttl[m] = static_cast<std::int16_t>(pkt.ttl);
    if (node.is_origin || !alive(m)) return;

    dissemination::ReceiveContext ctx;
    ctx.protocol = spec_.protocol;
    ctx.r_max = cfg_.radio.r_max;
    ctx.d_sender = std::min(distance(node.pos, pkt.tx_pos), cfg_.radio.r_max);
    ctx.d_threshold = cfg_.dissemination.d_threshold_fraction * cfg_.radio.r_max;
    ctx.alpha1 = cfg_.dissemination.alpha1;
    ctx.alpha2 = cfg_.dissemination.alpha2;
    ctx.game = cfg_.game;
    ctx.timer = spec_.timer.scheme;
    const auto near = graph_->nearest_intersection(node.pos);
    ctx.d_rint = near.distance;
    ctx.at_intersection = near.distance <= cfg_.dissemination.intersection_radius;

    const double now = sim_.now();
    const auto fresh = node.nbrs.fresh(now, cfg_.beacon.neighbor_timeout);
    int others = 0;
    for (const auto& e : fresh) {
      if (e.id != sender) ++others;
    }
    ctx.fresh_neighbors = others;

    std::vector<double> avail_others;
    if (spec_.protocol == Protocol::Njl) {
      bool closest = true;
      for (const auto& e : fresh) {
        if (e.id == sender || distance(e.pos, pkt.tx_pos) > cfg_.radio.r_max) continue;
        const double d = graph_->nearest_intersection(e.pos).distance;
        if (d < near.distance || (d == near.distance && e.id < rx)) closest = false;
      }
      ctx.closest_to_intersection = closest;
    }
    if (is_add()) {
      ctx.link.signal = 1.0 - ctx.d_sender / cfg_.radio.r_max;
      ctx.link.channel = 1.0 - channel_->busy_ratio(rx, now);
      ctx.link.collision_prob = channel_->collision_fraction(rx, now);
      if (spec_.protocol == Protocol::AddFg) {
        const double own_abe = radio::abe_estimate(channel_->busy_ratio(rx, now), cfg_.radio.bitrate);
        ctx.avail_self = dissemination::availability(ctx.d_sender, cfg_.radio.r_max,
                                                     std::clamp(own_abe / cfg_.radio.bitrate, 0.0, 1.0));
        for (const auto& e : fresh) {
          if (e.id == sender) continue;
          const double d = distance(e.pos, pkt.tx_pos);
          if (d > cfg_.radio.r_max) continue;
          avail_others.push_back(dissemination::availability(
              d, cfg_.radio.r_max, std::clamp(e.advertised_abe / cfg_.radio.bitrate, 0.0, 1.0)));
        }
        ctx.avail_others = avail_others;
      }
    }

    const auto decision = dissemination::on_receive_warning(ctx, game_rng_);
    if (decision.nonconverged) ++nonconverged_;
    switch (decision.action) {
      case Action::ForwardNow:
        transmit_warning(rx, m, true);
        if (spec_.protocol == Protocol::Jsf) {
          node.last_junction = near.id;
          node.carried.push_back(m);
        }
        break;
      case Action::ScheduleTimer:
        arm_timer(rx, m);
        break;
      case Action::StoreCarry:
        node.carried.push_back(m);
        ledger_.record_scf_store();
        break;
      case Action::Suppress:
        break;
    }
  }

  void arm_timer(NodeId n, std::uint32_t m) {
    Node& node = nodes_[n];
    const auto& t = spec_.timer;
    double delay = t.t_fixed;
    if (t.scheme == dissemination::TimerScheme::SpeedAdaptive) {
      const double vmax = cfg_.mobility.speed_limit;
      delay = dissemination::retransmission_delay(t, std::clamp(node.speed, 0.0, vmax), vmax, false);
    } else if (t.scheme == dissemination::TimerScheme::MapPolling) {
      const double now = sim_.now();
      const double rho = cfg_.dissemination.intersection_radius;
      if (node.mobile) {
        // One rebroadcast per intersection visit: skip the junction last relayed at.
        delay = dissemination::map_polling_delay(t, [&](double dt) {
          const double at = now + dt;
          if (at > trace_.end_time(n)) return false;
          const auto near = graph_->nearest_intersection(trace_.position_at(n, at).pos);
          return near.distance <= rho && near.id != node.timer_junction;
        });
      } else {
        delay = dissemination::retransmission_delay(
            t, 0.0, 1.0, graph_->is_at_intersection(node.pos, rho));
      }
    }
    const double at = sim_.now() + delay;
    if (at > cfg_.duration || at > warn_[m].created + cfg_.dissemination.lifetime) return;
    sim_.schedule(at, EventKind::TimerExpiry, n, [this, n, m](const sim::SimEvent&) {
      Node& node = nodes_[n];
      if (!node.active) return;
      if (spec_.timer.scheme == dissemination::TimerScheme::MapPolling) {
        const auto near = graph_->nearest_intersection(node.pos);
        if (near.distance <= cfg_.dissemination.intersection_radius) node.timer_junction = near.id;
      }
      transmit_warning(n, m, false);
      arm_timer(n, m);
    }, m);
  }

  void flush_carried(NodeId n) {
    Node& node = nodes_[n];
    if (node.nbrs.fresh_count(sim_.now(), cfg_.beacon.neighbor_timeout) == 0) return;
    const auto carried = std::move(node.carried);
    node.carried.clear();
    for (std::uint32_t m : carried) {
      if (alive(m)) transmit_warning(n, m, false);
    }
  }

  /// ADD buffer re-evaluation at each own beacon. Every held copy stays
  /// buffered for its lifetime; when a fresh neighbor's last beacon shows it
  /// lacks a copy, the holders around that neighbor play the configured game
  /// again to decide who repairs it.
  void reevaluate_buffer(NodeId n) {
    Node& node = nodes_[n];
    const double now = sim_.now();
    const auto fresh = node.nbrs.fresh(now, cfg_.beacon.neighbor_timeout);
    if (fresh.empty()) return;
    if (!node.carried.empty()) flush_carried(n);
    const double r = cfg_.radio.r_max;
    std::vector<double> avail_others;
    for (std::uint32_t m = 0; m < warn_.size(); ++m) {
      if (!node.have[m] || !alive(m)) continue;
      const routing::NeighborEntry* needy = nullptr;
      for (const auto& e : fresh) {
        const auto it = node.nbr_have.find(e.id);
        if (it == node.nbr_have.end() || (*it->second)[m]) continue;
        if (!needy || distance(e.pos, node.pos) < distance(needy->pos, node.pos)) needy = &e;
      }
      if (!needy) continue;

      dissemination::ReceiveContext ctx;
      ctx.protocol = spec_.protocol;
      ctx.r_max = r;
      ctx.d_sender = std::min(distance(node.pos, needy->pos), r);
      ctx.alpha1 = cfg_.dissemination.alpha1;
      ctx.alpha2 = cfg_.dissemination.alpha2;
      ctx.game = cfg_.game;
      const auto near = graph_->nearest_intersection(node.pos);
      ctx.d_rint = near.distance;
      ctx.at_intersection = near.distance <= cfg_.dissemination.intersection_radius;
      ctx.link.signal = 1.0 - ctx.d_sender / r;
      ctx.link.channel = 1.0 - channel_->busy_ratio(n, now);
      ctx.link.collision_prob = channel_->collision_fraction(n, now);
      avail_others.clear();
      int holders = 0;
      for (const auto& e : fresh) {
        if (e.id == needy->id) continue;
        const auto it = node.nbr_have.find(e.id);
        if (it == node.nbr_have.end() || !(*it->second)[m]) continue;
        const double d = distance(e.pos, needy->pos);
        if (d > r) continue;
        ++holders;
        avail_others.push_back(dissemination::availability(
            d, r, std::clamp(e.advertised_abe / cfg_.radio.bitrate, 0.0, 1.0)));
      }
      ctx.fresh_neighbors = holders;
      if (holders == 0) {
        transmit_warning(n, m, false);
        continue;
      }
      if (spec_.protocol == Protocol::AddFg) {
        const double own_abe = radio::abe_estimate(channel_->busy_ratio(n, now), cfg_.radio.bitrate);
        ctx.avail_self = dissemination::availability(
            ctx.d_sender, r, std::clamp(own_abe / cfg_.radio.bitrate, 0.0, 1.0));
        ctx.avail_others = avail_others;
      }
      const auto decision = dissemination::on_receive_warning(ctx, game_rng_);
      if (decision.nonconverged) ++nonconverged_;
      if (decision.action == Action::ForwardNow) transmit_warning(n, m, false);
    }
  }

  void check_junctions() {
    for (NodeId n = 0; n < mobile_count_; ++n) {
      Node& node = nodes_[n];
      if (node.carried.empty() || !node.active) continue;
      const auto near = graph_->nearest_intersection(node.pos);
      if (near.distance > cfg_.dissemination.intersection_radius || near.id == node.last_junction) {
        continue;
      }
      node.last_junction = near.id;
      std::erase_if(node.carried, [&](std::uint32_t m) { return !alive(m); });
      for (std::uint32_t m : node.carried) transmit_warning(n, m, false);
    }
  }

  // --- collaborative alert assessment -------------------------------------------------

  void setup_ctd() {
    sim_.schedule(cfg_.ctd.alert_time, EventKind::TimerExpiry, sim::kEngineTarget,
                  [this](const sim::SimEvent&) { raise_alerts(); });
  }

  void raise_alerts() {
    const Point ev = cfg_.event_position();
    std::vector<NodeId> order;
    for (NodeId n = 0; n < mobile_count_; ++n) {
      if (nodes_[n].active) order.push_back(n);
    }
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return distance(nodes_[a].pos, ev) < distance(nodes_[b].pos, ev);
    });
    const auto senders = std::min<std::size_t>(static_cast<std::size_t>(spec_.alert_senders),
                                               order.size());
    for (auto& node : nodes_) {
      node.alert_seen.assign(senders, 0);
      node.alert_relays.assign(senders, 0);
    }
    for (std::size_t i = 0; i < senders; ++i) {
      const NodeId s = order[i];
      ctd::Alert a;
      a.id = i;
      a.event_type = cfg_.ctd.event_type;
      a.origin = nodes_[s].pos;
      a.created = sim_.now();
      a.proposer = s;
      alerts_.push_back(a);
      Node& node = nodes_[s];
      node.alert_seen[i] = 1;
      node.store.remember(a);
      if (spec_.protocol == Protocol::CtdQuery) {
        node.querying = true;
        Packet q;
        q.kind = MsgKind::Query;
        q.origin = s;
        q.msg = static_cast<std::uint32_t>(i);
        q.bytes = cfg_.ctd.query_bytes;
        enqueue(s, q, jitter());
        sim_.schedule(sim_.now() + ctd_cfg_.reply_window, EventKind::TimerExpiry, s,
                      [this, s, i](const sim::SimEvent&) { close_query(s, i); });
      } else {
        send_alert(s, static_cast<std::uint32_t>(i), /*relay=*/false);
      }
    }
  }

  void send_alert(NodeId n, std::uint32_t a, bool relay) {
    Node& node = nodes_[n];
    if (relay) {
      if (!node.alert_seen[a]) ++props_.forwards_without_receipt;
      ++props_.forwards;
      node.alert_relays[a] = static_cast<std::uint8_t>(std::min(255, node.alert_relays[a] + 1));
      props_.max_relays_per_message =
          std::max<std::uint64_t>(props_.max_relays_per_message, node.alert_relays[a]);
    }
    Packet p;
    p.kind = MsgKind::Alert;
    p.origin = alerts_[a].proposer;
    p.msg = a;
    p.bytes = cfg_.ctd.alert_bytes;
    enqueue(n, p, jitter());
  }

  void on_query(NodeId rx, NodeId sender, const Packet& pkt) {
    Packet r;
    r.kind = MsgKind::Reply;
    r.origin = rx;
    r.next_hop = sender;
    r.msg = pkt.msg;
    r.bytes = cfg_.ctd.reply_bytes;
    r.confirm = ctd::assess(ctd_cfg_, assess_rng_);
    enqueue(rx, r, jitter());
  }

  void on_reply(NodeId rx, const Packet& pkt) {
    Node& node = nodes_[rx];
    if (!node.querying) return;
    ++node.replies;
    if (pkt.confirm) ++node.confirms;
  }

  void close_query(NodeId s, std::size_t a) {
    Node& node = nodes_[s];
    node.querying = false;
    if (ctd::ctd_query_decide(node.confirms, node.replies, ctd_cfg_) ==
        ctd::QueryOutcome::Broadcast) {
      send_alert(s, static_cast<std::uint32_t>(a), false);
    } else {
      ++discarded_queries_;
    }
  }

  void on_alert(NodeId rx, NodeId, const Packet& pkt) {
    Node& node = nodes_[rx];
    const std::uint32_t a = pkt.msg;
    if (spec_.protocol == Protocol::NoneAssessment) {
      if (node.alert_seen[a]) {
        ledger_.record_duplicate(sim_.now());
        return;
      }
      node.alert_seen[a] = 1;
      first_alert(rx);
      send_alert(rx, a, true);
      return;
    }
    // Query and passive relays compare against every alert seen so far.
    const bool first = !node.alert_seen[a];
    node.alert_seen[a] = 1;
    if (first) first_alert(rx);
    const auto act = ctd::ctd_passive_process(node.store, alerts_[a], ctd_cfg_, assess_rng_);
    if (act == ctd::PassiveAction::Suppress) {
      ledger_.record_duplicate(sim_.now());
    } else if (act == ctd::PassiveAction::Rebroadcast) {
      send_alert(rx, a, true);
    }
  }

  void first_alert(NodeId rx) {
    if (!informed_.empty() && !informed_[rx]) {
      informed_[rx] = 1;
      ++informed_count_;
    }
    if (informed_.empty()) {
      informed_.assign(nodes_.size(), 0);
      informed_[rx] = 1;
      ++informed_count_;
    }
  }

  // --- results ------------------------------------------------------------------------

  RunResult finish() {
    RunResult res;
    res.spec = spec_;
    const auto& cc = channel_->counters();
    ledger_.set_channel_totals(cc.receivable, cc.delivered, cc.lost_collision, cc.lost_link,
                               cc.collision_events);
    auto& v = res.values;
    v["collisions"] = static_cast<double>(ledger_.collisions());
    v["duplicates"] = static_cast<double>(ledger_.duplicates());
    std::uint64_t non_beacon = 0;
    for (const auto kind : {MsgKind::Beacon, MsgKind::Warning, MsgKind::Data, MsgKind::Query,
                            MsgKind::Reply, MsgKind::Alert}) {
      const std::string k = kind_name(kind);
      const auto n = ledger_.messages(k);
      v["messages_" + k] = static_cast<double>(n);
      if (kind != MsgKind::Beacon) non_beacon += n;
    }
    v["messages_total"] = static_cast<double>(non_beacon);

    switch (family_) {
      case ProtocolFamily::Unicast: {
        const auto pdr = metrics::packet_delivery_ratio(ledger_.total());
        if (pdr) {
          v["delivery"] = *pdr;
          v["loss"] = 1.0 - *pdr;
        }
        if (auto d = metrics::mean_delay(ledger_.total())) v["mean_delay"] = *d;
        break;
      }
      case ProtocolFamily::Dissemination:
        finish_dissemination(v);
        break;
      case ProtocolFamily::Ctd: {
        v["replies"] = static_cast<double>(ledger_.messages("reply"));
        v["discarded_queries"] = static_cast<double>(discarded_queries_);
        std::size_t devices = mobile_count_;
        v["coverage"] = devices ? static_cast<double>(informed_count_) / devices : 0.0;
        break;
      }
    }
    props_.reply_messages = ledger_.messages("reply");
    res.props = props_;
    res.nonconverged = nonconverged_;
    v["nonconverged"] = static_cast<double>(nonconverged_);
    res.digest = sim_.digest();
    res.node_count = nodes_.size();
    res.ledger = std::move(ledger_);
    return res;
  }

  void finish_dissemination(std::map<std::string, double>& v) {
    const Point origin = nodes_[origin_id_].pos;
    std::size_t receivers = 0, complete = 0;
    for (NodeId n = 0; n < mobile_count_; ++n) {
      const Node& node = nodes_[n];
      ++receivers;
      if (std::all_of(node.have.begin(), node.have.end(), [](std::uint8_t h) { return h != 0; })) {
        ++complete;
      }
      for (const auto& fi : frames_) {
        if (fi.created > cfg_.duration) continue;
        if (fi.created < trace_.start_time(n) || fi.created > trace_.end_time(n)) continue;
        const Point at = trace_.position_at(n, fi.created).pos;
        const auto ring = ledger_.ring_of(distance(at, origin));
        if (!ring) continue;
        bool all = true;
        for (std::uint32_t k = 0; k < fi.packets; ++k) {
          const std::uint32_t m = fi.first_packet + k;
          ledger_.record_packet_sent(ring);
          if (node.have[m]) {
            ledger_.record_packet_delivered(ring, node.first_rx[m] - warn_[m].created);
          } else {
            all = false;
          }
        }
        ledger_.record_frame(*ring, static_cast<std::size_t>(fi.type), all);
      }
    }
    v["coverage"] = receivers ? static_cast<double>(complete) / receivers : 0.0;
    v["scf_stores"] = static_cast<double>(ledger_.scf_stores());
    for (std::size_t r = 0; r < ledger_.ring_count(); ++r) {
      const std::string ring = "@" + format_ring(ledger_.ring_bounds()[r]);
      const auto& rc = ledger_.ring(r);
      if (auto x = metrics::fdr(rc)) v["fdr" + ring] = *x;
      static constexpr const char* kTypes[] = {"fdr_I", "fdr_P", "fdr_B"};
      for (std::size_t t = 0; t < metrics::kFrameTypes; ++t) {
        if (auto x = metrics::fdr_by_type(rc, t)) v[std::string(kTypes[t]) + ring] = *x;
      }
      if (auto x = metrics::mean_delay(rc)) v["mean_delay" + ring] = *x;
      if (auto x = metrics::packet_delivery_ratio(rc)) v["pdr" + ring] = *x;
    }
  }

  static std::string format_ring(double bound) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", bound);
    return buf;
  }

  const ScenarioConfig& cfg_;
  RunSpec spec_;
  ProtocolFamily family_;
  std::uint64_t seed_;
  sim::Simulator sim_;
  sim::RngStream mac_rng_, game_rng_, assess_rng_, traffic_rng_;
  metrics::MetricsLedger ledger_;
  std::optional<roadnet::RoadGraph> graph_;
  roadnet::MobilityTrace trace_;
  std::vector<roadnet::TraceCursor> cursors_;
  std::optional<radio::Channel> channel_;
  std::vector<Node> nodes_;
  std::size_t mobile_count_ = 0;
  std::vector<Point> positions_;
  std::vector<std::uint8_t> active_;
  std::unordered_map<radio::TxId, Packet> inflight_;
  std::vector<NodeId> rsu_ids_;
  NodeId origin_id_ = kNoNode;
  std::uint32_t data_count_ = 0;
  std::vector<WarnPacket> warn_;
  std::vector<FrameInfo> frames_;
  ctd::CtdConfig ctd_cfg_;
  std::vector<ctd::Alert> alerts_;
  std::vector<std::uint8_t> informed_;
  std::size_t informed_count_ = 0;
  std::uint64_t discarded_queries_ = 0;
  std::uint64_t nonconverged_ = 0;
  PropertyLog props_;
};

}  // namespace

std::vector<RunSpec> expand_runs(const ScenarioConfig& cfg) {
  std::vector<RunSpec> out;
  if (cfg.protocols.empty()) return out;
  const ProtocolFamily fam = family_of(cfg.protocols.front());
  std::vector<double> populations;
  if (fam == ProtocolFamily::Ctd) {
    for (int n : cfg.pedestrian_counts) populations.push_back(n);
  } else {
    populations = cfg.densities;
  }
  for (double pop : populations) {
    for (Protocol p : cfg.protocols) {
      std::vector<RunSpec> variants;
      if (fam == ProtocolFamily::Dissemination && !cfg.timers.empty()) {
        for (const auto& t : cfg.timers) {
          RunSpec s;
          s.variant = t.name;
          s.timer = t.timer;
          variants.push_back(s);
        }
      } else if (fam == ProtocolFamily::Ctd) {
        for (int senders : cfg.ctd.alert_senders) {
          for (double pa : cfg.ctd.p_a) {
            RunSpec s;
            char buf[64];
            std::snprintf(buf, sizeof buf, "senders=%d;p_a=%g", senders, pa);
            s.variant = buf;
            s.p_a = pa;
            s.alert_senders = senders;
            variants.push_back(s);
          }
        }
      } else {
        variants.emplace_back();
      }
      for (auto s : variants) {
        s.protocol = p;
        s.density = pop;
        for (auto seed : cfg.seeds) {
          s.seed = seed;
          out.push_back(s);
        }
      }
    }
  }
  return out;
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunSpec& spec) {
  World w(cfg, spec);
  return w.run();
}

std::vector<RunResult> run_sweep(const ScenarioConfig& cfg, std::span<const RunSpec> specs,
                                 int jobs) {
  std::vector<std::optional<RunResult>> slots(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        slots[i] = run_scenario(cfg, specs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(specs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunResult> out;
  out.reserve(specs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace warnsim::scenario
