#include "swarmlink/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <set>

#include "json.hpp"
#include "swarmlink/broadcast_keys.hpp"
#include "swarmlink/codec.hpp"
#include "swarmlink/handshake.hpp"
#include "swarmlink/links.hpp"
#include "swarmlink/mesh.hpp"

namespace swarmlink::sim {

namespace {

using ojson = nlohmann::ordered_json;
using adversary::FrameKey;

constexpr SimDuration kHandshakeStagger = 5ms;
constexpr SimDuration kNoLinkRetry = 100ms;

enum class TxKind { Handshake, Rekey, Ack, Data, Forward };

std::string_view kind_name(TxKind k) {
  switch (k) {
    case TxKind::Handshake: return "handshake";
    case TxKind::Rekey: return "rekey";
    case TxKind::Ack: return "rekey_ack";
    case TxKind::Data: return "data";
    case TxKind::Forward: return "forward";
  }
  return "data";
}

struct TxItem {
  Bytes wire;
  std::optional<NodeId> dest;
  TxKind kind = TxKind::Data;
  std::optional<std::uint32_t> rekey_epoch;
};

struct Arrival {
  Bytes wire;
  NodeId from{};
  std::optional<NodeId> dest;
  std::size_t link = 0;
  std::optional<std::size_t> injected_by;
  std::optional<std::size_t> substituted_by;
};

struct NodeRt {
  NodeSpec spec;
  bool up = true;
  mesh::NodeState state;
  crypto::SignatureKeyPair identity;
  Rng traffic_rng;
  Rng loss_rng;
  Rng jitter_rng;
  Rng hs_rng;
  links::LinkSelector selector;
  std::vector<std::optional<links::DutyCycleMeter>> meters;
  std::vector<std::vector<links::AirtimeRecord>> airtime;
  std::vector<std::uint64_t> deferrals;
  std::vector<std::uint64_t> tx_by_link;
  std::deque<TxItem> queue;
  bool busy = false;
  std::uint64_t frames_offered = 0;
  std::uint64_t send_failures = 0;
  std::uint64_t transmissions = 0;
  std::optional<std::size_t> last_link;

  NodeRt(const NodeSpec& s, const Scenario& sc, std::uint64_t seed)
      : spec(s),
        up(!s.offline),
        state(s.id, sc.mode, sc.protocol.dedup_capacity),
        traffic_rng(derive_seed(seed, "traffic", raw(s.id))),
        loss_rng(derive_seed(seed, "loss", raw(s.id))),
        jitter_rng(derive_seed(seed, "jitter", raw(s.id))),
        hs_rng(derive_seed(seed, "handshake", raw(s.id))),
        selector(sc.links, sc.link_policy),
        meters(sc.links.size()),
        airtime(sc.links.size()),
        deferrals(sc.links.size(), 0),
        tx_by_link(sc.links.size(), 0) {
    state.encryption = sc.protocol.encryption;
    Rng id_rng(derive_seed(seed, "identity", raw(s.id)));
    identity = crypto::signature_keypair_from_seed(id_rng.array<32>());
    for (std::size_t i = 0; i < sc.links.size(); ++i) {
      if (sc.links[i].duty) meters[i].emplace(*sc.links[i].duty);
    }
  }
};

struct AdversaryRt {
  const AdversarySpec* spec = nullptr;
  Rng rng{0};
  std::unique_ptr<adversary::MitmAttacker> mitm;
  std::unique_ptr<adversary::ReplayInjector> replay;
  std::vector<Bytes> observed;  // eavesdrop log
  MitmScore mitm_score;
  ReplayScore replay_score;
};

struct InstalledKey {
  NodeId uav{};
  bool gcs_side = false;
  crypto::SymmetricKey key;
};

class Simulator {
 public:
  Simulator(const Scenario& scenario, const RunOptions& options)
      : sc_(scenario),
        tracing_(options.trace),
        profiles_(scenario.links),
        key_rng_(derive_seed(scenario.seed, "broadcast-keys")) {
    for (const auto& spec : sc_.nodes) {
      index_[spec.id] = nodes_.size();
      nodes_.push_back(std::make_unique<NodeRt>(spec, sc_, sc_.seed));
    }
    gcs_id_ = sc_.gcs_id();
    roster_.gcs_id = gcs_id_;
    for (const auto& n : nodes_) {
      roster_.sig_pubkeys[n->spec.id] = n->identity.public_key;
      if (n->spec.role == Role::Uav) roster_.uav_ids.push_back(n->spec.id);
    }
    std::sort(roster_.uav_ids.begin(), roster_.uav_ids.end());
    gcs_keys_.gcs = gcs_id_;
    gcs_keys_.key_lifetime = sc_.protocol.key_lifetime;

    min_mtu_ = profiles_.front().mtu_bytes;
    for (const auto& p : profiles_) min_mtu_ = std::min(min_mtu_, p.mtu_bytes);

    for (std::size_t i = 0; i < sc_.adversaries.size(); ++i) {
      AdversaryRt a;
      a.spec = &sc_.adversaries[i];
      a.rng = Rng(derive_seed(sc_.seed, "adversary", i));
      if (a.spec->kind == AdversaryKind::MitmKeySubstitution) {
        a.mitm = std::make_unique<adversary::MitmAttacker>(adversary::MitmIdentity::generate(a.rng),
                                                           a.spec->resign);
      } else if (a.spec->kind == AdversaryKind::ReplayInjector) {
        a.replay = std::make_unique<adversary::ReplayInjector>(a.spec->replay_delay, a.spec->max_injections,
                                                               a.spec->record_prob);
      }
      adversaries_.push_back(std::move(a));
    }
  }

  RunResult run() {
    schedule_initial();
    while (!queue_.empty()) {
      auto it = queue_.begin();
      if (it->first.first > sc_.duration) break;
      if (it->first.first < now_) ++clock_violations_;
      now_ = it->first.first;
      auto fn = std::move(it->second);
      queue_.erase(it);
      ++events_;
      fn();
    }
    return finish();
  }

 private:
  // ---- event plumbing -------------------------------------------------

  void at(SimTime t, std::function<void()> fn) {
    if (t < now_) {
      ++clock_violations_;
      t = now_;
    }
    queue_.emplace(std::make_pair(t, next_event_seq_++), std::move(fn));
  }

  NodeRt& node(NodeId id) { return *nodes_[index_.at(id)]; }
  NodeRt& gcs() { return node(gcs_id_); }
  bool is_uav(NodeId id) const { return roster_.is_uav(id); }

  void trace(NodeId who, std::string_view ev, ojson detail = ojson::object()) {
    if (!tracing_) return;
    ojson line;
    line["t"] = now_.count();
    line["node"] = raw(who);
    line["ev"] = ev;
    for (auto& [k, v] : detail.items()) line[k] = std::move(v);
    trace_ += line.dump();
    trace_ += '\n';
  }

  void schedule_initial() {
    for (const auto& n : nodes_) {
      if (n->spec.fail_at) {
        const NodeId id = n->spec.id;
        at(*n->spec.fail_at, [this, id] { fail_node(id); });
      }
    }
    for (const auto& e : sc_.link_events) {
      at(e.at, [this, &e] { apply_link_event(e); });
    }

    std::size_t i = 0;
    for (NodeId uav : roster_.uav_ids) {
      at(SimTime(kHandshakeStagger * static_cast<std::int64_t>(i++)), [this, uav] { gcs_start(uav); });
    }

    for (const auto& n : nodes_) {
      const double rate = n->spec.role == Role::Gcs ? sc_.traffic.gcs_rate_hz : sc_.traffic.uav_rate_hz;
      if (rate <= 0.0) continue;
      const SimDuration period = traffic_period(rate);
      const auto offset = SimDuration(static_cast<std::int64_t>(
          n->traffic_rng.uniform_int(0, static_cast<std::uint64_t>(period.count() - 1))));
      const NodeId id = n->spec.id;
      at(sc_.traffic.start + offset, [this, id, period] { traffic_tick(id, period); });
    }
  }

  static SimDuration traffic_period(double rate_hz) {
    return std::max(SimDuration(1), SimDuration(static_cast<std::int64_t>(std::llround(1e9 / rate_hz))));
  }

  // ---- handshake (GCS-initiated) ---------------------------------------

  void gcs_start(NodeId uav) {
    auto& g = gcs();
    if (!g.up || sessions_.has_session(uav)) return;
    ++attempts_[uav];
    ++hs_metrics_.attempts;
    auto offer = handshake::gcs_start_handshake(sessions_, roster_, g.identity, uav, g.hs_rng, now_,
                                                sc_.protocol.handshake_timeout);
    if (!offer) return;
    trace(gcs_id_, "handshake_offer", {{"uav", raw(uav)}, {"attempt", attempts_[uav]}});
    enqueue(g, TxItem{handshake::encode(*offer), uav, TxKind::Handshake, std::nullopt});
    at(now_ + sc_.protocol.handshake_timeout + SimDuration(1), [this, uav] { handshake_timeout(uav); });
  }

  void handshake_timeout(NodeId uav) {
    for (NodeId expired : sessions_.expire(now_)) trace(gcs_id_, "handshake_expired", {{"uav", raw(expired)}});
    if (!gcs().up || sessions_.has_session(uav) || sessions_.has_pending_for(uav)) return;
    if (attempts_[uav] <= sc_.protocol.handshake_retries) {
      gcs_start(uav);
    } else if (unreachable_.insert(uav).second) {
      trace(gcs_id_, "uav_unreachable", {{"uav", raw(uav)}});
    }
  }

  void uav_on_offer(NodeRt& r, const Arrival& a) {
    auto offer = handshake::decode_offer(a.wire);
    if (!offer) {
      ++security_.malformed;
      return;
    }
    auto accepted = handshake::uav_on_offer(roster_, r.spec.id, r.identity, *offer, r.hs_rng,
                                            sc_.protocol.verify_signatures);
    if (!accepted) {
      if (accepted.error() == Errc::SignatureError) {
        ++security_.signature_error;
        if (a.substituted_by) ++adversaries_[*a.substituted_by].mitm_score.signature_errors;
      } else {
        ++security_.malformed;
      }
      trace(r.spec.id, "offer_rejected", {{"error", to_string(accepted.error())}});
      return;
    }
    r.state.session_key = accepted->session_key;
    installed_.push_back(InstalledKey{r.spec.id, false, accepted->session_key});
    trace(r.spec.id, "offer_accepted", {{"gcs", raw(offer->sender)}});
    enqueue(r, TxItem{handshake::encode(accepted->response), gcs_id_, TxKind::Handshake, std::nullopt});
  }

  void gcs_on_response(const Arrival& a) {
    auto response = handshake::decode_response(a.wire);
    if (!response) {
      ++security_.malformed;
      return;
    }
    auto key = handshake::gcs_on_response(sessions_, roster_, *response, now_, sc_.protocol.verify_signatures);
    if (!key) {
      switch (key.error()) {
        case Errc::SignatureError:
          ++security_.signature_error;
          if (a.substituted_by) ++adversaries_[*a.substituted_by].mitm_score.signature_errors;
          break;
        case Errc::UnknownHandshake:
        case Errc::Expired: ++security_.unknown_handshake; break;
        default: ++security_.malformed; break;
      }
      trace(gcs_id_, "response_rejected", {{"uav", raw(response->sender)}, {"error", to_string(key.error())}});
      return;
    }
    const NodeId uav = response->sender;
    ++hs_metrics_.sessions_established;
    unreachable_.erase(uav);
    installed_.push_back(InstalledKey{uav, true, *key});
    trace(gcs_id_, "session_established", {{"uav", raw(uav)}});
    if (sc_.mode == mesh::TopologyMode::Mesh) {
      if (!gcs_keys_.current) {
        rotate();
      } else {
        send_rekey(uav, false);
      }
    }
  }

  // ---- rolling broadcast key (mesh) -------------------------------------

  void rotate() {
    auto& g = gcs();
    if (!g.up) return;
    auto rotation = bkeys::rotate_if_expired(gcs_keys_, sessions_, now_, key_rng_);
    if (!rotation) return;
    ++key_metrics_.rotations;
    const auto& key = rotation->key;
    key_history_[key.epoch] = key.key;
    if (g.state.keyring.install(key, now_, sc_.protocol.grace_window)) {
      on_epoch_installed(g, key.epoch);
    }
    trace(gcs_id_, "rotate", {{"epoch", key.epoch}, {"rekeys", rotation->rekeys.size()}});
    for (const auto& msg : rotation->rekeys) enqueue_rekey(msg, key.epoch);
    at(key.not_after, [this] { rotate(); });
    if (!retransmit_running_) {
      retransmit_running_ = true;
      at(now_ + sc_.protocol.rekey_retransmit, [this] { rekey_retransmit_tick(); });
    }
  }

  void enqueue_rekey(const bkeys::RekeyMessage& msg, std::uint32_t epoch) {
    const auto* session = sessions_.session(msg.uav);
    if (session != nullptr) audit_seal(session->key, msg.nonce);
    ++key_metrics_.rekeys_sent;
    ++rekeys_queued_[msg.uav];
    last_rekey_[msg.uav] = now_;
    enqueue(gcs(), TxItem{bkeys::encode(msg), msg.uav, TxKind::Rekey, epoch});
  }

  void send_rekey(NodeId uav, bool retransmission) {
    if (!gcs_keys_.current) return;
    auto msg = bkeys::wrap_for(sessions_, gcs_id_, uav, *gcs_keys_.current, key_rng_);
    if (!msg) return;
    if (retransmission) ++key_metrics_.rekey_retransmissions;
    enqueue_rekey(*msg, gcs_keys_.current->epoch);
  }

  void rekey_retransmit_tick() {
    if (!gcs().up) return;
    if (gcs_keys_.current) {
      const std::uint32_t epoch = gcs_keys_.current->epoch;
      std::vector<NodeId> behind;
      for (const auto& [uav, session] : sessions_.sessions()) {
        if (acked_[uav] >= epoch || rekeys_queued_[uav] != 0) continue;
        const auto last = last_rekey_.find(uav);
        if (last != last_rekey_.end() && now_ - last->second < sc_.protocol.rekey_retransmit) continue;
        behind.push_back(uav);
      }
      for (NodeId uav : behind) send_rekey(uav, true);
    }
    at(now_ + sc_.protocol.rekey_retransmit, [this] { rekey_retransmit_tick(); });
  }

  void on_epoch_installed(NodeRt& n, std::uint32_t epoch) {
    auto& last = last_epoch_[n.spec.id];
    if (epoch < last) ++epoch_regressions_;
    last = epoch;
    if (epoch > 1) n.state.replay.prune_below(epoch - 1);
  }

  void uav_on_rekey(NodeRt& r, const Arrival& a) {
    auto msg = bkeys::decode_rekey(a.wire);
    if (!msg) {
      ++security_.malformed;
      return;
    }
    if (!r.state.session_key) {
      ++security_.unknown_handshake;
      return;
    }
    auto key = bkeys::open_rekey(*r.state.session_key, *msg);
    if (!key) {
      if (key.error() == Errc::AuthError) {
        ++security_.auth_error;
      } else {
        ++security_.malformed;
      }
      trace(r.spec.id, "rekey_rejected", {{"error", to_string(key.error())}});
      return;
    }
    auto installed = r.state.keyring.install(*key, now_, sc_.protocol.grace_window);
    if (installed) {
      on_epoch_installed(r, key->epoch);
      trace(r.spec.id, "rekey_installed", {{"epoch", key->epoch}});
    } else {
      ++security_.stale_epoch;
      trace(r.spec.id, "rekey_stale", {{"epoch", key->epoch}, {"current", r.state.keyring.current_epoch()}});
    }
    const bkeys::RekeyAck ack{r.spec.id, r.state.keyring.current_epoch()};
    enqueue(r, TxItem{bkeys::encode(ack), gcs_id_, TxKind::Ack, std::nullopt});
  }

  void gcs_on_ack(const Arrival& a) {
    auto ack = bkeys::decode_ack(a.wire);
    if (!ack) {
      ++security_.malformed;
      return;
    }
    ++key_metrics_.acks_received;
    auto& acked = acked_[ack->uav];
    acked = std::max(acked, ack->epoch);
  }

  // ---- application traffic --------------------------------------------

  void traffic_tick(NodeId id, SimDuration period) {
    auto& n = node(id);
    if (!n.up || now_ > sc_.traffic_stop()) return;
    emit_frames(n);
    at(now_ + period, [this, id, period] { traffic_tick(id, period); });
  }

  void emit_frames(NodeRt& n) {
    const auto& t = sc_.traffic;
    const auto count = n.traffic_rng.uniform_int(t.messages_min, t.messages_max);
    std::vector<codec::TelemetryMessage> messages;
    for (std::uint64_t i = 0; i < count; ++i) {
      codec::TelemetryMessage m;
      m.msg_id = static_cast<std::uint8_t>(n.traffic_rng.uniform_int(0, 255));
      m.source = n.spec.id;
      m.payload.resize(n.traffic_rng.uniform_int(t.payload_min, t.payload_max));
      n.traffic_rng.fill(m.payload);
      messages.push_back(std::move(m));
    }
    auto frames = codec::compose_frames(messages, min_mtu_);
    if (!frames) {
      ++n.send_failures;
      return;
    }
    for (const auto& frame : *frames) {
      ++n.frames_offered;
      ++offered_[n.spec.id];
      for (const auto& m : frame.messages) overhead_.payload += m.payload.size();
      originate_frame(n, frame);
    }
  }

  void originate_frame(NodeRt& n, const codec::Frame& frame) {
    const bool star = sc_.mode == mesh::TopologyMode::Star;
    if (star && n.spec.role == Role::Gcs) {
      auto unicasts = mesh::star_originate(n.state, relay_, sessions_, frame);
      const FrameKey fk{n.spec.id, n.state.next_seq - 1};
      record_truth(fk, frame);
      if (unicasts.empty()) {
        ++n.send_failures;
        trace(n.spec.id, "send_failed", {{"error", "NoSession"}});
      }
      for (auto& u : unicasts) {
        if (const auto* s = sessions_.session(u.to)) audit_seal(s->key, u.packet.nonce());
        enqueue(n, TxItem{u.packet.encode(), u.to, TxKind::Data, std::nullopt});
      }
      return;
    }

    auto packet = mesh::originate(n.state, frame, sc_.protocol.hop_limit);
    if (!packet) {
      ++n.send_failures;
      trace(n.spec.id, "send_failed", {{"error", to_string(packet.error())}});
      return;
    }
    record_truth(FrameKey{n.spec.id, packet->header.seq}, frame);
    if (!star && n.state.keyring.current()) audit_seal(n.state.keyring.current()->key, packet->nonce());
    if (star && n.state.session_key) audit_seal(*n.state.session_key, packet->nonce());
    enqueue(n, TxItem{packet->encode(), star ? std::optional<NodeId>(gcs_id_) : std::nullopt, TxKind::Data,
                      std::nullopt});
  }

  void record_truth(const FrameKey& fk, const codec::Frame& frame) {
    truth_[fk] = frame.serialize();
    frames_[fk].created = now_;
  }

  void audit_seal(const crypto::SymmetricKey& key, const crypto::Nonce& nonce) {
    if (!sc_.protocol.encryption) return;
    if (!seals_.emplace(key.bytes, nonce).second) ++nonce_reuse_;
  }

  // ---- transmit queue --------------------------------------------------

  void enqueue(NodeRt& n, TxItem item) {
    ++cons_.tx_enqueued;
    if (!n.up) {
      ++cons_.tx_dropped_node_down;
      if (item.kind == TxKind::Rekey && item.dest) --rekeys_queued_[*item.dest];
      return;
    }
    n.queue.push_back(std::move(item));
    pump(n);
  }

  double selection_distance(const NodeRt& n, const TxItem& item) {
    if (item.dest) return links::distance(n.spec.position, node(*item.dest).spec.position);
    double best_up = links::kUnboundedRange;
    double best_any = links::kUnboundedRange;
    for (const auto& other : nodes_) {
      if (other.get() == &n) continue;
      const double d = links::distance(n.spec.position, other->spec.position);
      best_any = std::min(best_any, d);
      if (other->up) best_up = std::min(best_up, d);
    }
    return std::isfinite(best_up) ? best_up : best_any;
  }

  void release_after(NodeRt& n, SimTime t) {
    n.busy = true;
    NodeRt* p = &n;
    at(t, [this, p] {
      p->busy = false;
      pump(*p);
    });
  }

  void pump(NodeRt& n) {
    if (!n.up || n.busy || n.queue.empty()) return;
    TxItem& item = n.queue.front();

    auto chosen = n.selector.select(selection_distance(n, item), now_);
    if (!chosen) {
      trace(n.spec.id, "no_viable_link");
      release_after(n, now_ + kNoLinkRetry);
      return;
    }
    const std::size_t link = *chosen;
    if (n.last_link && *n.last_link != link) {
      trace(n.spec.id, "link_switch", {{"from", profiles_[*n.last_link].name}, {"to", profiles_[link].name},
                                       {"queued", n.queue.size()}});
    }
    n.last_link = link;
    const auto& profile = profiles_[link];

    std::vector<links::Receiver> receivers;
    for (const auto& other : nodes_) {
      if (other.get() == &n) continue;
      receivers.push_back({other->spec.id, links::distance(n.spec.position, other->spec.position)});
    }

    auto* meter = n.meters[link] ? &*n.meters[link] : nullptr;
    auto result = links::transmit(profile, n.spec.id, item.wire.size(), receivers, now_, n.loss_rng, meter);
    if (!result) {
      // Oversized for this link: nothing the queue can do about it.
      trace(n.spec.id, "tx_dropped", {{"error", to_string(result.error())}, {"bytes", item.wire.size()}});
      ++cons_.tx_dropped_oversize;
      finish_item(n);
      pump(n);
      return;
    }
    if (!result->sent()) {
      ++n.deferrals[link];
      ++cons_.tx_duty_deferrals;
      trace(n.spec.id, "tx_deferred", {{"link", profile.name}, {"until", result->deferred_until.count()}});
      release_after(n, result->deferred_until);
      return;
    }

    if (meter != nullptr) n.airtime[link].push_back({now_, result->airtime});
    ++n.transmissions;
    ++n.tx_by_link[link];
    ++cons_.tx_sent;
    cons_.rx_candidates += receivers.size();
    cons_.rx_out_of_range += result->out_of_range.size();
    cons_.rx_loss_dropped += result->lost.size();

    const bool data = item.kind == TxKind::Data || item.kind == TxKind::Forward;
    switch (item.kind) {
      case TxKind::Handshake: overhead_.handshake += item.wire.size(); break;
      case TxKind::Rekey:
      case TxKind::Ack: overhead_.rekey += item.wire.size(); break;
      default: overhead_.data_wire += item.wire.size(); break;
    }
    if (data) {
      if (auto pkt = codec::WirePacket::decode(item.wire)) {
        ++frames_[FrameKey{pkt->header.origin, pkt->header.seq}].transmissions;
      }
      observe_data(n, item, link);
    }

    std::size_t delivered_to_dest = 0;
    for (const auto& d : result->deliveries) {
      Arrival a{item.wire, n.spec.id, item.dest, link, std::nullopt, std::nullopt};
      if (item.dest && d.to == *item.dest) {
        if (item.kind == TxKind::Rekey && scripted_drop(*item.dest, *item.rekey_epoch)) {
          ++cons_.rx_loss_dropped;
          trace(n.spec.id, "rekey_dropped", {{"uav", raw(d.to)}, {"epoch", *item.rekey_epoch}});
          continue;
        }
        ++delivered_to_dest;
        if (item.kind == TxKind::Handshake) intercept_handshake(a);
      }
      schedule_arrival(d.to, d.arrival, std::move(a));
    }

    if (item.dest) {
      n.selector.report(link, delivered_to_dest > 0 ? 1.0 : 0.0);
    } else {
      const std::size_t heard = result->deliveries.size() + result->lost.size();
      if (heard > 0) n.selector.report(link, static_cast<double>(result->deliveries.size()) / static_cast<double>(heard));
    }

    trace(n.spec.id, "tx", {{"kind", kind_name(item.kind)}, {"link", profile.name}, {"bytes", item.wire.size()},
                            {"dest", item.dest ? ojson(raw(*item.dest)) : ojson(nullptr)},
                            {"delivered", result->deliveries.size()}, {"lost", result->lost.size()}});

    const SimTime done = now_ + result->airtime;
    finish_item(n);
    release_after(n, done);
  }

  void finish_item(NodeRt& n) {
    const TxItem& item = n.queue.front();
    if (item.kind == TxKind::Rekey && item.dest) --rekeys_queued_[*item.dest];
    n.queue.pop_front();
  }

  bool scripted_drop(NodeId uav, std::uint32_t epoch) const {
    return std::any_of(sc_.rekey_drops.begin(), sc_.rekey_drops.end(),
                       [&](const RekeyDrop& d) { return d.uav == uav && d.epoch == epoch; });
  }

  void schedule_arrival(NodeId to, SimTime t, Arrival a) {
    ++cons_.rx_scheduled;
    ++in_flight_;
    at(t, [this, to, a = std::move(a)] { arrive(to, a); });
  }

  // ---- adversaries -------------------------------------------------------

  void intercept_handshake(Arrival& a) {
    const auto type = static_cast<MsgType>(a.wire[0]);
    for (std::size_t i = 0; i < adversaries_.size(); ++i) {
      auto& adv = adversaries_[i];
      if (!adv.mitm || !adv.spec->active_at(now_)) continue;
      if (!adv.spec->targets(a.from) && !(a.dest && adv.spec->targets(*a.dest))) continue;
      if ((type == MsgType::KeyOffer && !adv.spec->substitute_offers) ||
          (type == MsgType::KeyResponse && !adv.spec->substitute_responses)) {
        adv.mitm->observe(a.wire);
        continue;
      }
      a.wire = adv.mitm->intercept(a.wire);
      a.substituted_by = i;
      trace(a.from, "mitm_substitute", {{"adversary", i}, {"type", type == MsgType::KeyOffer ? "offer" : "response"}});
      return;
    }
  }

  void observe_data(const NodeRt& n, const TxItem& item, std::size_t link) {
    for (std::size_t i = 0; i < adversaries_.size(); ++i) {
      auto& adv = adversaries_[i];
      if (!adv.spec->active_at(now_) || !adv.spec->targets(n.spec.id)) continue;
      if (adv.spec->kind == AdversaryKind::Eavesdrop) {
        adv.observed.push_back(item.wire);
      } else if (adv.replay) {
        if (auto inj = adv.replay->observe(item.wire, n.spec.id, item.dest, link, now_, adv.rng)) {
          ++adv.replay_score.recorded;
          at(inj->at, [this, i, inj = std::move(*inj)] { inject(i, adversary::replay_inject(inj, now_)); });
        }
      }
    }
  }

  void inject(std::size_t idx, const adversary::Injection& inj) {
    auto& adv = adversaries_[idx];
    ++adv.replay_score.injected;
    const auto& profile = profiles_[inj.link];
    const auto& origin_pos = node(inj.original_sender).spec.position;
    const SimTime arrival = now_ + profile.base_latency + links::airtime(profile, inj.wire.size());
    trace(inj.original_sender, "replay_inject", {{"adversary", idx}, {"bytes", inj.wire.size()}});
    for (const auto& other : nodes_) {
      const NodeId id = other->spec.id;
      if (id == inj.original_sender) continue;
      if (inj.dest && id != *inj.dest) continue;
      if (!links::in_range(origin_pos, other->spec.position, profile)) continue;
      ++injected_rx_;
      schedule_arrival(id, arrival, Arrival{inj.wire, inj.original_sender, inj.dest, inj.link, idx, std::nullopt});
    }
  }

  // ---- receive path ------------------------------------------------------

  void arrive(NodeId to, const Arrival& a) {
    --in_flight_;
    auto& r = node(to);
    if (!r.up) {
      ++cons_.rx_receiver_down;
      return;
    }
    ++cons_.rx_processed;
    if (a.dest && *a.dest != to) return;
    if (a.wire.empty()) {
      ++security_.malformed;
      return;
    }
    const bool at_gcs = r.spec.role == Role::Gcs;
    switch (a.wire[0]) {
      case static_cast<std::uint8_t>(MsgType::KeyOffer):
        if (!at_gcs) uav_on_offer(r, a);
        return;
      case static_cast<std::uint8_t>(MsgType::KeyResponse):
        if (at_gcs) gcs_on_response(a);
        return;
      case static_cast<std::uint8_t>(MsgType::Rekey):
        if (!at_gcs) uav_on_rekey(r, a);
        return;
      case static_cast<std::uint8_t>(MsgType::RekeyAck):
        if (at_gcs) gcs_on_ack(a);
        return;
      case codec::kVersion:
        on_data(r, a);
        return;
      default:
        ++security_.malformed;
        return;
    }
  }

  void on_data(NodeRt& r, const Arrival& a) {
    auto packet = codec::WirePacket::decode(a.wire);
    if (!packet) {
      classify(r, mesh::RxStatus::Malformed, a);
      return;
    }
    const FrameKey fk{packet->header.origin, packet->header.seq};

    if (sc_.mode == mesh::TopologyMode::Star && r.spec.role == Role::Gcs) {
      auto out = mesh::star_forward(r.state, relay_, sessions_, *packet);
      classify(r, out.status, a);
      if (out.deliver) deliver(r, fk, a);
      for (auto& u : out.relays) {
        if (const auto* s = sessions_.session(u.to)) audit_seal(s->key, u.packet.nonce());
        enqueue(r, TxItem{u.packet.encode(), u.to, TxKind::Forward, std::nullopt});
      }
      return;
    }

    auto out = mesh::handle_rx(r.state, *packet, now_);
    classify(r, out.status, a);
    if (out.deliver) deliver(r, fk, a);
    if (out.forward) {
      SimDuration jitter{};
      if (sc_.protocol.forward_jitter_max > SimDuration::zero()) {
        jitter = SimDuration(static_cast<std::int64_t>(
            r.jitter_rng.uniform_int(0, static_cast<std::uint64_t>(sc_.protocol.forward_jitter_max.count()))));
      }
      NodeRt* p = &r;
      at(now_ + jitter, [this, p, wire = out.forward->encode()]() mutable {
        enqueue(*p, TxItem{std::move(wire), std::nullopt, TxKind::Forward, std::nullopt});
      });
    }
  }

  void classify(const NodeRt& r, mesh::RxStatus status, const Arrival& a) {
    ReplayScore* rs = a.injected_by ? &adversaries_[*a.injected_by].replay_score : nullptr;
    if (rs != nullptr) ++rs->receptions;
    switch (status) {
      case mesh::RxStatus::Delivered: break;
      case mesh::RxStatus::Duplicate:
        if (rs != nullptr) {
          ++rs->rejected_duplicate;
          ++security_.replay_error;
        } else {
          ++security_.duplicates_suppressed;
        }
        break;
      case mesh::RxStatus::ReplayError:
        ++security_.replay_error;
        if (rs != nullptr) ++rs->rejected_window;
        break;
      case mesh::RxStatus::UnknownEpoch:
        ++security_.unknown_epoch;
        if (rs != nullptr) ++rs->rejected_unknown_epoch;
        break;
      case mesh::RxStatus::AuthError:
        ++security_.auth_error;
        if (rs != nullptr) ++rs->rejected_other;
        break;
      case mesh::RxStatus::Malformed:
        ++security_.malformed;
        if (rs != nullptr) ++rs->rejected_other;
        break;
    }
    if (status != mesh::RxStatus::Delivered && status != mesh::RxStatus::Duplicate) {
      trace(r.spec.id, "rx_rejected", {{"from", raw(a.from)}, {"status", mesh::to_string(status)},
                                       {"injected", a.injected_by.has_value()}});
    }
  }

  void deliver(const NodeRt& r, const FrameKey& fk, const Arrival& a) {
    auto& ft = frames_[fk];
    auto& count = ft.deliveries[r.spec.id];
    ++count;
    ReplayScore* rs = a.injected_by ? &adversaries_[*a.injected_by].replay_score : nullptr;
    if (count > 1) {
      ++security_.duplicate_deliveries;
      if (rs != nullptr) ++rs->duplicate_deliveries;
      return;
    }
    if (rs != nullptr) ++rs->accepted_first_copy;
    ++delivered_[{fk.first, r.spec.id}];
    const double latency = to_seconds(now_ - ft.created);
    latencies_.push_back(latency);
    if (is_uav(fk.first) && r.spec.role == Role::Uav) uav_latencies_.push_back(latency);
    trace(r.spec.id, "deliver", {{"origin", raw(fk.first)}, {"seq", fk.second}, {"latency_ns", (now_ - ft.created).count()}});
  }

  // ---- scripted events ---------------------------------------------------

  void fail_node(NodeId id) {
    auto& n = node(id);
    if (!n.up) return;
    n.up = false;
    cons_.tx_dropped_node_down += n.queue.size();
    for (const auto& item : n.queue) {
      if (item.kind == TxKind::Rekey && item.dest) --rekeys_queued_[*item.dest];
    }
    n.queue.clear();
    trace(id, "node_failed");
  }

  void apply_link_event(const LinkEvent& e) {
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
      if (profiles_[i].name != e.link) continue;
      if (e.loss_prob) profiles_[i].loss_prob = *e.loss_prob;
      if (e.range_m) profiles_[i].range_m = *e.range_m;
      for (auto& n : nodes_) n->selector.update_profile(i, profiles_[i]);
      ojson detail{{"link", e.link}};
      detail["loss_prob"] = profiles_[i].loss_prob;
      detail["range_m"] = std::isfinite(profiles_[i].range_m) ? ojson(profiles_[i].range_m) : ojson("unbounded");
      trace(gcs_id_, "link_event", std::move(detail));
    }
  }

  // ---- report ------------------------------------------------------------

  static LatencyStats stats(std::vector<double> samples) {
    LatencyStats s;
    s.samples = samples.size();
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    double sum = 0;
    for (double v : samples) sum += v;
    s.mean_s = sum / static_cast<double>(samples.size());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples.size())));
    s.p95_s = samples[std::max<std::size_t>(rank, 1) - 1];
    return s;
  }

  RunResult finish() {
    RunResult out;
    MetricsReport& rep = out.report;
    rep.scenario = sc_.name;
    rep.seed = sc_.seed;
    rep.mode = std::string(mesh::to_string(sc_.mode));
    rep.duration_s = to_seconds(sc_.duration);
    rep.encryption = sc_.protocol.encryption;
    rep.events_processed = events_;

    std::uint64_t all_offered = 0, all_delivered = 0, uu_offered = 0, uu_delivered = 0;
    for (const auto& from : nodes_) {
      for (const auto& to : nodes_) {
        if (from == to) continue;
        PairMetrics p;
        p.from = from->spec.id;
        p.to = to->spec.id;
        p.offered = offered_[p.from];
        p.delivered = delivered_[{p.from, p.to}];
        if (p.offered > 0) p.delivery_ratio = static_cast<double>(p.delivered) / static_cast<double>(p.offered);
        all_offered += p.offered;
        all_delivered += p.delivered;
        if (from->spec.role == Role::Uav && to->spec.role == Role::Uav) {
          uu_offered += p.offered;
          uu_delivered += p.delivered;
        }
        rep.pairs.push_back(p);
      }
    }
    if (all_offered > 0) rep.delivery_ratio = static_cast<double>(all_delivered) / static_cast<double>(all_offered);
    if (uu_offered > 0) {
      rep.uav_to_uav_delivery_ratio = static_cast<double>(uu_delivered) / static_cast<double>(uu_offered);
    }
    rep.latency = stats(latencies_);
    rep.uav_to_uav_latency = stats(uav_latencies_);

    overhead_.control = overhead_.handshake + overhead_.rekey;
    if (overhead_.payload > 0) {
      overhead_.control_per_payload = static_cast<double>(overhead_.control) / static_cast<double>(overhead_.payload);
    }
    rep.overhead = overhead_;
    rep.security = security_;

    hs_metrics_.unreachable.assign(unreachable_.begin(), unreachable_.end());
    rep.handshake = hs_metrics_;

    key_metrics_.gcs_epoch = gcs_keys_.current ? gcs_keys_.current->epoch : 0;
    if (sc_.mode == mesh::TopologyMode::Mesh) {
      for (const auto& n : nodes_) {
        if (n->spec.role != Role::Uav || !n->up) continue;
        const auto e = n->state.keyring.current_epoch();
        key_metrics_.min_uav_epoch = key_metrics_.min_uav_epoch ? std::min(*key_metrics_.min_uav_epoch, e) : e;
      }
    }
    rep.keys = key_metrics_;

    std::uint64_t duty_violations = 0;
    for (const auto& n : nodes_) {
      NodeMetrics m;
      m.id = n->spec.id;
      m.role = n->spec.role;
      m.up_at_end = n->up;
      m.epoch = n->state.keyring.current_epoch();
      m.has_session = n->spec.role == Role::Gcs ? !sessions_.sessions().empty() : n->state.session_key.has_value();
      m.frames_offered = n->frames_offered;
      m.send_failures = n->send_failures;
      m.transmissions = n->transmissions;
      for (std::size_t i = 0; i < profiles_.size(); ++i) {
        m.transmissions_by_link[profiles_[i].name] = n->tx_by_link[i];
        if (!n->meters[i]) continue;
        DutyMetrics d;
        d.link = profiles_[i].name;
        SimDuration total{};
        for (const auto& rec : n->airtime[i]) total += rec.airtime;
        const auto& duty = n->meters[i]->duty();
        const SimDuration max_window = links::max_window_airtime(n->airtime[i], duty.window);
        d.airtime_s = to_seconds(total);
        d.max_window_airtime_s = to_seconds(max_window);
        d.budget_s = to_seconds(duty.budget());
        d.utilization = d.budget_s > 0 ? d.max_window_airtime_s / d.budget_s : 0.0;
        d.deferrals = n->deferrals[i];
        if (max_window > duty.budget()) ++duty_violations;
        m.duty.push_back(d);
      }
      m.link_switches = n->selector.switches();
      if (n->selector.active()) m.active_link = profiles_[*n->selector.active()].name;
      rep.link_switches += m.link_switches;
      rep.nodes.push_back(std::move(m));
    }

    for (auto& adv : adversaries_) {
      AdversaryOutcome o;
      o.kind = adv.spec->kind;
      o.target = adv.spec->target;
      if (adv.mitm) {
        adv.mitm_score.attempts = adv.mitm->attempts();
        for (const auto& k : installed_) {
          if (adv.mitm->knows(k.key)) ++adv.mitm_score.sessions_compromised;
        }
        o.mitm = adv.mitm_score;
      } else if (adv.replay) {
        o.replay = adv.replay_score;
      } else {
        std::map<std::uint32_t, crypto::SymmetricKey> leaked;
        for (auto e : adv.spec->leaked_epochs) {
          if (auto it = key_history_.find(e); it != key_history_.end()) leaked.emplace(e, it->second);
        }
        const auto r = adversary::eavesdrop_collect(adv.observed, leaked, truth_);
        EavesdropScore es;
        es.leaked_epochs = adv.spec->leaked_epochs;
        es.frames_observed = r.frames_observed;
        es.frames_recovered = r.frames_recovered;
        es.recovered_unleaked = r.recovered_unleaked;
        for (const auto& [e, c] : r.recovered_by_epoch) es.recovered_by_epoch[e] = c;
        if (!r.observed_by_epoch.empty()) es.max_observed_epoch = r.observed_by_epoch.rbegin()->first;
        o.eavesdrop = es;
      }
      rep.adversaries.push_back(std::move(o));
    }

    for (const auto& n : nodes_) cons_.tx_queued_at_end += n->queue.size();
    cons_.rx_in_flight_at_end = in_flight_;
    cons_.switch_losses = static_cast<std::int64_t>(cons_.tx_enqueued) -
                          static_cast<std::int64_t>(cons_.tx_sent + cons_.tx_queued_at_end +
                                                    cons_.tx_dropped_node_down + cons_.tx_dropped_oversize);
    Conservation c;
    c.tx_enqueued = cons_.tx_enqueued;
    c.tx_sent = cons_.tx_sent;
    c.tx_queued_at_end = cons_.tx_queued_at_end;
    c.tx_dropped_node_down = cons_.tx_dropped_node_down;
    c.tx_dropped_oversize = cons_.tx_dropped_oversize;
    c.tx_duty_deferrals = cons_.tx_duty_deferrals;
    c.switch_losses = cons_.switch_losses;
    c.rx_candidates = cons_.rx_candidates;
    c.rx_out_of_range = cons_.rx_out_of_range;
    c.rx_loss_dropped = cons_.rx_loss_dropped;
    c.rx_injected = injected_rx_;
    c.rx_scheduled = cons_.rx_scheduled;
    c.rx_processed = cons_.rx_processed;
    c.rx_receiver_down = cons_.rx_receiver_down;
    c.rx_in_flight_at_end = cons_.rx_in_flight_at_end;
    c.balanced = c.switch_losses == 0 &&
                 c.rx_scheduled == c.rx_processed + c.rx_receiver_down + c.rx_in_flight_at_end &&
                 c.rx_candidates + injected_rx_ == c.rx_out_of_range + c.rx_loss_dropped + c.rx_scheduled;
    rep.conservation = c;

    rep.audits.nonce_reuse = nonce_reuse_;
    rep.audits.clock_violations = clock_violations_;
    rep.audits.duty_violations = duty_violations;
    rep.audits.epoch_regressions = epoch_regressions_;
    rep.audits.passed = nonce_reuse_ == 0 && clock_violations_ == 0 && duty_violations == 0 &&
                        epoch_regressions_ == 0 && c.balanced && security_.duplicate_deliveries == 0;

    out.trace = std::move(trace_);
    out.frames = std::move(frames_);
    return out;
  }

  // ---- state ---------------------------------------------------------------

  struct Counters {
    std::uint64_t tx_enqueued = 0;
    std::uint64_t tx_sent = 0;
    std::uint64_t tx_queued_at_end = 0;
    std::uint64_t tx_dropped_node_down = 0;
    std::uint64_t tx_dropped_oversize = 0;
    std::uint64_t tx_duty_deferrals = 0;
    std::int64_t switch_losses = 0;
    std::uint64_t rx_candidates = 0;
    std::uint64_t rx_out_of_range = 0;
    std::uint64_t rx_loss_dropped = 0;
    std::uint64_t rx_scheduled = 0;
    std::uint64_t rx_processed = 0;
    std::uint64_t rx_receiver_down = 0;
    std::uint64_t rx_in_flight_at_end = 0;
  };

  const Scenario& sc_;
  bool tracing_;
  std::vector<links::LinkProfile> profiles_;
  Rng key_rng_;

  std::vector<std::unique_ptr<NodeRt>> nodes_;
  std::map<NodeId, std::size_t> index_;
  NodeId gcs_id_{};
  handshake::SwarmRoster roster_;
  std::size_t min_mtu_ = 0;

  handshake::SessionTable sessions_;
  bkeys::GcsKeyState gcs_keys_;
  mesh::StarRelay relay_;
  std::map<NodeId, int> attempts_;
  std::set<NodeId> unreachable_;
  std::map<NodeId, std::uint32_t> acked_;
  std::map<NodeId, SimTime> last_rekey_;
  std::map<NodeId, int> rekeys_queued_;
  std::map<std::uint32_t, crypto::SymmetricKey> key_history_;
  std::map<NodeId, std::uint32_t> last_epoch_;
  bool retransmit_running_ = false;

  std::vector<AdversaryRt> adversaries_;
  std::vector<InstalledKey> installed_;

  std::map<std::pair<SimTime, std::uint64_t>, std::function<void()>> queue_;
  std::uint64_t next_event_seq_ = 0;
  SimTime now_{};
  std::uint64_t events_ = 0;
  std::uint64_t in_flight_ = 0;
  std::uint64_t injected_rx_ = 0;

  std::map<NodeId, std::uint64_t> offered_;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> delivered_;
  std::map<FrameKey, Bytes> truth_;
  std::map<FrameKey, FrameTrace> frames_;
  std::vector<double> latencies_;
  std::vector<double> uav_latencies_;
  std::set<std::pair<ByteArray<crypto::kKeySize>, crypto::Nonce>> seals_;

  OverheadBytes overhead_;
  SecurityCounters security_;
  HandshakeMetrics hs_metrics_;
  KeyMetrics key_metrics_;
  Counters cons_;
  std::uint64_t nonce_reuse_ = 0;
  std::uint64_t clock_violations_ = 0;
  std::uint64_t epoch_regressions_ = 0;

  std::string trace_;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  validate(scenario);
  Simulator sim(scenario, options);
  return sim.run();
}

}  // namespace swarmlink::sim
