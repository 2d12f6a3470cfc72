#include "swarmlink/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace swarmlink::sim {

using nlohmann::json;

std::string_view to_string(AdversaryKind k) noexcept {
  switch (k) {
    case AdversaryKind::Eavesdrop: return "eavesdrop";
    case AdversaryKind::MitmKeySubstitution: return "mitm_key_substitution";
    case AdversaryKind::ReplayInjector: return "replay_injector";
  }
  return "eavesdrop";
}

const NodeSpec* Scenario::find(NodeId id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

NodeId Scenario::gcs_id() const {
  for (const auto& n : nodes) {
    if (n.role == Role::Gcs) return n.id;
  }
  throw std::logic_error("scenario has no GCS");
}

SimTime Scenario::traffic_stop() const {
  if (traffic.stop) return *traffic.stop;
  return duration - 1s;
}

namespace {

/// A JSON object being consumed; every key must be read exactly once or the
/// object is rejected as carrying unknown fields.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string field(std::string_view key) const { return path_ + "." + std::string(key); }

  const json* get(std::string_view key) {
    const std::string k(key);
    seen_.insert(k);
    auto it = j_.find(k);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const json& require(std::string_view key) {
    const json* v = get(key);
    if (v == nullptr) throw ValidationError(field(key), "is required");
    return *v;
  }

  double number(std::string_view key, double fallback) {
    const json* v = get(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ValidationError(field(key), "expected a number");
    return v->get<double>();
  }

  std::optional<double> opt_number(std::string_view key) {
    const json* v = get(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) throw ValidationError(field(key), "expected a number");
    return v->get<double>();
  }

  std::uint64_t uint(std::string_view key, std::uint64_t fallback,
                     std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
    const json* v = get(key);
    if (v == nullptr) return fallback;
    return as_uint(*v, field(key), max);
  }

  bool boolean(std::string_view key, bool fallback) {
    const json* v = get(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ValidationError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> opt_string(std::string_view key) {
    const json* v = get(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) throw ValidationError(field(key), "expected a string");
    return v->get<std::string>();
  }

  SimDuration seconds(std::string_view key, SimDuration fallback) {
    const auto v = opt_number(key);
    if (!v) return fallback;
    return to_time(*v, field(key));
  }

  std::optional<SimTime> opt_seconds(std::string_view key) {
    const auto v = opt_number(key);
    if (!v) return std::nullopt;
    return to_time(*v, field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) throw ValidationError(field(it.key()), "unknown field");
    }
  }

  static std::uint64_t as_uint(const json& v, const std::string& path, std::uint64_t max) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ValidationError(path, "expected a non-negative integer");
    }
    const auto u = v.get<std::uint64_t>();
    if (u > max) throw ValidationError(path, "must be at most " + std::to_string(max));
    return u;
  }

  static SimTime to_time(double s, const std::string& path) {
    if (!std::isfinite(s) || s < 0.0) throw ValidationError(path, "must be a finite non-negative number of seconds");
    if (s > 1e9) throw ValidationError(path, "is unreasonably large");
    return from_seconds(s);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

links::Position parse_position(const json& j, const std::string& path) {
  if (j.is_array()) {
    if (j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      throw ValidationError(path, "expected [x, y] in meters");
    }
    return {j[0].get<double>(), j[1].get<double>()};
  }
  Obj o(j, path);
  links::Position p{o.number("x", 0.0), o.number("y", 0.0)};
  o.finish();
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError(path, "coordinates must be finite");
  return p;
}

NodeId parse_node_ref(const json& j, const std::string& path) {
  return node_id(static_cast<std::uint16_t>(Obj::as_uint(j, path, 0xFFFF)));
}

NodeSpec parse_node(const json& j, const std::string& path) {
  Obj o(j, path);
  NodeSpec n;
  n.id = parse_node_ref(o.require("id"), o.field("id"));
  const auto role = o.opt_string("role").value_or("uav");
  if (role == "gcs") {
    n.role = Role::Gcs;
  } else if (role == "uav") {
    n.role = Role::Uav;
  } else {
    throw ValidationError(o.field("role"), "must be \"gcs\" or \"uav\"");
  }
  if (const json* p = o.get("position")) n.position = parse_position(*p, o.field("position"));
  if (const json* w = o.get("waypoints")) {
    if (!w->is_array()) throw ValidationError(o.field("waypoints"), "expected an array");
    for (std::size_t i = 0; i < w->size(); ++i) {
      Obj wo((*w)[i], o.field("waypoints") + "[" + std::to_string(i) + "]");
      Waypoint wp;
      wp.at = wo.seconds("t_s", SimTime{});
      wp.position = parse_position(wo.require("position"), wo.field("position"));
      wo.finish();
      n.waypoints.push_back(wp);
    }
  }
  n.offline = o.boolean("offline", false);
  n.fail_at = o.opt_seconds("fail_at_s");
  o.finish();
  return n;
}

links::LinkProfile parse_link(const json& j, const std::string& path) {
  Obj o(j, path);
  const auto band_name = o.opt_string("band");
  if (!band_name) throw ValidationError(o.field("band"), "is required");
  const auto band = links::band_from_string(*band_name);
  if (!band) throw ValidationError(o.field("band"), "must be one of subghz, wifi24, cellular");

  links::LinkProfile p = *band == links::Band::SubGHz   ? links::default_subghz()
                         : *band == links::Band::WiFi24 ? links::default_wifi24()
                                                        : links::default_cellular();
  if (auto name = o.opt_string("name")) p.name = *name;
  if (const json* r = o.get("range_m")) {
    if (r->is_string() && r->get<std::string>() == "unbounded") {
      p.range_m = links::kUnboundedRange;
    } else if (r->is_number()) {
      p.range_m = r->get<double>();
    } else {
      throw ValidationError(o.field("range_m"), "expected meters or \"unbounded\"");
    }
  }
  p.bitrate_bps = o.uint("bitrate_bps", p.bitrate_bps);
  p.base_latency = o.seconds("base_latency_s", p.base_latency);
  p.loss_prob = o.number("loss_prob", p.loss_prob);
  const auto limit = o.opt_number("duty_cycle_limit");
  const auto window = o.opt_seconds("duty_cycle_window_s");
  if (limit || window) {
    links::DutyCycle d = p.duty.value_or(links::DutyCycle{});
    if (limit) d.limit = *limit;
    if (window) d.window = *window;
    p.duty = d;
  }
  p.mtu_bytes = o.uint("mtu_bytes", p.mtu_bytes, 65535);
  o.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(path, e.what());
  }
  return p;
}

AdversarySpec parse_adversary(const json& j, const std::string& path) {
  Obj o(j, path);
  AdversarySpec a;
  const auto kind = o.opt_string("kind");
  if (!kind) throw ValidationError(o.field("kind"), "is required");
  if (*kind == "eavesdrop") {
    a.kind = AdversaryKind::Eavesdrop;
  } else if (*kind == "mitm_key_substitution") {
    a.kind = AdversaryKind::MitmKeySubstitution;
  } else if (*kind == "replay_injector") {
    a.kind = AdversaryKind::ReplayInjector;
  } else {
    throw ValidationError(o.field("kind"),
                          "must be one of eavesdrop, mitm_key_substitution, replay_injector");
  }
  if (const json* t = o.get("target")) {
    if (!(t->is_string() && t->get<std::string>() == "all")) a.target = parse_node_ref(*t, o.field("target"));
  }
  a.active_from = o.seconds("active_from_s", SimTime{});
  a.active_until = o.opt_seconds("active_until_s");
  if (const json* e = o.get("leaked_epochs")) {
    if (!e->is_array()) throw ValidationError(o.field("leaked_epochs"), "expected an array");
    for (std::size_t i = 0; i < e->size(); ++i) {
      a.leaked_epochs.push_back(static_cast<std::uint32_t>(
          Obj::as_uint((*e)[i], o.field("leaked_epochs") + "[" + std::to_string(i) + "]", 0xFFFFFFFF)));
    }
  }
  a.resign = o.boolean("resign", false);
  if (auto which = o.opt_string("substitute")) {
    if (*which == "offer") {
      a.substitute_responses = false;
    } else if (*which == "response") {
      a.substitute_offers = false;
    } else if (*which != "both") {
      throw ValidationError(o.field("substitute"), "must be one of offer, response, both");
    }
  }
  a.replay_delay = o.seconds("replay_delay_s", a.replay_delay);
  a.max_injections = o.uint("max_injections", a.max_injections);
  a.record_prob = o.number("record_prob", a.record_prob);
  o.finish();
  return a;
}

Scenario parse_document(const json& root) {
  Obj o(root, "$");
  Scenario s;
  if (auto name = o.opt_string("name")) s.name = *name;
  s.seed = o.uint("seed", 0);
  s.duration = o.seconds("duration_s", s.duration);
  if (auto mode = o.opt_string("mode")) {
    if (*mode == "mesh") {
      s.mode = mesh::TopologyMode::Mesh;
    } else if (*mode == "star") {
      s.mode = mesh::TopologyMode::Star;
    } else {
      throw ValidationError(o.field("mode"), "must be \"mesh\" or \"star\"");
    }
  }

  const json& nodes = o.require("nodes");
  if (!nodes.is_array()) throw ValidationError(o.field("nodes"), "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    s.nodes.push_back(parse_node(nodes[i], "$.nodes[" + std::to_string(i) + "]"));
  }

  if (const json* l = o.get("links")) {
    if (!l->is_array()) throw ValidationError(o.field("links"), "expected an array");
    s.links.clear();
    for (std::size_t i = 0; i < l->size(); ++i) {
      s.links.push_back(parse_link((*l)[i], "$.links[" + std::to_string(i) + "]"));
    }
  }

  if (const json* p = o.get("link_policy")) {
    Obj po(*p, o.field("link_policy"));
    s.link_policy.alpha = po.number("alpha", s.link_policy.alpha);
    s.link_policy.threshold = po.number("threshold", s.link_policy.threshold);
    s.link_policy.hysteresis = po.seconds("hysteresis_s", s.link_policy.hysteresis);
    s.link_policy.probe_interval = po.seconds("probe_interval_s", s.link_policy.probe_interval);
    s.link_policy.failover = po.boolean("failover", s.link_policy.failover);
    po.finish();
  }

  if (const json* ev = o.get("link_events")) {
    if (!ev->is_array()) throw ValidationError(o.field("link_events"), "expected an array");
    for (std::size_t i = 0; i < ev->size(); ++i) {
      Obj eo((*ev)[i], "$.link_events[" + std::to_string(i) + "]");
      LinkEvent e;
      e.at = eo.seconds("t_s", SimTime{});
      const auto link = eo.opt_string("link");
      if (!link) throw ValidationError(eo.field("link"), "is required");
      e.link = *link;
      e.loss_prob = eo.opt_number("loss_prob");
      e.range_m = eo.opt_number("range_m");
      eo.finish();
      s.link_events.push_back(std::move(e));
    }
  }

  if (const json* p = o.get("protocol")) {
    Obj po(*p, o.field("protocol"));
    auto& pr = s.protocol;
    pr.key_lifetime = po.seconds("key_lifetime_s", pr.key_lifetime);
    pr.grace_window = po.seconds("grace_window_s", pr.grace_window);
    pr.handshake_timeout = po.seconds("handshake_timeout_s", pr.handshake_timeout);
    pr.hop_limit = static_cast<std::uint8_t>(po.uint("hop_limit", pr.hop_limit, 255));
    pr.handshake_retries = static_cast<int>(po.uint("handshake_retries", static_cast<std::uint64_t>(pr.handshake_retries), 100));
    pr.rekey_retransmit = po.seconds("rekey_retransmit_s", pr.rekey_retransmit);
    pr.dedup_capacity = po.uint("dedup_capacity", pr.dedup_capacity);
    pr.forward_jitter_max = po.seconds("forward_jitter_max_s", pr.forward_jitter_max);
    pr.encryption = po.boolean("encryption", pr.encryption);
    pr.verify_signatures = po.boolean("verify_signatures", pr.verify_signatures);
    po.finish();
  }

  if (const json* t = o.get("traffic")) {
    Obj to(*t, o.field("traffic"));
    auto& tr = s.traffic;
    tr.uav_rate_hz = to.number("uav_rate_hz", tr.uav_rate_hz);
    tr.gcs_rate_hz = to.number("gcs_rate_hz", tr.gcs_rate_hz);
    tr.payload_min = to.uint("payload_min", tr.payload_min);
    tr.payload_max = to.uint("payload_max", tr.payload_max);
    tr.messages_min = to.uint("messages_min", tr.messages_min);
    tr.messages_max = to.uint("messages_max", tr.messages_max);
    tr.start = to.seconds("start_s", tr.start);
    tr.stop = to.opt_seconds("stop_s");
    to.finish();
  }

  if (const json* a = o.get("adversaries")) {
    if (!a->is_array()) throw ValidationError(o.field("adversaries"), "expected an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      s.adversaries.push_back(parse_adversary((*a)[i], "$.adversaries[" + std::to_string(i) + "]"));
    }
  }

  if (const json* d = o.get("rekey_drops")) {
    if (!d->is_array()) throw ValidationError(o.field("rekey_drops"), "expected an array");
    for (std::size_t i = 0; i < d->size(); ++i) {
      Obj dobj((*d)[i], "$.rekey_drops[" + std::to_string(i) + "]");
      RekeyDrop r;
      r.uav = parse_node_ref(dobj.require("uav"), dobj.field("uav"));
      r.epoch = static_cast<std::uint32_t>(dobj.uint("epoch", 0, 0xFFFFFFFF));
      dobj.finish();
      s.rekey_drops.push_back(r);
    }
  }

  o.finish();
  return s;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("$", std::string("invalid JSON: ") + e.what());
  }
  Scenario s = parse_document(root);
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading scenario file " + path.string());
  return parse_scenario(buf.str());
}

void validate(const Scenario& s) {
  if (s.duration <= SimDuration::zero()) throw ValidationError("$.duration_s", "must be positive");

  std::set<NodeId> ids;
  std::size_t gcs_count = 0;
  std::size_t uav_count = 0;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const auto& n = s.nodes[i];
    const std::string path = "$.nodes[" + std::to_string(i) + "]";
    if (!ids.insert(n.id).second) {
      throw ValidationError(path + ".id", "duplicate node id " + std::to_string(raw(n.id)));
    }
    (n.role == Role::Gcs ? gcs_count : uav_count)++;
    if (n.fail_at && *n.fail_at > s.duration) {
      throw ValidationError(path + ".fail_at_s", "is after the end of the run");
    }
    SimTime last{};
    for (std::size_t w = 0; w < n.waypoints.size(); ++w) {
      if (n.waypoints[w].at < last) {
        throw ValidationError(path + ".waypoints[" + std::to_string(w) + "].t_s", "waypoints must be in time order");
      }
      last = n.waypoints[w].at;
    }
  }
  if (gcs_count != 1) {
    throw ValidationError("$.nodes", "exactly one GCS node is required, found " + std::to_string(gcs_count));
  }
  if (uav_count == 0) throw ValidationError("$.nodes", "at least one UAV node is required");

  if (s.links.empty()) throw ValidationError("$.links", "at least one link profile is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < s.links.size(); ++i) {
    const std::string path = "$.links[" + std::to_string(i) + "]";
    if (!names.insert(s.links[i].name).second) {
      throw ValidationError(path + ".name", "duplicate link name '" + s.links[i].name + "'");
    }
    try {
      s.links[i].validate();
    } catch (const std::invalid_argument& e) {
      throw ValidationError(path, e.what());
    }
    if (s.links[i].mtu_bytes <= codec::kPacketOverhead + 1 + codec::kMessageOverhead) {
      throw ValidationError(path + ".mtu_bytes", "is too small to carry a telemetry frame");
    }
  }

  const auto& lp = s.link_policy;
  if (!(lp.alpha > 0.0 && lp.alpha <= 1.0)) throw ValidationError("$.link_policy.alpha", "must be in (0, 1]");
  if (!(lp.threshold >= 0.0 && lp.threshold <= 1.0)) {
    throw ValidationError("$.link_policy.threshold", "must be in [0, 1]");
  }

  for (std::size_t i = 0; i < s.link_events.size(); ++i) {
    const auto& e = s.link_events[i];
    const std::string path = "$.link_events[" + std::to_string(i) + "]";
    if (!names.contains(e.link)) throw ValidationError(path + ".link", "names no configured link '" + e.link + "'");
    if (e.loss_prob && !(*e.loss_prob >= 0.0 && *e.loss_prob <= 1.0)) {
      throw ValidationError(path + ".loss_prob", "must be in [0, 1]");
    }
    if (e.range_m && !(*e.range_m >= 0.0)) throw ValidationError(path + ".range_m", "must be non-negative");
  }

  const auto& p = s.protocol;
  if (p.key_lifetime <= SimDuration::zero()) throw ValidationError("$.protocol.key_lifetime_s", "must be positive");
  if (p.handshake_timeout <= SimDuration::zero()) {
    throw ValidationError("$.protocol.handshake_timeout_s", "must be positive");
  }
  if (p.rekey_retransmit <= SimDuration::zero()) {
    throw ValidationError("$.protocol.rekey_retransmit_s", "must be positive");
  }
  if (p.dedup_capacity == 0) throw ValidationError("$.protocol.dedup_capacity", "must be positive");

  const auto& t = s.traffic;
  if (!(t.uav_rate_hz >= 0.0 && t.uav_rate_hz <= 1000.0)) {
    throw ValidationError("$.traffic.uav_rate_hz", "must be in [0, 1000]");
  }
  if (!(t.gcs_rate_hz >= 0.0 && t.gcs_rate_hz <= 1000.0)) {
    throw ValidationError("$.traffic.gcs_rate_hz", "must be in [0, 1000]");
  }
  if (t.payload_max > codec::kMaxPayload) throw ValidationError("$.traffic.payload_max", "must be at most 255");
  if (t.payload_min > t.payload_max) throw ValidationError("$.traffic.payload_min", "must not exceed payload_max");
  if (t.messages_min == 0) throw ValidationError("$.traffic.messages_min", "must be at least 1");
  if (t.messages_min > t.messages_max) {
    throw ValidationError("$.traffic.messages_min", "must not exceed messages_max");
  }
  if (t.messages_max > 255) throw ValidationError("$.traffic.messages_max", "must be at most 255");
  std::size_t min_mtu = s.links.front().mtu_bytes;
  for (const auto& l : s.links) min_mtu = std::min(min_mtu, l.mtu_bytes);
  if (codec::kPacketOverhead + 1 + codec::kMessageOverhead + t.payload_max > min_mtu) {
    throw ValidationError("$.traffic.payload_max",
                          "does not fit one message per packet on the smallest-MTU link (" +
                              std::to_string(min_mtu) + " bytes)");
  }

  for (std::size_t i = 0; i < s.adversaries.size(); ++i) {
    const auto& a = s.adversaries[i];
    const std::string path = "$.adversaries[" + std::to_string(i) + "]";
    if (a.target && !ids.contains(*a.target)) {
      throw ValidationError(path + ".target", "names no node " + std::to_string(raw(*a.target)));
    }
    if (a.active_until && *a.active_until < a.active_from) {
      throw ValidationError(path + ".active_until_s", "precedes active_from_s");
    }
    if (!(a.record_prob >= 0.0 && a.record_prob <= 1.0)) {
      throw ValidationError(path + ".record_prob", "must be in [0, 1]");
    }
    if (a.kind != AdversaryKind::Eavesdrop && !a.leaked_epochs.empty()) {
      throw ValidationError(path + ".leaked_epochs", "only applies to eavesdrop adversaries");
    }
    for (auto e : a.leaked_epochs) {
      if (e == 0) throw ValidationError(path + ".leaked_epochs", "broadcast epochs start at 1");
    }
  }

  for (std::size_t i = 0; i < s.rekey_drops.size(); ++i) {
    const auto* n = s.find(s.rekey_drops[i].uav);
    if (n == nullptr || n->role != Role::Uav) {
      throw ValidationError("$.rekey_drops[" + std::to_string(i) + "].uav", "must name a UAV");
    }
  }
}

}  // namespace swarmlink::sim
