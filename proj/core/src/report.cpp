#include <sstream>

#include "json.hpp"
#include "swarmlink/simulator.hpp"

namespace swarmlink::sim {

namespace {

using ojson = nlohmann::ordered_json;

template <typename T>
ojson opt(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

ojson opt_node(const std::optional<NodeId>& v) { return v ? ojson(raw(*v)) : ojson("all"); }

ojson latency_json(const LatencyStats& s) {
  return ojson{{"samples", s.samples}, {"mean_s", opt(s.mean_s)}, {"p95_s", opt(s.p95_s)}};
}

ojson epoch_map(const std::map<std::uint32_t, std::uint64_t>& m) {
  ojson out = ojson::object();
  for (const auto& [epoch, count] : m) out[std::to_string(epoch)] = count;
  return out;
}

ojson adversary_json(const AdversaryOutcome& a) {
  ojson j{{"kind", to_string(a.kind)}, {"target", opt_node(a.target)}};
  if (a.mitm) {
    j["mitm"] = ojson{{"attempts", a.mitm->attempts},
                      {"signature_errors", a.mitm->signature_errors},
                      {"sessions_compromised", a.mitm->sessions_compromised}};
  } else {
    j["mitm"] = nullptr;
  }
  if (a.replay) {
    const auto& r = *a.replay;
    j["replay"] = ojson{{"recorded", r.recorded},
                        {"injected", r.injected},
                        {"receptions", r.receptions},
                        {"rejected_duplicate", r.rejected_duplicate},
                        {"rejected_window", r.rejected_window},
                        {"rejected_unknown_epoch", r.rejected_unknown_epoch},
                        {"rejected_other", r.rejected_other},
                        {"accepted_first_copy", r.accepted_first_copy},
                        {"duplicate_deliveries", r.duplicate_deliveries}};
  } else {
    j["replay"] = nullptr;
  }
  if (a.eavesdrop) {
    const auto& e = *a.eavesdrop;
    j["eavesdrop"] = ojson{{"leaked_epochs", e.leaked_epochs},
                           {"frames_observed", e.frames_observed},
                           {"frames_recovered", e.frames_recovered},
                           {"recovered_unleaked", e.recovered_unleaked},
                           {"recovered_by_epoch", epoch_map(e.recovered_by_epoch)},
                           {"max_observed_epoch", opt(e.max_observed_epoch)}};
  } else {
    j["eavesdrop"] = nullptr;
  }
  return j;
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
  ojson j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["mode"] = r.mode;
  j["duration_s"] = r.duration_s;
  j["encryption"] = r.encryption;
  j["events_processed"] = r.events_processed;
  j["delivery_ratio"] = opt(r.delivery_ratio);
  j["uav_to_uav_delivery_ratio"] = opt(r.uav_to_uav_delivery_ratio);
  j["latency"] = latency_json(r.latency);
  j["uav_to_uav_latency"] = latency_json(r.uav_to_uav_latency);

  ojson pairs = ojson::array();
  for (const auto& p : r.pairs) {
    pairs.push_back(ojson{{"from", raw(p.from)},
                          {"to", raw(p.to)},
                          {"offered", p.offered},
                          {"delivered", p.delivered},
                          {"delivery_ratio", opt(p.delivery_ratio)}});
  }
  j["pairs"] = std::move(pairs);

  const auto& o = r.overhead;
  j["overhead_bytes"] = ojson{{"handshake", o.handshake},
                              {"rekey", o.rekey},
                              {"control", o.control},
                              {"data_wire", o.data_wire},
                              {"payload", o.payload},
                              {"control_per_payload", opt(o.control_per_payload)}};

  const auto& s = r.security;
  j["security"] = ojson{{"auth_error", s.auth_error},
                        {"replay_error", s.replay_error},
                        {"signature_error", s.signature_error},
                        {"stale_epoch", s.stale_epoch},
                        {"unknown_epoch", s.unknown_epoch},
                        {"malformed", s.malformed},
                        {"unknown_handshake", s.unknown_handshake},
                        {"duplicates_suppressed", s.duplicates_suppressed},
                        {"duplicate_deliveries", s.duplicate_deliveries}};

  ojson unreachable = ojson::array();
  for (auto id : r.handshake.unreachable) unreachable.push_back(raw(id));
  j["handshake"] = ojson{{"attempts", r.handshake.attempts},
                         {"sessions_established", r.handshake.sessions_established},
                         {"unreachable", std::move(unreachable)}};

  const auto& k = r.keys;
  j["keys"] = ojson{{"gcs_epoch", k.gcs_epoch},
                    {"rotations", k.rotations},
                    {"rekeys_sent", k.rekeys_sent},
                    {"rekey_retransmissions", k.rekey_retransmissions},
                    {"acks_received", k.acks_received},
                    {"min_uav_epoch", opt(k.min_uav_epoch)}};

  ojson nodes = ojson::array();
  for (const auto& n : r.nodes) {
    ojson duty = ojson::array();
    for (const auto& d : n.duty) {
      duty.push_back(ojson{{"link", d.link},
                           {"airtime_s", d.airtime_s},
                           {"max_window_airtime_s", d.max_window_airtime_s},
                           {"budget_s", d.budget_s},
                           {"utilization", d.utilization},
                           {"deferrals", d.deferrals}});
    }
    ojson by_link = ojson::object();
    for (const auto& [name, count] : n.transmissions_by_link) by_link[name] = count;
    nodes.push_back(ojson{{"id", raw(n.id)},
                          {"role", n.role == Role::Gcs ? "gcs" : "uav"},
                          {"up_at_end", n.up_at_end},
                          {"epoch", n.epoch},
                          {"has_session", n.has_session},
                          {"frames_offered", n.frames_offered},
                          {"send_failures", n.send_failures},
                          {"transmissions", n.transmissions},
                          {"transmissions_by_link", std::move(by_link)},
                          {"duty_cycle", std::move(duty)},
                          {"link_switches", n.link_switches},
                          {"active_link", opt(n.active_link)}});
  }
  j["nodes"] = std::move(nodes);

  ojson advs = ojson::array();
  for (const auto& a : r.adversaries) advs.push_back(adversary_json(a));
  j["adversaries"] = std::move(advs);

  const auto& c = r.conservation;
  j["conservation"] = ojson{{"tx_enqueued", c.tx_enqueued},
                            {"tx_sent", c.tx_sent},
                            {"tx_queued_at_end", c.tx_queued_at_end},
                            {"tx_dropped_node_down", c.tx_dropped_node_down},
                            {"tx_dropped_oversize", c.tx_dropped_oversize},
                            {"tx_duty_deferrals", c.tx_duty_deferrals},
                            {"switch_losses", c.switch_losses},
                            {"rx_candidates", c.rx_candidates},
                            {"rx_out_of_range", c.rx_out_of_range},
                            {"rx_loss_dropped", c.rx_loss_dropped},
                            {"rx_injected", c.rx_injected},
                            {"rx_scheduled", c.rx_scheduled},
                            {"rx_processed", c.rx_processed},
                            {"rx_receiver_down", c.rx_receiver_down},
                            {"rx_in_flight_at_end", c.rx_in_flight_at_end},
                            {"balanced", c.balanced}};

  const auto& a = r.audits;
  j["audits"] = ojson{{"nonce_reuse", a.nonce_reuse},
                      {"clock_violations", a.clock_violations},
                      {"duty_violations", a.duty_violations},
                      {"epoch_regressions", a.epoch_regressions},
                      {"passed", a.passed}};
  j["link_switches"] = r.link_switches;
  return j.dump(2) + "\n";
}

std::string report_to_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "scenario,seed,mode,from,to,offered,delivered,delivery_ratio\n";
  for (const auto& p : r.pairs) {
    out << r.scenario << ',' << r.seed << ',' << r.mode << ',' << raw(p.from) << ',' << raw(p.to) << ','
        << p.offered << ',' << p.delivered << ',';
    if (p.delivery_ratio) out << ojson(*p.delivery_ratio).dump();
    out << '\n';
  }
  return out.str();
}

}  // namespace swarmlink::sim
