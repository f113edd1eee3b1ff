#include "qvote/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "qvote/rng.hpp"

namespace qvote::coincidence {

using protocol::Basis;

ChannelMap::ChannelMap(std::array<ChannelAssignment, kChannels> table) : table_(table) {
  std::array<bool, kChannels> seen{};
  for (int ch = 0; ch < kChannels; ++ch) {
    const ChannelAssignment& a = table_[ch];
    if (a.agent < 1 || a.agent > kAgents || a.outcome > 1) {
      throw ContractViolation("invalid channel assignment");
    }
    const int key = (a.agent - 1) * 4 + (a.basis == Basis::Hadamard ? 2 : 0) + a.outcome;
    if (seen[key]) throw ContractViolation("channel map is not a bijection");
    seen[key] = true;
    reverse_[key] = static_cast<std::uint8_t>(ch);
  }
}

std::array<ChannelAssignment, kChannels> ChannelMap::agent_major() {
  std::array<ChannelAssignment, kChannels> t;
  for (int agent = 1; agent <= kAgents; ++agent) {
    for (int b = 0; b < 2; ++b) {
      for (int o = 0; o < 2; ++o) {
        t[(agent - 1) * 4 + b * 2 + o] = {
            agent, b ? Basis::Hadamard : Basis::Computational, static_cast<std::uint8_t>(o)};
      }
    }
  }
  return t;
}

const ChannelAssignment& ChannelMap::decode(std::uint8_t channel) const {
  if (channel >= kChannels) throw ContractViolation("channel out of range");
  return table_[channel];
}

std::uint8_t ChannelMap::encode(int agent, Basis basis, std::uint8_t outcome) const {
  if (agent < 1 || agent > kAgents || outcome > 1) {
    throw ContractViolation("invalid (agent, basis, outcome)");
  }
  return reverse_[(agent - 1) * 4 + (basis == Basis::Hadamard ? 2 : 0) + outcome];
}

std::string ChannelMap::serialize() const {
  std::ostringstream os;
  for (int ch = 0; ch < kChannels; ++ch) {
    const ChannelAssignment& a = table_[ch];
    if (ch) os << ',';
    os << a.agent << protocol::basis_char(a.basis) << int(a.outcome);
  }
  return os.str();
}

ChannelMap ChannelMap::deserialize(const std::string& text) {
  std::array<ChannelAssignment, kChannels> t;
  std::istringstream is(text);
  std::string tok;
  int ch = 0;
  while (std::getline(is, tok, ',')) {
    if (ch >= kChannels || tok.size() != 3) throw ContractViolation("bad channel map text");
    t[ch].agent = tok[0] - '0';
    t[ch].basis = protocol::basis_from_char(tok[1]);
    t[ch].outcome = static_cast<std::uint8_t>(tok[2] - '0');
    ++ch;
  }
  if (ch != kChannels) throw ContractViolation("channel map needs 16 entries");
  return ChannelMap(t);
}

void StreamConfig::validate() const {
  if (pulse_rate_hz <= 0 || fourfold_rate_hz < 0 || dark_rate_hz_per_channel < 0 ||
      jitter_ps < 0 || duration_s <= 0) {
    throw ContractViolation("stream rates/durations out of range");
  }
  if (window_ps == 0) throw ContractViolation("window must be positive");
}

std::vector<PlantedFourfold> make_random_schedule(const StreamConfig& config,
                                                  const ChannelMap& map, std::uint64_t seed) {
  config.validate();
  std::vector<PlantedFourfold> out;
  if (config.fourfold_rate_hz <= 0) return out;
  Rng rng(derive_seed(seed, "schedule"));
  const double pulse_ps = 1e12 / config.pulse_rate_hz;
  const double end_ps = config.duration_s * 1e12;
  double t = 0.0;
  while (true) {
    t += rng.exponential(config.fourfold_rate_hz) * 1e12;
    if (t >= end_ps) break;
    PlantedFourfold f;
    f.t_ps = static_cast<std::uint64_t>(std::llround(t / pulse_ps)) *
             static_cast<std::uint64_t>(std::llround(pulse_ps));
    for (int agent = 1; agent <= kAgents; ++agent) {
      const Basis b = rng.coin() ? Basis::Hadamard : Basis::Computational;
      const std::uint8_t o = static_cast<std::uint8_t>(rng.coin());
      f.channels[agent - 1] = map.encode(agent, b, o);
    }
    out.push_back(f);
  }
  return out;
}

GeneratedStream generate_stream(const StreamConfig& config,
                                const std::vector<PlantedFourfold>& schedule,
                                std::uint64_t seed) {
  config.validate();
  GeneratedStream out;
  out.truth = schedule;
  // Offset keeps jittered planted events away from t = 0.
  const std::uint64_t margin_ps = static_cast<std::uint64_t>(std::llround(config.jitter_ps * 20));
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    Rng rng(derive_seed(seed, "jitter", i));
    for (int a = 0; a < kAgents; ++a) {
      const double jit = rng.normal(0.0, config.jitter_ps);
      const double t = static_cast<double>(schedule[i].t_ps) + static_cast<double>(margin_ps) + jit;
      out.events.push_back(
          {static_cast<std::uint64_t>(std::llround(std::max(0.0, t))), schedule[i].channels[a]});
    }
  }
  if (config.dark_rate_hz_per_channel > 0) {
    const double end_ps = config.duration_s * 1e12 + static_cast<double>(margin_ps);
    for (int ch = 0; ch < kChannels; ++ch) {
      Rng rng(derive_seed(seed, "dark", ch));
      double t = 0.0;
      while (true) {
        t += rng.exponential(config.dark_rate_hz_per_channel) * 1e12;
        if (t >= end_ps) break;
        out.events.push_back(
            {static_cast<std::uint64_t>(std::llround(t)), static_cast<std::uint8_t>(ch)});
      }
    }
  }
  std::sort(out.events.begin(), out.events.end());
  return out;
}

VetoFilter::VetoFilter(std::uint64_t window_ps, const ChannelMap& map,
                       std::function<void(const TimestampEvent&)> sink)
    : window_(window_ps), map_(map), sink_(std::move(sink)) {
  if (window_ == 0) throw ContractViolation("window must be positive");
}

void VetoFilter::release_until(std::uint64_t t_ps) {
  while (head_ < buffer_.size() && buffer_[head_].event.t_ps < t_ps) {
    if (!buffer_[head_].dropped) sink_(buffer_[head_].event);
    ++head_;
  }
  if (head_ == buffer_.size()) {
    buffer_.clear();
    head_ = 0;
  } else if (head_ > 4096 && head_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
}

void VetoFilter::push(const TimestampEvent& e) {
  if (last_t_ && e.t_ps < *last_t_) throw ContractViolation("stream not sorted by time");
  last_t_ = e.t_ps;
  const std::uint64_t horizon = e.t_ps >= window_ ? e.t_ps - window_ : 0;
  release_until(horizon);
  const int agent = map_.decode(e.channel).agent;
  Pending p{e, agent, false};
  for (std::size_t i = head_; i < buffer_.size(); ++i) {
    // Everything still buffered is within the window of e.
    if (buffer_[i].agent == agent) {
      buffer_[i].dropped = true;
      p.dropped = true;
    }
  }
  buffer_.push_back(p);
}

void VetoFilter::finish() {
  release_until(~std::uint64_t(0));
  last_t_.reset();
}

FourfoldFinder::FourfoldFinder(std::uint64_t window_ps, const ChannelMap& map,
                               std::function<void(const FourfoldEvent&)> sink)
    : window_(window_ps), map_(map), sink_(std::move(sink)) {
  if (window_ == 0) throw ContractViolation("window must be positive");
}

void FourfoldFinder::resolve_heads(std::uint64_t horizon_ps, bool drain) {
  // The head's candidate set is complete once events beyond head.t + window
  // have arrived (or the stream ended).
  while (head_ < buffer_.size()) {
    const TimestampEvent& lead = buffer_[head_];
    if (!drain && horizon_ps <= lead.t_ps + window_) break;
    std::size_t end = head_ + 1;
    while (end < buffer_.size() && buffer_[end].t_ps <= lead.t_ps + window_) ++end;
    bool emit = end - head_ == kAgents;
    if (emit) {
      FourfoldEvent f;
      std::array<bool, kAgents> seen{};
      for (std::size_t i = head_; i < end; ++i) {
        const int agent = map_.decode(buffer_[i].channel).agent;
        if (seen[agent - 1]) {
          emit = false;
          break;
        }
        seen[agent - 1] = true;
        f.by_agent[agent - 1] = buffer_[i];
      }
      if (emit) {
        sink_(f);
        head_ = end;  // consume the whole cluster
        continue;
      }
    }
    ++head_;  // no fourfold anchored here; advance one event
  }
  if (head_ == buffer_.size()) {
    buffer_.clear();
    head_ = 0;
  } else if (head_ > 4096 && head_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
}

void FourfoldFinder::push(const TimestampEvent& e) {
  if (!buffer_.empty() && e.t_ps < buffer_.back().t_ps) {
    throw ContractViolation("stream not sorted by time");
  }
  buffer_.push_back(e);
  resolve_heads(e.t_ps, false);
}

void FourfoldFinder::finish() { resolve_heads(0, true); }

std::vector<TimestampEvent> veto_filter(const std::vector<TimestampEvent>& stream,
                                        std::uint64_t window_ps, const ChannelMap& map) {
  std::vector<TimestampEvent> out;
  VetoFilter stage(window_ps, map, [&](const TimestampEvent& e) { out.push_back(e); });
  for (const auto& e : stream) stage.push(e);
  stage.finish();
  return out;
}

std::vector<FourfoldEvent> find_fourfolds(const std::vector<TimestampEvent>& filtered,
                                          std::uint64_t window_ps, const ChannelMap& map) {
  std::vector<FourfoldEvent> out;
  FourfoldFinder stage(window_ps, map, [&](const FourfoldEvent& f) { out.push_back(f); });
  for (const auto& e : filtered) stage.push(e);
  stage.finish();
  return out;
}

std::vector<FourfoldEvent> run_pipeline(const std::vector<TimestampEvent>& stream,
                                        std::uint64_t window_ps, const ChannelMap& map) {
  std::vector<FourfoldEvent> out;
  FourfoldFinder finder(window_ps, map, [&](const FourfoldEvent& f) { out.push_back(f); });
  VetoFilter veto(window_ps, map, [&](const TimestampEvent& e) { finder.push(e); });
  for (const auto& e : stream) veto.push(e);
  veto.finish();
  finder.finish();
  return out;
}

double analytic_accidental_rate(const std::vector<double>& agent_rates_hz, double window_s) {
  if (agent_rates_hz.empty() || window_s <= 0) {
    throw ContractViolation("bad accidental-rate inputs");
  }
  const double k = static_cast<double>(agent_rates_hz.size());
  double prod = 1.0;
  for (double r : agent_rates_hz) prod *= r;
  return k * std::pow(window_s, k - 1.0) * prod;
}

DecodedFourfold decode_fourfold(const FourfoldEvent& e, const ChannelMap& map) {
  DecodedFourfold d;
  d.t_ps = e.by_agent[0].t_ps;
  for (int a = 0; a < kAgents; ++a) {
    const ChannelAssignment& ca = map.decode(e.by_agent[a].channel);
    if (ca.agent != a + 1) throw ContractViolation("fourfold channel belongs to wrong agent");
    d.bases[a] = ca.basis;
    d.outcomes[a] = ca.outcome;
    d.t_ps = std::min(d.t_ps, e.by_agent[a].t_ps);
  }
  return d;
}

void write_stream_file(std::ostream& os, const std::vector<TimestampEvent>& events,
                       std::uint64_t window_ps, const ChannelMap& map) {
  os << "QVSTREAM 1 window_ps=" << window_ps << " map=" << map.serialize() << "\n";
  for (const auto& e : events) {
    os.put(static_cast<char>(e.channel));
    std::uint64_t t = e.t_ps;
    char buf[8];
    for (int i = 0; i < 8; ++i) {
      buf[i] = static_cast<char>(t & 0xFF);
      t >>= 8;
    }
    os.write(buf, 8);
  }
}

StreamFile read_stream_file(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ContractViolation("missing stream header");
  std::istringstream hs(header);
  std::string magic, version, wfield, mfield;
  hs >> magic >> version >> wfield >> mfield;
  if (magic != "QVSTREAM" || version != "1" || wfield.rfind("window_ps=", 0) != 0 ||
      mfield.rfind("map=", 0) != 0) {
    throw ContractViolation("bad stream header");
  }
  StreamFile out;
  out.window_ps = std::stoull(wfield.substr(10));
  out.map = ChannelMap::deserialize(mfield.substr(4));
  char rec[9];
  while (is.read(rec, 9)) {
    TimestampEvent e;
    e.channel = static_cast<std::uint8_t>(rec[0]);
    std::uint64_t t = 0;
    for (int i = 7; i >= 0; --i) t = (t << 8) | static_cast<std::uint8_t>(rec[1 + i]);
    e.t_ps = t;
    out.events.push_back(e);
  }
  if (is.gcount() != 0) throw ContractViolation("truncated stream record");
  return out;
}

}  // namespace qvote::coincidence
