#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qvote/common.hpp"
#include "qvote/protocol.hpp"

namespace qvote::coincidence {

inline constexpr int kChannels = 16;
inline constexpr int kAgents = 4;

struct TimestampEvent {
  std::uint64_t t_ps = 0;  // integer picoseconds; no floating-point ordering hazards
  std::uint8_t channel = 0;

  friend bool operator==(const TimestampEvent&, const TimestampEvent&) = default;
  friend bool operator<(const TimestampEvent& a, const TimestampEvent& b) {
    return a.t_ps != b.t_ps ? a.t_ps < b.t_ps : a.channel < b.channel;
  }
};

struct ChannelAssignment {
  int agent = 1;  // 1..4
  protocol::Basis basis = protocol::Basis::Computational;
  std::uint8_t outcome = 0;
};

// Bijection between the 16 detection channels and (agent, basis, outcome).
class ChannelMap {
 public:
  ChannelMap() : ChannelMap(agent_major()) {}
  explicit ChannelMap(std::array<ChannelAssignment, kChannels> table);

  // Default wiring: channel = (agent-1)*4 + 2*(basis==H) + outcome.
  static std::array<ChannelAssignment, kChannels> agent_major();

  const ChannelAssignment& decode(std::uint8_t channel) const;
  std::uint8_t encode(int agent, protocol::Basis basis, std::uint8_t outcome) const;

  std::string serialize() const;                 // compact header form
  static ChannelMap deserialize(const std::string& text);

 private:
  std::array<ChannelAssignment, kChannels> table_;
  std::array<std::uint8_t, kChannels> reverse_{};
};

struct StreamConfig {
  double pulse_rate_hz = 76e6;
  double fourfold_rate_hz = 0.3;
  double dark_rate_hz_per_channel = 300.0;
  double jitter_ps = 50.0;
  std::uint64_t window_ps = 1000;
  double duration_s = 10.0;

  void validate() const;
};

struct PlantedFourfold {
  std::uint64_t t_ps = 0;                        // pulse-grid emission time
  std::array<std::uint8_t, kAgents> channels{};  // one per agent
};

// Uniformly random channel pattern per agent (basis and outcome bits).
std::vector<PlantedFourfold> make_random_schedule(const StreamConfig& config,
                                                  const ChannelMap& map, std::uint64_t seed);

struct GeneratedStream {
  std::vector<TimestampEvent> events;  // sorted by (t, channel)
  std::vector<PlantedFourfold> truth;
};

// Planted fourfolds on the pulse grid with Gaussian jitter plus per-channel
// Poisson dark counts, merged and sorted.
GeneratedStream generate_stream(const StreamConfig& config,
                                const std::vector<PlantedFourfold>& schedule,
                                std::uint64_t seed);

struct FourfoldEvent {
  std::array<TimestampEvent, kAgents> by_agent{};  // index = agent - 1

  friend bool operator==(const FourfoldEvent&, const FourfoldEvent&) = default;
};

// Streaming anti-coincidence stage: drops every event that has another event
// of the same agent within the window. Memory is bounded by the events inside
// one window span; output order equals input order.
class VetoFilter {
 public:
  VetoFilter(std::uint64_t window_ps, const ChannelMap& map,
             std::function<void(const TimestampEvent&)> sink);
  void push(const TimestampEvent& e);
  void finish();

 private:
  void release_until(std::uint64_t t_ps);
  std::uint64_t window_;
  const ChannelMap& map_;
  std::function<void(const TimestampEvent&)> sink_;
  struct Pending {
    TimestampEvent event;
    int agent;
    bool dropped;
  };
  std::vector<Pending> buffer_;  // time-ordered
  std::size_t head_ = 0;
  std::optional<std::uint64_t> last_t_;
};

// Streaming fourfold stage: greedy earliest-first clusters of one event per
// agent with first-to-last span <= window.
class FourfoldFinder {
 public:
  FourfoldFinder(std::uint64_t window_ps, const ChannelMap& map,
                 std::function<void(const FourfoldEvent&)> sink);
  void push(const TimestampEvent& e);
  void finish();

 private:
  void resolve_heads(std::uint64_t horizon_ps, bool drain);
  std::uint64_t window_;
  const ChannelMap& map_;
  std::function<void(const FourfoldEvent&)> sink_;
  std::vector<TimestampEvent> buffer_;
  std::size_t head_ = 0;
};

// Convenience single-shot pipeline: veto then fourfold search.
std::vector<FourfoldEvent> find_fourfolds(const std::vector<TimestampEvent>& filtered,
                                          std::uint64_t window_ps,
                                          const ChannelMap& map = ChannelMap());
std::vector<TimestampEvent> veto_filter(const std::vector<TimestampEvent>& stream,
                                        std::uint64_t window_ps,
                                        const ChannelMap& map = ChannelMap());
std::vector<FourfoldEvent> run_pipeline(const std::vector<TimestampEvent>& stream,
                                        std::uint64_t window_ps,
                                        const ChannelMap& map = ChannelMap());

// Expected accidental k-fold rate for independent Poisson streams with a
// first-to-last span window: k * window^(k-1) * prod(rates).
double analytic_accidental_rate(const std::vector<double>& agent_rates_hz, double window_s);

// (basis, outcome) per agent as the protocol consumes them.
struct DecodedFourfold {
  std::array<protocol::Basis, kAgents> bases{};
  std::array<std::uint8_t, kAgents> outcomes{};
  std::uint64_t t_ps = 0;
};
DecodedFourfold decode_fourfold(const FourfoldEvent& e, const ChannelMap& map);

// --- stream file format -------------------------------------------------------
// One text header line: "QVSTREAM 1 window_ps=<w> map=<16 entries>\n"
// followed by packed little-endian records (u8 channel, u64 t_ps).
void write_stream_file(std::ostream& os, const std::vector<TimestampEvent>& events,
                       std::uint64_t window_ps, const ChannelMap& map);
struct StreamFile {
  std::vector<TimestampEvent> events;
  std::uint64_t window_ps = 0;
  ChannelMap map;
};
StreamFile read_stream_file(std::istream& is);

}  // namespace qvote::coincidence
