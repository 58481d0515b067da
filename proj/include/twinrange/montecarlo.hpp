#pragma once
// Time-tag level Monte Carlo of the bench: homogeneous Poisson processes for
// pair emissions, unpaired singles, background and dark counts; probe-arm
// loss applied to everything that travels to the target and back; per-tag
// Gaussian timing jitter; quantization to the tagger resolution.
//
// Determinism contract: a given (seed, scenario, detectors, duration) yields
// a bit-identical tag stream. Every physical process draws from its own
// substream seeded from (master seed, stream tag), and the final merge order
// is a fixed sort.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "twinrange/snr_model.hpp"

namespace twinrange::sim {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

enum class Origin : std::uint8_t { Pair = 0, Single = 1, Background = 2, Dark = 3 };
enum class Side : std::uint8_t { Signal = 0, Idler = 1 };

// One byte on the wire: bit 7 = side, bits 0..6 = channel - 1.
struct DetectorId {
  Side side = Side::Signal;
  int channel = 1;  // 1-based

  std::uint8_t encode() const;
  static DetectorId decode(std::uint8_t byte);
  bool operator==(const DetectorId&) const = default;
};

struct TimeTag {
  std::int64_t ticks = 0;  // multiples of the tagger resolution
  std::uint8_t detector = 0;
  std::uint8_t origin = 0;
};

// Bijection channel -> partner channel. Energy conservation maps the k-th
// signal bin to the (n+1-k)-th idler bin when both arms use the same
// wavelength-ordered bin edges.
struct ChannelMap {
  std::vector<int> partner;  // partner[i-1] is the partner of channel i

  int operator()(int channel) const { return partner.at(channel - 1); }
  int channels() const { return static_cast<int>(partner.size()); }
  void validate() const;
  static ChannelMap mirror(int n);
  static ChannelMap identity(int n);
};

int channel_assign(int signal_channel, int n);  // the mirror rule: n + 1 - i

struct ScenarioConfig {
  snr::SystemParams params;       // rates, gain, channel count
  double target_distance_m = 0.0;
  double time_resolution_ps = 50.0;
  double signal_background_rate = 0.0;  // extra uniform rate on the local arm
  ChannelMap channel_map;               // empty -> mirror(params.channels)
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;  // stamped into outputs, not used otherwise

  void validate() const;
};

struct DetectorConfig {
  double jitter_sigma_ps = 0.0;
  double dead_time_ps = 0.0;  // non-paralyzable, 0 disables
  double dark_rate = 0.0;     // per detector

  void validate() const;
};

double jitter_sigma_from_fwhm(double fwhm_ps);

struct EventStream {
  std::vector<TimeTag> tags;  // sorted by (ticks, detector, origin)
  double time_resolution_ps = 50.0;
  double duration_s = 0.0;
  int channels = 1;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  double tick_seconds() const { return time_resolution_ps * 1e-12; }
};

EventStream simulate(const ScenarioConfig& scenario,
                     const DetectorConfig& detectors, double duration_s);

// Binary dump: fixed header, then per tag {detector u8, ticks i64 LE, origin
// u8}. See README for the exact header layout.
void write_binary(const EventStream& stream, std::ostream& out);
EventStream read_binary(std::istream& in);
void write_csv(const EventStream& stream, std::ostream& out);

}  // namespace twinrange::sim
