#include "twinrange/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <type_traits>

#include "twinrange/rng.hpp"

namespace twinrange::sim {

std::uint8_t DetectorId::encode() const {
  if (channel < 1 || channel > 128)
    throw std::invalid_argument("DetectorId: channel must be in [1, 128]");
  return static_cast<std::uint8_t>((side == Side::Idler ? 0x80 : 0x00) |
                                   (channel - 1));
}

DetectorId DetectorId::decode(std::uint8_t byte) {
  DetectorId id;
  id.side = (byte & 0x80) ? Side::Idler : Side::Signal;
  id.channel = (byte & 0x7f) + 1;
  return id;
}

void ChannelMap::validate() const {
  const int n = channels();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int v : partner) {
    if (v < 1 || v > n)
      throw std::invalid_argument("ChannelMap: partner out of range");
    if (seen[static_cast<std::size_t>(v - 1)])
      throw std::invalid_argument("ChannelMap: not a bijection");
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
}

ChannelMap ChannelMap::mirror(int n) {
  ChannelMap m;
  m.partner.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i)
    m.partner[static_cast<std::size_t>(i - 1)] = n + 1 - i;
  return m;
}

ChannelMap ChannelMap::identity(int n) {
  ChannelMap m;
  m.partner.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) m.partner[static_cast<std::size_t>(i - 1)] = i;
  return m;
}

int channel_assign(int signal_channel, int n) {
  if (signal_channel < 1 || signal_channel > n)
    throw std::invalid_argument("channel_assign: channel out of range");
  return n + 1 - signal_channel;
}

void ScenarioConfig::validate() const {
  params.validate();
  if (!(target_distance_m >= 0.0))
    throw std::invalid_argument("ScenarioConfig: target_distance_m must be >= 0");
  if (!(time_resolution_ps > 0.0))
    throw std::invalid_argument("ScenarioConfig: time_resolution_ps must be > 0");
  if (!(signal_background_rate >= 0.0))
    throw std::invalid_argument(
        "ScenarioConfig: signal_background_rate must be >= 0");
  if (params.channels > 128)
    throw std::invalid_argument(
        "ScenarioConfig: at most 128 channels fit the one-byte detector id");
  if (!channel_map.partner.empty()) {
    if (channel_map.channels() != params.channels)
      throw std::invalid_argument(
          "ScenarioConfig: channel_map size != params.channels");
    channel_map.validate();
  }
}

void DetectorConfig::validate() const {
  if (!(jitter_sigma_ps >= 0.0))
    throw std::invalid_argument("DetectorConfig: jitter_sigma_ps must be >= 0");
  if (!(dead_time_ps >= 0.0))
    throw std::invalid_argument("DetectorConfig: dead_time_ps must be >= 0");
  if (!(dark_rate >= 0.0))
    throw std::invalid_argument("DetectorConfig: dark_rate must be >= 0");
}

double jitter_sigma_from_fwhm(double fwhm_ps) {
  return fwhm_ps / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

namespace {

// Substream tags; the numeric values are part of the determinism contract.
enum StreamTag : std::uint64_t {
  kPairs = 0x70616972,        // "pair"
  kSinglesSignal = 0x73736967,
  kSinglesIdler = 0x73696431,
  kBackgroundIdler = 0x62676964,
  kBackgroundSignal = 0x62677367,
  kDarkBase = 0x6461726b0000ULL,  // + detector byte
};

struct Emitter {
  std::vector<TimeTag>& out;
  double resolution_s;
  std::int64_t limit_ticks;  // exclusive
  double jitter_sigma_s;

  void emit(double t_s, DetectorId id, Origin origin, rng::Stream& rng) {
    if (jitter_sigma_s > 0.0) t_s = rng.normal(t_s, jitter_sigma_s);
    if (t_s < 0.0) return;
    const auto ticks = static_cast<std::int64_t>(std::floor(t_s / resolution_s));
    if (ticks >= limit_ticks) return;
    out.push_back({ticks, id.encode(), static_cast<std::uint8_t>(origin)});
  }
};

}  // namespace

EventStream simulate(const ScenarioConfig& scenario,
                     const DetectorConfig& detectors, double duration_s) {
  scenario.validate();
  detectors.validate();
  if (!(duration_s > 0.0))
    throw std::invalid_argument("simulate: duration_s must be > 0");

  const auto& p = scenario.params;
  const int n = p.channels;
  const ChannelMap map = scenario.channel_map.partner.empty()
                             ? ChannelMap::mirror(n)
                             : scenario.channel_map;

  const double resolution_s = scenario.time_resolution_ps * 1e-12;
  const double delay_s = 2.0 * scenario.target_distance_m / kSpeedOfLight;
  const double jitter_s = detectors.jitter_sigma_ps * 1e-12;

  EventStream stream;
  stream.time_resolution_ps = scenario.time_resolution_ps;
  stream.duration_s = duration_s;
  stream.channels = n;
  stream.seed = scenario.seed;
  stream.config_hash = scenario.config_hash;

  const double total_rate =
      p.pair_rate * (1.0 + p.gain) + p.unpaired_rate * (1.0 + p.gain) +
      p.background_density * p.bandwidth_nm + scenario.signal_background_rate +
      2.0 * n * detectors.dark_rate;
  stream.tags.reserve(
      static_cast<std::size_t>(total_rate * duration_s * 1.05) + 64);

  Emitter emit{stream.tags, resolution_s,
               static_cast<std::int64_t>(std::floor(duration_s / resolution_s)),
               jitter_s};

  // Pair emissions: signal tag always, idler tag survives the probe arm with
  // probability Q and lands delay_s later on the partner channel.
  if (p.pair_rate > 0.0) {
    rng::Stream rng(rng::derive_seed(scenario.seed, kPairs));
    for (double t = rng.exponential(p.pair_rate); t < duration_s;
         t += rng.exponential(p.pair_rate)) {
      const int ch = static_cast<int>(rng.below(static_cast<std::uint64_t>(n))) + 1;
      emit.emit(t, {Side::Signal, ch}, Origin::Pair, rng);
      if (rng.uniform() < p.gain)
        emit.emit(t + delay_s, {Side::Idler, map(ch)}, Origin::Pair, rng);
    }
  }

  // Unpaired singles, local arm at full rate, probe arm attenuated by Q.
  if (p.unpaired_rate > 0.0) {
    rng::Stream rng(rng::derive_seed(scenario.seed, kSinglesSignal));
    for (double t = rng.exponential(p.unpaired_rate); t < duration_s;
         t += rng.exponential(p.unpaired_rate)) {
      const int ch = static_cast<int>(rng.below(static_cast<std::uint64_t>(n))) + 1;
      emit.emit(t, {Side::Signal, ch}, Origin::Single, rng);
    }
    const double idler_rate = p.unpaired_rate * p.gain;
    if (idler_rate > 0.0) {
      rng::Stream rng_i(rng::derive_seed(scenario.seed, kSinglesIdler));
      for (double t = rng_i.exponential(idler_rate); t < duration_s;
           t += rng_i.exponential(idler_rate)) {
        const int ch =
            static_cast<int>(rng_i.below(static_cast<std::uint64_t>(n))) + 1;
        emit.emit(t + delay_s, {Side::Idler, ch}, Origin::Single, rng_i);
      }
    }
  }

  // Background floods the probe-facing arm, spread uniformly over channels.
  const double bg_idler = p.background_density * p.bandwidth_nm;
  if (bg_idler > 0.0) {
    rng::Stream rng(rng::derive_seed(scenario.seed, kBackgroundIdler));
    for (double t = rng.exponential(bg_idler); t < duration_s;
         t += rng.exponential(bg_idler)) {
      const int ch = static_cast<int>(rng.below(static_cast<std::uint64_t>(n))) + 1;
      emit.emit(t, {Side::Idler, ch}, Origin::Background, rng);
    }
  }
  if (scenario.signal_background_rate > 0.0) {
    rng::Stream rng(rng::derive_seed(scenario.seed, kBackgroundSignal));
    for (double t = rng.exponential(scenario.signal_background_rate);
         t < duration_s; t += rng.exponential(scenario.signal_background_rate)) {
      const int ch = static_cast<int>(rng.below(static_cast<std::uint64_t>(n))) + 1;
      emit.emit(t, {Side::Signal, ch}, Origin::Background, rng);
    }
  }

  // Dark counts, one independent stream per detector.
  if (detectors.dark_rate > 0.0) {
    for (int side = 0; side < 2; ++side) {
      for (int ch = 1; ch <= n; ++ch) {
        const DetectorId id{static_cast<Side>(side), ch};
        rng::Stream rng(rng::derive_seed(scenario.seed, kDarkBase + id.encode()));
        for (double t = rng.exponential(detectors.dark_rate); t < duration_s;
             t += rng.exponential(detectors.dark_rate)) {
          emit.emit(t, id, Origin::Dark, rng);
        }
      }
    }
  }

  // Non-paralyzable dead time per detector.
  if (detectors.dead_time_ps > 0.0 && !stream.tags.empty()) {
    const auto dead_ticks = static_cast<std::int64_t>(
        std::ceil(detectors.dead_time_ps * 1e-12 / resolution_s));
    std::stable_sort(stream.tags.begin(), stream.tags.end(),
                     [](const TimeTag& a, const TimeTag& b) {
                       if (a.detector != b.detector) return a.detector < b.detector;
                       return a.ticks < b.ticks;
                     });
    std::vector<TimeTag> kept;
    kept.reserve(stream.tags.size());
    std::uint8_t cur = stream.tags.front().detector;
    std::int64_t open_from = std::numeric_limits<std::int64_t>::min();
    for (const TimeTag& tag : stream.tags) {
      if (tag.detector != cur) {
        cur = tag.detector;
        open_from = std::numeric_limits<std::int64_t>::min();
      }
      if (tag.ticks >= open_from) {
        kept.push_back(tag);
        open_from = tag.ticks + dead_ticks;
      }
    }
    stream.tags = std::move(kept);
  }

  std::stable_sort(stream.tags.begin(), stream.tags.end(),
                   [](const TimeTag& a, const TimeTag& b) {
                     if (a.ticks != b.ticks) return a.ticks < b.ticks;
                     if (a.detector != b.detector) return a.detector < b.detector;
                     return a.origin < b.origin;
                   });
  return stream;
}

namespace {

constexpr char kMagic[4] = {'T', 'W', 'T', 'G'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits;
  if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>) {
    std::memcpy(&bits, &value, 8);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>) {
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_binary(const EventStream& stream, std::ostream& out) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, stream.seed);
  put_le<std::uint64_t>(out, stream.config_hash);
  put_le<double>(out, stream.time_resolution_ps);
  put_le<double>(out, stream.duration_s);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stream.channels));
  put_le<std::uint64_t>(out, stream.tags.size());
  for (const TimeTag& t : stream.tags) {
    out.put(static_cast<char>(t.detector));
    put_le<std::int64_t>(out, t.ticks);
    out.put(static_cast<char>(t.origin));
  }
}

EventStream read_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("read_binary: bad magic");
  if (get_le<std::uint32_t>(in) != kVersion)
    throw std::runtime_error("read_binary: unsupported version");
  EventStream s;
  s.seed = get_le<std::uint64_t>(in);
  s.config_hash = get_le<std::uint64_t>(in);
  s.time_resolution_ps = get_le<double>(in);
  s.duration_s = get_le<double>(in);
  s.channels = static_cast<int>(get_le<std::uint32_t>(in));
  const std::uint64_t count = get_le<std::uint64_t>(in);
  s.tags.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    s.tags[i].detector = static_cast<std::uint8_t>(in.get());
    s.tags[i].ticks = get_le<std::int64_t>(in);
    s.tags[i].origin = static_cast<std::uint8_t>(in.get());
  }
  if (!in) throw std::runtime_error("read_binary: truncated stream");
  return s;
}

void write_csv(const EventStream& stream, std::ostream& out) {
  out << std::setprecision(17);
  out << "# config_hash=0x" << std::hex << std::setw(16) << std::setfill('0')
      << stream.config_hash << std::dec << std::setfill(' ') << " seed="
      << stream.seed << '\n';
  out << "detector,side,channel,ticks,time_ps,origin\n";
  static const char* origin_names[] = {"pair", "single", "background", "dark"};
  for (const TimeTag& t : stream.tags) {
    const DetectorId id = DetectorId::decode(t.detector);
    out << static_cast<int>(t.detector) << ','
        << (id.side == Side::Signal ? "signal" : "idler") << ',' << id.channel
        << ',' << t.ticks << ','
        << static_cast<double>(t.ticks) * stream.time_resolution_ps << ','
        << origin_names[t.origin & 3] << '\n';
  }
}

}  // namespace twinrange::sim
