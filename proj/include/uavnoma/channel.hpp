#pragma once

#include <optional>
#include <variant>

#include "uavnoma/rng.hpp"

namespace uavnoma {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool operator==(const Vec3&) const = default;
};

namespace channel {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

double dbm_to_watt(double dbm);
double db_to_linear(double db);
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

enum class Spectrum { MmWave, Sub6 };
enum class LinkKind { LoS, NLoS };
enum class LinkMode { AlwaysLoS, Expected, BernoulliPerStep, BernoulliPerEpisode };

/// Power-law path gain C_k d^-a_k.
struct MmWaveLoss {
  double intercept_los = 0.0;
  double intercept_nlos = 0.0;
  double exponent_los = 0.0;
  double exponent_nlos = 0.0;
};

/// Free-space gain with a mean excess loss per link kind.
struct Sub6Loss {
  double excess_los_db = 0.0;
  double excess_nlos_db = 0.0;
  double min_elevation_rad = 0.0;
};

/// Physical constants of one spectrum technology. All fields linear SI.
struct ChannelParams {
  double carrier_hz = 0.0;
  double tx_power_w = 0.0;
  double bandwidth_hz = 0.0;
  double noise_w = 0.0;
  double los_c = 0.0;  // LoS-probability parameters C and Y
  double los_y = 0.0;
  int n_uav = 1;
  int n_ue = 1;
  std::variant<MmWaveLoss, Sub6Loss> loss;

  Spectrum spectrum() const {
    return std::holds_alternative<MmWaveLoss>(loss) ? Spectrum::MmWave : Spectrum::Sub6;
  }

  /// 28 GHz column of the reference parameter table.
  static ChannelParams mmwave();
  /// 2 GHz column of the reference parameter table.
  static ChannelParams sub6();

  void validate() const;
};

/// arctan(h / r), pi/2 when the user is directly below. Requires h > 0.
double elevation_angle(Vec3 uav, Vec2 ue);

/// LoS probability at elevation theta (radians). For sub-6, theta below the
/// model's minimum angle throws; theta equal to it gives 0.
double los_probability(const ChannelParams& params, double theta);

/// Raises theta to the sub-6 model's minimum angle; identity for mmWave.
double clamp_to_model_range(const ChannelParams& params, double theta);

/// Per-antenna-pair linear gain at 3D distance d > 0.
double path_gain(const ChannelParams& params, LinkKind kind, double d);

/// G = N_UAV x N_UE.
double mimo_gain(int n_uav, int n_ue);

struct LinkGain {
  double gain = 0.0;
  LinkKind kind = LinkKind::LoS;
};

/// Composes LoS probability and path gain according to `mode`.
/// Bernoulli modes consume exactly one uniform draw when they sample.
LinkGain effective_gain(const ChannelParams& params, LinkMode mode, double theta, double d,
                        Rng& rng, std::optional<LinkKind> cached_kind = std::nullopt);

}  // namespace channel
}  // namespace uavnoma
