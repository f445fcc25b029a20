#include "uavnoma/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uavnoma::channel {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

ChannelParams ChannelParams::mmwave() {
  ChannelParams p;
  p.carrier_hz = 28e9;
  p.tx_power_w = dbm_to_watt(20.0);
  p.bandwidth_hz = 2e9;
  p.noise_w = dbm_to_watt(-84.0);
  p.los_c = 9.6117;
  p.los_y = 0.1581;
  p.n_uav = 8;
  p.n_ue = 8;
  p.loss = MmWaveLoss{std::pow(10.0, -6.4), std::pow(10.0, -7.2), 2.0, 2.92};
  return p;
}

ChannelParams ChannelParams::sub6() {
  ChannelParams p;
  p.carrier_hz = 2e9;
  p.tx_power_w = dbm_to_watt(30.0);
  p.bandwidth_hz = 50e6;
  p.noise_w = dbm_to_watt(-88.0);
  p.los_c = 0.6;
  p.los_y = 0.11;
  p.n_uav = 1;
  p.n_ue = 1;
  p.loss = Sub6Loss{1.0, 20.0, deg_to_rad(15.0)};
  return p;
}

void ChannelParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("channel: ") + what);
  };
  require(carrier_hz > 0.0, "carrier frequency must be positive");
  require(tx_power_w > 0.0, "transmit power must be positive");
  require(bandwidth_hz > 0.0, "bandwidth must be positive");
  require(noise_w > 0.0, "noise power must be positive");
  require(n_uav >= 1 && n_ue >= 1, "antenna counts must be >= 1");
  if (const auto* mm = std::get_if<MmWaveLoss>(&loss)) {
    require(mm->intercept_los > 0.0 && mm->intercept_nlos > 0.0, "path-loss intercepts must be positive");
    require(mm->exponent_los > 0.0 && mm->exponent_nlos > 0.0, "path-loss exponents must be positive");
  } else {
    const auto& s6 = std::get<Sub6Loss>(loss);
    require(s6.min_elevation_rad >= 0.0 && s6.min_elevation_rad < kPi / 2,
            "minimum elevation must lie in [0, pi/2)");
  }
}

double elevation_angle(Vec3 uav, Vec2 ue) {
  if (!(uav.z > 0.0)) throw std::domain_error("elevation_angle: UAV height must be positive");
  const double r = std::hypot(uav.x - ue.x, uav.y - ue.y);
  return std::atan2(uav.z, r);
}

double los_probability(const ChannelParams& params, double theta) {
  if (!(theta > 0.0) || theta > kPi / 2) {
    throw std::domain_error("los_probability: elevation must lie in (0, pi/2]");
  }
  const double deg = theta * 180.0 / kPi;
  if (params.spectrum() == Spectrum::MmWave) {
    return 1.0 / (1.0 + params.los_c * std::exp(-params.los_y * (deg - params.los_c)));
  }
  const auto& s6 = std::get<Sub6Loss>(params.loss);
  if (theta < s6.min_elevation_rad) {
    throw std::domain_error("los_probability: elevation below the sub-6 model's minimum angle");
  }
  const double base = deg - s6.min_elevation_rad * 180.0 / kPi;
  return std::clamp(params.los_c * std::pow(base, params.los_y), 0.0, 1.0);
}

double clamp_to_model_range(const ChannelParams& params, double theta) {
  if (const auto* s6 = std::get_if<Sub6Loss>(&params.loss)) {
    return std::max(theta, s6->min_elevation_rad);
  }
  return theta;
}

double path_gain(const ChannelParams& params, LinkKind kind, double d) {
  if (!(d > 0.0)) throw std::domain_error("path_gain: distance must be positive");
  const bool los = kind == LinkKind::LoS;
  if (const auto* mm = std::get_if<MmWaveLoss>(&params.loss)) {
    const double c = los ? mm->intercept_los : mm->intercept_nlos;
    const double a = los ? mm->exponent_los : mm->exponent_nlos;
    return c * std::pow(d, -a);
  }
  const auto& s6 = std::get<Sub6Loss>(params.loss);
  const double fs = kSpeedOfLight / (4.0 * kPi * params.carrier_hz * d);
  return fs * fs * std::pow(10.0, -0.1 * (los ? s6.excess_los_db : s6.excess_nlos_db));
}

double mimo_gain(int n_uav, int n_ue) {
  if (n_uav < 1 || n_ue < 1) throw std::invalid_argument("mimo_gain: antenna counts must be >= 1");
  return static_cast<double>(n_uav) * static_cast<double>(n_ue);
}

LinkGain effective_gain(const ChannelParams& params, LinkMode mode, double theta, double d,
                        Rng& rng, std::optional<LinkKind> cached_kind) {
  switch (mode) {
    case LinkMode::AlwaysLoS:
      return {path_gain(params, LinkKind::LoS, d), LinkKind::LoS};
    case LinkMode::Expected: {
      const double pr = los_probability(params, theta);
      const double g = pr * path_gain(params, LinkKind::LoS, d) +
                       (1.0 - pr) * path_gain(params, LinkKind::NLoS, d);
      return {g, pr >= 0.5 ? LinkKind::LoS : LinkKind::NLoS};
    }
    case LinkMode::BernoulliPerEpisode:
      if (cached_kind) return {path_gain(params, *cached_kind, d), *cached_kind};
      [[fallthrough]];
    case LinkMode::BernoulliPerStep: {
      const double pr = los_probability(params, theta);
      const LinkKind kind = rng.uniform() < pr ? LinkKind::LoS : LinkKind::NLoS;
      return {path_gain(params, kind, d), kind};
    }
  }
  throw std::invalid_argument("effective_gain: unknown link mode");
}

}  // namespace uavnoma::channel
