#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uavnoma/harness.hpp"
#include "uavnoma/oracle.hpp"

namespace uavnoma::config {

/// Bad file, unknown key or unparsable value. The message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved key/value text, section.key -> value, one entry for every
/// known key. Values keep the text the user wrote so that a snapshot
/// reloads to bit-identical numbers.
class Resolved {
 public:
  /// INI text; `overrides` are "section.key=value" strings applied on top.
  static Resolved parse(std::string_view ini_text, const std::vector<std::string>& overrides = {});
  static Resolved load(const std::string& path, const std::vector<std::string>& overrides = {});

  void set(const std::string& dotted_key, const std::string& value);
  const std::string& get(const std::string& dotted_key) const;

  /// Canonical INI text of every key, in a fixed order.
  std::string snapshot() const;

  channel::ChannelParams channel() const;
  env::Scenario scenario() const;
  env::RewardWeights reward() const;
  harness::TrainConfig train() const;  // includes scenario, reward and seed
  std::uint64_t seed() const;

  int eval_steps() const;
  std::vector<double> sweep_points() const;
  std::size_t sweep_window() const;
  int sweep_eval_steps() const;
  std::size_t layout_count() const;
  int layout_steps() const;
  oracle::GridSpec grid() const;
  int baseline_steps() const;
  double baseline_alpha() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Hex SHA-1 of the text hashed as a git blob ("blob <size>\0" prefix).
std::string git_blob_hash(std::string_view text);

}  // namespace uavnoma::config
