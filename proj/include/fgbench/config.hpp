#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <boost/property_tree/ptree.hpp>

#include "fgbench/harness.hpp"

namespace fgbench {

/// INI sections [run] [env] [policy] [likelihood] [sampler]; see README for keys.
using ConfigTree = boost::property_tree::ptree;

ConfigTree read_config_tree(const std::string& path);
ConfigTree parse_config_tree(std::istream& in);

/// Throws ConfigError on unknown sections, unknown keys or bad values.
ExperimentConfig build_config(const ConfigTree& tree);

ExperimentConfig load_config(const std::string& path);

/// Sets `key` ("section.key", or a bare key that only one section defines) to `value`.
void set_param(ConfigTree& tree, const std::string& key, const std::string& value);

/// Applies a display name such as "LinUCB", "MALATS" or "PFGSVRGLMCTS" to
/// the policy section.
void set_policy_by_name(ConfigTree& tree, const std::string& name);

/// Applies an environment name: linear-<d>d, logistic-<d>d or wheel-d<delta>.
void set_env_by_name(ConfigTree& tree, const std::string& name);

/// Stable text form of every field that affects results.
std::string canonical_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text);

std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace fgbench
