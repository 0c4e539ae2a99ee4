#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stbf/sim.hpp"

namespace stbf {

/// Parsed `key = value` lines; `#` starts a comment.
struct KeyValueDoc {
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };
  std::vector<Entry> entries;
};

KeyValueDoc parse_key_values(std::string_view text);

/// Applies one setting; throws ConfigError on unknown keys or bad values.
void apply_setting(SimConfig& cfg, std::string_view key, std::string_view value);

/// Builds an experiment from a config document. Recognizes `sweep.key`,
/// `sweep.values` (`;`-separated values of sweep.key) and repeated
/// `curve = label: k=v | k=v` lines on top of the SimConfig keys.
Experiment experiment_from_doc(const KeyValueDoc& doc, std::string name = "custom");
Experiment load_experiment(const std::string& path);

/// Documented keys with one-line descriptions.
std::vector<std::pair<std::string, std::string>> config_keys();

std::vector<double> parse_double_list(std::string_view text);

}  // namespace stbf
