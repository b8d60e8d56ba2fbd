// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mdlab/mp_transforms.hpp"
#include "mdlab/serialize.hpp"
#include "mdlab/systems.hpp"

namespace mdlab::cli {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  int precision_bits = 256;
  std::string out;
  std::string config;
};

struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
};

struct CommandOutput {
  std::vector<Artifact> artifacts;
  /// One summary entry per result, each with a "provenance" field.
  Json results = Json::array();
  /// Artifacts go to a directory rather than a single file.
  bool directory = false;
};

using Handler = std::function<CommandOutput()>;
using HandlerMap = std::map<const CLI::App*, Handler>;

void register_commands(CLI::App& app, const Globals& globals, HandlerMap& handlers);

/// Summary of manifests; never throws on bad input files.
CommandOutput report(const std::vector<std::string>& manifests, const std::string& format);

// Input helpers.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
Json read_json_file(const std::string& path);
std::string dump(const Json& j);

/// "classical:D", "rademacher:N", "generalized:RATIO:D", "random:DENOM:D",
/// "unbalanced:D" or the path of a system JSON file.
OrthoSystem system_from_spec(const std::string& spec, std::uint64_t seed);
std::vector<Rational> rational_list(const std::string& text);
std::vector<long> long_list(const std::string& text);
/// "lo,hi;lo,hi".
SimpleSet simple_set_from_spec(const std::string& text);
/// Blocks separated by '|', or the path of a partition JSON file.
Partition partition_from_spec(const std::string& text);
/// "2^-k-1", "2^-k", "2^-E" or a rational, expanded to `count` values.
std::vector<Rational> eps_from_spec(const std::string& text, std::size_t count);

}  // namespace mdlab::cli
