// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_internal.hpp"
#include "mdlab/digest.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/parallel.hpp"
#include "mdlab/rad_scalar.hpp"
#include "mdlab/version.hpp"

namespace mdlab::cli {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << content;
}

Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace {

constexpr int kSchemaVersion = 1;

// Options that do not change results and are left out of the config hash.
bool volatile_option(const std::string& name) {
  return name == "--threads" || name == "--out" || name == "--config" || name == "--help";
}

void collect_options(const CLI::App* app, Json& into) {
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->count() == 0) continue;
    const std::string name = opt->get_name(false, true);
    if (volatile_option(name)) continue;
    into[name] = opt->results();
  }
}

const CLI::App* selected_leaf(const CLI::App* app, std::vector<std::string>& path) {
  for (const CLI::App* sub : app->get_subcommands()) {
    path.push_back(sub->get_name());
    return selected_leaf(sub, path);
  }
  return app;
}

// {"schema_version": 1, "command": [...], "options": {...}} to argv.
std::vector<std::string> argv_from_config(const Json& c) {
  if (!c.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [k, v] : c.items())
    if (k != "schema_version" && k != "command" && k != "options" && k != "global")
      throw ValidationError("unknown config key '" + k + "'");
  if (!c.contains("schema_version") || c.at("schema_version") != kSchemaVersion)
    throw ValidationError("config schema_version must be " + std::to_string(kSchemaVersion));
  if (!c.contains("command") || !c.at("command").is_array() || c.at("command").empty())
    throw ValidationError("config needs a non-empty \"command\" array");
  std::vector<std::string> argv;
  auto add_options = [&](const Json& opts) {
    if (!opts.is_object()) throw ValidationError("config options must be an object");
    for (const auto& [k, v] : opts.items()) {
      const std::string flag = "--" + k;
      if (v.is_boolean()) {
        if (v.get<bool>()) argv.push_back(flag);
      } else if (v.is_array()) {
        argv.push_back(flag);
        for (const auto& x : v) argv.push_back(x.is_string() ? x.get<std::string>() : x.dump());
      } else {
        argv.push_back(flag);
        argv.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
  };
  if (c.contains("global")) add_options(c.at("global"));
  for (const auto& t : c.at("command")) {
    if (!t.is_string()) throw ValidationError("config command entries must be strings");
    argv.push_back(t.get<std::string>());
  }
  if (c.contains("options")) add_options(c.at("options"));
  return argv;
}

int exit_code_of(const std::exception_ptr& ep, std::ostream& err) {
  try {
    std::rethrow_exception(ep);
  } catch (const PrecisionError& e) {
    err << "precision error: " << e.what() << "\n";
    return kPrecision;
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const Json::exception& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Globals g;
  CLI::App app("Exact experiments on martingale differences, Haar systems and maximal partial sums",
               "mdlab");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  app.add_option("--precision-bits", g.precision_bits, "Largest MPFR precision for sign decisions")
      ->check(CLI::Range(64, 1 << 20))
      ->capture_default_str();
  app.add_option("--out", g.out, "Output file (or directory for multi-file commands)");
  app.add_option("--config", g.config, "JSON experiment config with schema_version");
  HandlerMap handlers;
  register_commands(app, g, handlers);

  std::vector<std::string> argv = args;
  try {
    // A config file supplies the whole command line; flags given next to it
    // (--threads, --out) are kept.
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config") {
        std::vector<std::string> rest;
        for (std::size_t k = 0; k < args.size(); ++k) {
          if (k == i || k == i + 1) continue;
          rest.push_back(args[k]);
        }
        argv = argv_from_config(read_json_file(args[i + 1]));
        argv.insert(argv.begin(), rest.begin(), rest.end());
        break;
      }
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "invalid command line: " << e.what() << "\n";
    return kValidation;
  } catch (...) {
    return exit_code_of(std::current_exception(), err);
  }

  std::vector<std::string> path;
  const CLI::App* leaf = selected_leaf(&app, path);
  const auto it = handlers.find(leaf);
  if (it == handlers.end()) {
    err << "invalid command line: incomplete command\n" << leaf->help();
    return kValidation;
  }

  const auto t0 = std::chrono::steady_clock::now();
  CommandOutput result;
  try {
    set_thread_count(g.threads);
    PrecisionPolicy policy = precision_policy();
    policy.max_bits = g.precision_bits;
    set_precision_policy(policy);
    result = it->second();
  } catch (...) {
    return exit_code_of(std::current_exception(), err);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json config{{"schema_version", kSchemaVersion}, {"command", path}};
  Json options = Json::object();
  collect_options(&app, options);
  for (const CLI::App* a = &app; a != leaf;) {
    a = a->get_subcommands().front();
    collect_options(a, options);
  }
  config["options"] = options;

  try {
    Json outputs = Json::array();
    if (g.out.empty()) {
      for (const auto& a : result.artifacts) out << a.content;
    } else {
      std::string manifest_path;
      if (result.directory) {
        fs::create_directories(g.out);
        for (const auto& a : result.artifacts) {
          const std::string p = (fs::path(g.out) / a.name).string();
          write_file(p, a.content);
          outputs.push_back(Json{{"path", p}, {"name", a.name}, {"sha256", sha256_hex(a.content)}});
        }
        manifest_path = (fs::path(g.out) / "manifest.json").string();
      } else {
        std::string all;
        for (const auto& a : result.artifacts) all += a.content;
        write_file(g.out, all);
        outputs.push_back(Json{{"path", g.out}, {"name", fs::path(g.out).filename().string()},
                               {"sha256", sha256_hex(all)}});
        manifest_path = g.out + ".manifest.json";
      }
      const Json manifest{{"schema_version", kSchemaVersion},
                          {"tool", "mdlab"},
                          {"version", std::string(kVersion)},
                          {"config", config},
                          {"config_hash", sha256_hex(config.dump())},
                          {"wall_time_s", wall},
                          {"threads", g.threads},
                          {"results", result.results},
                          {"outputs", outputs}};
      write_file(manifest_path, dump(manifest));
    }
  } catch (...) {
    return exit_code_of(std::current_exception(), err);
  }
  return kOk;
}

}  // namespace mdlab::cli
