#pragma once

// The `negotia` command line. Lives in the library so tests can drive it.

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "negotia/core.hpp"
#include "negotia/json.hpp"
#include "negotia/simulation.hpp"

namespace negotia {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

/// Parses and runs one subcommand. Never throws.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  Json counts = Json::object();
};

/// `<output>.manifest.json`.
std::filesystem::path manifest_path(const std::filesystem::path& output);
Json to_json(const RunManifest& m);
/// Writes the manifest next to every output. Digests are taken now.
void write_manifests(const RunManifest& m);

struct InteractiveResult {
  Dialogue transcript;
  std::size_t flags = 0;
  std::size_t accepted = 0;  // remediation picked
};

/// Human-in-the-loop session: the human plays `human`, `arena` plays the
/// counterpart. "/flag <text>" (seller only) asks `remediator` for a rewrite
/// and lets the human keep the original or take it; "/quit" ends early.
InteractiveResult interactive_session(Speaker human, Arena& arena, const Remediator& remediator,
                                      std::size_t max_turns, std::string id, std::istream& in, std::ostream& out);

}  // namespace negotia
