#pragma once

// File formats, JSON reports and the command implementations behind the
// `gausschan` executable. Commands never throw; they return a report plus an
// exit code: 0 positive verdict, 1 negative verdict or domain error,
// 2 parse/IO error.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gausschan/channel.hpp"
#include "gausschan/semigroup.hpp"

namespace gausschan::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kTolEnv = "GAUSSCHAN_TOL";

/// Channel file contents before the CP check.
struct ChannelFile {
  int n = 0;
  RealMatrix x;
  RealMatrix y;
  std::string label;
};

struct GeneratorFile {
  int n = 0;
  RealMatrix a;
  RealMatrix b;
  RealMatrix h;
  std::string label;
};

/// All parsers throw Error(ParseError) on malformed input.
ChannelFile parse_channel(const Json& j);
ChannelFile read_channel_file(const std::filesystem::path& path);
GeneratorFile parse_generator(const Json& j);
GeneratorFile read_generator_file(const std::filesystem::path& path);

Json channel_to_json(const GaussianChannel& c, const std::string& label = {});
void write_json_file(const std::filesystem::path& path, const Json& j);

Json matrix_to_json(const RealMatrix& m);
Json matrix_to_json(const ComplexMatrix& m);
RealMatrix matrix_from_json(const Json& j, const char* what);

/// --tol if given, else $GAUSSCHAN_TOL, else the library default.
Tolerance resolve_tolerance(std::optional<double> flag);

struct Outcome {
  Json report;
  int exit_code = 0;
};

Outcome cmd_check(const std::filesystem::path& path, const Tolerance& tol);
Outcome cmd_compose(const std::filesystem::path& first, const std::filesystem::path& second,
                    const std::optional<std::filesystem::path>& out, const Tolerance& tol);
Outcome cmd_classify(const std::filesystem::path& path, const Tolerance& tol);
Outcome cmd_divide(const std::filesystem::path& path, std::optional<double> epsilon,
                   const std::optional<std::filesystem::path>& out_left,
                   const std::optional<std::filesystem::path>& out_right, const Tolerance& tol);
Outcome cmd_semigroup(const std::filesystem::path& path, const std::vector<double>& times,
                      const std::optional<std::filesystem::path>& out_dir, const Tolerance& tol);
Outcome cmd_embed_check(const std::filesystem::path& path, const Tolerance& tol);
/// check + classify over every *.json channel file in `dir`, in path order.
Outcome cmd_batch(const std::filesystem::path& dir, const Tolerance& tol);

/// Report for a library error; exit code 2 for ParseError, 1 otherwise.
Outcome error_outcome(const char* command, const Error& e);

/// Indented plain-text rendering of a report.
std::string render_human(const Json& report);

}  // namespace gausschan::cli
