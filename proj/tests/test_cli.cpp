#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gausschan/cli.hpp"
#include "support.hpp"

using namespace gausschan;
using namespace testsupport;
namespace fs = std::filesystem;
using cli::Json;

namespace {

const fs::path kData = GAUSSCHAN_DATA_DIR;
fs::path channel(const char* name) { return kData / "channels" / name; }
fs::path generator(const char* name) { return kData / "generators" / name; }

struct Run {
  int code = -1;
  std::string out;
};

Run run_tool(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" GAUSSCHAN_TOOL "\" " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gausschan_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

ErrorKind parse_kind(const std::string& text) {
  try {
    cli::parse_channel(Json::parse(text));
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("channel file parsing rejects malformed input") {
  const char* good = R"({"schema_version":"1","n":1,"x":[[1,0],[0,1]],"y":[[0,0],[0,0]]})";
  CHECK_NOTHROW(cli::parse_channel(Json::parse(good)));
  CHECK(parse_kind(R"({"n":1,"x":[[1,0],[0,1]],"y":[[0,0],[0,0]]})") == ErrorKind::ParseError);
  CHECK(parse_kind(R"({"schema_version":"2","n":1,"x":[[1,0],[0,1]],"y":[[0,0],[0,0]]})") == ErrorKind::ParseError);
  CHECK(parse_kind(R"({"schema_version":"1","n":0,"x":[[1,0],[0,1]],"y":[[0,0],[0,0]]})") == ErrorKind::ParseError);
  CHECK(parse_kind(R"({"schema_version":"1","n":2,"x":[[1,0],[0,1]],"y":[[0,0],[0,0]]})") == ErrorKind::ParseError);
  CHECK(parse_kind(R"({"schema_version":"1","n":1,"x":[[1,0],[0]],"y":[[0,0],[0,0]]})") == ErrorKind::ParseError);
  CHECK(parse_kind(R"({"schema_version":"1","n":1,"x":[[1,"a"],[0,1]],"y":[[0,0],[0,0]]})") == ErrorKind::ParseError);
  CHECK(parse_kind(R"({"schema_version":"1","n":1,"x":[[1,0],[0,1]]})") == ErrorKind::ParseError);
  CHECK(parse_kind(R"({"schema_version":"1","n":1,"x":[[1,0],[0,1]],"y":[[0,0],[0,0]],"label":3})") ==
        ErrorKind::ParseError);
  CHECK(parse_kind("[1, 2]") == ErrorKind::ParseError);

  const fs::path huge = scratch("huge.json");
  write_text(huge, R"({"schema_version":"1","n":1,"x":[[1,0],[0,1]],"y":[[1e999,0],[0,0]]})");
  CHECK_THROWS_AS(cli::read_channel_file(huge), Error);
  CHECK(cli::cmd_check(huge, {}).exit_code == 2);
}

TEST_CASE("generator files validate their structure on load") {
  const auto g = cli::read_generator_file(generator("squeezing.json"));
  CHECK(g.n == 1);
  CHECK(g.b(0, 1) == 1.0);
  const auto bad = cli::cmd_semigroup(channel("identity.json"), {1.0}, std::nullopt, {});
  CHECK(bad.exit_code == 2);

  const fs::path p = scratch("not_antisymmetric.json");
  write_text(p, R"({"schema_version":"1","n":1,"a":[[1,0],[0,0]],"b":[[1,0],[0,1]],"h":[[0,0],[0,0]]})");
  const auto o = cli::cmd_semigroup(p, {1.0}, std::nullopt, {});
  CHECK(o.exit_code == 1);
  CHECK(o.report["error"]["kind"] == "NotAntisymmetric");
}

TEST_CASE("write then read reproduces matrices bit-exactly") {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const auto c = random_channel(rng, n);
    const fs::path p = scratch("roundtrip.json");
    cli::write_json_file(p, cli::channel_to_json(c, "random"));
    const auto f = cli::read_channel_file(p);
    CHECK(f.n == n);
    CHECK(f.label == "random");
    CHECK((f.x.array() == c.x().array()).all());
    CHECK((f.y.array() == c.y().array()).all());
  }
  // Extreme magnitudes and subnormals survive the decimal round trip.
  RealMatrix x(2, 2);
  x << 1e-310, -1.7976931348623157e308, 0.1, 1.0 / 3.0;
  CHECK((cli::matrix_from_json(Json::parse(cli::matrix_to_json(x).dump()), "x").array() == x.array()).all());
}

TEST_CASE("check") {
  const auto id = cli::cmd_check(channel("identity.json"), {});
  CHECK(id.exit_code == 0);
  CHECK(id.report["cp"]["verdict"] == true);
  CHECK(id.report["reversible"]["verdict"] == true);

  const auto att = cli::cmd_check(channel("attenuation_half.json"), {});
  CHECK(att.exit_code == 0);
  CHECK(att.report["reversible"]["verdict"] == false);

  const auto bad = cli::cmd_check(channel("invalid_negative_noise.json"), {});
  CHECK(bad.exit_code == 1);
  CHECK(bad.report["cp"]["verdict"] == false);
  CHECK(bad.report["cp"]["min_eigenvalue"].get<double>() < 0.0);

  const auto missing = cli::cmd_check(channel("no_such_file.json"), {});
  CHECK(missing.exit_code == 2);
  CHECK(missing.report["error"]["kind"] == "ParseError");
}

TEST_CASE("compose") {
  const fs::path out = scratch("composed.json");
  const auto o = cli::cmd_compose(channel("attenuation_half.json"), channel("attenuation_half.json"), out, {});
  CHECK(o.exit_code == 0);
  CHECK(o.report["order"].get<std::string>().find("second channel first") != std::string::npos);
  const auto f = cli::read_channel_file(out);
  CHECK(max_abs(f.x - 0.5 * RealMatrix::Identity(2, 2)) < 1e-15);
  CHECK(max_abs(f.y - 0.75 * RealMatrix::Identity(2, 2)) < 1e-15);
  CHECK(cli::cmd_check(out, {}).exit_code == 0);

  const auto id = cli::cmd_compose(channel("identity.json"), channel("mirror.json"), std::nullopt, {});
  const auto mirror = cli::read_channel_file(channel("mirror.json"));
  CHECK((cli::matrix_from_json(id.report["result"]["x"], "x").array() == mirror.x.array()).all());

  const auto mismatch = cli::cmd_compose(channel("identity.json"), channel("idempotent_k1.json"), std::nullopt, {});
  CHECK(mismatch.exit_code == 1);
  CHECK(mismatch.report["error"]["kind"] == "DimensionMismatch");

  Rng rng(52);
  for (int trial = 0; trial < 5; ++trial) {
    const fs::path a = scratch("rand_a.json"), b = scratch("rand_b.json"), c = scratch("rand_c.json");
    cli::write_json_file(a, cli::channel_to_json(random_channel(rng, 2)));
    cli::write_json_file(b, cli::channel_to_json(random_channel(rng, 2)));
    CHECK(cli::cmd_compose(a, b, c, Tolerance::uniform(1e-8)).exit_code == 0);
    CHECK(cli::cmd_check(c, Tolerance::uniform(1e-8)).exit_code == 0);
  }
}

TEST_CASE("classify") {
  const auto mirror = cli::cmd_classify(channel("mirror.json"), {});
  CHECK(mirror.exit_code == 0);
  CHECK(mirror.report["infinitesimal_divisibility"]["necessary_condition"] == false);
  CHECK(mirror.report["infinitesimal_divisibility"]["message"] == "det X < 0: not infinitesimal divisible");

  const auto idem = cli::cmd_classify(channel("idempotent_k1.json"), {});
  CHECK(idem.report["idempotent"]["verdict"] == true);
  CHECK(idem.report["idempotent"]["normal_form"]["k"] == 1);
  CHECK(idem.report["idempotent"]["normal_form"]["noise"][0].get<double>() == doctest::Approx(2.5));

  const auto att = cli::cmd_classify(channel("attenuation_half.json"), {});
  CHECK(att.report["gauge"]["covariant"] == true);
  CHECK(att.report["gauge"]["case"] == "contractive-with-invariant-state");
  CHECK(att.report["gauge"].contains("invariant_cov"));

  const auto sq = cli::cmd_classify(channel("squeezer.json"), {});
  CHECK(sq.report["gauge"]["covariant"] == false);
  CHECK(sq.report["embeddability"]["status"] == "yes");

  const auto neg = cli::cmd_classify(channel("negative_diag.json"), {});
  CHECK(neg.report["embeddability"]["status"] == "no");
  CHECK(neg.report["embeddability"].contains("jordan"));

  CHECK(cli::cmd_classify(channel("invalid_negative_noise.json"), {}).exit_code == 1);
}

TEST_CASE("divide") {
  const fs::path l = scratch("left.json"), r = scratch("right.json");
  const auto att = cli::cmd_divide(channel("attenuation_half.json"), std::nullopt, l, r, {});
  CHECK(att.exit_code == 0);
  CHECK(att.report["branch"] == "positive-split");
  CHECK(att.report["residual"].get<double>() <= 1e-8);
  CHECK(att.report["left"]["reversible"]["verdict"] == false);
  CHECK(att.report["right"]["reversible"]["verdict"] == false);
  CHECK(cli::cmd_check(l, {}).exit_code == 0);
  CHECK(cli::cmd_check(r, {}).exit_code == 0);

  const auto rev = cli::cmd_divide(channel("identity.json"), std::nullopt, std::nullopt, std::nullopt, {});
  CHECK(rev.exit_code == 1);
  CHECK(rev.report["error"]["kind"] == "Reversible");

  const auto rank = cli::cmd_divide(channel("rank_deficient.json"), std::nullopt, std::nullopt, std::nullopt, {});
  CHECK(rank.exit_code == 0);
  CHECK(rank.report["branch"] == "kernel-projector");

  const auto eps = cli::cmd_divide(channel("attenuation_half.json"), 0.25, std::nullopt, std::nullopt, {});
  CHECK(eps.report["epsilon"].get<double>() == 0.25);
}

TEST_CASE("semigroup") {
  const fs::path dir = scratch("evolve");
  fs::create_directories(dir);
  const auto att = cli::cmd_semigroup(generator("attenuation.json"), {0.0, 1.0}, dir, {});
  CHECK(att.exit_code == 0);
  const auto t0 = cli::read_channel_file(dir / "evolve_0.json");
  CHECK(max_abs(t0.x - RealMatrix::Identity(2, 2)) == 0.0);
  CHECK(max_abs(t0.y) == 0.0);
  const auto t1 = cli::read_channel_file(dir / "evolve_1.json");
  CHECK(max_abs(t1.x - std::exp(-1.0) * RealMatrix::Identity(2, 2)) < 1e-12);
  CHECK(max_abs(t1.y - (1 - std::exp(-2.0)) * RealMatrix::Identity(2, 2)) < 1e-12);
  CHECK(att.report["simple_form"]["exists"] == true);
  CHECK(att.report["simple_form"]["bounded_noise"] == true);
  CHECK(att.report["simple_form"]["invariant_state"].is_object());
  CHECK(att.report["lindblad"]["operators"]["re"].size() == 1);

  const auto sq = cli::cmd_semigroup(generator("squeezing.json"), {1.0}, std::nullopt, {});
  CHECK(sq.exit_code == 0);
  CHECK(sq.report["simple_form"]["exists"] == false);
  CHECK(sq.report["simple_form"]["note"].get<std::string>().find("no simple form") != std::string::npos);

  const auto amp = cli::cmd_semigroup(generator("amplification.json"), {1.0}, std::nullopt, {});
  CHECK(amp.report["simple_form"]["bounded_noise"] == false);
  CHECK(amp.report["simple_form"]["invariant_state"].is_null());

  const auto neg_t = cli::cmd_semigroup(generator("attenuation.json"), {-1.0}, std::nullopt, {});
  CHECK(neg_t.exit_code == 1);
}

TEST_CASE("embed-check") {
  const auto neg = cli::cmd_embed_check(channel("negative_diag.json"), {});
  CHECK(neg.exit_code == 1);
  CHECK(neg.report["embeddable_x"]["status"] == "no");
  CHECK(neg.report["embeddable_x"]["jordan"].size() == 2);

  const auto sq = cli::cmd_embed_check(channel("squeezer.json"), {});
  CHECK(sq.exit_code == 0);
  CHECK(sq.report["embeddable_x"]["status"] == "yes");
  CHECK(sq.report["in_exp_sp"]["status"] == "yes");
  CHECK(sq.report.contains("split_exp_sp"));

  const auto minus = cli::cmd_embed_check(channel("minus_identity.json"), {});
  CHECK(minus.exit_code == 0);
  CHECK(minus.report["embeddable_x"]["status"] == "yes");
  CHECK(minus.report["in_exp_sp"]["status"] == "indeterminate");
}

TEST_CASE("batch") {
  const auto b = cli::cmd_batch(kData / "channels", {});
  CHECK(b.exit_code == 1);  // the invalid file
  const auto& files = b.report["files"];
  REQUIRE(files.size() == 11);
  for (std::size_t i = 1; i < files.size(); ++i) {
    CHECK(files[i - 1]["file"].get<std::string>() < files[i]["file"].get<std::string>());
  }
  CHECK(cli::cmd_batch(kData / "nowhere", {}).exit_code == 2);
}

TEST_CASE("tolerance resolution") {
  ::setenv(cli::kTolEnv, "1e-6", 1);
  CHECK(cli::resolve_tolerance(std::nullopt).abs_eps == 1e-6);
  CHECK(cli::resolve_tolerance(1e-4).rel_eps == 1e-4);
  ::setenv(cli::kTolEnv, "loose", 1);
  CHECK_THROWS_AS(cli::resolve_tolerance(std::nullopt), Error);
  ::unsetenv(cli::kTolEnv);
  CHECK(cli::resolve_tolerance(std::nullopt).abs_eps == Tolerance{}.abs_eps);
  CHECK_THROWS_AS(cli::resolve_tolerance(-1.0), Error);
}

TEST_CASE("executable: exit codes") {
  CHECK(run_tool("check \"" + channel("identity.json").string() + "\"").code == 0);
  CHECK(run_tool("check \"" + channel("invalid_negative_noise.json").string() + "\"").code == 1);
  CHECK(run_tool("check \"" + channel("missing.json").string() + "\"").code == 2);
  const fs::path garbage = scratch("garbage.json");
  write_text(garbage, "{not json");
  CHECK(run_tool("check \"" + garbage.string() + "\"").code == 2);
  CHECK(run_tool("frobnicate").code == 2);
  CHECK(run_tool("check").code == 2);
  CHECK(run_tool("embed-check \"" + channel("negative_diag.json").string() + "\"").code == 1);
  CHECK(run_tool("divide \"" + channel("identity.json").string() + "\"").code == 1);
  CHECK(run_tool("semigroup --t 0.5,1,2 \"" + generator("attenuation.json").string() + "\"").code == 0);
  CHECK(run_tool("--tol nan check \"" + channel("identity.json").string() + "\"").code == 1);
}

TEST_CASE("executable: deterministic reports and renderings") {
  const std::string args = "--json classify \"" + channel("attenuation_half.json").string() + "\"";
  const Run a = run_tool(args), b = run_tool(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const Json report = Json::parse(a.out);
  CHECK(report == cli::cmd_classify(channel("attenuation_half.json"), {}).report);

  const Run human = run_tool("classify \"" + channel("attenuation_half.json").string() + "\"");
  CHECK(human.out == cli::render_human(report));
  CHECK(human.out.find("contractive-with-invariant-state") != std::string::npos);

  const Run env = run_tool("--json check \"" + channel("identity.json").string() + "\"", "GAUSSCHAN_TOL=1e-5");
  CHECK(Json::parse(env.out)["tolerance"]["abs_eps"].get<double>() == 1e-5);
  const Run flag = run_tool("--json --tol 1e-3 check \"" + channel("identity.json").string() + "\"",
                            "GAUSSCHAN_TOL=1e-5");
  CHECK(Json::parse(flag.out)["tolerance"]["abs_eps"].get<double>() == 1e-3);
}
