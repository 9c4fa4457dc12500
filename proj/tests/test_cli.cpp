#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "fixtures.hpp"
#include "vpb/cli.hpp"
#include "vpb/collision_cache.hpp"

using namespace vpb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("vpbkit-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text)
{
  std::ofstream(p, std::ios::binary) << text;
}

int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr)
{
  args.insert(args.begin(), "vpbkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int rc = cli::main_entry(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

const char* kSynthetic =
    "schema = 1\n"
    "backend = synthetic   # cheap\n"
    "max_degree = 4\n"
    "s_count = 10\n"
    "eps_list = 0.1, 0.05, 0.025\n"
    "t_count = 12\n"
    "t_layer = 4\n"
    "t_max = 5\n";

}  // namespace

TEST_CASE("config parsing and hashing")
{
  const ExperimentConfig d = parse_config("schema = 1\n");
  CHECK(d.max_degree == 6);
  CHECK(d.resolved_quad_order() == 16);
  CHECK(d.s_min == 0.05);

  ExperimentConfig c = parse_config(kSynthetic);
  CHECK(c.backend == Backend::synthetic);
  CHECK(c.eps_list == std::vector<double>{0.1, 0.05, 0.025});
  const std::string h = c.hash();
  CHECK(h.size() == 16);
  c.out = "elsewhere";
  c.jobs = 4;
  CHECK(c.hash() == h);
  c.eps_list.back() = 0.02;
  CHECK(c.hash() != h);
  CHECK(parse_config(kSynthetic).hash() == h);
}

TEST_CASE("config errors name the line and the field")
{
  auto fails = [](const std::string& text, int line, const std::string& field) {
    try {
      parse_config(text);
      FAIL("accepted: " << text);
    } catch (const ConfigError& e) {
      CHECK(e.line == line);
      CHECK(e.field == field);
    }
  };
  fails("max_degree = 4\n", 0, "schema");
  fails("schema = 1\nfoo = 2\n", 2, "foo");
  fails("schema = 1\n\nmax_degree = four\n", 3, "max_degree");
  fails("schema = 1\ns_min = 0.1\ns_min = 0.2\n", 3, "s_min");
  fails("schema = 2\n", 1, "schema");
  fails("schema = 1\nmode_eps = 1.0\n", 2, "mode_eps");
  fails("schema = 1\n# comment\neps_list = 0.1, 1.5\n", 3, "eps_list");
  fails("schema = 1\nbackend = maxwell\n", 2, "backend");
  fails("schema = 1\ns_min = 0\n", 2, "s_min");
  fails("schema = 1\nmax_degree\n", 2, "max_degree");
  try {
    parse_config("schema = 1\neps_list = 0.5, 1.2\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("collision cache: hit, mismatch and corruption")
{
  const fs::path dir = scratch("cache");
  auto b = fixture::basis(3);
  const KernelSpec k = KernelSpec::hard_sphere();
  const CacheOutcome first = load_or_assemble(b, k, {}, dir.string());
  CHECK_FALSE(first.hit);
  CHECK(first.notice.empty());
  CHECK(fs::exists(first.path));
  const CacheOutcome second = load_or_assemble(b, k, {}, dir.string());
  CHECK(second.hit);
  CHECK((second.op->L() - first.op->L()).norm() == 0.0);

  // a header carrying another basis hash is rebuilt, with a notice
  std::string header;
  Mat L;
  REQUIRE(read_matrix_file(first.path, header, L));
  const auto pos = header.find(b->hash());
  REQUIRE(pos != std::string::npos);
  header.replace(pos, 16, "0000000000000000");
  write_matrix_file(first.path, header, L);
  const CacheOutcome stale = load_or_assemble(b, k, {}, dir.string());
  CHECK_FALSE(stale.hit);
  CHECK(stale.notice.find("mismatch") != std::string::npos);
  CHECK(load_or_assemble(b, k, {}, dir.string()).hit);

  spit(first.path, "garbage");
  const CacheOutcome bad = load_or_assemble(b, k, {}, dir.string());
  CHECK(bad.notice.find("unreadable") != std::string::npos);
  CHECK((bad.op->L() - first.op->L()).norm() == 0.0);

  // synthetic operators never touch the disk
  const CacheOutcome syn = load_or_assemble(b, KernelSpec::synthetic(), {}, (dir / "syn").string());
  CHECK(syn.path.empty());
  CHECK_FALSE(fs::exists(dir / "syn"));

  setenv(kCacheDirEnv, "/tmp/somewhere", 1);
  CHECK(cache_directory("x") == "/tmp/somewhere");
  unsetenv(kCacheDirEnv);
  CHECK(cache_directory("x") == "x");
  fs::remove_all(dir);
}

TEST_CASE("cli: exit codes and diagnostics")
{
  const fs::path dir = scratch("cli-errors");
  std::string out, err;
  CHECK(run({"frobnicate"}, &out, &err) == cli::kBadInput);
  CHECK(run({}, &out, &err) == cli::kBadInput);
  spit(dir / "bad.cfg", "schema = 1\neps_list = 0.1, 1.0\n");
  CHECK(run({"converge", "--config", (dir / "bad.cfg").string(), "--out", dir.string()}, &out, &err) ==
        cli::kBadInput);
  CHECK(err.find("(0,1)") != std::string::npos);
  CHECK(err.find("line 2") != std::string::npos);
  CHECK(run({"check", "--config", (dir / "missing.cfg").string()}, &out, &err) == cli::kBadInput);
  spit(dir / "syn.cfg", kSynthetic);
  CHECK(run({"transport", "--config", (dir / "syn.cfg").string(), "--out", dir.string()}, &out, &err) ==
        cli::kBadInput);
  CHECK(run({"check", "--config", (dir / "syn.cfg").string(), "--backend", "maxwell"}, &out, &err) ==
        cli::kBadInput);
  fs::remove_all(dir);
}

TEST_CASE("cli: every subcommand writes named, byte-identical artifacts")
{
  const fs::path dir = scratch("cli-runs");
  spit(dir / "syn.cfg", kSynthetic);
  const std::string hash = parse_config(kSynthetic).hash();
  for (const std::string sub : {"check", "spectrum", "dispersion", "semigroup", "converge"}) {
    CAPTURE(sub);
    std::string out, err;
    REQUIRE(run({sub, "--config", (dir / "syn.cfg").string(), "--out", (dir / "a").string()}, &out, &err) ==
            cli::kOk);
    const fs::path csv = dir / "a" / (sub + "-" + hash + ".csv");
    CHECK(out == csv.string() + "\n");
    REQUIRE(fs::exists(csv));
    CHECK(fs::exists(dir / "a" / (sub + "-" + hash + ".json")));
    REQUIRE(run({sub, "--config", (dir / "syn.cfg").string(), "--out", (dir / "b").string(), "--jobs", "3"}) ==
            cli::kOk);
    const std::string a = slurp(csv), b = slurp(dir / "b" / (sub + "-" + hash + ".csv"));
    CHECK(a == b);
    CHECK(a.find('\r') == std::string::npos);
    CHECK(a.substr(0, a.find('\n')).find(',') != std::string::npos);
  }
  const std::string check = slurp(dir / "a" / ("check-" + hash + ".csv"));
  CHECK(check.find(",0\n") == std::string::npos);
  const std::string disp = slurp(dir / "a" / ("dispersion-" + hash + ".csv"));
  CHECK(disp.rfind("branch,s,eps,re_lambda,im_lambda,asymptotic_remainder,det_residual,eig_residual\n", 0) == 0);
  const std::string semi = slurp(dir / "a" / ("semigroup-" + hash + ".csv"));
  CHECK(semi.rfind("t,norm_f,norm_P0f,norm_P1f,norm_S2\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("cli: transport on hard spheres reuses its cache")
{
  const fs::path dir = scratch("cli-transport");
  spit(dir / "hs.cfg", "schema = 1\nmax_degree = 4\n");
  std::string out, err;
  REQUIRE(run({"transport", "--config", (dir / "hs.cfg").string(), "--out", dir.string()}, &out, &err) == cli::kOk);
  const std::string first = slurp(out.substr(0, out.size() - 1));
  CHECK(first.find("kappa0,") != std::string::npos);
  const std::string json = slurp(dir / ("transport-" + parse_config("schema = 1\nmax_degree = 4\n").hash() + ".json"));
  for (const char* key : {"\"kappa0\"", "\"kappa1\"", "\"error_bar\"", "\"basis_hash\""})
    CHECK(json.find(key) != std::string::npos);
  CHECK(fs::exists(dir / "cache"));
  REQUIRE(run({"transport", "--config", (dir / "hs.cfg").string(), "--out", dir.string()}, &out, &err) == cli::kOk);
  CHECK(err.empty());
  CHECK(slurp(out.substr(0, out.size() - 1)) == first);
  fs::remove_all(dir);
}
