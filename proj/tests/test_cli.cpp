#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "boxguard/cli.hpp"
#include "boxguard/io.hpp"

using namespace boxguard;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path dir() {
  fs::path p = fs::path(BOXGUARD_TEST_TMP) / "cli";
  fs::create_directories(p);
  return p;
}

std::string put(const std::string &name, const std::string &content) {
  const auto p = dir() / name;
  io::write_file_atomic(p, content);
  return p.string();
}

std::string distribution_file() {
  return put("dist.json", R"({
    "components": [
      {"label": "a", "weight": 0.5, "mean": [0, 0], "stddev": [1, 1]},
      {"label": "b", "weight": 0.5, "mean": [6, 6], "stddev": [1, 1]}
    ],
    "noise": {"a": 0.05, "b": 0.05}
  })");
}

std::string simulated(const std::string &name, std::size_t n, int seed) {
  const auto path = (dir() / name).string();
  REQUIRE(run({"simulate", "--dist", distribution_file(), "--n", std::to_string(n),
               "--seed", std::to_string(seed), "--out", path})
              .code == kExitOk);
  return path;
}

const char *kTrace = R"({"format_version":1,"kind":"trace"}
{"pedestrian":true}
{"pedestrian":true}
{"pedestrian":true}
)";

} // namespace

TEST_CASE("build is byte-identical across runs") {
  const auto train = simulated("train.jsonl", 400, 1);
  const auto a = (dir() / "m1.json").string();
  const auto b = (dir() / "m2.json").string();
  const auto r1 = run({"build", "--in", train, "--out", a, "--seed", "3"});
  REQUIRE(r1.code == kExitOk);
  CHECK(r1.out.find("digest sha256:") != std::string::npos);
  REQUIRE(run({"build", "--in", train, "--out", b, "--seed", "3"}).code == kExitOk);
  CHECK(io::read_file(a) == io::read_file(b));
}

TEST_CASE("build takes its seed from GUARD_SEED when no flag is given") {
  const auto train = simulated("train_seed.jsonl", 300, 2);
  const auto a = (dir() / "env.json").string();
  ::setenv("GUARD_SEED", "17", 1);
  REQUIRE(run({"build", "--in", train, "--out", a}).code == kExitOk);
  ::unsetenv("GUARD_SEED");
  CHECK(io::load_monitor(a).config().seed == 17);
  ::setenv("GUARD_SEED", "seventeen", 1);
  CHECK(run({"build", "--in", train, "--out", a}).code == kExitInputError);
  ::unsetenv("GUARD_SEED");
  REQUIRE(run({"build", "--in", train, "--out", a}).code == kExitOk);
  CHECK(io::load_monitor(a).config().seed == 0);
}

TEST_CASE("query prints a verdict") {
  const auto train = simulated("train_q.jsonl", 400, 3);
  const auto m = (dir() / "mq.json").string();
  REQUIRE(run({"build", "--in", train, "--out", m, "--k", "1"}).code == kExitOk);
  const auto far = run({"query", "--monitor", m, "--features", "100,100", "--label", "a"});
  REQUIRE(far.code == kExitOk);
  const auto j = io::json::parse(far.out);
  CHECK(j.at("verdict") == "uncertain");
  CHECK(j.at("no_coverage") == true);
  CHECK(run({"query", "--monitor", m, "--features", "1,x", "--label", "a"}).code ==
        kExitInputError);
  CHECK(run({"query", "--monitor", m, "--features", "1", "--label", "a"}).code ==
        kExitInputError);
}

TEST_CASE("assess writes an assessment report") {
  const auto train = simulated("train_a.jsonl", 600, 4);
  const auto hold = simulated("hold_a.jsonl", 600, 5);
  const auto m = (dir() / "ma.json").string();
  REQUIRE(run({"build", "--in", train, "--out", m, "--k", "1", "--m-min", "100"}).code ==
          kExitOk);
  const auto report = (dir() / "assess.json").string();
  const auto r = run({"assess", "--monitor", m, "--holdout", hold, "--out", report,
                      "--delta-cov", "0.025", "--delta-box", "0.025"});
  REQUIRE(r.code == kExitOk);
  const auto j = io::json::parse(io::read_file(report));
  CHECK(j.at("kind") == "assessment");
  CHECK(j.at("holdout_records") == 600);
  CHECK(j.at("config").at("m_min") == 100);
  const double eps = j.at("component").at("epsilon").get<double>();
  CHECK(eps > 0.05);
  CHECK(eps < 0.5);

  const auto empty = put("empty.jsonl",
                         R"({"format_version":1,"kind":"sample_log","dimension":2})" "\n");
  const auto e = run({"assess", "--monitor", m, "--holdout", empty});
  CHECK(e.code == kExitInputError);
  CHECK(e.err.find("no records") != std::string::npos);
  CHECK(run({"assess", "--monitor", m, "--holdout", hold, "--mode", "optimistic"}).code ==
        kExitInputError);
}

TEST_CASE("check-spec exit codes follow the verdict") {
  const auto formula = put("g.spec", "G[0,2] pedestrian{eps=0.01, delta=0.001}\n");
  const auto trace = put("t.jsonl", kTrace);
  const auto ok = run({"check-spec", "--formula", formula, "--trace", trace});
  REQUIRE(ok.code == kExitOk);
  const auto j = io::json::parse(ok.out);
  CHECK(j.at("verdict") == "true");
  CHECK(j.at("guarantee").at("delta").get<double>() == doctest::Approx(0.003));

  const auto fails = put("f.jsonl", R"({"format_version":1,"kind":"trace"}
{"pedestrian":true}
{"pedestrian":false}
{"pedestrian":true}
)");
  CHECK(run({"check-spec", "--formula", formula, "--trace", fails}).code == kExitSpecFails);
  const auto shorter = put("s.jsonl", R"({"format_version":1,"kind":"trace"}
{"pedestrian":true}
)");
  CHECK(run({"check-spec", "--formula", formula, "--trace", shorter}).code ==
        kExitSpecUnknown);
  const auto bad = put("bad.spec", "G[2,0] p\n");
  const auto pe = run({"check-spec", "--formula", bad, "--trace", trace});
  CHECK(pe.code == kExitInputError);
  CHECK(pe.err.find("1:2") != std::string::npos);
}

TEST_CASE("check-spec lifts an assessment onto unannotated atoms") {
  const auto formula = put("plain.spec", "G[0,2] pedestrian\n");
  const auto trace = put("t2.jsonl", kTrace);
  const auto report = put("claim.json", R"({"format_version":1,"kind":"assessment",
    "component":{"epsilon":0.1,"delta":0.01}})");
  const auto r = run({"check-spec", "--formula", formula, "--trace", trace,
                      "--guarantee", report});
  REQUIRE(r.code == kExitOk);
  const auto g = io::json::parse(r.out).at("guarantee");
  CHECK(g.at("epsilon").get<double>() == 0.1);
  CHECK(g.at("delta").get<double>() == doctest::Approx(0.03));
  const auto none = run({"check-spec", "--formula", formula, "--trace", trace});
  CHECK(io::json::parse(none.out).at("guarantee").is_null());
}

TEST_CASE("check-spec on frames") {
  const auto formula = put("car.spec", "car_seen\n");
  const auto frames = put("frames.jsonl", R"({"format_version":1,"kind":"frames"}
{"frame":0,"detections":[{"id":1,"class":"car","pr":0.9,"bb":[0,0,4,4]}]}
)");
  const auto loose = put("loose.json",
                         R"({"atoms":{"car_seen":{"kind":"exists","class":"car","min_pr":0.5}}})");
  const auto strict = put("strict.json",
                          R"({"atoms":{"car_seen":{"kind":"exists","class":"car","min_pr":0.95}}})");
  CHECK(run({"check-spec", "--formula", formula, "--frames", frames, "--rules", loose})
            .code == kExitOk);
  CHECK(run({"check-spec", "--formula", formula, "--frames", frames, "--rules", strict})
            .code == kExitSpecFails);
  CHECK(run({"check-spec", "--formula", formula, "--frames", frames}).code ==
        kExitInputError);
}

TEST_CASE("validate is reproducible") {
  const auto protocol = put("protocol.json", R"({
    "distribution": {
      "components": [
        {"label": "a", "weight": 0.5, "mean": [0, 0], "stddev": [1, 1]},
        {"label": "b", "weight": 0.5, "mean": [6, 6], "stddev": [1, 1]}
      ],
      "noise": {"a": 0.05, "b": 0.05}
    },
    "n_train": 200, "n_holdout": 200, "n_mc": 10000,
    "monitor": {"k": 1}, "runs": 100, "seed": 9
  })");
  const auto a = (dir() / "v1.json").string();
  const auto b = (dir() / "v2.json").string();
  REQUIRE(run({"validate", "--protocol", protocol, "--out", a}).code == kExitOk);
  REQUIRE(run({"validate", "--protocol", protocol, "--out", b}).code == kExitOk);
  CHECK(io::read_file(a) == io::read_file(b));
  const auto j = io::json::parse(io::read_file(a));
  CHECK(j.at("kind") == "validation");
  CHECK(j.at("runs") == 100);
  CHECK(j.at("seed") == 9);
  CHECK(run({"validate", "--protocol", protocol, "--runs", "10"}).code == kExitInputError);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == kExitInputError);
  CHECK(run({"frobnicate"}).code == kExitInputError);
  CHECK(run({"build", "--in", "x"}).code == kExitInputError);
  CHECK(run({"build", "--in", (dir() / "nope.jsonl").string(), "--out",
             (dir() / "nope.json").string()})
            .code == kExitInputError);
}
